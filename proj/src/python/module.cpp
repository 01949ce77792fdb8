// Python bindings for the numeral-system tradeoff pipeline.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "numpar/corpus.hpp"
#include "numpar/inference.hpp"
#include "numpar/metrics.hpp"
#include "numpar/pipeline.hpp"
#include "numpar/svg_report.hpp"
#include "numpar/synthesis.hpp"

namespace py = pybind11;
using namespace numpar;

namespace {

std::vector<LanguageSystem> parse_dataset_str(const std::string& text) {
    std::istringstream in(text);
    return parse_dataset(in);
}

std::string serialize_dataset_str(const std::vector<LanguageSystem>& systems) {
    std::ostringstream out;
    serialize_dataset(systems, out);
    return out.str();
}

double complexity_from_dict(const std::map<int, int>& lengths) {
    std::map<int, TermLength> table;
    for (const auto& [cardinality, length] : lengths) {
        table.emplace(cardinality, TermLength{cardinality, length});
    }
    return morphosyntactic_complexity(table);
}

}  // namespace

PYBIND11_MODULE(numpar, m) {
    m.doc() = "lexicon-size / morphosyntactic-complexity tradeoff analysis for numeral systems";

    py::register_exception<Error>(m, "NumparError");

    py::enum_<Scheme>(m, "Scheme")
        .value("BROAD", Scheme::Broad)
        .value("NARROW", Scheme::Narrow)
        .value("SYNTHETIC", Scheme::Synthetic);

    py::enum_<GlossCategory>(m, "GlossCategory")
        .value("NUMERAL", GlossCategory::Numeral)
        .value("OPERATOR", GlossCategory::Operator)
        .value("OTHER", GlossCategory::Other);

    py::class_<GlossToken>(m, "GlossToken")
        .def(py::init<std::string, int, GlossCategory>(), py::arg("meaning"),
             py::arg("variant") = 1, py::arg("category") = GlossCategory::Numeral)
        .def_readonly("meaning", &GlossToken::meaning)
        .def_readonly("variant", &GlossToken::variant)
        .def_readonly("category", &GlossToken::category)
        .def("__repr__", [](const GlossToken& t) {
            return "GlossToken(" + format_gloss_token(t) + ")";
        });

    py::class_<GlossedForm>(m, "GlossedForm")
        .def_readonly("cardinality", &GlossedForm::cardinality)
        .def_readonly("surface", &GlossedForm::surface)
        .def_readonly("underlying", &GlossedForm::underlying)
        .def_readonly("glosses", &GlossedForm::glosses)
        .def_readonly("is_default", &GlossedForm::is_default);

    py::class_<LanguageSystem>(m, "LanguageSystem")
        .def_readonly("name", &LanguageSystem::name)
        .def_readonly("glottocode", &LanguageSystem::glottocode)
        .def_readonly("forms", &LanguageSystem::forms)
        .def_readonly("scheme", &LanguageSystem::scheme);

    py::class_<MetricPoint>(m, "MetricPoint")
        .def(py::init<std::string, int, double, Scheme>(), py::arg("system_id"),
             py::arg("lexicon_size"), py::arg("complexity"), py::arg("scheme") = Scheme::Synthetic)
        .def_readonly("system_id", &MetricPoint::system_id)
        .def_readonly("lexicon_size", &MetricPoint::lexicon_size)
        .def_readonly("complexity", &MetricPoint::complexity)
        .def_readonly("scheme", &MetricPoint::scheme);

    // corpus
    m.def("parse_dataset", &parse_dataset_str, py::arg("text"),
          "Parse a TSV dataset into validated language systems.");
    m.def("serialize_dataset", &serialize_dataset_str, py::arg("systems"));
    m.def("recode_narrow", &recode_narrow, py::arg("system"));

    // metrics
    m.def("term_length", [](const GlossedForm& form) { return term_length(form).length; },
          py::arg("form"));
    m.def("lexicon_size", &lexicon_size, py::arg("system"),
          py::arg("operators_in_lexicon") = false);
    m.def("morphosyntactic_complexity", &complexity_from_dict, py::arg("lengths"),
          "Weighted mean length from a {cardinality: length} dict covering 1..99.");
    m.def("language_metrics", &language_metrics, py::arg("system"),
          py::arg("operators_in_lexicon") = false);

    // synthesis
    py::class_<SyntheticSystem>(m, "SyntheticSystem")
        .def(py::init([](std::set<int> digits, std::set<int> bases, std::set<int> suppletives) {
                 SyntheticSystem s;
                 s.digits = std::move(digits);
                 s.bases = std::move(bases);
                 s.suppletives = std::move(suppletives);
                 return s;
             }),
             py::arg("digits"), py::arg("bases"), py::arg("suppletives") = std::set<int>{})
        .def_readonly("digits", &SyntheticSystem::digits)
        .def_readonly("bases", &SyntheticSystem::bases)
        .def_readonly("suppletives", &SyntheticSystem::suppletives);

    m.def(
        "express",
        [](int n, const SyntheticSystem& system) {
            const ExprPtr expr = express(n, system);
            py::dict out;
            out["value"] = expr->value;
            out["length"] = expr->length;
            out["leaves"] = expr->leaves;
            out["tree"] = expr->to_string();
            return out;
        },
        py::arg("n"), py::arg("system"),
        "Minimal-length derivation of n under the system's grammar.");
    m.def("is_valid", &is_valid, py::arg("system"), py::arg("max_atoms") = kDefaultAtomCap);
    m.def("system_metrics", &system_metrics, py::arg("system"),
          py::arg("id") = std::string("synthetic"));
    m.def(
        "evolve",
        [](int population_size, int generations, std::uint64_t seed, int max_atoms) {
            EvolveConfig config;
            config.population_size = population_size;
            config.generations = generations;
            config.seed = seed;
            config.max_atoms = max_atoms;
            EvolveRun run = evolve(config);
            return py::make_tuple(run.population, run.trajectories);
        },
        py::arg("population_size") = 100, py::arg("generations") = 300, py::arg("seed") = 0,
        py::arg("max_atoms") = kDefaultAtomCap,
        "Returns (population, trajectories); trajectories[i][g] is a MetricPoint.");
    m.def("pareto_front",
          [](std::vector<MetricPoint> points) { return pareto_front(std::move(points)).points; },
          py::arg("points"));

    // inference
    py::class_<MixtureParams>(m, "MixtureParams")
        .def(py::init([](std::vector<double> alpha, std::vector<double> beta,
                         std::vector<double> sigma) {
                 MixtureParams p;
                 p.K = static_cast<int>(alpha.size());
                 p.alpha = std::move(alpha);
                 p.beta = std::move(beta);
                 p.sigma = std::move(sigma);
                 return p;
             }),
             py::arg("alpha"), py::arg("beta"), py::arg("sigma"))
        .def_readonly("K", &MixtureParams::K)
        .def_readonly("alpha", &MixtureParams::alpha)
        .def_readonly("beta", &MixtureParams::beta)
        .def_readonly("sigma", &MixtureParams::sigma);

    py::class_<ParamIntervals>(m, "ParamIntervals")
        .def_readonly("alpha", &ParamIntervals::alpha)
        .def_readonly("beta", &ParamIntervals::beta)
        .def_readonly("sigma", &ParamIntervals::sigma);

    py::class_<MixtureFit>(m, "MixtureFit")
        .def_readonly("params", &MixtureFit::params)
        .def_readonly("responsibilities", &MixtureFit::responsibilities)
        .def_readonly("log_posterior", &MixtureFit::log_posterior)
        .def_readonly("intervals", &MixtureFit::intervals)
        .def_readonly("converged", &MixtureFit::converged)
        .def_readonly("objective_trace", &MixtureFit::objective_trace);

    auto make_fit_config = [](int restarts, std::uint64_t seed, double tol, int max_iter,
                              bool use_priors) {
        FitConfig config;
        config.restarts = restarts;
        config.seed = seed;
        config.tol = tol;
        config.max_iter = max_iter;
        config.use_priors = use_priors;
        return config;
    };

    m.def(
        "fit_em",
        [make_fit_config](const std::vector<double>& x, const std::vector<double>& y, int K,
                          int restarts, std::uint64_t seed, double tol, int max_iter,
                          bool use_priors) {
            RegressionData data{x, y};
            return fit_em(data, K, make_fit_config(restarts, seed, tol, max_iter, use_priors));
        },
        py::arg("x"), py::arg("y"), py::arg("K"), py::arg("restarts") = 50, py::arg("seed") = 0,
        py::arg("tol") = 1e-8, py::arg("max_iter") = 2000, py::arg("use_priors") = true);
    m.def(
        "loo_elpd",
        [make_fit_config](const std::vector<double>& x, const std::vector<double>& y, int K,
                          int restarts, std::uint64_t seed) {
            RegressionData data{x, y};
            LooResult result = loo_elpd(data, K, make_fit_config(restarts, seed, 1e-8, 2000, true));
            return py::make_tuple(result.elpd, result.pointwise);
        },
        py::arg("x"), py::arg("y"), py::arg("K"), py::arg("restarts") = 50, py::arg("seed") = 0);
    m.def("stacking_weights", &stacking_weights, py::arg("pointwise_by_model"),
          "Rows are points, columns models.");
    m.def(
        "compare_models",
        [make_fit_config](const std::vector<double>& x, const std::vector<double>& y,
                          std::vector<int> k_values, int restarts, std::uint64_t seed) {
            RegressionData data{x, y};
            const ModelComparison c = compare_models(
                data, std::move(k_values), make_fit_config(restarts, seed, 1e-8, 2000, true));
            py::dict out;
            out["elpd"] = c.elpd;
            out["elpd_diff"] = c.elpd_diff;
            out["se_diff"] = c.se_diff;
            out["stacking_weights"] = c.stacking;
            out["pointwise"] = c.pointwise;
            return out;
        },
        py::arg("x"), py::arg("y"), py::arg("k_values"), py::arg("restarts") = 50,
        py::arg("seed") = 0,
        "Exact-LOO elpd per K, pairwise diff/se and stacking weights.");
    m.def(
        "mixture_log_posterior",
        [](const MixtureParams& params, const std::vector<double>& x,
           const std::vector<double>& y, bool use_priors) {
            return mixture_log_posterior(params, RegressionData{x, y}, use_priors);
        },
        py::arg("params"), py::arg("x"), py::arg("y"), py::arg("use_priors") = true);

    // report
    m.def(
        "render_figure",
        [](std::vector<MetricPoint> attested, std::vector<MetricPoint> frontier,
           std::vector<double> membership) {
            FigureInputs inputs;
            inputs.attested = std::move(attested);
            inputs.frontier = std::move(frontier);
            inputs.membership = std::move(membership);
            return render_figure(inputs);
        },
        py::arg("attested"), py::arg("frontier"), py::arg("membership") = std::vector<double>{});
    m.attr("MEMBERSHIP_LOW_COLOR") = std::string(kMembershipLowColor);
    m.attr("MEMBERSHIP_HIGH_COLOR") = std::string(kMembershipHighColor);
}
