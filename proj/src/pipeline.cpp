// Stage orchestration: analyze -> evolve -> fit -> compare -> report, with
// CSV/JSON file boundaries between stages.

#include "numpar/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "numpar/corpus.hpp"
#include "numpar/metrics.hpp"
#include "numpar/svg_report.hpp"
#include "numpar/synthesis.hpp"

namespace numpar {

namespace {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    return in;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = open_output(path);
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

void write_json(const std::filesystem::path& path, const json& value) {
    write_text(path, value.dump(2) + "\n");
}

json read_json(const std::filesystem::path& path) {
    auto in = open_input(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

Scheme scheme_for(SchemeSelection selection) {
    switch (selection) {
        case SchemeSelection::Broad: return Scheme::Broad;
        case SchemeSelection::Narrow: return Scheme::Narrow;
        case SchemeSelection::Both: break;
    }
    throw InvalidArgument("this stage needs a single scheme (broad or narrow)");
}

std::string suffix_for(SchemeSelection selection, bool suffixed) {
    if (!suffixed) return "";
    return std::string("_") + std::string(to_string(scheme_for(selection)));
}

// --- analyze ---

struct AnalyzeResult {
    std::vector<MetricPoint> points;
    std::vector<ValidationIssue> issues;
    int languages_total = 0;
};

AnalyzeResult analyze_directory(const PipelineConfig& config) {
    if (!std::filesystem::is_directory(config.data_dir)) {
        throw IoError("no input files: " + config.data_dir.string() + " is not a directory");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(config.data_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".tsv") {
            files.push_back(entry.path());
        }
    }
    if (files.empty()) {
        throw IoError("no input files: no .tsv files under " + config.data_dir.string());
    }
    std::sort(files.begin(), files.end());

    AnalyzeResult result;
    std::set<std::string> seen;
    for (const auto& file : files) {
        auto in = open_input(file);
        ParseReport report = parse_dataset_lenient(in);
        for (auto& issue : report.issues) result.issues.push_back(std::move(issue));
        for (auto& system : report.systems) {
            ++result.languages_total;
            if (!seen.insert(system.name).second) {
                result.issues.push_back({system.name, "DuplicateLanguage",
                                         system.name + " appears in more than one file", 0, 0});
                continue;
            }
            const bool broad = config.scheme != SchemeSelection::Narrow;
            const bool narrow = config.scheme != SchemeSelection::Broad;
            if (broad) {
                result.points.push_back(language_metrics(system, config.operators_in_lexicon));
            }
            if (narrow) {
                result.points.push_back(
                    language_metrics(recode_narrow(system), config.operators_in_lexicon));
            }
        }
    }
    return result;
}

json issues_to_json(const std::vector<ValidationIssue>& issues) {
    json list = json::array();
    for (const auto& issue : issues) {
        json item;
        item["language"] = issue.language;
        item["kind"] = issue.kind;
        item["message"] = issue.message;
        if (issue.cardinality > 0) item["cardinality"] = issue.cardinality;
        if (issue.line > 0) item["line"] = issue.line;
        list.push_back(std::move(item));
    }
    return list;
}

// --- shared by fit/compare/report ---

std::vector<MetricPoint> load_scheme_points(const PipelineConfig& config, Scheme scheme) {
    auto points = read_points_csv(config.output_dir / "points.csv");
    std::erase_if(points, [scheme](const MetricPoint& p) { return p.scheme != scheme; });
    if (points.empty()) {
        throw SchemaMismatch("points.csv has no rows for scheme '" +
                             std::string(to_string(scheme)) + "'");
    }
    return points;
}

FitConfig fit_config_from(const PipelineConfig& config) {
    FitConfig fc;
    fc.restarts = config.restarts;
    fc.seed = config.seed;
    fc.predictive = config.predictive;
    fc.threads = config.threads;
    return fc;
}

void run_fit_single(const PipelineConfig& config, bool suffixed) {
    const Scheme scheme = scheme_for(config.scheme);
    const auto points = load_scheme_points(config, scheme);
    if (config.k_values.empty()) throw InvalidArgument("no --components given");
    const int K = *std::max_element(config.k_values.begin(), config.k_values.end());

    const MixtureFit fit = fit_em(to_regression_data(points), K, fit_config_from(config));

    json out;
    out["K"] = K;
    out["scheme"] = std::string(to_string(scheme));
    out["seed"] = config.seed;
    out["alpha"] = fit.params.alpha;
    out["beta"] = fit.params.beta;
    out["sigma"] = fit.params.sigma;
    out["log_posterior"] = fit.log_posterior;
    out["converged"] = fit.converged;
    out["degenerate_restarts"] = fit.degenerate_restarts;
    json intervals;
    intervals["alpha"] = fit.intervals.alpha;
    intervals["beta"] = fit.intervals.beta;
    intervals["sigma"] = fit.intervals.sigma;
    out["intervals"] = intervals;
    out["responsibilities"] = fit.responsibilities;
    json ids = json::array();
    for (const auto& p : points) ids.push_back(p.system_id);
    out["system_ids"] = ids;
    write_json(config.output_dir / ("fit" + suffix_for(config.scheme, suffixed) + ".json"), out);
}

void run_compare_single(const PipelineConfig& config, bool suffixed) {
    const Scheme scheme = scheme_for(config.scheme);
    const auto points = load_scheme_points(config, scheme);
    const ModelComparison comparison =
        compare_models(to_regression_data(points), config.k_values, fit_config_from(config));

    json out;
    out["scheme"] = std::string(to_string(scheme));
    out["seed"] = config.seed;
    json elpd;
    for (const auto& [k, v] : comparison.elpd) elpd[std::to_string(k)] = v;
    out["elpd"] = elpd;
    out["elpd_diff"] = comparison.elpd_diff;
    out["se_diff"] = comparison.se_diff;
    out["stacking_weights"] = comparison.stacking;
    json pointwise;
    for (const auto& [k, v] : comparison.pointwise) pointwise[std::to_string(k)] = v;
    out["pointwise"] = pointwise;
    write_json(config.output_dir / ("compare" + suffix_for(config.scheme, suffixed) + ".json"), out);
}

void run_report_single(const PipelineConfig& config, bool suffixed) {
    const Scheme scheme = scheme_for(config.scheme);
    FigureInputs inputs;
    inputs.attested = load_scheme_points(config, scheme);
    inputs.frontier = read_points_csv(config.output_dir / "frontier.csv", /*with_scheme=*/false);

    const auto fit_path =
        config.output_dir / ("fit" + suffix_for(config.scheme, suffixed) + ".json");
    if (std::filesystem::exists(fit_path)) {
        const json fit = read_json(fit_path);
        if (!fit.contains("responsibilities") || !fit.contains("scheme")) {
            throw SchemaMismatch(fit_path.string() + " lacks responsibilities/scheme");
        }
        if (fit["scheme"].get<std::string>() != std::string(to_string(scheme))) {
            throw SchemaMismatch("fit.json scheme '" + fit["scheme"].get<std::string>() +
                                 "' does not match requested scheme '" +
                                 std::string(to_string(scheme)) + "'");
        }
        const auto& resp = fit["responsibilities"];
        if (resp.size() != inputs.attested.size()) {
            throw SchemaMismatch("fit.json has " + std::to_string(resp.size()) +
                                 " responsibility rows for " +
                                 std::to_string(inputs.attested.size()) + " points");
        }
        const int K = fit["K"].get<int>();
        for (const auto& row : resp) {
            // membership = probability of the last (flattest-slope) component
            inputs.membership.push_back(K >= 2 ? row[static_cast<std::size_t>(K - 1)].get<double>()
                                               : 0.0);
        }
    } else {
        std::cerr << "warning: " << fit_path.string()
                  << " not found; rendering uncolored points\n";
    }

    write_text(config.output_dir / ("figure" + suffix_for(config.scheme, suffixed) + ".svg"),
               render_figure(inputs));
}

}  // namespace

SchemeSelection scheme_selection_from_string(std::string_view text) {
    if (text == "broad") return SchemeSelection::Broad;
    if (text == "narrow") return SchemeSelection::Narrow;
    if (text == "both") return SchemeSelection::Both;
    throw InvalidArgument("unknown scheme '" + std::string(text) + "' (broad|narrow|both)");
}

int exit_code_for(const Error& error) {
    const std::string& kind = error.kind();
    if (kind == "IoError") return 1;
    if (kind == "DegenerateFit" || kind == "FoldFailure" || kind == "NonFiniteInput" ||
        kind == "NonPositiveComplexity" || kind == "Inexpressible") {
        return 3;
    }
    return 2;  // parse/validation/schema problems
}

void write_points_csv(const std::filesystem::path& path, const std::vector<MetricPoint>& points,
                      bool with_scheme) {
    auto out = open_output(path);
    out << (with_scheme ? "system_id,scheme,lexicon_size,complexity\n"
                        : "system_id,lexicon_size,complexity\n");
    for (const MetricPoint& p : points) {
        if (p.system_id.find(',') != std::string::npos ||
            p.system_id.find('\n') != std::string::npos) {
            throw InvalidArgument("system_id not CSV-safe: '" + p.system_id + "'");
        }
        out << p.system_id << ',';
        if (with_scheme) out << to_string(p.scheme) << ',';
        out << p.lexicon_size << ',' << format_double(p.complexity) << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<MetricPoint> read_points_csv(const std::filesystem::path& path, bool with_scheme) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string expected =
        with_scheme ? "system_id,scheme,lexicon_size,complexity" : "system_id,lexicon_size,complexity";
    if (line != expected) throw ParseError(path.string() + ": bad header '" + line + "'");

    std::vector<MetricPoint> points;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != (with_scheme ? 4u : 3u)) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad row");
        }
        MetricPoint p;
        std::size_t at = 0;
        p.system_id = fields[at++];
        p.scheme = with_scheme ? scheme_from_string(fields[at++]) : Scheme::Synthetic;
        try {
            p.lexicon_size = std::stoi(fields[at]);
            p.complexity = std::stod(fields[at + 1]);
        } catch (const std::exception&) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad number");
        }
        points.push_back(std::move(p));
    }
    return points;
}

int run_analyze(const PipelineConfig& config) {
    std::filesystem::create_directories(config.output_dir);
    const AnalyzeResult result = analyze_directory(config);

    write_points_csv(config.output_dir / "points.csv", result.points);

    json report;
    report["data_dir"] = config.data_dir.string();
    report["languages_total"] = result.languages_total;
    report["rows_written"] = result.points.size();
    report["issues"] = issues_to_json(result.issues);
    write_json(config.output_dir / "validation_report.json", report);

    return result.issues.empty() ? 0 : 2;
}

void run_evolve(const PipelineConfig& config) {
    std::filesystem::create_directories(config.output_dir);
    EvolveConfig ec;
    ec.population_size = config.population_size;
    ec.generations = config.generations;
    ec.seed = config.seed;
    ec.max_atoms = config.max_atoms;
    ec.threads = config.threads;
    const EvolveRun run = evolve(ec);

    std::vector<MetricPoint> final_points;
    final_points.reserve(run.trajectories.size());
    for (const auto& trajectory : run.trajectories) final_points.push_back(trajectory.back());
    const ParetoFront front = pareto_front(final_points);
    write_points_csv(config.output_dir / "frontier.csv", front.points, /*with_scheme=*/false);

    json genomes;
    genomes["seed"] = config.seed;
    genomes["population_size"] = config.population_size;
    genomes["generations"] = config.generations;
    genomes["max_atoms"] = config.max_atoms;
    json systems = json::array();
    for (std::size_t i = 0; i < run.population.size(); ++i) {
        const SyntheticSystem& s = run.population[i];
        json item;
        item["id"] = final_points[i].system_id;
        item["digits"] = s.digits;
        item["bases"] = s.bases;
        item["suppletives"] = s.suppletives;
        item["lexicon_size"] = final_points[i].lexicon_size;
        item["complexity"] = final_points[i].complexity;
        systems.push_back(std::move(item));
    }
    genomes["systems"] = systems;
    write_json(config.output_dir / "genomes.json", genomes);
}

void run_fit(const PipelineConfig& config) {
    std::filesystem::create_directories(config.output_dir);
    run_fit_single(config, /*suffixed=*/false);
}

void run_compare(const PipelineConfig& config) {
    std::filesystem::create_directories(config.output_dir);
    run_compare_single(config, /*suffixed=*/false);
}

void run_report(const PipelineConfig& config) {
    std::filesystem::create_directories(config.output_dir);
    run_report_single(config, /*suffixed=*/false);
}

int run_all(const PipelineConfig& config) {
    const int analyze_code = run_analyze(config);
    run_evolve(config);

    std::vector<SchemeSelection> schemes;
    const bool suffixed = config.scheme == SchemeSelection::Both;
    if (suffixed) {
        schemes = {SchemeSelection::Broad, SchemeSelection::Narrow};
    } else {
        schemes = {config.scheme};
    }
    for (SchemeSelection scheme : schemes) {
        PipelineConfig stage = config;
        stage.scheme = scheme;
        run_fit_single(stage, suffixed);
        run_compare_single(stage, suffixed);
        run_report_single(stage, suffixed);
    }
    return analyze_code;
}

}  // namespace numpar
