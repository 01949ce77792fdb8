// numpar: lexicon-size / morphosyntactic-complexity pipeline for numeral systems.
//
// Subcommands: analyze, evolve, fit, compare, report, all.
// Exit codes: 0 ok, 1 I/O, 2 validation, 3 numerical failure.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "numpar/pipeline.hpp"

namespace {

void print_json_error(const std::string& kind, const std::string& message) {
    nlohmann::json error;
    error["error"]["kind"] = kind;
    error["error"]["message"] = message;
    std::cerr << error.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numeral-system lexicon/complexity tradeoff pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    numpar::PipelineConfig config;
    std::string scheme = "broad";
    std::string data_dir;
    std::string output_dir = ".";
    std::string predictive = "plugin";

    app.add_option("--data", data_dir, "directory of input .tsv files");
    app.add_option("--out", output_dir, "output directory")->capture_default_str();
    app.add_option("--scheme", scheme, "broad|narrow|both")->capture_default_str();
    app.add_option("--seed", config.seed, "master random seed")->capture_default_str();
    app.add_option("--systems", config.population_size, "evolved population size")
        ->capture_default_str();
    app.add_option("--generations", config.generations, "evolution generations")
        ->capture_default_str();
    app.add_option("--max-atoms", config.max_atoms, "per-category atom cap")
        ->capture_default_str()
        ->check(CLI::Range(1, 98));
    app.add_option("--components", config.k_values, "mixture sizes K to fit/compare")
        ->delimiter(',');
    app.add_option("--restarts", config.restarts, "EM restarts")->capture_default_str();
    app.add_flag("--operators-in-lexicon", config.operators_in_lexicon,
                 "count Operator tokens in lexicon size");
    app.add_option("--predictive", predictive, "plugin|laplace LOO predictive")
        ->capture_default_str();

    auto* cmd_analyze = app.add_subcommand("analyze", "parse TSV data and write points.csv");
    auto* cmd_evolve = app.add_subcommand("evolve", "evolve synthetic systems, write frontier.csv");
    auto* cmd_fit = app.add_subcommand("fit", "fit the mixture regression, write fit.json");
    auto* cmd_compare = app.add_subcommand("compare", "LOO model comparison, write compare.json");
    auto* cmd_report = app.add_subcommand("report", "render figure.svg");
    auto* cmd_all = app.add_subcommand("all", "run the full pipeline");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_json_error("UsageError", e.what());
        return 2;
    }

    try {
        config.data_dir = data_dir;
        config.output_dir = output_dir;
        config.scheme = numpar::scheme_selection_from_string(scheme);
        if (predictive == "plugin") {
            config.predictive = numpar::PredictiveMode::Plugin;
        } else if (predictive == "laplace") {
            config.predictive = numpar::PredictiveMode::Laplace;
        } else {
            throw numpar::InvalidArgument("--predictive must be plugin or laplace");
        }

        if (cmd_analyze->parsed() || cmd_all->parsed()) {
            if (data_dir.empty()) throw numpar::IoError("no input files: --data not given");
        }

        if (cmd_analyze->parsed()) return numpar::run_analyze(config);
        if (cmd_evolve->parsed()) {
            numpar::run_evolve(config);
            return 0;
        }
        if (cmd_fit->parsed()) {
            numpar::run_fit(config);
            return 0;
        }
        if (cmd_compare->parsed()) {
            numpar::run_compare(config);
            return 0;
        }
        if (cmd_report->parsed()) {
            numpar::run_report(config);
            return 0;
        }
        if (cmd_all->parsed()) return numpar::run_all(config);
        print_json_error("UsageError", "no subcommand given");
        return 2;
    } catch (const numpar::Error& e) {
        print_json_error(e.kind(), e.what());
        return numpar::exit_code_for(e);
    } catch (const std::exception& e) {
        print_json_error("InternalError", e.what());
        return 1;
    }
}
