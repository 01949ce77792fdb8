#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "numpar/errors.hpp"
#include "numpar/inference.hpp"
#include "numpar/types.hpp"

namespace numpar {

enum class SchemeSelection { Broad, Narrow, Both };

SchemeSelection scheme_selection_from_string(std::string_view text);

struct PipelineConfig {
    std::filesystem::path data_dir;
    std::filesystem::path output_dir = ".";
    SchemeSelection scheme = SchemeSelection::Broad;
    std::uint64_t seed = 42;
    int population_size = 100;
    int generations = 300;
    int max_atoms = 98;
    std::vector<int> k_values = {1, 2};
    int restarts = 50;
    bool operators_in_lexicon = false;
    PredictiveMode predictive = PredictiveMode::Plugin;
    int threads = 0;  // 0 = auto (capped by NUMPAR_THREADS)
};

// Exit codes: 0 ok, 1 I/O, 2 validation, 3 numerical failure.
int exit_code_for(const Error& error);

// Each stage writes its files under config.output_dir and throws on failure,
// except analyze, which returns 2 (validation issues found, partial
// points.csv written) or 0. Paths of the produced artifacts:
//   analyze -> points.csv, validation_report.json
//   evolve  -> frontier.csv, genomes.json
//   fit     -> fit.json          (largest requested K)
//   compare -> compare.json      (all requested K)
//   report  -> figure.svg
// fit/compare/report require a single scheme; `all` with Both runs them per
// scheme and suffixes the file names (fit_broad.json, ...).
int run_analyze(const PipelineConfig& config);
void run_evolve(const PipelineConfig& config);
void run_fit(const PipelineConfig& config);
void run_compare(const PipelineConfig& config);
void run_report(const PipelineConfig& config);
int run_all(const PipelineConfig& config);

// CSV helpers shared by stages and tests. frontier.csv has no scheme column.
void write_points_csv(const std::filesystem::path& path, const std::vector<MetricPoint>& points,
                      bool with_scheme = true);
std::vector<MetricPoint> read_points_csv(const std::filesystem::path& path, bool with_scheme = true);

}  // namespace numpar
