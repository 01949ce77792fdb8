// Pipeline and report tests: analyze outputs and exit codes, CSV round-trip,
// SVG structure and determinism, schema guards.

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "numpar/pipeline.hpp"
#include "numpar/svg_report.hpp"
#include "test_support.hpp"

using namespace numpar;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("numpar_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int count_occurrences(const std::string& text, const std::string& needle) {
    int count = 0;
    for (auto pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size())) {
        ++count;
    }
    return count;
}

}  // namespace

TEST_CASE("run_analyze") {
    SUBCASE("both schemes on the bundled fixtures give six rows") {
        TempDir out("analyze_both");
        PipelineConfig config;
        config.data_dir = test::data_dir() / "fixtures";
        config.output_dir = out.path;
        config.scheme = SchemeSelection::Both;
        CHECK(run_analyze(config) == 0);

        const auto points = read_points_csv(out.path / "points.csv");
        CHECK(points.size() == 6);
        int broad = 0, narrow = 0;
        for (const auto& p : points) {
            if (p.scheme == Scheme::Broad) ++broad;
            if (p.scheme == Scheme::Narrow) ++narrow;
        }
        CHECK(broad == 3);
        CHECK(narrow == 3);
    }

    SUBCASE("empty directory is an I/O error") {
        TempDir out("analyze_empty");
        TempDir data("analyze_empty_data");
        PipelineConfig config;
        config.data_dir = data.path;
        config.output_dir = out.path;
        try {
            run_analyze(config);
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(std::string(e.what()).find("no input files") != std::string::npos);
            CHECK(exit_code_for(e) == 1);
        }
    }

    SUBCASE("a language duplicated across files is reported once") {
        TempDir data("analyze_dup_data");
        TempDir out("analyze_dup_out");
        fs::copy_file(test::data_dir() / "fixtures" / "dekal.tsv", data.path / "a.tsv");
        fs::copy_file(test::data_dir() / "fixtures" / "dekal.tsv", data.path / "b.tsv");

        PipelineConfig config;
        config.data_dir = data.path;
        config.output_dir = out.path;
        CHECK(run_analyze(config) == 2);
        const auto points = read_points_csv(out.path / "points.csv");
        CHECK(points.size() == 1);
        const auto report = nlohmann::json::parse(slurp(out.path / "validation_report.json"));
        REQUIRE(report["issues"].size() == 1);
        CHECK(report["issues"][0]["kind"] == "DuplicateLanguage");
    }

    SUBCASE("a gap at cardinality 57 gives exit 2 and a named report entry") {
        TempDir data("analyze_gap_data");
        TempDir out("analyze_gap_out");
        // copy dekal but drop cardinality 57; keep anglish intact
        std::ifstream in(test::data_dir() / "fixtures" / "dekal.tsv");
        REQUIRE(in);
        std::ofstream broken(data.path / "dekal.tsv");
        std::string line;
        while (std::getline(in, line)) {
            if (line.find("\t57\t") == std::string::npos) broken << line << "\n";
        }
        broken.close();
        fs::copy_file(test::data_dir() / "fixtures" / "anglish.tsv", data.path / "anglish.tsv");

        PipelineConfig config;
        config.data_dir = data.path;
        config.output_dir = out.path;
        CHECK(run_analyze(config) == 2);

        // partial CSV still contains the valid language
        const auto points = read_points_csv(out.path / "points.csv");
        REQUIRE(points.size() == 1);
        CHECK(points[0].system_id == "anglish");

        const auto report = nlohmann::json::parse(slurp(out.path / "validation_report.json"));
        REQUIRE(report["issues"].size() == 1);
        CHECK(report["issues"][0]["language"] == "dekal");
        CHECK(report["issues"][0]["kind"] == "MissingCardinality");
        CHECK(report["issues"][0]["cardinality"] == 57);
    }
}

TEST_CASE("points csv round-trips") {
    TempDir out("csv");
    std::vector<MetricPoint> points{
        {"alpha", 10, 1.2345678901234567, Scheme::Broad},
        {"beta", 20, 1.0000000001, Scheme::Narrow},
    };
    write_points_csv(out.path / "points.csv", points);
    const auto reread = read_points_csv(out.path / "points.csv");
    REQUIRE(reread.size() == 2);
    CHECK(reread[0] == points[0]);
    CHECK(reread[1] == points[1]);
}

TEST_CASE("render_figure") {
    FigureInputs inputs;
    inputs.attested = {{"a", 10, 1.4, Scheme::Broad},
                       {"b", 16, 1.25, Scheme::Broad},
                       {"c", 24, 1.18, Scheme::Broad}};
    inputs.frontier = {{"f1", 4, 1.9, Scheme::Synthetic},
                       {"f2", 10, 1.3, Scheme::Synthetic},
                       {"f3", 20, 1.1, Scheme::Synthetic}};
    inputs.membership = {0.0, 0.5, 1.0};

    SUBCASE("one polyline, one circle per point") {
        const std::string svg = render_figure(inputs);
        CHECK(count_occurrences(svg, "<polyline") == 1);
        CHECK(count_occurrences(svg, "<circle") == 3);
        CHECK(svg.find("lexicon size") != std::string::npos);
        CHECK(svg.find("morphosyntactic complexity") != std::string::npos);
    }

    SUBCASE("gradient endpoints are the documented colors") {
        CHECK(blend_membership_color(0.0) == std::string(kMembershipLowColor));
        CHECK(blend_membership_color(1.0) == std::string(kMembershipHighColor));
        const std::string svg = render_figure(inputs);
        CHECK(svg.find("fill='" + std::string(kMembershipLowColor) + "'") != std::string::npos);
        CHECK(svg.find("fill='" + std::string(kMembershipHighColor) + "'") != std::string::npos);
    }

    SUBCASE("byte-identical on identical inputs") {
        CHECK(render_figure(inputs) == render_figure(inputs));
    }

    SUBCASE("membership size mismatch is a schema error") {
        FigureInputs bad = inputs;
        bad.membership = {0.5};
        CHECK_THROWS_AS(render_figure(bad), SchemaMismatch);
    }

    SUBCASE("no membership falls back to the neutral fill") {
        FigureInputs plain = inputs;
        plain.membership.clear();
        const std::string svg = render_figure(plain);
        CHECK(count_occurrences(svg, "fill='" + std::string(kNoMembershipColor) + "'") == 3);
    }
}

TEST_CASE("fit/compare/report require a single scheme") {
    TempDir out("single_scheme");
    PipelineConfig config;
    config.output_dir = out.path;
    config.scheme = SchemeSelection::Both;
    CHECK_THROWS_AS(run_fit(config), InvalidArgument);
    CHECK_THROWS_AS(run_compare(config), InvalidArgument);
    CHECK_THROWS_AS(run_report(config), InvalidArgument);
}

TEST_CASE("report stage wiring") {
    TempDir out("report");
    // stage a small points.csv + frontier.csv + fit.json by hand
    write_points_csv(out.path / "points.csv",
                     {{"a", 10, 1.4, Scheme::Broad}, {"b", 20, 1.2, Scheme::Broad}});
    write_points_csv(out.path / "frontier.csv",
                     {{"f", 5, 1.8, Scheme::Synthetic}, {"g", 15, 1.1, Scheme::Synthetic}},
                     /*with_scheme=*/false);

    PipelineConfig config;
    config.output_dir = out.path;
    config.scheme = SchemeSelection::Broad;

    SUBCASE("missing fit.json falls back to uncolored output") {
        run_report(config);
        const std::string svg = slurp(out.path / "figure.svg");
        CHECK(count_occurrences(svg, "fill='" + std::string(kNoMembershipColor) + "'") == 2);
    }

    SUBCASE("scheme mismatch in fit.json is rejected") {
        nlohmann::json fit;
        fit["K"] = 2;
        fit["scheme"] = "narrow";
        fit["responsibilities"] = {{0.9, 0.1}, {0.2, 0.8}};
        std::ofstream(out.path / "fit.json") << fit.dump();
        CHECK_THROWS_AS(run_report(config), SchemaMismatch);
    }

    SUBCASE("row-count mismatch is rejected") {
        nlohmann::json fit;
        fit["K"] = 2;
        fit["scheme"] = "broad";
        fit["responsibilities"] = {{0.9, 0.1}};
        std::ofstream(out.path / "fit.json") << fit.dump();
        CHECK_THROWS_AS(run_report(config), SchemaMismatch);
    }

    SUBCASE("memberships color by the flattest-slope component") {
        nlohmann::json fit;
        fit["K"] = 2;
        fit["scheme"] = "broad";
        fit["responsibilities"] = {{1.0, 0.0}, {0.0, 1.0}};
        std::ofstream(out.path / "fit.json") << fit.dump();
        run_report(config);
        const std::string svg = slurp(out.path / "figure.svg");
        CHECK(svg.find("fill='" + std::string(kMembershipLowColor) + "'") != std::string::npos);
        CHECK(svg.find("fill='" + std::string(kMembershipHighColor) + "'") != std::string::npos);
    }
}

TEST_CASE("mini pipeline end-to-end determinism") {
    TempDir out_a("e2e_a");
    TempDir out_b("e2e_b");
    for (const TempDir* out : {&out_a, &out_b}) {
        PipelineConfig config;
        config.data_dir = test::data_dir() / "demo";
        config.output_dir = out->path;
        config.scheme = SchemeSelection::Broad;
        config.seed = 4242;
        config.population_size = 12;
        config.generations = 30;
        config.restarts = 6;
        config.k_values = {1, 2};
        CHECK(run_all(config) == 0);
    }
    for (const char* name :
         {"points.csv", "frontier.csv", "fit.json", "compare.json", "figure.svg",
          "genomes.json", "validation_report.json"}) {
        CHECK(slurp(out_a.path / name) == slurp(out_b.path / name));
    }
}
