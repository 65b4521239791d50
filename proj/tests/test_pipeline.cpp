#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "panelcause/pipeline.hpp"
#include "test_support.hpp"

using namespace panelcause;
namespace fs = std::filesystem;

namespace {

RunConfig did_only_config(const std::string& out_suffix) {
    RunConfig config;
    config.data_dir = test_support::data_dir();
    config.out_dir = test_support::scratch_dir("pipeline") / out_suffix;
    config.analyses = parse_analyses("did");
    return config;
}

}  // namespace

TEST_CASE("config parsing: defaults, overrides, rejects") {
    RunConfig defaults = parse_config_text("");
    CHECK(defaults.min_pa == 250);
    CHECK(defaults.cohort_bounds.low == 0.15);
    CHECK(defaults.cohort_bounds.in_unit_hi == 0.30);
    CHECK(defaults.cohort_bounds.high == 0.75);
    CHECK(defaults.intervention_year == 2023);
    CHECK(defaults.solver.inner.max_iterations == 10000);
    CHECK(defaults.solver.inner.objective_tolerance == 1e-10);

    RunConfig parsed = parse_config_text(
        "min_pa = 300\n"
        "# comment line\n"
        "scm_outcomes = obp\n"
        "analyses = did,scm\n"
        "solver.outer_evaluations = 99\n");
    CHECK(parsed.min_pa == 300);
    CHECK(parsed.scm_outcomes == std::vector<Outcome>{Outcome::OBP});
    CHECK(parsed.analyses.did);
    CHECK(parsed.analyses.scm);
    CHECK_FALSE(parsed.analyses.placebos);
    CHECK(parsed.solver.outer_evaluations == 99);

    CHECK_THROWS_AS(parse_config_text("mystery_key = 1\n"), Error);
    CHECK_THROWS_AS(parse_config_text("cohort.low = 0.8\n"), Error);  // not increasing
    CHECK_THROWS_AS(parse_config_text("intervention_year = 2020\n"), Error);
    CHECK_THROWS_AS(parse_config_text("scm_outcomes = obp,xyz\n"), Error);

    // Canonical text ignores paths, so hashes are location-independent.
    RunConfig a = parse_config_text("data_dir = /tmp/a\n");
    RunConfig b = parse_config_text("data_dir = /tmp/b\n");
    CHECK(canonical_config_text(a) == canonical_config_text(b));
}

TEST_CASE("did-only run writes the DID report and nothing from the SCM family") {
    RunConfig config = did_only_config("did_only");
    RunArtifacts artifacts = run(config);
    CHECK(fs::exists(config.out_dir / "did_report.csv"));
    CHECK(fs::exists(config.out_dir / "did_report.json"));
    CHECK(fs::exists(config.out_dir / "summary.json"));
    CHECK(fs::exists(config.out_dir / "figures" / "fig1.csv"));
    CHECK_FALSE(fs::exists(config.out_dir / "cohorts.csv"));
    CHECK_FALSE(fs::exists(config.out_dir / "effects_matrix.csv"));
    CHECK_FALSE(fs::exists(config.out_dir / "figures" / "fig2.csv"));
    CHECK(artifacts.target_fits.empty());
    CHECK(artifacts.did.size() == 2);

    // The caveats ride along in the JSON report.
    std::ifstream in(config.out_dir / "did_report.json");
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(body.find("parallel trends") != std::string::npos);
}

TEST_CASE("fig1 trend rows: two populations, two outcomes, eight seasons") {
    RunConfig config = did_only_config("fig1");
    RunArtifacts artifacts = run(config);
    auto rows = emit_figure_data(artifacts, "fig1");
    size_t trend_rows = 0;
    size_t did_rows = 0;
    size_t counterfactual_rows = 0;
    for (const auto& r : rows) {
        if (r.series.rfind("trend_", 0) == 0) {
            ++trend_rows;
            CHECK(r.season <= 2023);
        }
        if (r.series.rfind("did_", 0) == 0) ++did_rows;
        if (r.series.rfind("counterfactual_", 0) == 0) {
            ++counterfactual_rows;
            CHECK(r.season == 2023);
        }
    }
    CHECK(trend_rows == 2 * 2 * 8);
    CHECK(did_rows == 2 * 7);  // posts 2016..2023 per outcome
    CHECK(counterfactual_rows == 2);
}

TEST_CASE("unknown figure id and not-run analyses raise analysis_not_run") {
    RunConfig config = did_only_config("figerr");
    RunArtifacts artifacts = run(config);
    try {
        emit_figure_data(artifacts, "fig9");
        FAIL("expected analysis_not_run");
    } catch (const Error& e) {
        CHECK(e.code() == errc::analysis_not_run);
    }
    try {
        emit_figure_data(artifacts, "fig2");  // scm did not run
        FAIL("expected analysis_not_run");
    } catch (const Error& e) {
        CHECK(e.code() == errc::analysis_not_run);
    }
}

TEST_CASE("fig2 rows come in observed/synthetic pairs per season") {
    RunArtifacts artifacts;
    artifacts.analyses = parse_analyses("scm");
    ScmFit fit;
    fit.target_id = "corey_seager";
    fit.outcome = Outcome::OBP;
    fit.observed = {{2021, 0.33}, {2022, 0.334}, {2023, 0.39}};
    fit.synthetic = {{2021, 0.331}, {2022, 0.333}, {2023, 0.305}};
    artifacts.target_fits[Outcome::OBP] = {fit};
    auto rows = emit_figure_data(artifacts, "fig2");
    size_t observed = 0;
    size_t synthetic = 0;
    for (const auto& r : rows) {
        CHECK(r.unit == "corey_seager");
        if (r.series == "observed_obp") ++observed;
        if (r.series == "synthetic_obp") ++synthetic;
    }
    CHECK(observed == 3);
    CHECK(synthetic == 3);
}

TEST_CASE("missing shift_rates.csv fails loudly, naming the file") {
    auto data = test_support::scratch_dir("missing_rates");
    fs::copy_file(test_support::data_dir() / "player_seasons.csv", data / "player_seasons.csv",
                  fs::copy_options::overwrite_existing);
    fs::copy_file(test_support::data_dir() / "league_splits.csv", data / "league_splits.csv",
                  fs::copy_options::overwrite_existing);
    RunConfig config;
    config.data_dir = data;
    config.out_dir = test_support::scratch_dir("pipeline") / "missing_rates_out";
    config.analyses = parse_analyses("scm");
    config.scm_outcomes = {Outcome::OBP};
    try {
        run(config);
        FAIL("expected io_error");
    } catch (const Error& e) {
        CHECK(e.code() == errc::io_error);
        CHECK(std::string(e.what()).find("shift_rates.csv") != std::string::npos);
    }
}

TEST_CASE("did-only reruns are byte-identical") {
    RunConfig first = did_only_config("det_a");
    RunConfig second = did_only_config("det_b");
    run(first);
    run(second);
    for (const char* name : {"did_report.csv", "did_report.json", "summary.json"}) {
        std::string a = read_file_bytes(first.out_dir / name);
        std::string b = read_file_bytes(second.out_dir / name);
        CHECK(a == b);
    }
}

TEST_CASE("single-outcome SCM run: matrix shape, placebo ranks, in-unit p-values") {
    RunConfig config;
    config.data_dir = test_support::data_dir();
    config.out_dir = test_support::scratch_dir("pipeline") / "scm_obp";
    config.analyses = parse_analyses("scm,placebos,in_unit,dose_response");
    config.scm_outcomes = {Outcome::OBP};
    RunArtifacts artifacts = run(config);

    REQUIRE(artifacts.target_fits.at(Outcome::OBP).size() == 30);
    REQUIRE(artifacts.in_space.at(Outcome::OBP).distribution.entries.size() == 58);
    REQUIRE(artifacts.in_unit_runs.at(Outcome::OBP).distribution.entries.size() == 25);
    CHECK(artifacts.dose.at(Outcome::OBP).n == 30);

    // Matrix: 30 target rows, columns only for the configured outcome.
    csv::Table matrix = csv::read_table(config.out_dir / "effects_matrix.csv");
    CHECK(matrix.header == std::vector<std::string>{"player_id", "shift_rate_2022",
                                                    "obp_estimate", "obp_p"});
    CHECK(matrix.rows.size() == 30);
    // Sorted by shift rate descending; Seager first.
    CHECK(matrix.rows.front()[0] == "corey_seager");

    // Placebo dump: 30 targets + 58 placebo units, every p-value k/59.
    csv::Table placebo = csv::read_table(config.out_dir / "placebo_obp.csv");
    CHECK(placebo.rows.size() == 88);
    for (const auto& row : placebo.rows) {
        const double p = csv::parse_double(row[6], "p", 1, 7);
        const double k = p * 59.0;
        CHECK(std::abs(k - std::round(k)) <= 1e-9);
    }

    // In-unit rows rank against the in-space distribution.
    csv::Table in_unit = csv::read_table(config.out_dir / "in_unit_obp.csv");
    CHECK(in_unit.rows.size() == 25);
    for (const auto& row : in_unit.rows) {
        CHECK(row[5] == "1");  // is_target
        CHECK(!row[6].empty());
        const double p = csv::parse_double(row[6], "p", 1, 7);
        CHECK(p >= 1.0 / 59 - 1e-12);
        CHECK(p <= 1.0);
    }

    CHECK(fs::exists(config.out_dir / "figures" / "fig3.csv"));
    CHECK(fs::exists(config.out_dir / "figures" / "fig4.csv"));
    CHECK(fs::exists(config.out_dir / "figures" / "figA3.csv"));
    CHECK_FALSE(fs::exists(config.out_dir / "figures" / "figA4.csv"));  // in_time off
    CHECK_FALSE(fs::exists(config.out_dir / "did_report.csv"));
}

TEST_CASE("summary embeds config and data fingerprints") {
    RunConfig config = did_only_config("hashes");
    RunArtifacts artifacts = run(config);
    CHECK(artifacts.summary.contains("config_hash"));
    CHECK(artifacts.summary["data_hashes"].contains("league_splits.csv"));
    const std::string hash = artifacts.summary["config_hash"];
    CHECK(hash.size() == 16);
}
