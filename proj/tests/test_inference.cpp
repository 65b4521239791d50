#include <doctest.h>

#include <cmath>

#include "panelcause/inference.hpp"
#include "test_support.hpp"

using namespace panelcause;
using test_support::make_record;

namespace {

PlaceboDistribution distribution_of(const std::vector<double>& estimates) {
    PlaceboDistribution d;
    for (size_t i = 0; i < estimates.size(); ++i) {
        d.entries.push_back({"c" + std::to_string(i), estimates[i], 0.01, std::nullopt});
    }
    return d;
}

ScmFit fit_with_errors(const std::vector<double>& pre_errors, const std::vector<double>& post_errors) {
    ScmFit fit;
    fit.target_id = "t";
    double total = 0.0;
    int season = 2015;
    for (double e : pre_errors) {
        fit.observed[season] = 0.3 + e;
        fit.synthetic[season] = 0.3;
        total += e * e;
        ++season;
    }
    fit.pre_rmspe = std::sqrt(total / pre_errors.size());
    int post = 2023;
    for (double e : post_errors) {
        fit.observed[post] = 0.3 + e;
        fit.synthetic[post] = 0.3;
        ++post;
    }
    return fit;
}

}  // namespace

TEST_CASE("rank p-values: counting ties and the target itself") {
    // 58 placebo estimates all strictly below the target magnitude: 1/59.
    std::vector<double> placebos(58, 0.01);
    CHECK(placebo_p_value(0.085, distribution_of(placebos)) == doctest::Approx(1.0 / 59));

    // Three of 58 at or above the target: 4/59.
    placebos[3] = 0.09;
    placebos[17] = -0.12;
    placebos[44] = 0.085;  // exact tie counts
    CHECK(placebo_p_value(0.085, distribution_of(placebos)) == doctest::Approx(4.0 / 59));

    // Target zero with all placebos nonzero: everything ties-or-exceeds.
    CHECK(placebo_p_value(0.0, distribution_of(std::vector<double>(58, 0.005))) == 1.0);

    CHECK_THROWS_AS(placebo_p_value(0.1, PlaceboDistribution{}), Error);
}

TEST_CASE("p-value bounds and monotonicity in the target magnitude") {
    test_support::Rng rng(0x9a1e);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = rng.uniform_int(3, 60);
        std::vector<double> placebos;
        for (int i = 0; i < n; ++i) placebos.push_back(rng.uniform(-0.1, 0.1));
        PlaceboDistribution d = distribution_of(placebos);
        double previous = 2.0;
        for (double mag : {0.0, 0.01, 0.02, 0.05, 0.08, 0.2}) {
            const double p = placebo_p_value(mag, d);
            CHECK(p >= 1.0 / (n + 1) - 1e-12);
            CHECK(p <= 1.0);
            CHECK(p <= previous + 1e-12);  // non-increasing in |target|
            previous = p;
        }
    }
}

TEST_CASE("MSPE ratio oracle values") {
    // pre errors {0.01, 0.01}, post {0.03}: 0.0009 / 0.0001 = 9.
    CHECK(mspe_ratio(fit_with_errors({0.01, 0.01}, {0.03}), {2023}) == doctest::Approx(9.0));
    CHECK(mspe_ratio(fit_with_errors({0.01, 0.01}, {0.0}), {2023}) == 0.0);
    CHECK(mspe_ratio(fit_with_errors({0.02}, {0.02}), {2023}) == doctest::Approx(1.0));
    try {
        mspe_ratio(fit_with_errors({0.0, 0.0}, {0.03}), {2023});
        FAIL("expected degenerate_pre_fit");
    } catch (const Error& e) {
        CHECK(e.code() == errc::degenerate_pre_fit);
    }
    CHECK_THROWS_AS(mspe_ratio(fit_with_errors({0.01}, {0.01}), {2025}), Error);
}

TEST_CASE("dose response closed forms") {
    // Two points (0.8, 0.1), (0.9, 0.2): slope 1, intercept -0.7.
    DoseResponseFit two = dose_response_fit({{0.8, 0.1}, {0.9, 0.2}});
    CHECK(two.slope == doctest::Approx(1.0));
    CHECK(two.intercept == doctest::Approx(-0.7));

    DoseResponseFit flat = dose_response_fit({{0.8, 0.0}, {0.85, 0.0}, {0.9, 0.0}});
    CHECK(flat.slope == 0.0);
    CHECK(flat.intercept == 0.0);

    try {
        dose_response_fit({{0.8, 0.1}, {0.8, 0.2}});
        FAIL("expected degenerate_design");
    } catch (const Error& e) {
        CHECK(e.code() == errc::degenerate_design);
    }
    CHECK_THROWS_AS(dose_response_fit({{0.8, 0.1}}), Error);
}

TEST_CASE("OLS residuals are orthogonal to the regressor") {
    test_support::Rng rng(0x015a);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::pair<double, double>> points;
        const int n = rng.uniform_int(3, 40);
        for (int i = 0; i < n; ++i) {
            points.emplace_back(rng.uniform(0.0, 1.0), rng.uniform(-0.1, 0.1));
        }
        DoseResponseFit fit = dose_response_fit(points);
        double dot = 0.0;
        for (const auto& [x, y] : points) {
            dot += x * (y - fit.slope * x - fit.intercept);
        }
        CHECK(std::abs(dot) <= 1e-10);
    }
}

TEST_CASE("in-space placebos: leave-one-out structure on a small panel") {
    std::vector<PlayerSeason> records;
    test_support::Rng rng(0x1007);
    for (int d = 0; d < 5; ++d) {
        for (int s : {2018, 2019, 2021, 2022, 2023}) {
            records.push_back(make_record("c" + std::to_string(d), s, 500,
                                          rng.uniform(0.29, 0.36), rng.uniform(0.66, 0.9),
                                          rng.uniform(0.29, 0.36)));
        }
    }
    PanelValidation v = validate_panel(records);
    std::vector<std::string> controls = {"c0", "c1", "c2", "c3", "c4"};
    ScmSolverConfig fast;
    fast.outer_evaluations = 40;
    PlaceboRun run = run_in_space_placebos(controls, v.dataset, Outcome::OBP, fast);
    REQUIRE(run.distribution.entries.size() == 5);
    CHECK(run.distribution.failures.empty());
    REQUIRE(run.fits.size() == 5);
    for (const ScmFit& fit : run.fits) {
        CHECK(fit.donor_ids.size() == 4);  // structurally absent, not zero-weighted
        for (const auto& id : fit.donor_ids) CHECK(id != fit.target_id);
        CHECK(fit.effect_kind == EffectKind::PLACEBO);
    }
    // Entries are sorted by player id for byte-stable reports.
    for (size_t i = 1; i < run.distribution.entries.size(); ++i) {
        CHECK(run.distribution.entries[i - 1].player_id < run.distribution.entries[i].player_id);
    }
}

TEST_CASE("a lone control yields a recorded failure, not a crash") {
    std::vector<PlayerSeason> records;
    for (int s : {2021, 2022, 2023}) records.push_back(make_record("only", s, 500));
    PanelValidation v = validate_panel(records);
    PlaceboRun run = run_in_space_placebos({"only"}, v.dataset, Outcome::OBP);
    CHECK(run.distribution.entries.empty());
    REQUIRE(run.distribution.failures.size() == 1);
    CHECK(run.distribution.failures[0].player_id == "only");
    CHECK(run.distribution.failures[0].reason.find("empty_donor_pool") != std::string::npos);
}

TEST_CASE("empty in-unit cohort gives an empty distribution") {
    std::vector<PlayerSeason> records;
    for (int s : {2021, 2022, 2023}) records.push_back(make_record("c0", s, 500));
    PanelValidation v = validate_panel(records);
    PlaceboRun run = run_in_unit_placebos({}, {"c0"}, v.dataset, Outcome::OBP);
    CHECK(run.distribution.entries.empty());
    CHECK(run.distribution.failures.empty());
}

TEST_CASE("in-time placebo fits measure the effect at 2022 with no 2022 covariates") {
    std::vector<PlayerSeason> records;
    test_support::Rng rng(0x7e57);
    for (int d = 0; d < 4; ++d) {
        for (int s : {2017, 2018, 2019, 2021, 2022, 2023}) {
            records.push_back(make_record("c" + std::to_string(d), s, 500,
                                          rng.uniform(0.29, 0.36)));
        }
    }
    for (int s : {2017, 2018, 2019, 2021, 2022, 2023}) {
        records.push_back(make_record("tgt", s, 520, rng.uniform(0.3, 0.35)));
    }
    PanelValidation v = validate_panel(records);
    ScmSolverConfig fast;
    fast.outer_evaluations = 40;
    PlaceboRun run = run_in_time_placebo({"tgt"}, {"c0", "c1", "c2", "c3"}, v.dataset,
                                         Outcome::OBP, fast);
    REQUIRE(run.distribution.entries.size() == 1);
    CHECK(run.distribution.intervention_year == 2022);
    const ScmFit& fit = run.fits[0];
    CHECK(fit.intervention_year == 2022);
    for (const auto& label : fit.row_labels) {
        CHECK(label.find("2022") == std::string::npos);
    }
    bool effect_at_2022 = false;
    for (const auto& e : fit.post_effects) {
        if (e.year == 2022) {
            effect_at_2022 = true;
            CHECK(e.kind == EffectKind::IN_TIME_PLACEBO);
        }
    }
    CHECK(effect_at_2022);
    CHECK(run.distribution.entries[0].estimate ==
          doctest::Approx(fit.observed.at(2022) - fit.synthetic.at(2022)));
}
