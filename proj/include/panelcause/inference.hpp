#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "panelcause/parallel.hpp"
#include "panelcause/scm.hpp"

namespace panelcause {

// Printed with every placebo report. Rank p-values from a few dozen placebo
// fits are coarse; they grade reliability, they are not strict hypothesis
// tests.
inline const std::string& placebo_caution() {
    static const std::string text =
        "Placebo-based p-values are more useful as an indicator of the reliability of the "
        "result than as strict hypothesis tests.";
    return text;
}

struct PlaceboEntry {
    std::string player_id;
    double estimate = 0.0;
    double pre_rmspe = 0.0;
    std::optional<double> post_pre_mspe_ratio;  // absent when the pre fit is degenerate
};

struct PlaceboFailure {
    std::string player_id;
    std::string reason;
};

// Per-unit effect estimates under a no-effect construction: one entry per
// player attempted, failed fits recorded and excluded from ranks.
struct PlaceboDistribution {
    Outcome outcome = Outcome::OBP;
    int intervention_year = 2023;
    std::vector<PlaceboEntry> entries;
    std::vector<PlaceboFailure> failures;
};

// A placebo run keeps the full fits as well, for gap-trajectory reporting.
struct PlaceboRun {
    PlaceboDistribution distribution;
    std::vector<ScmFit> fits;
};

// Post-to-pre MSPE ratio over the given post years. A near-zero pre fit makes
// the ratio meaningless, so it is an error rather than a huge number.
inline double mspe_ratio(const ScmFit& fit, const SeasonSet& post_years) {
    const double pre_mspe = fit.pre_rmspe * fit.pre_rmspe;
    if (pre_mspe < 1e-12) {
        raise(errc::degenerate_pre_fit, "pre-period MSPE below 1e-12 for " + fit.target_id);
    }
    if (post_years.empty()) {
        raise(errc::missing_season, "no post years given");
    }
    double post_mspe = 0.0;
    for (int year : post_years) {
        auto obs = fit.observed.find(year);
        auto syn = fit.synthetic.find(year);
        if (obs == fit.observed.end() || syn == fit.synthetic.end()) {
            raise(errc::missing_season, "fit does not cover " + std::to_string(year));
        }
        const double err = obs->second - syn->second;
        post_mspe += err * err;
    }
    post_mspe /= static_cast<double>(post_years.size());
    return post_mspe / pre_mspe;
}

// Rank p-value: the proportion of placebo estimates (and the target estimate
// itself) that tie or exceed the target in absolute value. Ties compare
// exactly. Always within [1/(n+1), 1].
inline double placebo_p_value(double target_estimate, const PlaceboDistribution& distribution) {
    if (distribution.entries.empty()) {
        raise(errc::degenerate_design, "placebo distribution is empty");
    }
    const double magnitude = std::abs(target_estimate);
    size_t at_or_above = 0;
    for (const PlaceboEntry& entry : distribution.entries) {
        if (std::abs(entry.estimate) >= magnitude) ++at_or_above;
    }
    return static_cast<double>(1 + at_or_above) /
           static_cast<double>(1 + distribution.entries.size());
}

namespace detail {

inline std::optional<double> ratio_or_nullopt(const ScmFit& fit, const SeasonSet& post_years) {
    try {
        return mspe_ratio(fit, post_years);
    } catch (const Error& e) {
        if (e.code() == errc::degenerate_pre_fit) return std::nullopt;
        throw;
    }
}

// Shared engine for the three placebo flavours: fit each pseudo-target
// against the given control pool and record the effect at effect_year. Fits
// run concurrently; entries aggregate in pseudo-target order (sorted by
// player id) so reports are byte-stable.
inline PlaceboRun run_placebo_fits(std::vector<std::string> pseudo_targets,
                                   const std::vector<std::string>& controls,
                                   const PanelDataset& panel, Outcome outcome,
                                   int intervention_year, int effect_year,
                                   EffectKind kind, const ScmSolverConfig& config,
                                   int min_pa, int threads) {
    std::sort(pseudo_targets.begin(), pseudo_targets.end());

    struct Slot {
        std::optional<ScmFit> fit;
        std::optional<PlaceboEntry> entry;
        std::optional<PlaceboFailure> failure;
    };
    std::vector<Slot> slots(pseudo_targets.size());

    parallel_for(pseudo_targets.size(), threads, [&](size_t i) {
        const std::string& id = pseudo_targets[i];
        try {
            DonorPool pool = build_donor_pool(
                id, controls, panel, pre_intervention_required_seasons(panel, id, min_pa),
                min_pa);
            ScmProblem problem =
                assemble_problem(id, pool, outcome, panel, intervention_year, min_pa);
            ScmFit fit = optimize_importance_weights(problem, config, kind);
            const EffectEstimate* effect = nullptr;
            for (const EffectEstimate& e : fit.post_effects) {
                if (e.year == effect_year) effect = &e;
            }
            if (!effect) {
                slots[i].failure = {id, "no effect available for " + std::to_string(effect_year)};
                return;
            }
            PlaceboEntry entry;
            entry.player_id = id;
            entry.estimate = effect->estimate;
            entry.pre_rmspe = fit.pre_rmspe;
            entry.post_pre_mspe_ratio = ratio_or_nullopt(fit, {effect_year});
            slots[i].entry = std::move(entry);
            slots[i].fit = std::move(fit);
        } catch (const Error& e) {
            slots[i].failure = {id, e.what()};
        }
    });

    PlaceboRun run;
    run.distribution.outcome = outcome;
    run.distribution.intervention_year = intervention_year;
    for (Slot& slot : slots) {
        if (slot.entry) {
            run.distribution.entries.push_back(std::move(*slot.entry));
            run.fits.push_back(std::move(*slot.fit));
        } else if (slot.failure) {
            run.distribution.failures.push_back(std::move(*slot.failure));
        }
    }
    return run;
}

}  // namespace detail

// In-space placebos: every control player re-fit as if it were the target,
// with itself left out of its own donor pool (structurally absent, not merely
// zero-weighted).
inline PlaceboRun run_in_space_placebos(const std::vector<std::string>& controls,
                                        const PanelDataset& panel, Outcome outcome,
                                        const ScmSolverConfig& config = {},
                                        int min_pa = kDefaultMinPa, int threads = 0,
                                        int intervention_year = 2023) {
    // build_donor_pool drops the pseudo-target from its own pool.
    return detail::run_placebo_fits(controls, controls, panel, outcome, intervention_year,
                                    intervention_year, EffectKind::PLACEBO, config, min_pa,
                                    threads);
}

// In-unit placebos: the weakly shifted players run through the same pipeline
// against the unchanged LOW-cohort donor pool.
inline PlaceboRun run_in_unit_placebos(const std::vector<std::string>& in_unit_players,
                                       const std::vector<std::string>& controls,
                                       const PanelDataset& panel, Outcome outcome,
                                       const ScmSolverConfig& config = {},
                                       int min_pa = kDefaultMinPa, int threads = 0,
                                       int intervention_year = 2023) {
    return detail::run_placebo_fits(in_unit_players, controls, panel, outcome, intervention_year,
                                    intervention_year, EffectKind::IN_UNIT_PLACEBO, config,
                                    min_pa, threads);
}

// In-time placebo: the true targets re-fit as if 2022 were the intervention
// year. No covariate row touches 2022 data; the effect is measured at 2022.
inline PlaceboRun run_in_time_placebo(const std::vector<std::string>& targets,
                                      const std::vector<std::string>& controls,
                                      const PanelDataset& panel, Outcome outcome,
                                      const ScmSolverConfig& config = {},
                                      int min_pa = kDefaultMinPa, int threads = 0) {
    return detail::run_placebo_fits(targets, controls, panel, outcome, 2022, 2022,
                                    EffectKind::IN_TIME_PLACEBO, config, min_pa, threads);
}

struct DoseResponseFit {
    double slope = 0.0;
    double intercept = 0.0;
    size_t n = 0;
};

// Ordinary least squares of effect on 2022 shift rate.
inline DoseResponseFit dose_response_fit(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) {
        raise(errc::degenerate_design, "need at least two (shift rate, effect) points");
    }
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& [x, y] : points) {
        mean_x += x;
        mean_y += y;
    }
    mean_x /= static_cast<double>(points.size());
    mean_y /= static_cast<double>(points.size());
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [x, y] : points) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if (sxx <= 1e-15) {
        raise(errc::degenerate_design, "all shift rates are equal");
    }
    DoseResponseFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    fit.n = points.size();
    return fit;
}

}  // namespace panelcause
