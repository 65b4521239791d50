#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "panelcause/ingest.hpp"
#include "panelcause/nelder_mead.hpp"
#include "panelcause/panel.hpp"
#include "panelcause/simplex_qp.hpp"
#include "panelcause/types.hpp"

namespace panelcause {

// One matching row: the target's value and each donor's value for a single
// labelled covariate (an outcome-by-season value, age, or a counting stat).
struct CovariateRow {
    std::string label;
    double target_value = 0.0;
    std::vector<double> donor_values;
};

// A fully assembled synthetic-control instance. Everything the solvers need
// is captured here; solves are pure functions of this struct, so instances
// can be fitted concurrently without shared state.
struct ScmProblem {
    std::string target_id;
    DonorPool pool;
    Outcome outcome = Outcome::OBP;
    int intervention_year = 2023;
    SeasonSet pre_seasons;             // also the validation set for importance weights
    std::vector<CovariateRow> rows;
    std::vector<double> row_scales;    // per-row standardization divisor
    std::vector<double> target_pre;    // outcome per pre season
    std::vector<std::vector<double>> donor_pre;   // [pre season][donor]
    SeasonSet post_seasons;            // seasons >= intervention covered by every donor
    std::vector<std::vector<double>> donor_post;  // [post season][donor]
    std::map<int, double> target_post;            // observed outcome where the target qualifies
};

struct ScmSolverConfig {
    SimplexQpConfig inner;
    int outer_evaluations = 240;  // simplex-reflection budget per start
    int multistarts = 2;          // uniform and inverse-variance starts
    double outer_initial_step = 0.5;
};

struct ScmFit {
    std::string target_id;
    Outcome outcome = Outcome::OBP;
    int intervention_year = 2023;
    std::vector<std::string> donor_ids;
    std::vector<double> donor_weights;       // w: simplex over donors
    std::vector<std::string> row_labels;
    std::vector<double> importance_weights;  // v: simplex over covariate rows
    std::map<int, double> observed;          // target outcome, pre + covered post seasons
    std::map<int, double> synthetic;         // dot(w, donor outcomes), pre + post seasons
    double pre_rmspe = 0.0;
    double inner_objective = 0.0;
    EffectKind effect_kind = EffectKind::ATT;
    std::vector<EffectEstimate> post_effects;
};

namespace detail {

inline const PlayerSeason& record_or_throw(const PanelDataset& panel, const std::string& player_id,
                                           int season, const std::string& label) {
    const PlayerSeason* ps = panel.find(player_id, season);
    if (!ps) {
        raise(errc::missing_covariate,
              "player " + player_id + " has no record for " + label);
    }
    return *ps;
}

inline double player_outcome(const PlayerSeason& ps, Outcome outcome) {
    switch (outcome) {
        case Outcome::OBP: return ps.obp;
        case Outcome::OPS: return ps.ops;
        case Outcome::WOBA: return ps.woba;
        case Outcome::BB_PCT: return ps.bb_pct;
        case Outcome::K_PCT: return ps.k_pct;
        default:
            raise(errc::missing_covariate, std::string("outcome ") + to_string(outcome) +
                                               " is not recorded in the player panel");
    }
}

struct StatField {
    const char* label;
    double (*get)(const PlayerSeason&);
};

inline const std::array<StatField, 6>& covariate_stats() {
    static const std::array<StatField, 6> stats = {{
        {"pa", [](const PlayerSeason& ps) { return static_cast<double>(ps.pa); }},
        {"hits", [](const PlayerSeason& ps) { return static_cast<double>(ps.hits); }},
        {"singles", [](const PlayerSeason& ps) { return static_cast<double>(ps.singles); }},
        {"home_runs", [](const PlayerSeason& ps) { return static_cast<double>(ps.home_runs); }},
        {"bb_pct", [](const PlayerSeason& ps) { return ps.bb_pct; }},
        {"k_pct", [](const PlayerSeason& ps) { return ps.k_pct; }},
    }};
    return stats;
}

inline double donor_std(const std::vector<double>& values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(values.size()));
}

inline std::vector<double> softmax_with_anchor(const std::vector<double>& logits) {
    // logits has K-1 free entries; the last coordinate is anchored at 0.
    std::vector<double> z(logits.size() + 1, 0.0);
    for (size_t i = 0; i < logits.size(); ++i) z[i] = logits[i];
    double z_max = 0.0;
    for (double v : z) z_max = std::max(z_max, v);
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - z_max);
        sum += v;
    }
    for (double& v : z) v /= sum;
    return z;
}

}  // namespace detail

// Builds the covariate block for one target. Row order is deterministic:
// the outcome for each pre season (ascending), age in the season before the
// intervention, then each counting stat at the season before intervention,
// two seasons before, and averaged over the target's included pre-2020
// seasons (omitted when there are none). For a 2022 intervention no row
// touches 2022 data and age comes from 2021.
//
// Each row carries a standardization divisor (the donor-pool standard
// deviation) so plate-appearance counts cannot drown out rate covariates in
// the weighted match.
inline ScmProblem assemble_problem(const std::string& target_id, const DonorPool& pool,
                                   Outcome outcome, const PanelDataset& panel,
                                   int intervention_year = 2023, int min_pa = kDefaultMinPa) {
    if (pool.donor_ids.empty()) {
        raise(errc::empty_donor_pool, "donor pool for " + target_id + " is empty");
    }
    if (!is_analysis_season(intervention_year)) {
        raise(errc::invariant_violation,
              "intervention year " + std::to_string(intervention_year));
    }

    ScmProblem problem;
    problem.target_id = target_id;
    problem.pool = pool;
    problem.outcome = outcome;
    problem.intervention_year = intervention_year;
    for (int s : pool.required_seasons) {
        if (s < intervention_year) problem.pre_seasons.push_back(s);
    }
    if (problem.pre_seasons.empty()) {
        raise(errc::missing_covariate,
              "target " + target_id + " has no pre-intervention seasons");
    }

    const size_t n_donors = pool.donor_ids.size();
    auto make_row = [&](std::string label, auto&& value_of) {
        CovariateRow row;
        row.label = std::move(label);
        row.target_value = value_of(target_id);
        row.donor_values.reserve(n_donors);
        for (const std::string& donor : pool.donor_ids) {
            row.donor_values.push_back(value_of(donor));
        }
        problem.rows.push_back(std::move(row));
    };

    const std::string outcome_name = to_string(outcome);
    for (int season : problem.pre_seasons) {
        make_row(outcome_name + "_" + std::to_string(season), [&](const std::string& id) {
            return detail::player_outcome(
                detail::record_or_throw(panel, id, season, outcome_name + " in " +
                                                               std::to_string(season)),
                outcome);
        });
    }

    const int age_season = previous_full_season(intervention_year);
    make_row("age_" + std::to_string(age_season), [&](const std::string& id) {
        return static_cast<double>(
            detail::record_or_throw(panel, id, age_season, "age").age);
    });

    SeasonSet recent_stat_seasons;
    for (int s : {intervention_year - 1, intervention_year - 2}) {
        if (is_analysis_season(s)) recent_stat_seasons.push_back(s);
    }
    SeasonSet pre2020;
    for (int s : problem.pre_seasons) {
        if (s < kExcludedSeason) pre2020.push_back(s);
    }

    for (const auto& stat : detail::covariate_stats()) {
        for (int season : recent_stat_seasons) {
            make_row(std::string(stat.label) + "_" + std::to_string(season),
                     [&](const std::string& id) {
                         return stat.get(detail::record_or_throw(
                             panel, id, season,
                             std::string(stat.label) + " in " + std::to_string(season)));
                     });
        }
        if (!pre2020.empty()) {
            make_row(std::string(stat.label) + "_pre2020_mean", [&](const std::string& id) {
                double sum = 0.0;
                for (int season : pre2020) {
                    sum += stat.get(detail::record_or_throw(
                        panel, id, season,
                        std::string(stat.label) + " in " + std::to_string(season)));
                }
                return sum / static_cast<double>(pre2020.size());
            });
        }
    }

    problem.row_scales.reserve(problem.rows.size());
    for (const auto& row : problem.rows) {
        const double sd = detail::donor_std(row.donor_values);
        problem.row_scales.push_back(sd > 1e-12 ? sd : 1.0);
    }

    for (int season : problem.pre_seasons) {
        problem.target_pre.push_back(detail::player_outcome(
            detail::record_or_throw(panel, target_id, season, "pre outcome"), outcome));
        std::vector<double> donors;
        donors.reserve(n_donors);
        for (const std::string& donor : pool.donor_ids) {
            donors.push_back(detail::player_outcome(
                detail::record_or_throw(panel, donor, season, "pre outcome"), outcome));
        }
        problem.donor_pre.push_back(std::move(donors));
    }

    for (int season : all_analysis_seasons()) {
        if (season < intervention_year) continue;
        bool all_covered = true;
        for (const std::string& donor : pool.donor_ids) {
            if (!panel.covered(donor, season, min_pa)) {
                all_covered = false;
                break;
            }
        }
        if (!all_covered) continue;
        problem.post_seasons.push_back(season);
        std::vector<double> donors;
        donors.reserve(n_donors);
        for (const std::string& donor : pool.donor_ids) {
            donors.push_back(detail::player_outcome(*panel.find(donor, season), outcome));
        }
        problem.donor_post.push_back(std::move(donors));
        if (panel.covered(target_id, season, min_pa)) {
            problem.target_post[season] =
                detail::player_outcome(*panel.find(target_id, season), outcome);
        }
    }
    return problem;
}

struct DonorWeightFit {
    std::vector<double> weights;
    double objective = 0.0;
};

// Inner solve: donor weights minimizing the v-weighted squared discrepancy
// between target and weighted-donor covariates, rows standardized by
// problem.row_scales. Deterministic given (problem, v, config).
inline DonorWeightFit fit_donor_weights(const ScmProblem& problem, const std::vector<double>& v,
                                        const SimplexQpConfig& config = {}) {
    const size_t n_rows = problem.rows.size();
    if (v.size() != n_rows) {
        raise(errc::invariant_violation, "importance weight length does not match covariate rows");
    }
    double v_sum = 0.0;
    for (double x : v) {
        if (x < -1e-12) raise(errc::invariant_violation, "negative importance weight");
        v_sum += x;
    }
    if (std::abs(v_sum - 1.0) > 1e-6) {
        raise(errc::invariant_violation, "importance weights must sum to 1");
    }

    std::vector<std::vector<double>> scaled_rows(n_rows);
    std::vector<double> scaled_target(n_rows);
    for (size_t k = 0; k < n_rows; ++k) {
        const double scale = problem.row_scales[k];
        scaled_target[k] = problem.rows[k].target_value / scale;
        scaled_rows[k].reserve(problem.rows[k].donor_values.size());
        for (double value : problem.rows[k].donor_values) {
            scaled_rows[k].push_back(value / scale);
        }
    }
    SimplexQpResult qp = solve_simplex_qp(scaled_rows, scaled_target, v, config);
    return {std::move(qp.weights), qp.objective};
}

namespace detail {

inline double pre_period_mspe(const ScmProblem& problem, const std::vector<double>& w) {
    double total = 0.0;
    for (size_t t = 0; t < problem.pre_seasons.size(); ++t) {
        double synthetic = 0.0;
        const auto& donors = problem.donor_pre[t];
        for (size_t j = 0; j < donors.size(); ++j) synthetic += w[j] * donors[j];
        const double err = problem.target_pre[t] - synthetic;
        total += err * err;
    }
    return total / static_cast<double>(problem.pre_seasons.size());
}

inline std::vector<double> inverse_variance_start(const ScmProblem& problem) {
    std::vector<double> v(problem.rows.size());
    for (size_t k = 0; k < problem.rows.size(); ++k) {
        const double sd = donor_std(problem.rows[k].donor_values);
        v[k] = 1.0 / std::max(sd * sd, 1e-12);
    }
    double sum = 0.0;
    for (double x : v) sum += x;
    for (double& x : v) x /= sum;
    return v;
}

}  // namespace detail

// Outer solve: importance weights v minimizing the pre-period outcome MSPE of
// the induced synthetic trajectory, searched with simplex reflection over
// normalized-exponential coordinates (so v stays on the simplex), multistarted
// from uniform weights and per-row inverse-variance weights; best MSPE wins.
inline ScmFit optimize_importance_weights(const ScmProblem& problem,
                                          const ScmSolverConfig& config = {},
                                          EffectKind effect_kind = EffectKind::ATT) {
    const size_t n_rows = problem.rows.size();
    const size_t n_donors = problem.pool.donor_ids.size();
    if (n_rows == 0 || n_donors == 0) {
        raise(errc::solver_failure, "problem has no covariate rows or no donors");
    }

    auto mspe_of = [&](const std::vector<double>& v) {
        return detail::pre_period_mspe(problem, fit_donor_weights(problem, v, config.inner).weights);
    };

    std::vector<double> best_v(n_rows, 1.0 / static_cast<double>(n_rows));
    double best_mspe = mspe_of(best_v);

    if (n_rows > 1 && n_donors > 1) {
        std::vector<std::vector<double>> starts;
        starts.emplace_back(n_rows, 1.0 / static_cast<double>(n_rows));
        if (config.multistarts > 1) {
            starts.push_back(detail::inverse_variance_start(problem));
        }
        NelderMeadConfig nm;
        nm.max_evaluations = config.outer_evaluations;
        nm.initial_step = config.outer_initial_step;
        for (const auto& start : starts) {
            std::vector<double> logits(n_rows - 1, 0.0);
            const double anchor = std::log(std::max(start.back(), 1e-300));
            for (size_t k = 0; k + 1 < n_rows; ++k) {
                logits[k] = std::log(std::max(start[k], 1e-300)) - anchor;
            }
            auto objective = [&](const std::vector<double>& z) {
                return mspe_of(detail::softmax_with_anchor(z));
            };
            NelderMeadResult nm_result = nelder_mead(objective, logits, nm);
            std::vector<double> v = detail::softmax_with_anchor(nm_result.x);
            const double mspe = mspe_of(v);
            if (mspe < best_mspe) {
                best_mspe = mspe;
                best_v = std::move(v);
            }
        }
    }

    DonorWeightFit inner = fit_donor_weights(problem, best_v, config.inner);

    ScmFit fit;
    fit.target_id = problem.target_id;
    fit.outcome = problem.outcome;
    fit.intervention_year = problem.intervention_year;
    fit.donor_ids = problem.pool.donor_ids;
    fit.donor_weights = inner.weights;
    fit.importance_weights = best_v;
    fit.inner_objective = inner.objective;
    fit.effect_kind = effect_kind;
    fit.row_labels.reserve(n_rows);
    for (const auto& row : problem.rows) fit.row_labels.push_back(row.label);

    for (size_t t = 0; t < problem.pre_seasons.size(); ++t) {
        double synthetic = 0.0;
        for (size_t j = 0; j < n_donors; ++j) {
            synthetic += fit.donor_weights[j] * problem.donor_pre[t][j];
        }
        fit.synthetic[problem.pre_seasons[t]] = synthetic;
        fit.observed[problem.pre_seasons[t]] = problem.target_pre[t];
    }
    for (size_t t = 0; t < problem.post_seasons.size(); ++t) {
        double synthetic = 0.0;
        for (size_t j = 0; j < n_donors; ++j) {
            synthetic += fit.donor_weights[j] * problem.donor_post[t][j];
        }
        fit.synthetic[problem.post_seasons[t]] = synthetic;
    }
    for (const auto& [season, value] : problem.target_post) {
        fit.observed[season] = value;
    }

    fit.pre_rmspe = std::sqrt(detail::pre_period_mspe(problem, fit.donor_weights));
    for (const auto& [season, value] : problem.target_post) {
        fit.post_effects.push_back(make_effect(problem.outcome, problem.target_id, season,
                                               value - fit.synthetic.at(season), effect_kind));
    }
    return fit;
}

// estimate = observed - synthetic, per requested year.
inline std::vector<EffectEstimate> estimate_effect(const ScmFit& fit,
                                                   const std::map<int, double>& observed,
                                                   const SeasonSet& years) {
    std::vector<EffectEstimate> out;
    for (int year : years) {
        auto obs = observed.find(year);
        if (obs == observed.end()) {
            raise(errc::missing_season, "no observed value for " + std::to_string(year));
        }
        auto syn = fit.synthetic.find(year);
        if (syn == fit.synthetic.end()) {
            raise(errc::missing_season,
                  "synthetic trajectory does not cover " + std::to_string(year));
        }
        out.push_back(make_effect(fit.outcome, fit.target_id, year, obs->second - syn->second,
                                  fit.effect_kind));
    }
    return out;
}

// The target's eligible seasons up to 2022; this is the donor-coverage
// requirement for main-analysis and in-time pools.
inline SeasonSet pre_intervention_required_seasons(const PanelDataset& panel,
                                                   const std::string& player_id,
                                                   int min_pa = kDefaultMinPa) {
    const PanelDataset::History* history = panel.history(player_id);
    if (!history) {
        raise(errc::missing_covariate, "player " + player_id + " has no panel records");
    }
    SeasonSet required;
    for (int s : eligible_seasons(*history, min_pa)) {
        if (s <= 2022) required.push_back(s);
    }
    return required;
}

// Re-fit for the second post-ban season: targets and donors are additionally
// required to have min_pa plate appearances in 2024, and each fit projects
// both 2023 and 2024. Because the donor pool shrinks, the 2023 estimates need
// not match the main analysis exactly. Players without a qualifying 2024
// season are dropped, not errors.
inline std::vector<ScmFit> refit_2024(const std::vector<std::string>& targets,
                                      const std::vector<std::string>& controls,
                                      const PanelDataset& panel, Outcome outcome,
                                      const ScmSolverConfig& config = {},
                                      int min_pa = kDefaultMinPa) {
    std::vector<std::string> kept_controls;
    for (const std::string& id : controls) {
        if (panel.covered(id, 2024, min_pa)) kept_controls.push_back(id);
    }
    std::vector<ScmFit> fits;
    for (const std::string& target : targets) {
        if (!panel.covered(target, 2024, min_pa)) continue;
        DonorPool pool = build_donor_pool(
            target, kept_controls, panel,
            pre_intervention_required_seasons(panel, target, min_pa), min_pa);
        ScmProblem problem = assemble_problem(target, pool, outcome, panel, 2023, min_pa);
        fits.push_back(optimize_importance_weights(problem, config, EffectKind::ATT));
    }
    return fits;
}

}  // namespace panelcause
