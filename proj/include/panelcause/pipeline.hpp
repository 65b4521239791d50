#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "panelcause/config.hpp"
#include "panelcause/did.hpp"
#include "panelcause/inference.hpp"
#include "panelcause/parallel.hpp"
#include "panelcause/report.hpp"
#include "panelcause/scm.hpp"

namespace panelcause {

// Everything one run produced, kept in memory for tests and figure emission.
struct RunArtifacts {
    std::filesystem::path out_dir;
    AnalysisFlags analyses;

    std::vector<LeagueSplitSeries> league_series;
    std::map<Outcome, std::vector<DidResult>> did;

    std::vector<ShiftCohort> cohorts;
    std::vector<std::string> targets;
    std::vector<std::string> controls;
    std::vector<std::string> in_unit_players;

    std::map<Outcome, std::vector<ScmFit>> target_fits;
    std::map<Outcome, PlaceboRun> in_space;
    std::map<Outcome, std::map<std::string, double>> p_values;
    std::map<Outcome, PlaceboRun> in_unit_runs;
    std::map<Outcome, PlaceboRun> in_time_runs;
    std::map<Outcome, std::vector<ScmFit>> extension_fits;
    std::map<Outcome, std::vector<ScmFit>> extension_sensitivity_fits;
    std::map<Outcome, DoseResponseFit> dose;

    Json summary;
};

namespace detail {

inline const std::vector<ScmFit>* fits_for(const RunArtifacts& a, Outcome outcome) {
    auto it = a.target_fits.find(outcome);
    return it == a.target_fits.end() ? nullptr : &it->second;
}

inline double effect_at(const ScmFit& fit, int year) {
    for (const EffectEstimate& e : fit.post_effects) {
        if (e.year == year) return e.estimate;
    }
    raise(errc::missing_season,
          fit.target_id + " fit has no effect for " + std::to_string(year));
}

inline void append_trajectory_rows(std::vector<FigureRow>& rows, const std::string& figure,
                                   const std::vector<ScmFit>& fits) {
    for (const ScmFit& fit : fits) {
        const std::string outcome = to_string(fit.outcome);
        for (const auto& [season, value] : fit.observed) {
            rows.push_back({figure, "observed_" + outcome, fit.target_id, season, value});
        }
        for (const auto& [season, value] : fit.synthetic) {
            rows.push_back({figure, "synthetic_" + outcome, fit.target_id, season, value});
        }
    }
}

inline void append_gap_rows(std::vector<FigureRow>& rows, const std::string& figure,
                            const std::string& series_suffix, const std::vector<ScmFit>& fits) {
    for (const ScmFit& fit : fits) {
        const std::string series = "gap_" + std::string(to_string(fit.outcome)) + series_suffix;
        for (const auto& [season, observed] : fit.observed) {
            auto syn = fit.synthetic.find(season);
            if (syn == fit.synthetic.end()) continue;
            rows.push_back({figure, series, fit.target_id, season, observed - syn->second});
        }
    }
}

}  // namespace detail

// Plot-ready long-format rows for one figure. Requires the backing analysis
// to have run; unknown ids are reported the same way.
inline std::vector<FigureRow> emit_figure_data(const RunArtifacts& a, const std::string& figure_id) {
    std::vector<FigureRow> rows;
    if (figure_id == "fig1") {
        if (!a.analyses.did || a.did.empty()) {
            raise(errc::analysis_not_run, "fig1 needs the did analysis");
        }
        for (const auto& [outcome, results] : a.did) {
            const std::string name = to_string(outcome);
            for (Population population : {Population::LHB, Population::RHB}) {
                const LeagueSplitSeries* series = find_series(a.league_series, population, outcome);
                if (!series) continue;
                for (const auto& [season, value] : series->values) {
                    if (season > 2023) continue;
                    rows.push_back(
                        {"fig1", "trend_" + name, to_string(population), season, value});
                }
            }
            for (const DidResult& r : results) {
                if (r.post_year > 2023) continue;
                rows.push_back({"fig1", "did_" + name, "league", r.post_year, r.did_estimate});
                if (r.post_year == 2023) {
                    rows.push_back({"fig1", "counterfactual_" + name, "LHB", r.post_year,
                                    r.counterfactual_post_lhb});
                }
            }
        }
        return rows;
    }
    if (figure_id == "fig2" || figure_id == "fig3") {
        if (!a.analyses.scm || a.target_fits.empty()) {
            raise(errc::analysis_not_run, figure_id + " needs the scm analysis");
        }
        for (const auto& [outcome, fits] : a.target_fits) {
            if (figure_id == "fig2") {
                detail::append_trajectory_rows(rows, "fig2", fits);
            } else {
                detail::append_gap_rows(rows, "fig3", "_target", fits);
            }
        }
        if (figure_id == "fig3") {
            for (const auto& [outcome, run] : a.in_space) {
                detail::append_gap_rows(rows, "fig3", "_placebo", run.fits);
            }
        }
        return rows;
    }
    if (figure_id == "fig4") {
        if (!a.analyses.dose_response || a.dose.empty()) {
            raise(errc::analysis_not_run, "fig4 needs the dose_response analysis");
        }
        std::map<std::string, double> shift_rate;
        for (const ShiftCohort& c : a.cohorts) shift_rate[c.player_id] = c.shift_rate_2022;
        bool shift_rows_done = false;
        for (const auto& [outcome, fits] : a.target_fits) {
            const std::string name = to_string(outcome);
            for (const ScmFit& fit : fits) {
                if (!shift_rows_done) {
                    rows.push_back(
                        {"fig4", "shift_rate", fit.target_id, 2022, shift_rate.at(fit.target_id)});
                }
                rows.push_back({"fig4", "effect_" + name, fit.target_id, 2023,
                                detail::effect_at(fit, 2023)});
            }
            shift_rows_done = true;
            auto dose_it = a.dose.find(outcome);
            if (dose_it != a.dose.end()) {
                rows.push_back({"fig4", "ols_slope_" + name, "all", 2023, dose_it->second.slope});
                rows.push_back(
                    {"fig4", "ols_intercept_" + name, "all", 2023, dose_it->second.intercept});
            }
        }
        return rows;
    }
    if (figure_id == "figA1" || figure_id == "figA2") {
        if (!a.analyses.extension_2024 || a.extension_fits.empty()) {
            raise(errc::analysis_not_run, figure_id + " needs the extension_2024 analysis");
        }
        for (const auto& [outcome, fits] : a.extension_fits) {
            if (figure_id == "figA1") {
                detail::append_trajectory_rows(rows, "figA1", fits);
            } else {
                detail::append_gap_rows(rows, "figA2", "_target", fits);
            }
        }
        return rows;
    }
    if (figure_id == "figA3") {
        if (!a.analyses.in_unit || a.in_unit_runs.empty()) {
            raise(errc::analysis_not_run, "figA3 needs the in_unit analysis");
        }
        for (const auto& [outcome, run] : a.in_unit_runs) {
            detail::append_gap_rows(rows, "figA3", "_in_unit", run.fits);
        }
        return rows;
    }
    if (figure_id == "figA4") {
        if (!a.analyses.in_time || a.in_time_runs.empty()) {
            raise(errc::analysis_not_run, "figA4 needs the in_time analysis");
        }
        for (const auto& [outcome, run] : a.in_time_runs) {
            detail::append_gap_rows(rows, "figA4", "_in_time", run.fits);
        }
        return rows;
    }
    raise(errc::analysis_not_run, "unknown figure id `" + figure_id + "`");
}

inline const std::vector<std::string>& known_figure_ids() {
    static const std::vector<std::string> ids = {"fig1", "fig2",  "fig3",  "fig4",
                                                 "figA1", "figA2", "figA3", "figA4"};
    return ids;
}

namespace detail {

inline std::vector<DistributionRow> distribution_rows(
    const PlaceboDistribution& distribution, const std::vector<ScmFit>* target_fits,
    const std::map<std::string, double>* target_p_values, int effect_year) {
    std::vector<DistributionRow> rows;
    if (target_fits) {
        for (const ScmFit& fit : *target_fits) {
            DistributionRow row;
            row.player_id = fit.target_id;
            row.outcome = fit.outcome;
            row.estimate = effect_at(fit, effect_year);
            row.pre_rmspe = fit.pre_rmspe;
            row.mspe_ratio = ratio_or_nullopt(fit, {effect_year});
            row.is_target = true;
            if (target_p_values) row.p_value = target_p_values->at(fit.target_id);
            rows.push_back(std::move(row));
        }
    }
    for (const PlaceboEntry& entry : distribution.entries) {
        DistributionRow row;
        row.player_id = entry.player_id;
        row.outcome = distribution.outcome;
        row.estimate = entry.estimate;
        row.pre_rmspe = entry.pre_rmspe;
        row.mspe_ratio = entry.post_pre_mspe_ratio;
        row.is_target = false;
        row.p_value = placebo_p_value(entry.estimate, distribution);
        rows.push_back(std::move(row));
    }
    return rows;
}

// Pseudo-target dumps (in-unit, in-time) reuse the schema with is_target set;
// in-unit rows rank against the main in-space distribution when available.
inline std::vector<DistributionRow> pseudo_target_rows(const PlaceboRun& run,
                                                       const PlaceboDistribution* reference) {
    std::vector<DistributionRow> rows;
    for (const PlaceboEntry& entry : run.distribution.entries) {
        DistributionRow row;
        row.player_id = entry.player_id;
        row.outcome = run.distribution.outcome;
        row.estimate = entry.estimate;
        row.pre_rmspe = entry.pre_rmspe;
        row.mspe_ratio = entry.post_pre_mspe_ratio;
        row.is_target = true;
        if (reference && !reference->entries.empty()) {
            row.p_value = placebo_p_value(entry.estimate, *reference);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace detail

// Full pipeline: ingest -> estimate -> infer -> report. Writes a report
// bundle under config.out_dir; two runs with the same config and data are
// byte-identical. Analyses that depend on other analyses pull them in
// (placebos need target fits, in-unit ranks need the placebo distribution).
inline RunArtifacts run(const RunConfig& config) {
    RunArtifacts a;
    a.out_dir = config.out_dir;

    AnalysisFlags flags = config.analyses;
    if (flags.in_unit) flags.placebos = true;
    if (flags.placebos || flags.in_time || flags.dose_response) flags.scm = true;
    a.analyses = flags;
    const bool scm_family =
        flags.scm || flags.placebos || flags.in_unit || flags.in_time || flags.extension_2024;

    Json file_hashes;
    Json summary;
    summary["config"] = canonical_config_text(config);
    summary["config_hash"] = fnv1a64_hex(canonical_config_text(config));

    // ---- ingest ----
    PanelValidation panel_validation;
    ShiftRateTable shift_rates;
    if (flags.did) {
        const auto path = config.data_dir / "league_splits.csv";
        a.league_series = load_league_splits(path);
        file_hashes["league_splits.csv"] = fnv1a64_hex(read_file_bytes(path));
    }
    if (scm_family) {
        const auto panel_path = config.data_dir / "player_seasons.csv";
        panel_validation = validate_panel(parse_player_seasons(panel_path));
        file_hashes["player_seasons.csv"] = fnv1a64_hex(read_file_bytes(panel_path));
        const auto rates_path = config.data_dir / "shift_rates.csv";
        shift_rates = load_shift_rates(rates_path);
        file_hashes["shift_rates.csv"] = fnv1a64_hex(read_file_bytes(rates_path));
    }
    summary["data_hashes"] = file_hashes;
    {
        Json issues = Json::array();
        for (const ValidationIssue& issue : panel_validation.issues) {
            Json j;
            j["kind"] = errc_name(issue.kind);
            j["player_id"] = issue.player_id;
            j["season"] = issue.season;
            j["field"] = issue.field;
            j["detail"] = issue.detail;
            issues.push_back(std::move(j));
        }
        summary["panel_issues"] = issues;
    }
    const PanelDataset& panel = panel_validation.dataset;

    // ---- league-wide DID ----
    if (flags.did) {
        Json rescaled = Json::array();
        for (Outcome outcome : config.did_outcomes) {
            const LeagueSplitSeries* lhb = find_series(a.league_series, Population::LHB, outcome);
            const LeagueSplitSeries* rhb = find_series(a.league_series, Population::RHB, outcome);
            if (!lhb || !rhb) {
                raise(errc::missing_season,
                      std::string("league splits lack a ") + to_string(outcome) + " series");
            }
            SeasonSet seasons;
            for (const auto& [season, value] : lhb->values) {
                if (rhb->values.count(season)) seasons.push_back(season);
            }
            a.did[outcome] = did_series(*lhb, *rhb, seasons);
            for (const DidResult& r : a.did[outcome]) {
                if (r.post_year != config.intervention_year) continue;
                auto share = lhb->pa_share.find(r.post_year);
                if (share == lhb->pa_share.end()) continue;
                EffectEstimate att =
                    make_effect(outcome, "LHB", r.post_year, r.did_estimate, r.kind);
                EffectEstimate league = rescale_att(att, share->second);
                Json j;
                j["outcome"] = to_string(outcome);
                j["year"] = r.post_year;
                j["split_att"] = att.estimate;
                j["pa_share"] = share->second;
                j["league_wide_estimate"] = league.estimate;
                rescaled.push_back(std::move(j));
            }
        }
        summary["league_rescaled_att"] = rescaled;
    }

    // ---- cohorts ----
    if (scm_family) {
        a.cohorts = build_cohorts(shift_rates, panel, config.cohort_bounds, config.min_pa);
        a.targets = cohort_members(a.cohorts, CohortLabel::HIGH);
        a.controls = cohort_members(a.cohorts, CohortLabel::LOW);
        a.in_unit_players = cohort_members(a.cohorts, CohortLabel::IN_UNIT_PLACEBO);
        Json counts;
        counts["HIGH"] = a.targets.size();
        counts["LOW"] = a.controls.size();
        counts["IN_UNIT_PLACEBO"] = a.in_unit_players.size();
        counts["MEDIUM"] = cohort_members(a.cohorts, CohortLabel::MEDIUM).size();
        summary["cohort_counts"] = counts;
    }

    // ---- synthetic control fits ----
    if (flags.scm) {
        for (Outcome outcome : config.scm_outcomes) {
            std::vector<ScmFit> fits(a.targets.size());
            parallel_for(a.targets.size(), config.threads, [&](size_t i) {
                const std::string& target = a.targets[i];
                DonorPool pool = build_donor_pool(
                    target, a.controls, panel,
                    pre_intervention_required_seasons(panel, target, config.min_pa),
                    config.min_pa);
                ScmProblem problem = assemble_problem(target, pool, outcome, panel,
                                                      config.intervention_year, config.min_pa);
                fits[i] = optimize_importance_weights(problem, config.solver, EffectKind::ATT);
            });
            a.target_fits[outcome] = std::move(fits);
        }
    }

    // ---- placebo inference ----
    if (flags.placebos) {
        for (Outcome outcome : config.scm_outcomes) {
            a.in_space[outcome] =
                run_in_space_placebos(a.controls, panel, outcome, config.solver, config.min_pa,
                                      config.threads, config.intervention_year);
            std::map<std::string, double> p;
            for (const ScmFit& fit : a.target_fits[outcome]) {
                p[fit.target_id] = placebo_p_value(
                    detail::effect_at(fit, config.intervention_year),
                    a.in_space[outcome].distribution);
            }
            a.p_values[outcome] = std::move(p);
        }
    }
    if (flags.in_unit) {
        for (Outcome outcome : config.scm_outcomes) {
            a.in_unit_runs[outcome] =
                run_in_unit_placebos(a.in_unit_players, a.controls, panel, outcome, config.solver,
                                     config.min_pa, config.threads, config.intervention_year);
        }
    }
    if (flags.in_time) {
        for (Outcome outcome : config.scm_outcomes) {
            a.in_time_runs[outcome] = run_in_time_placebo(a.targets, a.controls, panel, outcome,
                                                          config.solver, config.min_pa,
                                                          config.threads);
        }
    }

    // ---- 2024 extension ----
    if (flags.extension_2024) {
        Json ext;
        std::vector<std::string> controls_2024;
        for (const std::string& id : a.controls) {
            if (panel.covered(id, 2024, config.min_pa)) controls_2024.push_back(id);
        }
        for (Outcome outcome : config.scm_outcomes) {
            a.extension_fits[outcome] = refit_2024(a.targets, a.controls, panel, outcome,
                                                   config.solver, config.min_pa);
        }
        ext["targets"] = a.extension_fits.empty()
                             ? 0
                             : a.extension_fits.begin()->second.size();
        ext["controls"] = controls_2024.size();
        if (config.extension_post_only_gate) {
            // Relax the cohort PA gate to {2021, 2022, 2024}: players missing a
            // qualifying 2023 season but active in 2024 re-enter as targets.
            std::vector<ShiftCohort> relaxed =
                build_cohorts(shift_rates, panel, config.cohort_bounds, config.min_pa,
                              {2021, 2022, 2024});
            std::vector<std::string> relaxed_targets = cohort_members(relaxed, CohortLabel::HIGH);
            std::vector<std::string> relaxed_controls = cohort_members(relaxed, CohortLabel::LOW);
            for (Outcome outcome : config.scm_outcomes) {
                a.extension_sensitivity_fits[outcome] =
                    refit_2024(relaxed_targets, relaxed_controls, panel, outcome, config.solver,
                               config.min_pa);
            }
            ext["post_only_gate_targets"] = a.extension_sensitivity_fits.empty()
                                                ? 0
                                                : a.extension_sensitivity_fits.begin()->second.size();
        }
        summary["extension_2024"] = ext;
    }

    // ---- dose response ----
    if (flags.dose_response) {
        std::map<std::string, double> shift_rate;
        for (const ShiftCohort& c : a.cohorts) shift_rate[c.player_id] = c.shift_rate_2022;
        for (Outcome outcome : config.scm_outcomes) {
            std::vector<std::pair<double, double>> points;
            for (const ScmFit& fit : a.target_fits[outcome]) {
                points.emplace_back(shift_rate.at(fit.target_id),
                                    detail::effect_at(fit, config.intervention_year));
            }
            a.dose[outcome] = dose_response_fit(points);
        }
    }

    // ---- counts and caveats ----
    {
        Json placebo_summary;
        for (const auto& [outcome, run] : a.in_space) {
            Json j;
            j["entries"] = run.distribution.entries.size();
            j["failures"] = run.distribution.failures.size();
            Json failures = Json::array();
            for (const PlaceboFailure& f : run.distribution.failures) {
                Json fj;
                fj["player_id"] = f.player_id;
                fj["reason"] = f.reason;
                failures.push_back(std::move(fj));
            }
            j["failure_detail"] = failures;
            placebo_summary[to_string(outcome)] = std::move(j);
        }
        summary["in_space_placebos"] = placebo_summary;
        summary["placebo_caution"] = placebo_caution();
        Json caveats = Json::array();
        for (const std::string& c : did_assumption_caveats()) caveats.push_back(c);
        summary["did_caveats"] = caveats;
    }

    // ---- write the bundle ----
    const auto& out = config.out_dir;
    if (flags.did && config.emit_reports) {
        std::vector<DidResult> all_did;
        for (const auto& [outcome, results] : a.did) {
            all_did.insert(all_did.end(), results.begin(), results.end());
        }
        write_text_file(out / "did_report.csv", did_report_csv(all_did));
        write_text_file(out / "did_report.json", did_report_json(all_did).dump(2) + "\n");
    }
    if (scm_family && config.emit_reports) {
        write_text_file(out / "cohorts.csv", cohorts_csv(a.cohorts));
    }
    if (flags.scm && config.emit_reports) {
        for (const auto& [outcome, fits] : a.target_fits) {
            write_text_file(out / (std::string("scm_fits_") + to_string(outcome) + ".json"),
                            fits_json(fits).dump(2) + "\n");
        }
    }
    if (flags.placebos && config.emit_reports) {
        for (const auto& [outcome, run] : a.in_space) {
            const std::vector<ScmFit>* fits = detail::fits_for(a, outcome);
            const auto* p = a.p_values.count(outcome) ? &a.p_values.at(outcome) : nullptr;
            const auto rows =
                detail::distribution_rows(run.distribution, fits, p, config.intervention_year);
            write_text_file(out / (std::string("placebo_") + to_string(outcome) + ".csv"),
                            distribution_csv(rows));
            write_text_file(out / (std::string("placebo_") + to_string(outcome) + ".json"),
                            distribution_json(rows, run.distribution.failures).dump(2) + "\n");
        }
        // Effect / p-value matrix over all configured outcomes, one row per
        // target, sorted by 2022 shift rate descending.
        std::map<std::string, double> shift_rate;
        for (const ShiftCohort& c : a.cohorts) shift_rate[c.player_id] = c.shift_rate_2022;
        std::vector<std::string> ordered = a.targets;
        std::sort(ordered.begin(), ordered.end(), [&](const std::string& x, const std::string& y) {
            const double rx = shift_rate.at(x);
            const double ry = shift_rate.at(y);
            if (rx != ry) return rx > ry;
            return x < y;
        });
        std::string matrix = "player_id,shift_rate_2022";
        for (Outcome outcome : config.scm_outcomes) {
            matrix += std::string(",") + to_string(outcome) + "_estimate," + to_string(outcome) +
                      "_p";
        }
        matrix += '\n';
        for (const std::string& id : ordered) {
            matrix += id;
            matrix += ',' + csv::format_double(shift_rate.at(id));
            for (Outcome outcome : config.scm_outcomes) {
                const std::vector<ScmFit>* fits = detail::fits_for(a, outcome);
                const ScmFit* fit = nullptr;
                if (fits) {
                    for (const ScmFit& f : *fits) {
                        if (f.target_id == id) fit = &f;
                    }
                }
                if (fit) {
                    matrix += ',' +
                              csv::format_double(detail::effect_at(*fit, config.intervention_year));
                    matrix += ',' + csv::format_double(a.p_values.at(outcome).at(id));
                } else {
                    matrix += ",,";
                }
            }
            matrix += '\n';
        }
        write_text_file(out / "effects_matrix.csv", matrix);
    }
    if (flags.in_unit && config.emit_reports) {
        for (const auto& [outcome, run] : a.in_unit_runs) {
            const PlaceboDistribution* reference =
                a.in_space.count(outcome) ? &a.in_space.at(outcome).distribution : nullptr;
            const auto rows = detail::pseudo_target_rows(run, reference);
            write_text_file(out / (std::string("in_unit_") + to_string(outcome) + ".csv"),
                            distribution_csv(rows));
            write_text_file(out / (std::string("in_unit_") + to_string(outcome) + ".json"),
                            distribution_json(rows, run.distribution.failures).dump(2) + "\n");
        }
    }
    if (flags.in_time && config.emit_reports) {
        for (const auto& [outcome, run] : a.in_time_runs) {
            const auto rows = detail::pseudo_target_rows(run, nullptr);
            write_text_file(out / (std::string("in_time_") + to_string(outcome) + ".csv"),
                            distribution_csv(rows));
            write_text_file(out / (std::string("in_time_") + to_string(outcome) + ".json"),
                            distribution_json(rows, run.distribution.failures).dump(2) + "\n");
        }
    }
    if (flags.extension_2024 && config.emit_reports) {
        for (const auto& [outcome, fits] : a.extension_fits) {
            write_text_file(out / (std::string("extension_fits_") + to_string(outcome) + ".json"),
                            fits_json(fits).dump(2) + "\n");
        }
        for (const auto& [outcome, fits] : a.extension_sensitivity_fits) {
            write_text_file(
                out / (std::string("extension_sensitivity_") + to_string(outcome) + ".json"),
                fits_json(fits).dump(2) + "\n");
        }
    }
    if (flags.dose_response && config.emit_reports) {
        std::vector<std::pair<Outcome, DoseResponseFit>> dose_rows(a.dose.begin(), a.dose.end());
        write_text_file(out / "dose_response.csv", dose_response_csv(dose_rows));
    }
    for (const std::string& figure_id : known_figure_ids()) {
        try {
            write_text_file(out / "figures" / (figure_id + ".csv"),
                            figure_csv(emit_figure_data(a, figure_id)));
        } catch (const Error& e) {
            if (e.code() != errc::analysis_not_run) throw;
        }
    }
    a.summary = std::move(summary);
    write_text_file(out / "summary.json", a.summary.dump(2) + "\n");
    return a;
}

}  // namespace panelcause
