// panelcause: panel-data causal estimators for the 2023 infield-shift ban.
//
// Subcommands:
//   run      full pipeline (ingest -> estimate -> infer -> report)
//   did      league-wide difference-in-differences only
//   scm      synthetic-control fit for one target player
//   placebo  target fits plus in-space placebo inference
//   figures  run the configured analyses, emit figure data only
//
// Solvers are deterministic by construction; there is no RNG anywhere, so
// --seedless is accepted (and validated) for scripting symmetry.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>

#include "panelcause/pipeline.hpp"

namespace {

using panelcause::RunConfig;

struct CommonOptions {
    std::string config_path;
    std::string data_dir;
    std::string out_dir;
    std::string analyses;
    int threads = -1;
    bool seedless = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "Key = value config file");
    cmd->add_option("--data-dir", opts.data_dir, "Directory with the input CSVs");
    cmd->add_option("--out-dir", opts.out_dir, "Directory for the report bundle");
    cmd->add_option("--analyses", opts.analyses,
                    "Comma list: did,scm,placebos,in_unit,in_time,extension_2024,dose_response");
    cmd->add_option("--threads", opts.threads, "Worker threads (0 = hardware count)");
    cmd->add_flag("--seedless", opts.seedless,
                  "Assert the run uses no randomness (always true; solvers are deterministic)");
}

RunConfig resolve_config(const CommonOptions& opts) {
    RunConfig config;
    if (!opts.config_path.empty()) {
        config = panelcause::load_config(opts.config_path);
    }
    if (!opts.data_dir.empty()) config.data_dir = opts.data_dir;
    if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
    if (!opts.analyses.empty()) config.analyses = panelcause::parse_analyses(opts.analyses);
    if (opts.threads >= 0) config.threads = opts.threads;
    return config;
}

int fail(const panelcause::Error& e) {
    panelcause::Json j;
    panelcause::Json entry;
    entry["code"] = panelcause::errc_name(e.code());
    entry["message"] = e.what();
    j["errors"] = panelcause::Json::array({entry});
    std::cerr << j.dump(2) << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Panel-data quasi-experimental estimators for the infield shift ban"};
    app.require_subcommand(1);

    CommonOptions run_opts;
    CLI::App* run_cmd = app.add_subcommand("run", "Run the full pipeline");
    add_common(run_cmd, run_opts);

    CommonOptions did_opts;
    CLI::App* did_cmd = app.add_subcommand("did", "League-wide DID analysis only");
    add_common(did_cmd, did_opts);

    CommonOptions scm_opts;
    std::string scm_target;
    CLI::App* scm_cmd = app.add_subcommand("scm", "Synthetic control fit for one target");
    add_common(scm_cmd, scm_opts);
    scm_cmd->add_option("--target", scm_target, "Target player id")->required();

    CommonOptions placebo_opts;
    CLI::App* placebo_cmd =
        app.add_subcommand("placebo", "Target fits plus in-space placebo inference");
    add_common(placebo_cmd, placebo_opts);

    CommonOptions figures_opts;
    CLI::App* figures_cmd = app.add_subcommand("figures", "Emit plot-ready figure data");
    add_common(figures_cmd, figures_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            panelcause::RunArtifacts artifacts = panelcause::run(resolve_config(run_opts));
            std::cout << "report bundle written\n";
            if (!artifacts.in_space.empty()) {
                std::cout << panelcause::placebo_caution() << "\n";
            }
            return 0;
        }
        if (did_cmd->parsed()) {
            RunConfig config = resolve_config(did_opts);
            config.analyses = panelcause::parse_analyses("did");
            panelcause::run(config);
            std::cout << "did report written\n";
            return 0;
        }
        if (placebo_cmd->parsed()) {
            RunConfig config = resolve_config(placebo_opts);
            config.analyses = panelcause::parse_analyses("scm,placebos");
            panelcause::run(config);
            std::cout << "placebo report written\n";
            std::cout << panelcause::placebo_caution() << "\n";
            return 0;
        }
        if (figures_cmd->parsed()) {
            RunConfig config = resolve_config(figures_opts);
            config.emit_reports = false;
            panelcause::run(config);
            std::cout << "figure data written to " << (config.out_dir / "figures").string()
                      << "\n";
            return 0;
        }
        if (scm_cmd->parsed()) {
            RunConfig config = resolve_config(scm_opts);
            const auto panel_path = config.data_dir / "player_seasons.csv";
            auto validation = panelcause::validate_panel(
                panelcause::parse_player_seasons(panel_path));
            auto shift_rates =
                panelcause::load_shift_rates(config.data_dir / "shift_rates.csv");
            auto cohorts = panelcause::build_cohorts(shift_rates, validation.dataset,
                                                     config.cohort_bounds, config.min_pa);
            auto controls = panelcause::cohort_members(cohorts, panelcause::CohortLabel::LOW);
            panelcause::Json dump = panelcause::Json::array();
            for (panelcause::Outcome outcome : config.scm_outcomes) {
                auto pool = panelcause::build_donor_pool(
                    scm_target, controls, validation.dataset,
                    panelcause::pre_intervention_required_seasons(validation.dataset, scm_target,
                                                                  config.min_pa),
                    config.min_pa);
                auto problem =
                    panelcause::assemble_problem(scm_target, pool, outcome, validation.dataset,
                                                 config.intervention_year, config.min_pa);
                auto fit = panelcause::optimize_importance_weights(problem, config.solver);
                dump.push_back(panelcause::fit_json(fit));
            }
            std::cout << dump.dump(2) << "\n";
            return 0;
        }
    } catch (const panelcause::Error& e) {
        return fail(e);
    } catch (const std::exception& e) {
        panelcause::Json j;
        panelcause::Json entry;
        entry["code"] = "internal_error";
        entry["message"] = e.what();
        j["errors"] = panelcause::Json::array({entry});
        std::cerr << j.dump(2) << "\n";
        return 1;
    }
    return 0;
}
