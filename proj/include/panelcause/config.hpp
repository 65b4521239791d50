#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "panelcause/csv.hpp"
#include "panelcause/scm.hpp"
#include "panelcause/types.hpp"

namespace panelcause {

struct AnalysisFlags {
    bool did = true;
    bool scm = true;
    bool placebos = true;
    bool in_unit = true;
    bool in_time = true;
    bool extension_2024 = true;
    bool dose_response = true;
};

// Everything a run needs. All study constants are defaults here and can be
// overridden from the config file for sensitivity exploration.
struct RunConfig {
    std::filesystem::path data_dir = "data";
    std::filesystem::path out_dir = "report";
    std::vector<Outcome> did_outcomes = {Outcome::BABIP, Outcome::OBP};
    std::vector<Outcome> scm_outcomes = {Outcome::OBP, Outcome::OPS, Outcome::WOBA};
    int intervention_year = 2023;
    int min_pa = kDefaultMinPa;
    CohortBounds cohort_bounds;
    ScmSolverConfig solver;
    AnalysisFlags analyses;
    bool extension_post_only_gate = true;  // also run the 2024-only PA gate variant
    int threads = 0;                       // 0 = hardware count
    bool emit_reports = true;              // figures-only runs flip this off
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::string part;
    for (char c : s) {
        if (c == ',') {
            parts.push_back(part);
            part.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            part.push_back(c);
        }
    }
    if (!part.empty()) parts.push_back(part);
    return parts;
}

inline std::vector<Outcome> parse_outcome_list(const std::string& value, const std::string& key) {
    std::vector<Outcome> outcomes;
    for (const std::string& name : split_list(value)) {
        auto outcome = parse_outcome(name);
        if (!outcome) {
            raise(errc::config_error, key + ": unknown outcome `" + name + "`");
        }
        outcomes.push_back(*outcome);
    }
    if (outcomes.empty()) {
        raise(errc::config_error, key + ": empty outcome list");
    }
    return outcomes;
}

inline bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    raise(errc::config_error, key + ": expected boolean, got `" + value + "`");
}

}  // namespace detail

inline AnalysisFlags parse_analyses(const std::string& value) {
    AnalysisFlags flags;
    flags.did = flags.scm = flags.placebos = flags.in_unit = flags.in_time = false;
    flags.extension_2024 = flags.dose_response = false;
    for (const std::string& name : detail::split_list(value)) {
        if (name == "did") flags.did = true;
        else if (name == "scm") flags.scm = true;
        else if (name == "placebos") flags.placebos = true;
        else if (name == "in_unit") flags.in_unit = true;
        else if (name == "in_time") flags.in_time = true;
        else if (name == "extension_2024") flags.extension_2024 = true;
        else if (name == "dose_response") flags.dose_response = true;
        else raise(errc::config_error, "unknown analysis `" + name + "`");
    }
    return flags;
}

// Key = value lines, `#` comments. Unknown keys are errors so typos cannot
// silently fall back to defaults.
inline RunConfig parse_config_text(const std::string& text, RunConfig config = {}) {
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto begin = s.find_first_not_of(" \t\r");
            if (begin == std::string::npos) return std::string();
            const auto end = s.find_last_not_of(" \t\r");
            return s.substr(begin, end - begin + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            raise(errc::config_error,
                  "line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string ctx = "line " + std::to_string(line_no) + ", key " + key;
        auto as_int = [&] {
            return csv::parse_int(value, "config", line_no, 1);
        };
        auto as_double = [&] {
            return csv::parse_double(value, "config", line_no, 1);
        };
        if (key == "data_dir") config.data_dir = value;
        else if (key == "out_dir") config.out_dir = value;
        else if (key == "did_outcomes") config.did_outcomes = detail::parse_outcome_list(value, key);
        else if (key == "scm_outcomes") config.scm_outcomes = detail::parse_outcome_list(value, key);
        else if (key == "intervention_year") config.intervention_year = as_int();
        else if (key == "min_pa") config.min_pa = as_int();
        else if (key == "cohort.low") config.cohort_bounds.low = as_double();
        else if (key == "cohort.in_unit_high") config.cohort_bounds.in_unit_hi = as_double();
        else if (key == "cohort.high") config.cohort_bounds.high = as_double();
        else if (key == "solver.inner_max_iterations") config.solver.inner.max_iterations = as_int();
        else if (key == "solver.inner_tolerance") config.solver.inner.objective_tolerance = as_double();
        else if (key == "solver.outer_evaluations") config.solver.outer_evaluations = as_int();
        else if (key == "solver.multistarts") config.solver.multistarts = as_int();
        else if (key == "analyses") config.analyses = parse_analyses(value);
        else if (key == "extension.post_only_gate")
            config.extension_post_only_gate = detail::parse_bool(value, key);
        else if (key == "threads") config.threads = as_int();
        else raise(errc::config_error, ctx + ": unknown key");
    }
    validate_bounds(config.cohort_bounds);
    if (config.min_pa < 0) raise(errc::config_error, "min_pa must be non-negative");
    if (!is_analysis_season(config.intervention_year)) {
        raise(errc::config_error, "intervention_year must be a valid analysis season");
    }
    return config;
}

inline RunConfig load_config(const std::filesystem::path& path, RunConfig defaults = {}) {
    std::ifstream in(path);
    if (!in) {
        raise(errc::io_error, "cannot open config file " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), std::move(defaults));
}

// Canonical text for hashing and for echoing into reports. Paths are left
// out on purpose: two runs over the same data in different directories must
// hash identically.
inline std::string canonical_config_text(const RunConfig& c) {
    std::string out;
    auto add = [&](const std::string& key, const std::string& value) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    };
    auto outcome_list = [](const std::vector<Outcome>& outcomes) {
        std::string s;
        for (size_t i = 0; i < outcomes.size(); ++i) {
            if (i) s += ',';
            s += to_string(outcomes[i]);
        }
        return s;
    };
    add("did_outcomes", outcome_list(c.did_outcomes));
    add("scm_outcomes", outcome_list(c.scm_outcomes));
    add("intervention_year", std::to_string(c.intervention_year));
    add("min_pa", std::to_string(c.min_pa));
    add("cohort.low", csv::format_double(c.cohort_bounds.low));
    add("cohort.in_unit_high", csv::format_double(c.cohort_bounds.in_unit_hi));
    add("cohort.high", csv::format_double(c.cohort_bounds.high));
    add("solver.inner_max_iterations", std::to_string(c.solver.inner.max_iterations));
    add("solver.inner_tolerance", csv::format_double(c.solver.inner.objective_tolerance));
    add("solver.outer_evaluations", std::to_string(c.solver.outer_evaluations));
    add("solver.multistarts", std::to_string(c.solver.multistarts));
    std::string analyses;
    auto flag = [&](bool on, const char* name) {
        if (!on) return;
        if (!analyses.empty()) analyses += ',';
        analyses += name;
    };
    flag(c.analyses.did, "did");
    flag(c.analyses.scm, "scm");
    flag(c.analyses.placebos, "placebos");
    flag(c.analyses.in_unit, "in_unit");
    flag(c.analyses.in_time, "in_time");
    flag(c.analyses.extension_2024, "extension_2024");
    flag(c.analyses.dose_response, "dose_response");
    add("analyses", analyses);
    add("extension.post_only_gate", c.extension_post_only_gate ? "true" : "false");
    return out;
}

}  // namespace panelcause
