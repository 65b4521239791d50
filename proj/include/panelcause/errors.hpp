#pragma once

#include <stdexcept>
#include <string>

namespace panelcause {

// Every failure the toolkit can raise, named so reports and the CLI can
// emit machine-readable error lists.
enum class errc {
    duplicate_record,
    invariant_violation,
    schema_error,
    missing_season,
    missing_shift_rate,
    empty_donor_pool,
    missing_covariate,
    solver_failure,
    degenerate_pre_fit,
    degenerate_design,
    analysis_not_run,
    config_error,
    io_error,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::duplicate_record: return "duplicate_record";
        case errc::invariant_violation: return "invariant_violation";
        case errc::schema_error: return "schema_error";
        case errc::missing_season: return "missing_season";
        case errc::missing_shift_rate: return "missing_shift_rate";
        case errc::empty_donor_pool: return "empty_donor_pool";
        case errc::missing_covariate: return "missing_covariate";
        case errc::solver_failure: return "solver_failure";
        case errc::degenerate_pre_fit: return "degenerate_pre_fit";
        case errc::degenerate_design: return "degenerate_design";
        case errc::analysis_not_run: return "analysis_not_run";
        case errc::config_error: return "config_error";
        case errc::io_error: return "io_error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
  public:
    Error(errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    errc code() const noexcept { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace panelcause
