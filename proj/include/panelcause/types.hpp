#pragma once

#include <map>
#include <optional>
#include <string>

#include "panelcause/errors.hpp"
#include "panelcause/seasons.hpp"

namespace panelcause {

enum class Population { LHB, RHB };

enum class Outcome { BABIP, OBP, AVG, SLG, OPS, WOBA, BB_PCT, K_PCT };

enum class CohortLabel { LOW, MEDIUM, IN_UNIT_PLACEBO, HIGH };

// How an effect estimate was produced. ATT entries describe post-ban years;
// PRE_TREND entries are the pre-ban diagnostics. The potential-outcome pair
// behind each estimate (outcome with and without the ban) is conceptual: an
// ATT is the observed value minus the estimated no-ban counterfactual, never
// two stored fields.
enum class EffectKind { ATT, PRE_TREND, PLACEBO, IN_TIME_PLACEBO, IN_UNIT_PLACEBO };

inline const char* to_string(Population p) {
    return p == Population::LHB ? "LHB" : "RHB";
}

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::BABIP: return "babip";
        case Outcome::OBP: return "obp";
        case Outcome::AVG: return "avg";
        case Outcome::SLG: return "slg";
        case Outcome::OPS: return "ops";
        case Outcome::WOBA: return "woba";
        case Outcome::BB_PCT: return "bb_pct";
        case Outcome::K_PCT: return "k_pct";
    }
    return "?";
}

inline const char* to_string(CohortLabel c) {
    switch (c) {
        case CohortLabel::LOW: return "LOW";
        case CohortLabel::MEDIUM: return "MEDIUM";
        case CohortLabel::IN_UNIT_PLACEBO: return "IN_UNIT_PLACEBO";
        case CohortLabel::HIGH: return "HIGH";
    }
    return "?";
}

inline const char* to_string(EffectKind k) {
    switch (k) {
        case EffectKind::ATT: return "ATT";
        case EffectKind::PRE_TREND: return "PRE_TREND";
        case EffectKind::PLACEBO: return "PLACEBO";
        case EffectKind::IN_TIME_PLACEBO: return "IN_TIME_PLACEBO";
        case EffectKind::IN_UNIT_PLACEBO: return "IN_UNIT_PLACEBO";
    }
    return "?";
}

inline std::optional<Outcome> parse_outcome(const std::string& s) {
    if (s == "babip") return Outcome::BABIP;
    if (s == "obp") return Outcome::OBP;
    if (s == "avg") return Outcome::AVG;
    if (s == "slg") return Outcome::SLG;
    if (s == "ops") return Outcome::OPS;
    if (s == "woba") return Outcome::WOBA;
    if (s == "bb_pct") return Outcome::BB_PCT;
    if (s == "k_pct") return Outcome::K_PCT;
    return std::nullopt;
}

// Upper bound of the valid range for a league-level rate series.
inline double league_rate_upper_bound(Outcome o) {
    return o == Outcome::OPS ? 3.0 : 1.0;
}

// One player-season line: counting stats plus the season-level rate outcomes.
// Rates are stored at full input precision; published 3-decimal values are
// display rounding only.
struct PlayerSeason {
    std::string player_id;
    std::string name;
    int season = 0;
    int age = 0;
    int pa = 0;
    int hits = 0;
    int singles = 0;
    int home_runs = 0;
    double bb_pct = 0.0;
    double k_pct = 0.0;
    double obp = 0.0;
    double ops = 0.0;
    double woba = 0.0;
};

// First invariant a record violates, as (field, detail), or nullopt if clean.
inline std::optional<std::pair<std::string, std::string>> first_violation(const PlayerSeason& ps) {
    auto fail = [](const char* field, const std::string& detail) {
        return std::make_optional(std::make_pair(std::string(field), detail));
    };
    if (ps.player_id.empty()) return fail("player_id", "empty");
    if (!is_analysis_season(ps.season)) return fail("season", std::to_string(ps.season));
    if (ps.age < 16 || ps.age > 60) return fail("age", std::to_string(ps.age));
    if (ps.pa < 0) return fail("pa", std::to_string(ps.pa));
    if (ps.hits < 0 || ps.hits > ps.pa) return fail("hits", std::to_string(ps.hits));
    if (ps.singles < 0 || ps.singles > ps.hits) return fail("singles", std::to_string(ps.singles));
    if (ps.home_runs < 0 || ps.home_runs > ps.hits) return fail("home_runs", std::to_string(ps.home_runs));
    auto in_range = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
    if (!in_range(ps.bb_pct, 0.0, 1.0)) return fail("bb_pct", std::to_string(ps.bb_pct));
    if (!in_range(ps.k_pct, 0.0, 1.0)) return fail("k_pct", std::to_string(ps.k_pct));
    if (!in_range(ps.obp, 0.0, 1.0)) return fail("obp", std::to_string(ps.obp));
    if (!in_range(ps.ops, 0.0, 3.0)) return fail("ops", std::to_string(ps.ops));
    if (!in_range(ps.woba, 0.0, 1.5)) return fail("woba", std::to_string(ps.woba));
    return std::nullopt;
}

// Per-season values of one outcome for one population (handedness, bases
// empty). pa_share carries this split's share of all league PAs.
struct LeagueSplitSeries {
    Population population = Population::LHB;
    Outcome outcome = Outcome::OBP;
    std::map<int, double> values;
    std::map<int, double> pa_share;
};

inline void validate_series(const LeagueSplitSeries& s) {
    const double hi = league_rate_upper_bound(s.outcome);
    for (const auto& [season, value] : s.values) {
        if (!is_analysis_season(season)) {
            raise(errc::invariant_violation,
                  std::string(to_string(s.outcome)) + " series contains season " +
                      std::to_string(season));
        }
        if (value < 0.0 || value > hi) {
            raise(errc::invariant_violation,
                  std::string(to_string(s.outcome)) + " value " + std::to_string(value) +
                      " outside [0, " + std::to_string(hi) + "]");
        }
    }
    for (const auto& [season, share] : s.pa_share) {
        if (!is_analysis_season(season) || share < 0.0 || share > 1.0) {
            raise(errc::invariant_violation, "invalid pa_share entry");
        }
    }
}

struct CohortBounds {
    double low = 0.15;        // LOW iff rate <= low
    double in_unit_hi = 0.30; // IN_UNIT_PLACEBO iff low < rate <= in_unit_hi
    double high = 0.75;       // HIGH iff rate >= high
};

inline void validate_bounds(const CohortBounds& b) {
    if (!(0.0 < b.low && b.low < b.in_unit_hi && b.in_unit_hi < b.high && b.high < 1.0)) {
        raise(errc::config_error, "cohort bounds must be strictly increasing within (0,1)");
    }
}

// Boundary assignment: exactly 15% is LOW, exactly 75% is HIGH, and the
// 30% boundary goes to the in-unit placebo band (inclusive upper edge).
inline CohortLabel classify_shift_rate(double rate, const CohortBounds& b = {}) {
    if (rate < 0.0 || rate > 1.0) {
        raise(errc::invariant_violation, "shift rate " + std::to_string(rate) + " outside [0,1]");
    }
    if (rate <= b.low) return CohortLabel::LOW;
    if (rate >= b.high) return CohortLabel::HIGH;
    if (rate <= b.in_unit_hi) return CohortLabel::IN_UNIT_PLACEBO;
    return CohortLabel::MEDIUM;
}

struct ShiftCohort {
    std::string player_id;
    double shift_rate_2022 = 0.0;
    CohortLabel cohort = CohortLabel::MEDIUM;
};

// A signed rate difference attributed to one unit (population or player) in
// one year.
struct EffectEstimate {
    Outcome outcome = Outcome::OBP;
    std::string unit;
    int year = 0;
    double estimate = 0.0;
    EffectKind kind = EffectKind::ATT;
};

inline EffectEstimate make_effect(Outcome outcome, std::string unit, int year, double estimate,
                                  EffectKind kind) {
    if (!is_analysis_season(year)) {
        raise(errc::invariant_violation, "effect year " + std::to_string(year));
    }
    if (kind == EffectKind::PRE_TREND && year >= 2023) {
        raise(errc::invariant_violation, "PRE_TREND effect with year >= 2023");
    }
    if (kind == EffectKind::ATT && year < 2023) {
        raise(errc::invariant_violation, "ATT effect with year < 2023");
    }
    return EffectEstimate{outcome, std::move(unit), year, estimate, kind};
}

}  // namespace panelcause
