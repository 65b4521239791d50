#pragma once

#include <array>
#include <string>
#include <vector>

#include "panelcause/types.hpp"

namespace panelcause {

// Identifying assumptions behind the four-cell estimator. Not checkable from
// data; printed verbatim with every DID report.
inline const std::array<std::string, 3>& did_assumption_caveats() {
    static const std::array<std::string, 3> caveats = {
        "Assumption (1) consistency / no anticipation: observed values equal the no-ban "
        "potential outcome before 2023 and the with-ban potential outcome from 2023 on.",
        "Assumption (2) no spillover: the ban is assumed to leave right-handed batters' "
        "bases-empty outcomes unchanged.",
        "Assumption (3) parallel trends: absent the ban, left- and right-handed season-over-"
        "season changes would have been equal. Pre-2023 estimates diagnose this assumption.",
    };
    return caveats;
}

// One four-cell comparison. did_estimate and counterfactual_post_lhb are exact
// binary-float arithmetic on the stored inputs.
struct DidResult {
    Outcome outcome = Outcome::OBP;
    int pre_year = 0;
    int post_year = 0;
    double lhb_pre = 0.0;
    double lhb_post = 0.0;
    double rhb_pre = 0.0;
    double rhb_post = 0.0;
    double lhb_diff = 0.0;
    double rhb_diff = 0.0;
    double did_estimate = 0.0;
    double counterfactual_post_lhb = 0.0;
    EffectKind kind = EffectKind::PRE_TREND;
};

namespace detail {

inline double series_value(const LeagueSplitSeries& s, int season, const char* role) {
    auto it = s.values.find(season);
    if (it == s.values.end()) {
        raise(errc::missing_season, std::string(role) + " (" + to_string(s.population) +
                                        ") series is missing season " + std::to_string(season));
    }
    return it->second;
}

}  // namespace detail

inline DidResult did_2x2(const LeagueSplitSeries& lhb, const LeagueSplitSeries& rhb, int pre,
                         int post) {
    if (lhb.outcome != rhb.outcome) {
        raise(errc::invariant_violation, "series outcomes differ");
    }
    if (pre == kExcludedSeason || post == kExcludedSeason) {
        raise(errc::invariant_violation, "2020 cannot be a comparison season");
    }
    if (!(pre < post)) {
        raise(errc::invariant_violation, "pre season must precede post season");
    }
    DidResult r;
    r.outcome = lhb.outcome;
    r.pre_year = pre;
    r.post_year = post;
    r.lhb_pre = detail::series_value(lhb, pre, "lhb");
    r.lhb_post = detail::series_value(lhb, post, "lhb");
    r.rhb_pre = detail::series_value(rhb, pre, "rhb");
    r.rhb_post = detail::series_value(rhb, post, "rhb");
    r.lhb_diff = r.lhb_post - r.lhb_pre;
    r.rhb_diff = r.rhb_post - r.rhb_pre;
    r.did_estimate = r.lhb_diff - r.rhb_diff;
    r.counterfactual_post_lhb = r.lhb_pre + r.rhb_diff;
    r.kind = post >= 2023 ? EffectKind::ATT : EffectKind::PRE_TREND;
    return r;
}

// Year-over-year estimates across an ordered season set: one result per
// consecutive pair, where (2019, 2021) counts as consecutive because 2020 is
// skipped. Post years before 2023 are pre-trend diagnostics; 2023 is the ATT;
// the 2024 entry (also ATT-kind) estimates the change in the effect between
// the ban's second season and its first.
inline std::vector<DidResult> did_series(const LeagueSplitSeries& lhb,
                                         const LeagueSplitSeries& rhb,
                                         const SeasonSet& seasons) {
    if (seasons.size() < 2) {
        raise(errc::invariant_violation, "did_series needs at least two seasons");
    }
    std::vector<DidResult> out;
    for (size_t i = 1; i < seasons.size(); ++i) {
        if (consecutive_analysis_pair(seasons[i - 1], seasons[i])) {
            out.push_back(did_2x2(lhb, rhb, seasons[i - 1], seasons[i]));
        }
    }
    return out;
}

// Converts a split-level effect to a league-wide effect by multiplying by the
// split's share of all plate appearances.
inline EffectEstimate rescale_att(const EffectEstimate& att, double pa_share) {
    if (pa_share < 0.0 || pa_share > 1.0) {
        raise(errc::invariant_violation, "pa_share outside [0,1]");
    }
    EffectEstimate scaled = att;
    scaled.estimate = att.estimate * pa_share;
    return scaled;
}

}  // namespace panelcause
