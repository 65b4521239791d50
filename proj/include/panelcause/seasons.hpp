#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "panelcause/errors.hpp"

namespace panelcause {

// Analysis seasons run 2015-2024. The shortened 2020 season is excluded from
// every season set the estimators touch.
inline constexpr int kFirstSeason = 2015;
inline constexpr int kLastSeason = 2024;
inline constexpr int kExcludedSeason = 2020;

inline constexpr bool is_analysis_season(int year) {
    return year >= kFirstSeason && year <= kLastSeason && year != kExcludedSeason;
}

// Sorted, duplicate-free, 2020-free.
using SeasonSet = std::vector<int>;

inline const SeasonSet& all_analysis_seasons() {
    static const SeasonSet seasons = {2015, 2016, 2017, 2018, 2019, 2021, 2022, 2023, 2024};
    return seasons;
}

inline SeasonSet make_season_set(std::vector<int> years) {
    std::sort(years.begin(), years.end());
    years.erase(std::unique(years.begin(), years.end()), years.end());
    for (int y : years) {
        if (!is_analysis_season(y)) {
            raise(errc::invariant_violation,
                  "season " + std::to_string(y) + " is not a valid analysis season");
        }
    }
    return years;
}

// The season one full season earlier: ordinary year-minus-one except across
// the 2020 gap, where 2021's previous full season is 2019.
inline int previous_full_season(int year) {
    if (!is_analysis_season(year) || year == kFirstSeason) {
        raise(errc::missing_season,
              "no previous full season before " + std::to_string(year));
    }
    return year == 2021 ? 2019 : year - 1;
}

inline bool consecutive_analysis_pair(int pre, int post) {
    return is_analysis_season(pre) && is_analysis_season(post) &&
           (post == pre + 1 || (pre == 2019 && post == 2021));
}

}  // namespace panelcause
