#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "panelcause/csv.hpp"
#include "panelcause/panel.hpp"
#include "panelcause/types.hpp"

namespace panelcause {

inline constexpr int kDefaultMinPa = 250;

inline const std::vector<std::string>& league_splits_header() {
    static const std::vector<std::string> header = {
        "season", "handedness", "split", "pa",   "pa_share", "babip", "obp",
        "avg",    "slg",        "ops",   "woba", "bb_pct",   "k_pct"};
    return header;
}

// Reads the league splits file: one row per (season, handedness), bases-empty
// only, rates in decimal form. Returns one series per (population, outcome).
// A 2020 row is an invariant violation, not a skip.
inline std::vector<LeagueSplitSeries> load_league_splits(const std::filesystem::path& path) {
    csv::Table table = csv::read_table(path);
    csv::expect_header(table, league_splits_header(), path.string());
    const std::string ctx = path.string();

    static constexpr Outcome kColumnOutcomes[] = {Outcome::BABIP, Outcome::OBP,    Outcome::AVG,
                                                  Outcome::SLG,   Outcome::OPS,    Outcome::WOBA,
                                                  Outcome::BB_PCT, Outcome::K_PCT};

    std::map<std::pair<Population, Outcome>, LeagueSplitSeries> series;
    std::set<std::pair<Population, int>> seen;
    for (size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const size_t line = i + 2;
        const int season = csv::parse_int(row[0], ctx, line, 1);
        if (season == kExcludedSeason) {
            raise(errc::invariant_violation,
                  ctx + ": line " + std::to_string(line) + ": season 2020 is excluded from analysis");
        }
        if (!is_analysis_season(season)) {
            csv::bad_field(ctx, line, 1, "season " + row[0] + " outside 2015-2024");
        }
        Population population;
        if (row[1] == "L") {
            population = Population::LHB;
        } else if (row[1] == "R") {
            population = Population::RHB;
        } else {
            csv::bad_field(ctx, line, 2, "handedness must be L or R, got `" + row[1] + "`");
        }
        if (row[2] != "bases_empty") {
            csv::bad_field(ctx, line, 3, "split must be `bases_empty`, got `" + row[2] + "`");
        }
        if (!seen.insert({population, season}).second) {
            csv::bad_field(ctx, line, 1, "duplicate (season, handedness) row");
        }
        const int pa = csv::parse_int(row[3], ctx, line, 4);
        if (pa < 0) csv::bad_field(ctx, line, 4, "negative PA count");
        const double share = csv::parse_double(row[4], ctx, line, 5);
        for (size_t c = 0; c < 8; ++c) {
            const double value = csv::parse_double(row[5 + c], ctx, line, 6 + c);
            auto& s = series[{population, kColumnOutcomes[c]}];
            s.population = population;
            s.outcome = kColumnOutcomes[c];
            s.values[season] = value;
            s.pa_share[season] = share;
        }
    }

    std::vector<LeagueSplitSeries> out;
    out.reserve(series.size());
    for (auto& [key, s] : series) {
        validate_series(s);
        out.push_back(std::move(s));
    }
    return out;
}

inline const LeagueSplitSeries* find_series(const std::vector<LeagueSplitSeries>& all,
                                            Population population, Outcome outcome) {
    for (const auto& s : all) {
        if (s.population == population && s.outcome == outcome) return &s;
    }
    return nullptr;
}

// player_id -> season -> bases-empty shift rate.
using ShiftRateTable = std::map<std::string, std::map<int, double>>;

inline ShiftRateTable load_shift_rates(const std::filesystem::path& path) {
    csv::Table table = csv::read_table(path);
    csv::expect_header(table, {"player_id", "season", "shift_pct"}, path.string());
    const std::string ctx = path.string();
    ShiftRateTable rates;
    for (size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const size_t line = i + 2;
        const int season = csv::parse_int(row[1], ctx, line, 2);
        const double rate = csv::parse_double(row[2], ctx, line, 3);
        if (rate < 0.0 || rate > 1.0) {
            csv::bad_field(ctx, line, 3, "shift rate outside [0,1]");
        }
        if (!rates[row[0]].emplace(season, rate).second) {
            csv::bad_field(ctx, line, 1, "duplicate shift rate for " + row[0]);
        }
    }
    return rates;
}

// The player's analysis seasons with at least min_pa plate appearances.
// Idempotent: feeding the result back through changes nothing.
inline SeasonSet eligible_seasons(const PanelDataset::History& history,
                                  int min_pa = kDefaultMinPa) {
    SeasonSet seasons;
    for (const auto& [season, ps] : history) {
        if (is_analysis_season(season) && ps.pa >= min_pa) seasons.push_back(season);
    }
    return seasons;  // map iteration is already sorted and unique
}

inline const SeasonSet& default_cohort_gate_seasons() {
    static const SeasonSet gate = {2021, 2022, 2023};
    return gate;
}

// Rates every player in the shift table by 2022 bases-empty shift rate.
// Players without min_pa in each gate season are dropped before rating; a
// gated player with no 2022 rate is an error.
inline std::vector<ShiftCohort> build_cohorts(const ShiftRateTable& shift_rates,
                                              const PanelDataset& panel,
                                              const CohortBounds& bounds = {},
                                              int min_pa = kDefaultMinPa,
                                              const SeasonSet& gate_seasons =
                                                  default_cohort_gate_seasons()) {
    validate_bounds(bounds);
    std::vector<ShiftCohort> cohorts;
    for (const auto& [player_id, by_season] : shift_rates) {
        bool gated = true;
        for (int season : gate_seasons) {
            if (!panel.covered(player_id, season, min_pa)) {
                gated = false;
                break;
            }
        }
        if (!gated) continue;
        auto it = by_season.find(2022);
        if (it == by_season.end()) {
            raise(errc::missing_shift_rate, "player " + player_id + " has no 2022 shift rate");
        }
        cohorts.push_back({player_id, it->second, classify_shift_rate(it->second, bounds)});
    }
    return cohorts;  // sorted by player_id via map order
}

inline std::vector<std::string> cohort_members(const std::vector<ShiftCohort>& cohorts,
                                               CohortLabel label) {
    std::vector<std::string> ids;
    for (const auto& c : cohorts) {
        if (c.cohort == label) ids.push_back(c.player_id);
    }
    return ids;
}

// Donor pool for one target: the control players covering every required
// season at min_pa. Controls without full coverage are excluded outright,
// which is the same thing as pinning their weight to zero.
struct DonorPool {
    std::string target_id;
    SeasonSet required_seasons;
    std::vector<std::string> donor_ids;
};

inline DonorPool build_donor_pool(const std::string& target_id,
                                  const std::vector<std::string>& controls,
                                  const PanelDataset& panel, SeasonSet required_seasons,
                                  int min_pa = kDefaultMinPa) {
    DonorPool pool;
    pool.target_id = target_id;
    pool.required_seasons = make_season_set(std::move(required_seasons));
    for (const std::string& id : controls) {
        if (id == target_id) continue;
        bool covers = true;
        for (int season : pool.required_seasons) {
            if (!panel.covered(id, season, min_pa)) {
                covers = false;
                break;
            }
        }
        if (covers) pool.donor_ids.push_back(id);
    }
    std::sort(pool.donor_ids.begin(), pool.donor_ids.end());
    pool.donor_ids.erase(std::unique(pool.donor_ids.begin(), pool.donor_ids.end()),
                         pool.donor_ids.end());
    if (pool.donor_ids.empty()) {
        raise(errc::empty_donor_pool, "no donors cover the required seasons for " + target_id);
    }
    return pool;
}

}  // namespace panelcause
