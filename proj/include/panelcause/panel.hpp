#pragma once

#include <map>
#include <string>
#include <vector>

#include "panelcause/csv.hpp"
#include "panelcause/types.hpp"

namespace panelcause {

struct PanelValidation;
PanelValidation validate_panel(const std::vector<PlayerSeason>& records);

// Validated, immutable player-season panel keyed by (player, season).
// Construct through validate_panel; afterwards the dataset is read-only and
// safe to share across threads.
class PanelDataset {
  public:
    using History = std::map<int, PlayerSeason>;

    const std::map<std::string, History>& players() const { return players_; }

    const History* history(const std::string& player_id) const {
        auto it = players_.find(player_id);
        return it == players_.end() ? nullptr : &it->second;
    }

    const PlayerSeason* find(const std::string& player_id, int season) const {
        const History* h = history(player_id);
        if (!h) return nullptr;
        auto it = h->find(season);
        return it == h->end() ? nullptr : &it->second;
    }

    // Record (player, season) exists with at least min_pa plate appearances.
    bool covered(const std::string& player_id, int season, int min_pa) const {
        const PlayerSeason* ps = find(player_id, season);
        return ps != nullptr && ps->pa >= min_pa;
    }

    std::size_t size() const { return size_; }

    std::vector<PlayerSeason> records() const {
        std::vector<PlayerSeason> out;
        out.reserve(size_);
        for (const auto& [id, history] : players_) {
            for (const auto& [season, ps] : history) out.push_back(ps);
        }
        return out;
    }

  private:
    friend PanelValidation validate_panel(const std::vector<PlayerSeason>& records);

    std::map<std::string, History> players_;
    std::size_t size_ = 0;
};

struct ValidationIssue {
    errc kind = errc::invariant_violation;
    std::string player_id;
    int season = 0;
    std::string field;
    std::string detail;
};

struct PanelValidation {
    PanelDataset dataset;
    std::vector<ValidationIssue> issues;
};

// Admits records that satisfy every type invariant; rejects the rest with
// itemized diagnostics. On duplicate (player, season) the first record wins
// and later copies are flagged.
inline PanelValidation validate_panel(const std::vector<PlayerSeason>& records) {
    PanelValidation out;
    for (const PlayerSeason& ps : records) {
        if (auto violation = first_violation(ps)) {
            out.issues.push_back({errc::invariant_violation, ps.player_id, ps.season,
                                  violation->first, violation->second});
            continue;
        }
        auto& history = out.dataset.players_[ps.player_id];
        auto [it, inserted] = history.emplace(ps.season, ps);
        (void)it;
        if (!inserted) {
            out.issues.push_back({errc::duplicate_record, ps.player_id, ps.season, "",
                                  "duplicate (player, season) record"});
            continue;
        }
        ++out.dataset.size_;
    }
    return out;
}

inline const std::vector<std::string>& player_seasons_header() {
    static const std::vector<std::string> header = {
        "player_id", "name", "season", "age",    "pa",  "hits", "singles",
        "home_runs", "bb_pct", "k_pct", "obp", "ops", "woba"};
    return header;
}

inline std::vector<PlayerSeason> parse_player_seasons(const std::filesystem::path& path) {
    csv::Table table = csv::read_table(path);
    csv::expect_header(table, player_seasons_header(), path.string());
    const std::string ctx = path.string();
    std::vector<PlayerSeason> records;
    records.reserve(table.rows.size());
    for (size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const size_t line = i + 2;
        PlayerSeason ps;
        ps.player_id = row[0];
        ps.name = row[1];
        ps.season = csv::parse_int(row[2], ctx, line, 3);
        ps.age = csv::parse_int(row[3], ctx, line, 4);
        ps.pa = csv::parse_int(row[4], ctx, line, 5);
        ps.hits = csv::parse_int(row[5], ctx, line, 6);
        ps.singles = csv::parse_int(row[6], ctx, line, 7);
        ps.home_runs = csv::parse_int(row[7], ctx, line, 8);
        ps.bb_pct = csv::parse_double(row[8], ctx, line, 9);
        ps.k_pct = csv::parse_double(row[9], ctx, line, 10);
        ps.obp = csv::parse_double(row[10], ctx, line, 11);
        ps.ops = csv::parse_double(row[11], ctx, line, 12);
        ps.woba = csv::parse_double(row[12], ctx, line, 13);
        records.push_back(std::move(ps));
    }
    return records;
}

// Full-precision serialization; parse(serialize(panel)) reproduces the panel
// record for record, bit for bit.
inline std::string serialize_player_seasons(const PanelDataset& panel) {
    std::string out;
    for (size_t i = 0; i < player_seasons_header().size(); ++i) {
        if (i) out += ',';
        out += player_seasons_header()[i];
    }
    out += '\n';
    for (const auto& [id, history] : panel.players()) {
        for (const auto& [season, ps] : history) {
            out += ps.player_id;
            out += ',';
            out += ps.name;
            out += ',';
            out += std::to_string(ps.season);
            out += ',';
            out += std::to_string(ps.age);
            out += ',';
            out += std::to_string(ps.pa);
            out += ',';
            out += std::to_string(ps.hits);
            out += ',';
            out += std::to_string(ps.singles);
            out += ',';
            out += std::to_string(ps.home_runs);
            out += ',';
            out += csv::format_double(ps.bb_pct);
            out += ',';
            out += csv::format_double(ps.k_pct);
            out += ',';
            out += csv::format_double(ps.obp);
            out += ',';
            out += csv::format_double(ps.ops);
            out += ',';
            out += csv::format_double(ps.woba);
            out += '\n';
        }
    }
    return out;
}

}  // namespace panelcause
