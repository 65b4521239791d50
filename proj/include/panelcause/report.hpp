#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "panelcause/config.hpp"
#include "panelcause/did.hpp"
#include "panelcause/inference.hpp"
#include "panelcause/scm.hpp"

namespace panelcause {

using Json = nlohmann::ordered_json;

// FNV-1a, used to stamp reports with config and input-file fingerprints.
inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string fnv1a64_hex(const std::string& bytes) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(bytes);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(errc::io_error, "cannot open " + path.string());
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        raise(errc::io_error, "cannot write " + path.string());
    }
    out << text;
}

inline std::string did_report_csv(const std::vector<DidResult>& results) {
    std::string out =
        "outcome,post_year,pre_year,lhb_pre,lhb_post,rhb_pre,rhb_post,did_estimate,"
        "counterfactual_lhb_post,kind\n";
    for (const DidResult& r : results) {
        out += to_string(r.outcome);
        out += ',' + std::to_string(r.post_year);
        out += ',' + std::to_string(r.pre_year);
        out += ',' + csv::format_double(r.lhb_pre);
        out += ',' + csv::format_double(r.lhb_post);
        out += ',' + csv::format_double(r.rhb_pre);
        out += ',' + csv::format_double(r.rhb_post);
        out += ',' + csv::format_double(r.did_estimate);
        out += ',' + csv::format_double(r.counterfactual_post_lhb);
        out += ',';
        out += to_string(r.kind);
        out += '\n';
    }
    return out;
}

inline Json did_result_json(const DidResult& r) {
    Json j;
    j["outcome"] = to_string(r.outcome);
    j["post_year"] = r.post_year;
    j["pre_year"] = r.pre_year;
    j["lhb_pre"] = r.lhb_pre;
    j["lhb_post"] = r.lhb_post;
    j["rhb_pre"] = r.rhb_pre;
    j["rhb_post"] = r.rhb_post;
    j["did_estimate"] = r.did_estimate;
    j["counterfactual_lhb_post"] = r.counterfactual_post_lhb;
    j["kind"] = to_string(r.kind);
    return j;
}

inline Json did_report_json(const std::vector<DidResult>& results) {
    Json j;
    Json caveats = Json::array();
    for (const std::string& caveat : did_assumption_caveats()) caveats.push_back(caveat);
    j["caveats"] = caveats;
    Json rows = Json::array();
    for (const DidResult& r : results) rows.push_back(did_result_json(r));
    j["estimates"] = rows;
    return j;
}

inline Json fit_json(const ScmFit& fit) {
    Json j;
    j["target"] = fit.target_id;
    j["outcome"] = to_string(fit.outcome);
    j["intervention_year"] = fit.intervention_year;
    j["effect_kind"] = to_string(fit.effect_kind);
    Json weights = Json::array();
    for (size_t i = 0; i < fit.donor_ids.size(); ++i) {
        Json w;
        w["donor"] = fit.donor_ids[i];
        w["weight"] = fit.donor_weights[i];
        weights.push_back(std::move(w));
    }
    j["donor_weights"] = weights;
    // Display list in the style of the published weight tables: donors below
    // 0.1% are omitted here, never zeroed in computation.
    Json reported = Json::array();
    for (size_t i = 0; i < fit.donor_ids.size(); ++i) {
        if (fit.donor_weights[i] < 0.001) continue;
        Json w;
        w["donor"] = fit.donor_ids[i];
        w["weight"] = fit.donor_weights[i];
        reported.push_back(std::move(w));
    }
    j["reported_donors"] = reported;
    Json importance = Json::array();
    for (size_t k = 0; k < fit.row_labels.size(); ++k) {
        Json v;
        v["row"] = fit.row_labels[k];
        v["weight"] = fit.importance_weights[k];
        importance.push_back(std::move(v));
    }
    j["importance_weights"] = importance;
    Json trajectory = Json::array();
    for (const auto& [season, synthetic] : fit.synthetic) {
        Json point;
        point["season"] = season;
        auto obs = fit.observed.find(season);
        if (obs != fit.observed.end()) {
            point["observed"] = obs->second;
        } else {
            point["observed"] = nullptr;
        }
        point["synthetic"] = synthetic;
        trajectory.push_back(std::move(point));
    }
    j["trajectory"] = trajectory;
    j["pre_rmspe"] = fit.pre_rmspe;
    j["inner_objective"] = fit.inner_objective;
    Json effects = Json::array();
    for (const EffectEstimate& e : fit.post_effects) {
        Json effect;
        effect["year"] = e.year;
        effect["estimate"] = e.estimate;
        effect["kind"] = to_string(e.kind);
        effects.push_back(std::move(effect));
    }
    j["effects"] = effects;
    return j;
}

inline Json fits_json(const std::vector<ScmFit>& fits) {
    Json array = Json::array();
    for (const ScmFit& fit : fits) array.push_back(fit_json(fit));
    return array;
}

// Distribution dump rows; targets and placebo units share the schema with an
// is_target marker. p-values for placebo rows rank the entry against the full
// distribution (itself included), so every denominator matches the targets'.
struct DistributionRow {
    std::string player_id;
    Outcome outcome = Outcome::OBP;
    double estimate = 0.0;
    double pre_rmspe = 0.0;
    std::optional<double> mspe_ratio;
    bool is_target = false;
    std::optional<double> p_value;
};

inline std::string distribution_csv(const std::vector<DistributionRow>& rows) {
    std::string out = "player_id,outcome,estimate,pre_rmspe,mspe_ratio,is_target,p_value\n";
    for (const DistributionRow& r : rows) {
        out += r.player_id;
        out += ',';
        out += to_string(r.outcome);
        out += ',' + csv::format_double(r.estimate);
        out += ',' + csv::format_double(r.pre_rmspe);
        out += ',';
        if (r.mspe_ratio) out += csv::format_double(*r.mspe_ratio);
        out += ',';
        out += r.is_target ? '1' : '0';
        out += ',';
        if (r.p_value) out += csv::format_double(*r.p_value);
        out += '\n';
    }
    return out;
}

inline Json distribution_json(const std::vector<DistributionRow>& rows,
                              const std::vector<PlaceboFailure>& failures) {
    Json j;
    j["caution"] = placebo_caution();
    Json entries = Json::array();
    for (const DistributionRow& r : rows) {
        Json e;
        e["player_id"] = r.player_id;
        e["outcome"] = to_string(r.outcome);
        e["estimate"] = r.estimate;
        e["pre_rmspe"] = r.pre_rmspe;
        if (r.mspe_ratio) {
            e["mspe_ratio"] = *r.mspe_ratio;
        } else {
            e["mspe_ratio"] = nullptr;
        }
        e["is_target"] = r.is_target;
        if (r.p_value) {
            e["p_value"] = *r.p_value;
        } else {
            e["p_value"] = nullptr;
        }
        entries.push_back(std::move(e));
    }
    j["entries"] = entries;
    Json fail = Json::array();
    for (const PlaceboFailure& f : failures) {
        Json e;
        e["player_id"] = f.player_id;
        e["reason"] = f.reason;
        fail.push_back(std::move(e));
    }
    j["failures"] = fail;
    return j;
}

inline std::string cohorts_csv(const std::vector<ShiftCohort>& cohorts) {
    std::string out = "player_id,shift_rate_2022,cohort\n";
    for (const ShiftCohort& c : cohorts) {
        out += c.player_id;
        out += ',' + csv::format_double(c.shift_rate_2022);
        out += ',';
        out += to_string(c.cohort);
        out += '\n';
    }
    return out;
}

inline std::string dose_response_csv(
    const std::vector<std::pair<Outcome, DoseResponseFit>>& fits) {
    std::string out = "outcome,slope,intercept,n\n";
    for (const auto& [outcome, fit] : fits) {
        out += to_string(outcome);
        out += ',' + csv::format_double(fit.slope);
        out += ',' + csv::format_double(fit.intercept);
        out += ',' + std::to_string(fit.n);
        out += '\n';
    }
    return out;
}

// Long-format figure data: figure,series,player_or_population,season,value.
struct FigureRow {
    std::string figure;
    std::string series;
    std::string unit;
    int season = 0;
    double value = 0.0;
};

inline std::string figure_csv(const std::vector<FigureRow>& rows) {
    std::string out = "figure,series,player_or_population,season,value\n";
    for (const FigureRow& r : rows) {
        out += r.figure;
        out += ',' + r.series;
        out += ',' + r.unit;
        out += ',' + std::to_string(r.season);
        out += ',' + csv::format_double(r.value);
        out += '\n';
    }
    return out;
}

}  // namespace panelcause
