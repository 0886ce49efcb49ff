#pragma once

// Categorical encoding with information-gain pruning, and attack-family
// filtering of encoded datasets.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qsd/entropy.hpp"
#include "qsd/error.hpp"
#include "qsd/nslkdd.hpp"

namespace qsd {

/// Column-major numeric dataset with binary attack labels.
struct EncodedDataset {
    std::vector<std::vector<double>> columns;  // M columns of N values
    std::vector<std::string> column_names;
    std::vector<std::uint8_t> labels;          // 1 iff attack
    std::vector<AttackFamily> families;

    std::size_t rows() const { return labels.size(); }
    std::size_t cols() const { return columns.size(); }

    std::size_t column_index(std::string_view name) const {
        for (std::size_t j = 0; j < column_names.size(); ++j)
            if (column_names[j] == name) return j;
        throw DataError("no column named '" + std::string(name) + "'");
    }
};

/// Retained categories per categorical feature, fitted on training data.
struct CategoricalEncoder {
    struct Column {
        std::string feature;                  // e.g. "service"
        std::vector<std::string> categories;  // retained, in column order
        std::vector<double> category_ig;      // IG of each retained indicator
        std::size_t distinct = 0;             // distinct values seen at fit time
        bool pruned = false;
    };
    std::array<Column, kCategoricalCount> columns;
    double ig_coverage = 0.9;
};

inline constexpr std::size_t kFullOneHotMaxCardinality = 5;

/// Per-category IG of the indicator 1[value == category] against the attack
/// label, sorted by IG descending with ties broken by category name.
inline std::vector<std::pair<std::string, double>> rank_categories_by_ig(const std::vector<std::string>& values,
                                                                         const std::vector<std::uint8_t>& labels) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // total, positive
    std::size_t positives = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto& c = counts[values[i]];
        ++c.first;
        c.second += labels[i];
        positives += labels[i];
    }
    std::vector<std::pair<std::string, double>> ranked;
    ranked.reserve(counts.size());
    for (const auto& [cat, c] : counts) {
        SplitCounts s{c.first, c.second, values.size(), positives};
        ranked.emplace_back(cat, information_gain(s));
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return ranked;
}

/// Fit which one-hot columns each categorical feature produces.
inline CategoricalEncoder fit_categorical_encoder(const RawDataset& raw, double ig_coverage) {
    if (!(ig_coverage > 0.0 && ig_coverage <= 1.0))
        throw ConfigError("ig_coverage must lie in (0, 1], got " + std::to_string(ig_coverage));

    CategoricalEncoder enc;
    enc.ig_coverage = ig_coverage;
    std::vector<std::uint8_t> labels(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) labels[i] = raw.records[i].is_attack() ? 1 : 0;

    for (std::size_t c = 0; c < kCategoricalCount; ++c) {
        auto& col = enc.columns[c];
        col.feature = std::string(kFeatureNames[kCategoricalPositions[c]]);
        std::vector<std::string> values(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) values[i] = raw.records[i].categorical[c];

        auto ranked = rank_categories_by_ig(values, labels);
        col.distinct = ranked.size();
        if (ranked.empty()) continue;

        if (ranked.size() == 1) {
            warn("categorical column '" + col.feature + "' has a single value '" + ranked[0].first +
                 "'; emitting one constant column");
            col.categories = {ranked[0].first};
            col.category_ig = {ranked[0].second};
            continue;
        }

        if (ranked.size() <= kFullOneHotMaxCardinality) {
            std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
            for (const auto& [cat, ig] : ranked) {
                col.categories.push_back(cat);
                col.category_ig.push_back(ig);
            }
            continue;
        }

        double total = 0.0;
        for (const auto& r : ranked) total += r.second;
        const double target = ig_coverage * total;
        double cumulative = 0.0;
        for (const auto& [cat, ig] : ranked) {
            col.categories.push_back(cat);
            col.category_ig.push_back(ig);
            cumulative += ig;
            // Relative slack absorbs summation-order rounding at coverage = 1.
            if (cumulative >= target * (1.0 - 1e-12)) break;
        }
        col.pruned = col.categories.size() < ranked.size();
    }
    return enc;
}

/// Apply a fitted encoder. Categories not retained (or unseen at fit time)
/// map to the all-zeros reference class.
inline EncodedDataset encode(const CategoricalEncoder& enc, const RawDataset& raw) {
    EncodedDataset ds;
    const std::size_t n = raw.size();
    ds.labels.resize(n);
    ds.families.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ds.labels[i] = raw.records[i].is_attack() ? 1 : 0;
        ds.families[i] = raw.records[i].family;
    }

    std::size_t num = 0;
    std::size_t cat = 0;
    for (std::size_t pos = 0; pos < kFeatureCount; ++pos) {
        if (!is_categorical_position(pos)) {
            std::vector<double> col(n);
            for (std::size_t i = 0; i < n; ++i) col[i] = raw.records[i].numeric[num];
            ds.columns.push_back(std::move(col));
            ds.column_names.emplace_back(kFeatureNames[pos]);
            ++num;
            continue;
        }
        const auto& spec = enc.columns[cat];
        for (const auto& category : spec.categories) {
            std::vector<double> col(n);
            for (std::size_t i = 0; i < n; ++i) col[i] = raw.records[i].categorical[cat] == category ? 1.0 : 0.0;
            ds.columns.push_back(std::move(col));
            ds.column_names.push_back(spec.feature + "_" + category);
        }
        ++cat;
    }
    return ds;
}

/// Fit and apply in one step.
inline EncodedDataset encode_categoricals(const RawDataset& raw, double ig_coverage) {
    return encode(fit_categorical_encoder(raw, ig_coverage), raw);
}

enum class AttackFilter { All, DoS, Probe, R2L, U2R };

inline std::string_view to_string(AttackFilter f) {
    switch (f) {
        case AttackFilter::All: return "all";
        case AttackFilter::DoS: return "DoS";
        case AttackFilter::Probe: return "Probe";
        case AttackFilter::R2L: return "R2L";
        case AttackFilter::U2R: return "U2R";
    }
    return "?";
}

inline AttackFilter parse_attack_filter(std::string_view s) {
    if (s == "all") return AttackFilter::All;
    if (s == "DoS" || s == "dos") return AttackFilter::DoS;
    if (s == "Probe" || s == "probe") return AttackFilter::Probe;
    if (s == "R2L" || s == "r2l") return AttackFilter::R2L;
    if (s == "U2R" || s == "u2r") return AttackFilter::U2R;
    throw ConfigError("unknown attack filter '" + std::string(s) + "'");
}

inline AttackFamily family_for(AttackFilter f) {
    switch (f) {
        case AttackFilter::DoS: return AttackFamily::DoS;
        case AttackFilter::Probe: return AttackFamily::Probe;
        case AttackFilter::R2L: return AttackFamily::R2L;
        case AttackFilter::U2R: return AttackFamily::U2R;
        default: return AttackFamily::Normal;
    }
}

/// Restrict to normal plus one attack family and recompute labels.
/// mode=all is the identity. Throws if no attack rows remain.
inline EncodedDataset filter_attacks(const EncodedDataset& ds, AttackFilter f) {
    if (ds.families.size() != ds.rows()) throw DataError("dataset lacks attack-family tags");
    if (f == AttackFilter::All) {
        if (std::find(ds.labels.begin(), ds.labels.end(), 1) == ds.labels.end())
            throw DataError("dataset contains no attack records");
        return ds;
    }
    const AttackFamily keep = family_for(f);
    std::vector<std::size_t> rows;
    std::size_t attacks = 0;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        if (ds.families[i] == AttackFamily::Normal || ds.families[i] == keep) {
            rows.push_back(i);
            attacks += ds.families[i] == keep ? 1 : 0;
        }
    }
    if (attacks == 0)
        throw DataError("attack filter '" + std::string(to_string(f)) + "' leaves no attack records");

    EncodedDataset out;
    out.column_names = ds.column_names;
    out.columns.resize(ds.cols());
    for (std::size_t j = 0; j < ds.cols(); ++j) {
        out.columns[j].reserve(rows.size());
        for (auto r : rows) out.columns[j].push_back(ds.columns[j][r]);
    }
    out.labels.reserve(rows.size());
    out.families.reserve(rows.size());
    for (auto r : rows) {
        out.labels.push_back(ds.families[r] == keep ? 1 : 0);
        out.families.push_back(ds.families[r]);
    }
    return out;
}

/// Select a subset of rows (used for held-out splits).
inline EncodedDataset take_rows(const EncodedDataset& ds, const std::vector<std::size_t>& rows) {
    EncodedDataset out;
    out.column_names = ds.column_names;
    out.columns.resize(ds.cols());
    for (std::size_t j = 0; j < ds.cols(); ++j) {
        out.columns[j].reserve(rows.size());
        for (auto r : rows) out.columns[j].push_back(ds.columns[j][r]);
    }
    for (auto r : rows) {
        out.labels.push_back(ds.labels[r]);
        out.families.push_back(ds.families[r]);
    }
    return out;
}

}  // namespace qsd
