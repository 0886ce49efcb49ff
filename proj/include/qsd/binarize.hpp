#pragma once

// Standardisation, thresholding and polarity alignment of encoded features,
// plus information-gain ranking of the resulting binary features.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qsd/bitset.hpp"
#include "qsd/encoding.hpp"
#include "qsd/entropy.hpp"
#include "qsd/error.hpp"

namespace qsd {

enum class ThresholdStrategy { Mean, EntropyOptimal };

inline std::string_view to_string(ThresholdStrategy s) {
    return s == ThresholdStrategy::Mean ? "mean" : "entropy";
}

inline ThresholdStrategy parse_threshold_strategy(std::string_view s) {
    if (s == "mean") return ThresholdStrategy::Mean;
    if (s == "entropy" || s == "entropy-optimal" || s == "entropy_optimal") return ThresholdStrategy::EntropyOptimal;
    throw ConfigError("unknown threshold strategy '" + std::string(s) + "'");
}

/// Which side of the threshold becomes 1. `Both` defers to alignment.
enum class BinarySide { Zero, One, Both };

inline BinarySide parse_binary_side(std::string_view s) {
    if (s == "0") return BinarySide::Zero;
    if (s == "1") return BinarySide::One;
    if (s == "both") return BinarySide::Both;
    throw ConfigError("binary side must be 0, 1 or both, got '" + std::string(s) + "'");
}

inline std::string_view to_string(BinarySide s) {
    switch (s) {
        case BinarySide::Zero: return "0";
        case BinarySide::One: return "1";
        case BinarySide::Both: return "both";
    }
    return "?";
}

inline constexpr std::size_t kMaxSplitCandidates = 200;

struct FeatureBinarization {
    std::string name;
    double mean = 0.0;
    double std = 0.0;
    double threshold = 0.0;    // in scaled space
    bool greater = true;       // true: scaled > threshold maps to 1
    bool constant = false;     // zero variance on train; binarizes to all zeros
};

struct BinarizationModel {
    std::vector<FeatureBinarization> features;
    ThresholdStrategy strategy = ThresholdStrategy::Mean;
    bool aligned = false;
};

/// Binary feature matrix (column bitsets) with binary labels.
struct BinaryDataset {
    std::vector<BitColumn> columns;
    std::vector<std::string> feature_names;
    BitColumn labels;
    std::size_t positives = 0;

    std::size_t rows() const { return labels.size(); }
    std::size_t features() const { return columns.size(); }
    double baseline_rate() const {
        return rows() == 0 ? 0.0 : static_cast<double>(positives) / static_cast<double>(rows());
    }

    std::size_t feature_index(std::string_view name) const {
        for (std::size_t j = 0; j < feature_names.size(); ++j)
            if (feature_names[j] == name) return j;
        throw DataError("feature '" + std::string(name) + "' is not present");
    }

    /// Build from dense 0/1 rows (row-major). Mostly used by tests.
    static BinaryDataset from_dense(const std::vector<std::vector<int>>& rows, const std::vector<int>& y,
                                    std::vector<std::string> names = {}) {
        BinaryDataset bd;
        const std::size_t n_rows = y.size();
        const std::size_t n_feat = rows.empty() ? names.size() : rows.front().size();
        if (names.empty())
            for (std::size_t j = 0; j < n_feat; ++j) names.push_back("f" + std::to_string(j));
        bd.feature_names = std::move(names);
        bd.columns.assign(n_feat, BitColumn(n_rows));
        bd.labels = BitColumn(n_rows);
        for (std::size_t i = 0; i < n_rows; ++i) {
            for (std::size_t j = 0; j < n_feat; ++j)
                if (rows[i][j]) bd.columns[j].set(i);
            if (y[i]) {
                bd.labels.set(i);
                ++bd.positives;
            }
        }
        return bd;
    }
};

namespace detail {

inline void mean_std(const std::vector<double>& v, double& mean, double& sd) {
    if (v.empty()) {
        mean = 0.0;
        sd = 0.0;
        return;
    }
    const double n = static_cast<double>(v.size());
    mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / n);
}

inline double scale(double x, const FeatureBinarization& f) { return (x - f.mean) / f.std; }

/// Entropy-optimal split of scaled values: evaluates min(200, #distinct)
/// evenly spaced candidates strictly inside [min, max]. Ties keep the
/// smaller threshold.
inline double entropy_optimal_threshold(const std::vector<double>& scaled, const std::vector<std::uint8_t>& y) {
    std::vector<std::size_t> order(scaled.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scaled[a] < scaled[b]; });
    std::vector<double> sorted(scaled.size());
    std::vector<std::size_t> pos_prefix(scaled.size() + 1, 0);
    std::size_t distinct = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        sorted[k] = scaled[order[k]];
        pos_prefix[k + 1] = pos_prefix[k] + y[order[k]];
        if (k == 0 || sorted[k] != sorted[k - 1]) ++distinct;
    }
    const double lo = sorted.front();
    const double hi = sorted.back();
    const std::size_t m = std::min(kMaxSplitCandidates, distinct);
    const std::size_t total_pos = pos_prefix.back();

    double best_t = 0.0;
    double best_ig = -1.0;
    for (std::size_t j = 1; j <= m; ++j) {
        const double t = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(m + 1);
        const auto first_above = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), t) -
                                                          sorted.begin());
        SplitCounts c{sorted.size() - first_above, total_pos - pos_prefix[first_above], sorted.size(), total_pos};
        const double ig = information_gain(c);
        if (ig > best_ig) {
            best_ig = ig;
            best_t = t;
        }
    }
    return best_t;
}

}  // namespace detail

/// Fit scaler statistics, thresholds and (optionally) aligned polarity on
/// training data.
inline BinarizationModel fit_binarization(const EncodedDataset& train, ThresholdStrategy strategy, bool align) {
    if (train.rows() == 0) throw DataError("cannot fit binarization on an empty training set");
    BinarizationModel model;
    model.strategy = strategy;
    model.aligned = align;
    const std::size_t n = train.rows();
    std::size_t total_pos = 0;
    for (auto v : train.labels) total_pos += v;
    const double p0 = static_cast<double>(total_pos) / static_cast<double>(n);

    for (std::size_t j = 0; j < train.cols(); ++j) {
        FeatureBinarization f;
        f.name = train.column_names[j];
        detail::mean_std(train.columns[j], f.mean, f.std);
        if (!(f.std > 0.0)) {
            f.constant = true;
            f.std = 0.0;
            warn("column '" + f.name + "' is constant on train; binarized to all zeros");
            model.features.push_back(std::move(f));
            continue;
        }
        std::vector<double> scaled(n);
        for (std::size_t i = 0; i < n; ++i) scaled[i] = detail::scale(train.columns[j][i], f);
        f.threshold = strategy == ThresholdStrategy::Mean ? 0.0 : detail::entropy_optimal_threshold(scaled, train.labels);

        if (align) {
            std::size_t above = 0;
            std::size_t above_pos = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (scaled[i] > f.threshold) {
                    ++above;
                    above_pos += train.labels[i];
                }
            }
            // Attack rate of {x > t} at or above baseline keeps ">"; otherwise the
            // complement side is the attack-like one.
            f.greater = above > 0 && static_cast<double>(above_pos) >= p0 * static_cast<double>(above);
        }
        model.features.push_back(std::move(f));
    }
    return model;
}

/// Binarize a dataset with a fitted model. side=One keeps the fitted
/// polarity, side=Zero complements every column, side=Both requires an
/// aligned model.
inline BinaryDataset apply_binarization(const BinarizationModel& model, const EncodedDataset& ds,
                                        BinarySide side = BinarySide::One) {
    if (side == BinarySide::Both && !model.aligned)
        throw ConfigError("binary side 'both' requires directional alignment");
    if (ds.column_names.size() != model.features.size())
        throw DataError("column count mismatch: model has " + std::to_string(model.features.size()) +
                        ", data has " + std::to_string(ds.column_names.size()));
    for (std::size_t j = 0; j < model.features.size(); ++j) {
        if (ds.column_names[j] != model.features[j].name)
            throw DataError("column mismatch at " + std::to_string(j) + ": model '" + model.features[j].name +
                            "' vs data '" + ds.column_names[j] + "'");
    }

    const std::size_t n = ds.rows();
    BinaryDataset bd;
    bd.labels = BitColumn(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (ds.labels[i]) {
            bd.labels.set(i);
            ++bd.positives;
        }
    }
    for (std::size_t j = 0; j < model.features.size(); ++j) {
        const auto& f = model.features[j];
        BitColumn col(n);
        if (!f.constant) {
            for (std::size_t i = 0; i < n; ++i) {
                const bool above = detail::scale(ds.columns[j][i], f) > f.threshold;
                col.set(i, above == f.greater);
            }
            if (side == BinarySide::Zero) col = col.flipped();
        }
        bd.columns.push_back(std::move(col));
        bd.feature_names.push_back(f.name);
    }
    return bd;
}

/// Keep the named features, in the given order.
inline BinaryDataset select_features(const BinaryDataset& bd, const std::vector<std::string>& names) {
    BinaryDataset out;
    out.labels = bd.labels;
    out.positives = bd.positives;
    for (const auto& name : names) {
        out.columns.push_back(bd.columns[bd.feature_index(name)]);
        out.feature_names.push_back(name);
    }
    return out;
}

struct RankedFeature {
    std::string name;
    double ig = 0.0;
};

struct FeatureRanking {
    double label_entropy = 0.0;            // H(Y), bits
    std::vector<RankedFeature> features;   // IG descending, ties by name
};

inline SplitCounts split_counts(const BinaryDataset& bd, std::size_t j) {
    SplitCounts c;
    c.total = bd.rows();
    c.total_positive = bd.positives;
    const auto& w = bd.columns[j].words();
    const auto& yw = bd.labels.words();
    for (std::size_t k = 0; k < w.size(); ++k) {
        c.ones += static_cast<std::size_t>(std::popcount(w[k]));
        c.ones_positive += static_cast<std::size_t>(std::popcount(w[k] & yw[k]));
    }
    return c;
}

inline double feature_information_gain(const BinaryDataset& bd, std::size_t j) {
    return information_gain(split_counts(bd, j));
}

/// Rank binary features by IG and keep the top `k_feat`. Features that are
/// constant on this dataset are excluded from the ranking.
inline std::pair<BinaryDataset, FeatureRanking> rank_and_select(const BinaryDataset& bd, std::size_t k_feat) {
    FeatureRanking ranking;
    ranking.label_entropy = binary_entropy(bd.positives, bd.rows());
    for (std::size_t j = 0; j < bd.features(); ++j) {
        const auto c = split_counts(bd, j);
        if (c.ones == 0 || c.ones == c.total) continue;
        ranking.features.push_back({bd.feature_names[j], information_gain(c)});
    }
    std::sort(ranking.features.begin(), ranking.features.end(), [](const auto& a, const auto& b) {
        if (a.ig != b.ig) return a.ig > b.ig;
        return a.name < b.name;
    });
    if (k_feat < 1 || k_feat > ranking.features.size())
        throw ConfigError("K_feat=" + std::to_string(k_feat) + " must lie in [1, " +
                          std::to_string(ranking.features.size()) + "] (non-constant features)");
    std::vector<std::string> keep;
    for (std::size_t i = 0; i < k_feat; ++i) keep.push_back(ranking.features[i].name);
    return {select_features(bd, keep), std::move(ranking)};
}

/// Text artifact: one CSV row per feature, round-trippable bit-for-bit.
inline std::string serialize(const BinarizationModel& m) {
    std::ostringstream os;
    os << "# binarization strategy=" << to_string(m.strategy) << " aligned=" << (m.aligned ? 1 : 0) << '\n';
    os << "feature,mean,std,threshold,polarity,constant\n";
    char buf[128];
    for (const auto& f : m.features) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", f.mean, f.std, f.threshold);
        os << f.name << ',' << buf << ',' << (f.greater ? "gt" : "le") << ',' << (f.constant ? 1 : 0) << '\n';
    }
    return os.str();
}

inline BinarizationModel parse_binarization_model(const std::string& text) {
    BinarizationModel m;
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line.rfind("# binarization", 0) != 0)
        throw ParseError("binarization model: missing header");
    m.strategy = line.find("strategy=entropy") != std::string::npos ? ThresholdStrategy::EntropyOptimal
                                                                    : ThresholdStrategy::Mean;
    m.aligned = line.find("aligned=1") != std::string::npos;
    std::getline(is, line);  // column header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> parts;
        std::stringstream ls(line);
        std::string part;
        while (std::getline(ls, part, ',')) parts.push_back(part);
        if (parts.size() != 6) throw ParseError("binarization model: bad row '" + line + "'");
        FeatureBinarization f;
        f.name = parts[0];
        f.mean = std::strtod(parts[1].c_str(), nullptr);
        f.std = std::strtod(parts[2].c_str(), nullptr);
        f.threshold = std::strtod(parts[3].c_str(), nullptr);
        f.greater = parts[4] == "gt";
        f.constant = parts[5] == "1";
        m.features.push_back(std::move(f));
    }
    return m;
}

}  // namespace qsd
