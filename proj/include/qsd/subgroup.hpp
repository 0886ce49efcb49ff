#pragma once

// Conjunctive subgroups over binary features and their quality metrics.

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsd/binarize.hpp"
#include "qsd/error.hpp"

namespace qsd {

inline constexpr std::size_t kMaxMaskBits = 64;

/// A conjunction rule: bit i set means feature i must equal 1.
struct FeatureSubset {
    std::uint64_t mask = 0;

    std::size_t cardinality() const { return static_cast<std::size_t>(std::popcount(mask)); }
    bool contains(std::size_t i) const { return (mask >> i) & 1u; }
    bool empty() const { return mask == 0; }

    static FeatureSubset of(std::initializer_list<std::size_t> idx) {
        FeatureSubset s;
        for (auto i : idx) s.mask |= std::uint64_t{1} << i;
        return s;
    }

    std::vector<std::size_t> indices() const {
        std::vector<std::size_t> out;
        for (std::uint64_t m = mask; m != 0; m &= m - 1) out.push_back(static_cast<std::size_t>(std::countr_zero(m)));
        return out;
    }

    friend auto operator<=>(const FeatureSubset&, const FeatureSubset&) = default;
};

struct SubgroupMetrics {
    std::size_t size = 0;                  // |sg|
    std::size_t positives = 0;             // attacks inside sg
    double coverage = 0.0;                 // |sg| / N
    std::optional<double> positive_rate;   // undefined when |sg| = 0
    double contrast = 0.0;                 // |p(sg) - p0|
    double wracc = 0.0;                    // coverage * contrast
};

/// WRAcc and friends from raw counts.
inline SubgroupMetrics metrics_from_counts(std::size_t size, std::size_t positives, std::size_t n_rows,
                                           std::size_t n_positive) {
    SubgroupMetrics m;
    m.size = size;
    m.positives = positives;
    if (n_rows == 0 || size == 0) return m;
    const double n = static_cast<double>(n_rows);
    const double p0 = static_cast<double>(n_positive) / n;
    m.coverage = static_cast<double>(size) / n;
    m.positive_rate = static_cast<double>(positives) / static_cast<double>(size);
    m.contrast = std::abs(*m.positive_rate - p0);
    m.wracc = m.coverage * m.contrast;
    return m;
}

/// Member iff every selected binary feature is 1. The empty mask selects
/// every record.
inline BitColumn membership(const BinaryDataset& bd, FeatureSubset s) {
    BitColumn out(bd.rows());
    out.fill_all();
    auto& w = out.words();
    for (auto j : s.indices()) {
        const auto& c = bd.columns[j].words();
        for (std::size_t k = 0; k < w.size(); ++k) w[k] &= c[k];
    }
    return out;
}

inline SubgroupMetrics evaluate_subgroup(const BinaryDataset& bd, FeatureSubset s) {
    if (s.mask != 0 && 64 - std::countl_zero(s.mask) > static_cast<int>(bd.features()))
        throw DataError("subset mask references a feature beyond " + std::to_string(bd.features()));
    const auto idx = s.indices();
    const auto& yw = bd.labels.words();
    const std::size_t words = yw.size();
    const std::size_t tail = bd.rows() % 64;
    std::size_t size = 0;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < words; ++k) {
        std::uint64_t m = ~std::uint64_t{0};
        if (k + 1 == words && tail != 0) m = (std::uint64_t{1} << tail) - 1;
        for (auto j : idx) m &= bd.columns[j].words()[k];
        size += static_cast<std::size_t>(std::popcount(m));
        pos += static_cast<std::size_t>(std::popcount(m & yw[k]));
    }
    return metrics_from_counts(size, pos, bd.rows(), bd.positives);
}

/// WRAcc of every subset of the n features, indexed by mask. Depth-first
/// with cached intersections, O(2^n * N/64).
inline std::vector<double> enumerate_all_wracc(const BinaryDataset& bd) {
    const std::size_t n = bd.features();
    if (n > 24) throw ConfigError("full enumeration limited to 24 features");
    const std::size_t words = bd.labels.word_count();
    std::vector<double> out(std::size_t{1} << n, 0.0);
    // stack[d] holds the membership of the current prefix at depth d.
    std::vector<std::vector<std::uint64_t>> stack(n + 1, std::vector<std::uint64_t>(words));
    BitColumn all(bd.rows());
    all.fill_all();
    stack[0] = all.words();
    const auto& yw = bd.labels.words();

    // Recursive lambda over "next feature index to consider".
    auto rec = [&](auto&& self, std::size_t depth, std::size_t start, std::uint64_t mask) -> void {
        for (std::size_t j = start; j < n; ++j) {
            auto& cur = stack[depth + 1];
            const auto& prev = stack[depth];
            const auto& col = bd.columns[j].words();
            std::size_t size = 0;
            std::size_t pos = 0;
            for (std::size_t k = 0; k < words; ++k) {
                cur[k] = prev[k] & col[k];
                size += static_cast<std::size_t>(std::popcount(cur[k]));
                pos += static_cast<std::size_t>(std::popcount(cur[k] & yw[k]));
            }
            const std::uint64_t m = mask | (std::uint64_t{1} << j);
            out[m] = metrics_from_counts(size, pos, bd.rows(), bd.positives).wracc;
            if (size > 0) self(self, depth + 1, j + 1, m);
        }
    };
    rec(rec, 0, 0, 0);
    return out;
}

/// "a = 1 AND b = 1" using the dataset's feature names.
inline std::string render_rule(const std::vector<std::string>& names, FeatureSubset s) {
    if (s.empty()) return "TRUE";
    std::string out;
    for (auto j : s.indices()) {
        if (!out.empty()) out += " AND ";
        out += names.at(j) + " = 1";
    }
    return out;
}

/// Feature names joined by ';' for CSV cells.
inline std::string feature_list(const std::vector<std::string>& names, FeatureSubset s) {
    std::string out;
    for (auto j : s.indices()) {
        if (!out.empty()) out += ';';
        out += names.at(j);
    }
    return out;
}

}  // namespace qsd
