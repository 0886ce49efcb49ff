#pragma once

// Classical baselines: exhaustive enumeration (ground truth) and beam search.

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "qsd/error.hpp"
#include "qsd/parallel.hpp"
#include "qsd/subgroup.hpp"

namespace qsd {

struct ScoredSubgroup {
    FeatureSubset subset;
    SubgroupMetrics metrics;
};

/// WRAcc descending, then smaller mask first.
inline bool better(const ScoredSubgroup& a, const ScoredSubgroup& b) {
    if (a.metrics.wracc != b.metrics.wracc) return a.metrics.wracc > b.metrics.wracc;
    return a.subset.mask < b.subset.mask;
}

struct SearchResult {
    std::vector<ScoredSubgroup> subgroups;               // deduplicated, sorted by `better`
    std::map<std::size_t, ScoredSubgroup> best_by_size;  // per cardinality
    std::vector<std::size_t> skipped_cardinalities;
    std::map<std::size_t, std::size_t> evaluated_by_size;

    std::optional<ScoredSubgroup> best() const {
        if (subgroups.empty()) return std::nullopt;
        return subgroups.front();
    }

    bool contains(FeatureSubset s) const {
        for (const auto& g : subgroups)
            if (g.subset == s) return true;
        return false;
    }

    /// Top entries at one cardinality, in result order.
    std::vector<ScoredSubgroup> top_at(std::size_t k, std::size_t count) const {
        std::vector<ScoredSubgroup> out;
        for (const auto& g : subgroups) {
            if (out.size() >= count) break;
            if (g.subset.cardinality() == k) out.push_back(g);
        }
        return out;
    }
};

namespace detail {

inline void finalize(SearchResult& r) {
    std::sort(r.subgroups.begin(), r.subgroups.end(), better);
    r.subgroups.erase(std::unique(r.subgroups.begin(), r.subgroups.end(),
                                  [](const auto& a, const auto& b) { return a.subset == b.subset; }),
                      r.subgroups.end());
    r.best_by_size.clear();
    for (const auto& g : r.subgroups) r.best_by_size.try_emplace(g.subset.cardinality(), g);
}

}  // namespace detail

/// C(n, k), saturating at UINT64_MAX.
inline std::uint64_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > UINT64_MAX) return UINT64_MAX;
    }
    return static_cast<std::uint64_t>(r);
}

inline constexpr std::uint64_t kDefaultExhaustiveCap = 50000;
inline constexpr std::size_t kExhaustiveMaxCardinality = 8;

/// Evaluate every subset of size 1..min(8, n, k_max); cardinalities with
/// more than `cap` combinations are skipped with a warning.
inline SearchResult exhaustive_enumerate(const BinaryDataset& bd, std::size_t k_max,
                                         std::uint64_t cap = kDefaultExhaustiveCap) {
    if (k_max < 1) throw ConfigError("exhaustive k_max must be >= 1");
    const std::size_t n = bd.features();
    if (n >= kMaxMaskBits) throw ConfigError("exhaustive search supports at most 63 features");
    SearchResult result;
    const std::size_t top = std::min({kExhaustiveMaxCardinality, n, k_max});
    for (std::size_t k = 1; k <= top; ++k) {
        const auto total = binomial(n, k);
        if (total > cap) {
            warn("exhaustive: C(" + std::to_string(n) + "," + std::to_string(k) + ")=" + std::to_string(total) +
                 " exceeds cap " + std::to_string(cap) + "; cardinality skipped");
            result.skipped_cardinalities.push_back(k);
            continue;
        }
        std::vector<std::uint64_t> masks;
        masks.reserve(total);
        // Gosper's hack: masks of popcount k in increasing order.
        std::uint64_t m = (std::uint64_t{1} << k) - 1;
        const std::uint64_t limit = std::uint64_t{1} << n;
        while (m < limit) {
            masks.push_back(m);
            const std::uint64_t c = m & (~m + 1);
            const std::uint64_t r = m + c;
            m = (((r ^ m) >> 2) / c) | r;
        }
        std::vector<ScoredSubgroup> scored(masks.size());
        parallel_for_chunks(masks.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) scored[i] = {{masks[i]}, evaluate_subgroup(bd, {masks[i]})};
        });
        result.evaluated_by_size[k] = scored.size();
        result.subgroups.insert(result.subgroups.end(), scored.begin(), scored.end());
    }
    detail::finalize(result);
    return result;
}

struct BeamConfig {
    std::size_t width = 10;
    std::size_t max_depth = 10;
};

/// Level-wise beam search. All candidates from every depth are kept in the
/// result; only the top `width` of each depth seed the next one.
inline SearchResult beam_search(const BinaryDataset& bd, const BeamConfig& cfg) {
    if (cfg.width < 1 || cfg.max_depth < 1) throw ConfigError("beam width and depth must be >= 1");
    const std::size_t n = bd.features();
    if (n < 1) throw ConfigError("beam search needs at least one feature");
    if (n >= kMaxMaskBits) throw ConfigError("beam search supports at most 63 features");

    SearchResult result;
    std::vector<ScoredSubgroup> level;
    for (std::size_t j = 0; j < n; ++j) {
        FeatureSubset s{std::uint64_t{1} << j};
        level.push_back({s, evaluate_subgroup(bd, s)});
    }
    const std::size_t depth_limit = std::min(cfg.max_depth, n);
    for (std::size_t depth = 1;; ++depth) {
        std::sort(level.begin(), level.end(), better);
        result.evaluated_by_size[depth] = level.size();
        result.subgroups.insert(result.subgroups.end(), level.begin(), level.end());
        if (depth >= depth_limit) break;

        const std::size_t keep = std::min(cfg.width, level.size());
        std::set<std::uint64_t> candidates;
        for (std::size_t s = 0; s < keep; ++s) {
            for (std::size_t j = 0; j < n; ++j) {
                const std::uint64_t bit = std::uint64_t{1} << j;
                if (level[s].subset.mask & bit) continue;
                candidates.insert(level[s].subset.mask | bit);
            }
        }
        if (candidates.empty()) break;
        level.clear();
        for (auto m : candidates) level.push_back({{m}, evaluate_subgroup(bd, {m})});
    }
    detail::finalize(result);
    return result;
}

/// Number of the exhaustive top-`top` subsets at cardinality k that beam
/// search also produced.
inline std::size_t beam_recall(const SearchResult& exhaustive, const SearchResult& beam, std::size_t k,
                               std::size_t top = 20) {
    if (!exhaustive.evaluated_by_size.count(k))
        throw ConfigError("beam recall: exhaustive search did not run at cardinality " + std::to_string(k));
    std::set<std::uint64_t> beam_masks;
    for (const auto& g : beam.subgroups) beam_masks.insert(g.subset.mask);
    std::size_t hits = 0;
    for (const auto& g : exhaustive.top_at(k, top)) hits += beam_masks.count(g.subset.mask);
    return hits;
}

inline std::string format_optional(const std::optional<double>& v) {
    if (!v) return "null";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return buf;
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV: features,k,size,wracc,coverage,contrast,positive_rate
inline void write_search_csv(std::ostream& os, const SearchResult& r, const std::vector<std::string>& names) {
    os << "features,k,size,wracc,coverage,contrast,positive_rate\n";
    for (const auto& g : r.subgroups) {
        os << feature_list(names, g.subset) << ',' << g.subset.cardinality() << ',' << g.metrics.size << ','
           << format_double(g.metrics.wracc) << ',' << format_double(g.metrics.coverage) << ','
           << format_double(g.metrics.contrast) << ',' << format_optional(g.metrics.positive_rate) << '\n';
    }
}

}  // namespace qsd
