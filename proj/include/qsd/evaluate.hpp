#pragma once

// Decoding of sampled bitstrings, approximation ratios, significance tests,
// QAOA-unique subgroups and held-out generalisation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "qsd/binarize.hpp"
#include "qsd/error.hpp"
#include "qsd/parallel.hpp"
#include "qsd/qaoa.hpp"
#include "qsd/search.hpp"
#include "qsd/stats.hpp"
#include "qsd/subgroup.hpp"

namespace qsd {

struct DecodedSample {
    FeatureSubset subset;
    double probability = 0.0;
    std::uint64_t count = 0;
};

/// Most probable `n_top` bitstrings; ties go to the smaller bitstring.
inline std::vector<DecodedSample> decode_top_n(std::vector<DecodedSample> dist, std::size_t n_top) {
    std::sort(dist.begin(), dist.end(), [](const auto& a, const auto& b) {
        if (a.probability != b.probability) return a.probability > b.probability;
        return a.subset.mask < b.subset.mask;
    });
    if (dist.size() > n_top) dist.resize(n_top);
    return dist;
}

/// Every sampled bitstring with its empirical frequency.
inline std::vector<DecodedSample> sampled_distribution(const ShotCounts& counts) {
    std::vector<DecodedSample> out;
    out.reserve(counts.counts.size());
    for (const auto& [x, c] : counts.counts)
        out.push_back({{x}, static_cast<double>(c) / static_cast<double>(counts.shots), c});
    return out;
}

inline std::vector<DecodedSample> decode_top_n(const QaoaRun& run, std::size_t n_top = 50) {
    return decode_top_n(sampled_distribution(run.counts), n_top);
}

struct EnergyRatio {
    std::optional<double> r_e;  // undefined when the ground energy is 0
    double best_sampled_energy = 0.0;
    double ground_energy = 0.0;
};

/// r_E = (lowest sampled energy) / (exact ground energy).
inline EnergyRatio energy_ratio(const std::vector<DecodedSample>& samples, const std::vector<double>& energies) {
    if (energies.empty()) throw ConfigError("energy ratio needs an energy table");
    EnergyRatio r;
    r.ground_energy = *std::min_element(energies.begin(), energies.end());
    r.best_sampled_energy = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) r.best_sampled_energy = std::min(r.best_sampled_energy, energies.at(s.subset.mask));
    if (r.ground_energy != 0.0 && std::isfinite(r.best_sampled_energy))
        r.r_e = r.best_sampled_energy / r.ground_energy;
    return r;
}

struct WraccRatio {
    std::optional<double> r_w;            // restricted (|mask| = K, or any k in free mode)
    double best_at_k = 0.0;               // numerator
    std::optional<FeatureSubset> best_subset;
    double reference = 0.0;               // WRAcc* denominator
    double best_unrestricted = 0.0;       // best sampled WRAcc at any k
    std::optional<double> r_w_unrestricted;
    bool free_cardinality = false;
};

/// r_W = best sampled WRAcc at |mask| = K over the exhaustive optimum at K.
/// In free-cardinality mode both sides range over all cardinalities.
inline WraccRatio wracc_ratio(const std::vector<DecodedSample>& samples, const BinaryDataset& bd, std::size_t k,
                              const SearchResult& exhaustive, bool free_cardinality) {
    WraccRatio r;
    r.free_cardinality = free_cardinality;
    if (free_cardinality) {
        if (auto b = exhaustive.best()) r.reference = b->metrics.wracc;
    } else {
        auto it = exhaustive.best_by_size.find(k);
        if (it == exhaustive.best_by_size.end())
            throw ConfigError("no exhaustive optimum at cardinality " + std::to_string(k));
        r.reference = it->second.metrics.wracc;
    }
    bool any_at_k = false;
    for (const auto& s : samples) {
        if (s.subset.empty()) continue;
        const double w = evaluate_subgroup(bd, s.subset).wracc;
        r.best_unrestricted = std::max(r.best_unrestricted, w);
        if (free_cardinality || s.subset.cardinality() == k) {
            if (!any_at_k || w > r.best_at_k || (w == r.best_at_k && s.subset < *r.best_subset)) {
                r.best_at_k = w;
                r.best_subset = s.subset;
            }
            any_at_k = true;
        }
    }
    if (!any_at_k) warn("no sampled bitstring has the target cardinality " + std::to_string(k) + "; r_W = 0");
    if (r.reference > 0.0) {
        r.r_w = r.best_at_k / r.reference;
        r.r_w_unrestricted = r.best_unrestricted / r.reference;
    }
    return r;
}

struct ContingencyTable {
    std::uint64_t in_attack = 0, in_normal = 0, out_attack = 0, out_normal = 0;
};

inline ContingencyTable contingency(const BinaryDataset& bd, FeatureSubset s) {
    const auto m = evaluate_subgroup(bd, s);
    ContingencyTable t;
    t.in_attack = m.positives;
    t.in_normal = m.size - m.positives;
    t.out_attack = bd.positives - m.positives;
    t.out_normal = (bd.rows() - m.size) - t.out_attack;
    return t;
}

inline FisherResult fisher_exact(const BinaryDataset& bd, FeatureSubset s) {
    const auto t = contingency(bd, s);
    return fisher_exact(t.in_attack, t.in_normal, t.out_attack, t.out_normal);
}

struct PermutationResult {
    double observed = 0.0;
    double p_value = 1.0;             // (#null >= observed + 1) / (permutations + 1)
    std::optional<double> z_score;    // undefined when the null has zero spread
    double null_mean = 0.0;
    double null_std = 0.0;
    std::size_t permutations = 0;
};

/// Label-shuffling permutation test of a subgroup's WRAcc. Only the number
/// of attacks landing inside the subgroup matters, so each replicate draws
/// that count by sampling distinct positions (Floyd's algorithm).
inline PermutationResult permutation_test(const BinaryDataset& bd, FeatureSubset s, std::size_t permutations,
                                          std::uint64_t seed) {
    if (permutations == 0) throw ConfigError("permutation test needs at least one permutation");
    const std::size_t n = bd.rows();
    const auto members = membership(bd, s);
    const auto obs = evaluate_subgroup(bd, s);
    const std::size_t m = obs.size;
    const std::size_t pos = bd.positives;

    PermutationResult res;
    res.observed = obs.wracc;
    res.permutations = permutations;
    std::vector<double> null(permutations, 0.0);

    // Draw r positions uniformly; count how many fall in the subgroup.
    // Drawing the smaller of {positives, negatives} keeps r small.
    const bool draw_positives = pos <= n - pos;
    const std::size_t r = draw_positives ? pos : n - pos;
    parallel_for_chunks(permutations, [&](std::size_t b, std::size_t e) {
        BitColumn chosen(n);
        std::vector<std::size_t> picked;
        for (std::size_t rep = b; rep < e; ++rep) {
            std::mt19937_64 rng(detail::derive_seed(seed, 4, rep));
            picked.clear();
            for (std::size_t j = n - r; j < n; ++j) {
                std::uniform_int_distribution<std::size_t> u(0, j);
                const std::size_t t = u(rng);
                const std::size_t add = chosen.test(t) ? j : t;
                chosen.set(add);
                picked.push_back(add);
            }
            std::size_t hits = 0;
            for (auto i : picked) {
                hits += members.test(i) ? 1 : 0;
                chosen.set(i, false);
            }
            const std::size_t in_pos = draw_positives ? hits : m - hits;
            null[rep] = metrics_from_counts(m, in_pos, n, pos).wracc;
        }
    }, 16);

    std::size_t exceed = 0;
    double sum = 0.0;
    for (double v : null) {
        exceed += v >= res.observed - 1e-15 ? 1 : 0;
        sum += v;
    }
    res.null_mean = sum / static_cast<double>(permutations);
    double ss = 0.0;
    for (double v : null) ss += (v - res.null_mean) * (v - res.null_mean);
    res.null_std = std::sqrt(ss / static_cast<double>(permutations));
    res.p_value = static_cast<double>(exceed + 1) / static_cast<double>(permutations + 1);
    if (res.null_std > 0.0) res.z_score = (res.observed - res.null_mean) / res.null_std;
    return res;
}

/// Sampled subsets that beam search never produced (exact mask equality).
inline std::vector<FeatureSubset> qaoa_unique(const std::vector<DecodedSample>& samples, const SearchResult& beam) {
    std::set<std::uint64_t> beam_masks;
    for (const auto& g : beam.subgroups) beam_masks.insert(g.subset.mask);
    std::vector<FeatureSubset> out;
    std::set<std::uint64_t> emitted;
    for (const auto& s : samples) {
        if (s.subset.empty()) continue;
        if (!beam_masks.count(s.subset.mask) && emitted.insert(s.subset.mask).second) out.push_back(s.subset);
    }
    return out;
}

/// Binarize held-out data with the training model, restrict to the selected
/// features, and evaluate each subgroup.
inline std::vector<SubgroupMetrics> test_generalization(const std::vector<FeatureSubset>& subgroups,
                                                        const std::vector<std::string>& selected_features,
                                                        const BinarizationModel& model, const EncodedDataset& test,
                                                        BinarySide side = BinarySide::One) {
    const auto full = apply_binarization(model, test, side);
    const auto bd = select_features(full, selected_features);
    std::vector<SubgroupMetrics> out;
    out.reserve(subgroups.size());
    for (auto s : subgroups) out.push_back(evaluate_subgroup(bd, s));
    return out;
}

}  // namespace qsd
