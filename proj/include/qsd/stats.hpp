#pragma once

// Rank statistics, Fisher's exact test and small distribution helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace qsd {

/// Ranks 1..n with ties assigned their average rank.
inline std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

/// Pearson correlation; nullopt when either side has zero variance.
inline std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = std::min(a.size(), b.size());
    if (n < 2) return std::nullopt;
    const double ma = std::accumulate(a.begin(), a.begin() + n, 0.0) / static_cast<double>(n);
    const double mb = std::accumulate(b.begin(), b.begin() + n, 0.0) / static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
    return sab / std::sqrt(saa * sbb);
}

inline std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    return pearson(ra, rb);
}

/// 2x2 table [[a, b], [c, d]]: rows in/out of subgroup, columns attack/normal.
struct FisherResult {
    std::optional<double> odds_ratio;  // undefined when any cell is 0
    double p_value = 1.0;              // two-sided
};

namespace detail {

inline double log_choose(std::uint64_t n, std::uint64_t k) {
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace detail

/// Two-sided Fisher exact test: sums the hypergeometric probabilities of all
/// tables with the observed margins that are no more likely than the
/// observed one (relative tolerance 1e-7 on the comparison).
inline FisherResult fisher_exact(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    FisherResult r;
    const std::uint64_t row1 = a + b, row2 = c + d, col1 = a + c, col2 = b + d;
    const std::uint64_t n = row1 + row2;
    if (a != 0 && b != 0 && c != 0 && d != 0) {
        r.odds_ratio = (static_cast<double>(a) * static_cast<double>(d)) /
                       (static_cast<double>(b) * static_cast<double>(c));
    }
    if (row1 == 0 || row2 == 0 || col1 == 0 || col2 == 0) return r;

    const double log_denom = detail::log_choose(n, col1);
    auto log_p = [&](std::uint64_t x) {
        return detail::log_choose(row1, x) + detail::log_choose(row2, col1 - x) - log_denom;
    };
    const std::uint64_t lo = col1 > row2 ? col1 - row2 : 0;
    const std::uint64_t hi = std::min(row1, col1);
    const double observed = log_p(a);
    double p = 0.0;
    for (std::uint64_t x = lo; x <= hi; ++x) {
        const double lp = log_p(x);
        if (lp <= observed + std::log1p(1e-7)) p += std::exp(lp);
    }
    r.p_value = std::min(1.0, p);
    return r;
}

/// Kolmogorov-Smirnov distance between a sample and Uniform(0, 1).
inline double ks_distance_uniform(std::vector<double> sample) {
    if (sample.empty()) return 0.0;
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double x = std::clamp(sample[i], 0.0, 1.0);
        d = std::max({d, static_cast<double>(i + 1) / n - x, x - static_cast<double>(i) / n});
    }
    return d;
}

}  // namespace qsd
