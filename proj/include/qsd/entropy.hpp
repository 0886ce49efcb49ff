#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace qsd {

/// Shannon entropy (bits) of a Bernoulli variable with `positives` of `total`.
inline double binary_entropy(std::size_t positives, std::size_t total) {
    if (total == 0 || positives == 0 || positives == total) return 0.0;
    const double p = static_cast<double>(positives) / static_cast<double>(total);
    return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

/// Counts of a binary split against a binary target.
struct SplitCounts {
    std::size_t ones = 0;            // rows with feature = 1
    std::size_t ones_positive = 0;   // ... and label = 1
    std::size_t total = 0;
    std::size_t total_positive = 0;
};

/// IG(f) = H(Y) - sum_v P(f=v) H(Y | f=v), in bits.
inline double information_gain(const SplitCounts& c) {
    if (c.total == 0) return 0.0;
    const double n = static_cast<double>(c.total);
    const std::size_t zeros = c.total - c.ones;
    const std::size_t zeros_positive = c.total_positive - c.ones_positive;
    const double h_y = binary_entropy(c.total_positive, c.total);
    const double h_cond = (static_cast<double>(c.ones) / n) * binary_entropy(c.ones_positive, c.ones) +
                          (static_cast<double>(zeros) / n) * binary_entropy(zeros_positive, zeros);
    // Floating error can push the difference a hair below zero.
    return std::clamp(h_y - h_cond, 0.0, h_y);
}

}  // namespace qsd
