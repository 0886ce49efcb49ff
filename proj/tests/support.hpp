#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "qsd/qsd.hpp"

namespace qsd::testing {

/// A record line with zero numerics and the given categoricals and label.
inline std::string record_line(const std::string& protocol, const std::string& service, const std::string& flag,
                               const std::string& label, const std::vector<std::pair<std::size_t, double>>& set = {}) {
    std::vector<std::string> f(kFeatureCount, "0");
    f[1] = protocol;
    f[2] = service;
    f[3] = flag;
    for (auto [pos, v] : set) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", v);
        f[pos] = buf;
    }
    std::string out;
    for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + f[i];
    return out + "," + label + ",15";
}

/// Entropy in bits, computed with natural logs.
inline double entropy_bits(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -(p * std::log(p) + (1 - p) * std::log(1 - p)) / std::log(2.0);
}

inline double ig_oracle(const std::vector<int>& f, const std::vector<int>& y) {
    double n = static_cast<double>(y.size()), n1 = 0, p = 0, p1 = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        n1 += f[i];
        p += y[i];
        p1 += f[i] && y[i];
    }
    const double n0 = n - n1, p0 = p - p1;
    double h = entropy_bits(p / n);
    if (n1 > 0) h -= n1 / n * entropy_bits(p1 / n1);
    if (n0 > 0) h -= n0 / n * entropy_bits(p0 / n0);
    return h;
}

struct DenseData {
    std::vector<std::vector<int>> rows;
    std::vector<int> y;
};

/// Random 0/1 data where each feature is 1 with its own probability and the
/// label leans on the first few features.
inline DenseData random_dense(std::size_t n_rows, std::size_t n_feat, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> rate(n_feat);
    for (auto& r : rate) r = 0.15 + 0.7 * u(rng);
    DenseData d;
    for (std::size_t i = 0; i < n_rows; ++i) {
        std::vector<int> row(n_feat);
        int score = 0;
        for (std::size_t j = 0; j < n_feat; ++j) {
            row[j] = u(rng) < rate[j] ? 1 : 0;
            if (j < 3) score += row[j];
        }
        d.rows.push_back(row);
        d.y.push_back(u(rng) < 0.1 + 0.25 * score ? 1 : 0);
    }
    if (std::find(d.y.begin(), d.y.end(), 1) == d.y.end()) d.y[0] = 1;
    if (std::find(d.y.begin(), d.y.end(), 0) == d.y.end()) d.y[0] = 0;
    return d;
}

inline BinaryDataset random_binary(std::size_t n_rows, std::size_t n_feat, std::mt19937_64& rng) {
    auto d = random_dense(n_rows, n_feat, rng);
    return BinaryDataset::from_dense(d.rows, d.y);
}

/// Row-by-row rule interpreter.
inline double naive_wracc(const DenseData& d, std::uint64_t mask) {
    double n = static_cast<double>(d.y.size()), pos = 0, size = 0, in_pos = 0;
    for (std::size_t i = 0; i < d.y.size(); ++i) {
        pos += d.y[i];
        bool member = true;
        for (std::size_t j = 0; j < d.rows[i].size(); ++j)
            if ((mask >> j) & 1u) member = member && d.rows[i][j] == 1;
        if (member) {
            size += 1;
            in_pos += d.y[i];
        }
    }
    if (size == 0) return 0.0;
    return size / n * std::abs(in_pos / size - pos / n);
}

inline QuboModel random_qubo(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    QuboModel q;
    q.q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < q.q.rows(); ++i)
        for (Eigen::Index j = i; j < q.q.rows(); ++j) q.q(i, j) = q.q(j, i) = u(rng);
    q.offset = u(rng);
    return q;
}

inline IsingModel random_ising(std::size_t n, std::mt19937_64& rng) {
    return qubo_to_ising(random_qubo(n, rng));
}

}  // namespace qsd::testing
