#pragma once

// Least-squares QUBO surrogate of the negated WRAcc landscape, cardinality
// penalty calibration, normalisation and conversion to Ising form.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "qsd/error.hpp"
#include "qsd/parallel.hpp"
#include "qsd/stats.hpp"
#include "qsd/subgroup.hpp"

namespace qsd {

/// Energy x^T Q x + offset with Q symmetric.
struct QuboModel {
    Eigen::MatrixXd q;
    double offset = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(q.rows()); }

    double energy(std::uint64_t x) const {
        const auto n = static_cast<Eigen::Index>(size());
        double e = offset;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!((x >> i) & 1u)) continue;
            e += q(i, i);
            for (Eigen::Index j = i + 1; j < n; ++j)
                if ((x >> j) & 1u) e += 2.0 * q(i, j);
        }
        return e;
    }

    double max_abs() const { return q.size() == 0 ? 0.0 : q.cwiseAbs().maxCoeff(); }
};

struct FitQuality {
    double r_squared = 1.0;
    std::optional<double> spearman_rho;  // undefined on a constant landscape
    std::size_t samples = 0;
};

/// Which exact-mode bitstrings enter the regression.
enum class FitSample { All, Weighted, KOnly };

inline std::string_view to_string(FitSample s) {
    switch (s) {
        case FitSample::All: return "all";
        case FitSample::Weighted: return "weighted";
        case FitSample::KOnly: return "k-only";
    }
    return "?";
}

inline FitSample parse_fit_sample(std::string_view s) {
    if (s == "all") return FitSample::All;
    if (s == "weighted") return FitSample::Weighted;
    if (s == "k-only" || s == "k_only") return FitSample::KOnly;
    throw ConfigError("unknown fit sample '" + std::string(s) + "'");
}

struct QuboFit {
    QuboModel model;
    FitQuality quality;
    std::vector<std::uint64_t> sample;   // fitted bitstrings
    std::vector<double> target;          // -WRAcc of each
};

inline constexpr std::size_t kExactFitMaxFeatures = 15;
inline constexpr double kRidge = 1e-10;

/// Number of regression unknowns: n linear + n(n-1)/2 pair terms.
inline std::size_t regression_width(std::size_t n) { return n + n * (n - 1) / 2; }

/// Solve the weighted least-squares problem for Q. Design rows are
/// [x_i..., 2 x_i x_j (i<j)...]; targets are -WRAcc.
inline QuboFit fit_qubo_regression(std::size_t n, std::vector<std::uint64_t> sample, std::vector<double> target,
                                   const std::vector<double>& weights) {
    const std::size_t v = regression_width(n);
    // pair_index[i][j] for i<j
    std::vector<std::vector<std::size_t>> pair_index(n, std::vector<std::size_t>(n, 0));
    std::size_t next = n;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pair_index[i][j] = next++;

    Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(v));
    Eigen::VectorXd atb = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(v));
    std::vector<std::pair<std::size_t, double>> active;
    for (std::size_t r = 0; r < sample.size(); ++r) {
        active.clear();
        const std::uint64_t x = sample[r];
        for (std::size_t i = 0; i < n; ++i) {
            if (!((x >> i) & 1u)) continue;
            active.emplace_back(i, 1.0);
            for (std::size_t j = i + 1; j < n; ++j)
                if ((x >> j) & 1u) active.emplace_back(pair_index[i][j], 2.0);
        }
        const double w = weights.empty() ? 1.0 : weights[r];
        for (const auto& [a, va] : active) {
            atb(static_cast<Eigen::Index>(a)) += w * va * target[r];
            for (const auto& [b, vb] : active) ata(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += w * va * vb;
        }
    }
    const double mean_diag = v == 0 ? 1.0 : std::max(1.0, ata.diagonal().mean());
    ata.diagonal().array() += kRidge * mean_diag;
    const Eigen::VectorXd theta = ata.ldlt().solve(atb);

    QuboFit fit;
    fit.model.q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        fit.model.q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = theta(static_cast<Eigen::Index>(i));
        for (std::size_t j = i + 1; j < n; ++j) {
            const double c = theta(static_cast<Eigen::Index>(pair_index[i][j]));
            fit.model.q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
            fit.model.q(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = c;
        }
    }

    std::vector<double> predicted(sample.size());
    for (std::size_t r = 0; r < sample.size(); ++r) predicted[r] = fit.model.energy(sample[r]);
    double mean = 0.0;
    for (double t : target) mean += t;
    mean /= std::max<std::size_t>(1, target.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t r = 0; r < sample.size(); ++r) {
        ss_res += (target[r] - predicted[r]) * (target[r] - predicted[r]);
        ss_tot += (target[r] - mean) * (target[r] - mean);
    }
    if (ss_tot > 0.0) fit.quality.r_squared = 1.0 - ss_res / ss_tot;
    else fit.quality.r_squared = ss_res <= 1e-24 ? 1.0 : 0.0;
    fit.quality.spearman_rho = spearman(predicted, target);
    fit.quality.samples = sample.size();
    fit.sample = std::move(sample);
    fit.target = std::move(target);
    return fit;
}

/// Exact mode: regress over the full 2^n landscape (n <= 15). `mode`
/// controls how Hamming-weight-K bitstrings are treated.
inline QuboFit fit_qubo_exact(const BinaryDataset& bd, std::size_t k, FitSample mode = FitSample::Weighted) {
    const std::size_t n = bd.features();
    if (n > kExactFitMaxFeatures)
        throw ConfigError("exact QUBO fit supports n <= 15 (got " + std::to_string(n) + "); use surrogate mode");
    if (n == 0) throw ConfigError("exact QUBO fit needs at least one feature");
    const auto wracc = enumerate_all_wracc(bd);
    std::vector<std::uint64_t> sample;
    std::vector<double> target;
    std::vector<double> weights;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
        const auto w = static_cast<std::size_t>(std::popcount(x));
        if (mode == FitSample::KOnly && w != k) continue;
        sample.push_back(x);
        target.push_back(-wracc[x]);
        if (mode == FitSample::Weighted) weights.push_back(w == k ? 2.0 : 1.0);
    }
    return fit_qubo_regression(n, std::move(sample), std::move(target), weights);
}

inline constexpr std::size_t kDefaultSurrogateOversample = 10;

/// Surrogate mode: M = oversample * V distinct bitstrings, Hamming weight
/// uniform over 1..n, positions uniform.
inline QuboFit fit_qubo_surrogate(const BinaryDataset& bd, std::size_t oversample, std::uint64_t seed) {
    const std::size_t n = bd.features();
    if (oversample < 1) throw ConfigError("surrogate oversample must be >= 1");
    if (n == 0 || n >= kMaxMaskBits) throw ConfigError("surrogate fit needs 1..63 features");
    const std::size_t v = regression_width(n);
    const std::size_t m = oversample * v;

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> weight_dist(1, n);
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::uint64_t> sample;
    std::vector<std::size_t> idx(n);
    const std::size_t max_attempts = 50 * m + 1000;
    for (std::size_t attempt = 0; attempt < max_attempts && sample.size() < m; ++attempt) {
        const std::size_t w = weight_dist(rng);
        std::iota(idx.begin(), idx.end(), 0);
        std::uint64_t x = 0;
        for (std::size_t t = 0; t < w; ++t) {
            std::uniform_int_distribution<std::size_t> pick(t, n - 1);
            std::swap(idx[t], idx[pick(rng)]);
            x |= std::uint64_t{1} << idx[t];
        }
        if (seen.insert(x).second) sample.push_back(x);
    }
    if (sample.size() < v)
        throw ConfigError("surrogate sample has " + std::to_string(sample.size()) + " distinct bitstrings, fewer than " +
                          std::to_string(v) + " unknowns");

    std::vector<double> target(sample.size());
    parallel_for_chunks(sample.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) target[i] = -evaluate_subgroup(bd, {sample[i]}).wracc;
    }, 64);
    return fit_qubo_regression(n, std::move(sample), std::move(target), {});
}

/// Divide Q and offset by max|Q| (no-op when Q is identically zero).
inline QuboModel normalized(QuboModel q) {
    const double s = q.max_abs();
    if (s > 0.0) {
        q.q /= s;
        q.offset /= s;
    }
    return q;
}

struct PenaltyCalibration {
    double lambda = 0.1;
    std::size_t target = 0;
    std::map<std::size_t, double> best_energy_by_k;
    std::map<std::size_t, double> lambda_needed_by_k;
};

inline constexpr double kPenaltyFloor = 0.1;
inline constexpr double kPenaltySafety = 1.5;

/// Smallest penalty making the best Hamming-weight-K energy no worse than
/// every other weight, times 1.5, floored at 0.1. Energies come from full
/// enumeration when n <= 15 and `sample` is empty, otherwise from `sample`
/// (plus the all-zeros string).
inline PenaltyCalibration calibrate_penalty(const QuboModel& q, std::size_t k,
                                            const std::vector<std::uint64_t>& sample = {}) {
    const std::size_t n = q.size();
    if (k > n) throw ConfigError("target cardinality exceeds variable count");
    PenaltyCalibration cal;
    cal.target = k;
    auto consider = [&](std::uint64_t x) {
        const auto w = static_cast<std::size_t>(std::popcount(x));
        const double e = q.energy(x);
        auto [it, inserted] = cal.best_energy_by_k.try_emplace(w, e);
        if (!inserted && e < it->second) it->second = e;
    };
    if (sample.empty()) {
        if (n > kExactFitMaxFeatures)
            throw ConfigError("penalty calibration by enumeration needs n <= 15; pass a sample");
        for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) consider(x);
    } else {
        consider(0);
        for (auto x : sample) consider(x);
        for (std::size_t w = 0; w <= n; ++w)
            if (!cal.best_energy_by_k.count(w))
                warn("penalty calibration: no sampled bitstring of weight " + std::to_string(w) + "; excluded");
    }
    auto target_it = cal.best_energy_by_k.find(k);
    if (target_it == cal.best_energy_by_k.end())
        throw DataError("penalty calibration: no bitstring at the target cardinality");
    const double e_target = target_it->second;
    double needed = 0.0;
    for (const auto& [w, e] : cal.best_energy_by_k) {
        if (w == k) continue;
        const double gap = static_cast<double>(w) - static_cast<double>(k);
        const double lam = std::max(0.0, (e_target - e) / (gap * gap));
        cal.lambda_needed_by_k[w] = lam;
        needed = std::max(needed, lam);
    }
    cal.lambda = std::max(kPenaltyFloor, kPenaltySafety * needed);
    return cal;
}

/// lambda * (sum x - K)^2 as a QUBO: lambda(1-2K) on each diagonal, lambda
/// on each symmetric off-diagonal entry (2 lambda per pair in x^T Q x),
/// lambda K^2 as the offset.
inline QuboModel penalty_qubo(std::size_t n, double lambda, std::size_t k) {
    QuboModel p;
    const auto nn = static_cast<Eigen::Index>(n);
    const double kk = static_cast<double>(k);
    p.q = Eigen::MatrixXd::Constant(nn, nn, lambda);
    p.q.diagonal().setConstant(lambda * (1.0 - 2.0 * kk));
    p.offset = lambda * kk * kk;
    return p;
}

/// Add the calibrated penalty, then renormalise by max|Q|.
inline QuboModel add_penalty(const QuboModel& q, const PenaltyCalibration& cal, bool free_cardinality) {
    if (free_cardinality) return q;
    const auto pen = penalty_qubo(q.size(), cal.lambda, cal.target);
    QuboModel out = q;
    out.q += pen.q;
    out.offset += pen.offset;
    return normalized(std::move(out));
}

/// H = sum h_i Z_i + sum_{i<j} J_ij Z_i Z_j + c, with z_i = 1 - 2 x_i.
struct IsingModel {
    std::vector<double> h;
    Eigen::MatrixXd j;  // strictly upper triangle used
    double c = 0.0;

    std::size_t size() const { return h.size(); }

    double energy(std::uint64_t x) const {
        const std::size_t n = size();
        double e = c;
        for (std::size_t a = 0; a < n; ++a) {
            const double za = ((x >> a) & 1u) ? -1.0 : 1.0;
            e += h[a] * za;
            for (std::size_t b = a + 1; b < n; ++b) {
                const double zb = ((x >> b) & 1u) ? -1.0 : 1.0;
                e += j(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * za * zb;
            }
        }
        return e;
    }
};

inline bool energies_agree(double a, double b, double rel_tol = 1e-9) {
    return std::abs(a - b) <= rel_tol * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Substitute x_i = (1 - z_i)/2 and verify the result on random bitstrings
/// plus all-zeros and all-ones.
inline IsingModel qubo_to_ising(const QuboModel& q, std::uint64_t check_seed = 0x5eed, std::size_t checks = 100) {
    const std::size_t n = q.size();
    IsingModel m;
    m.h.assign(n, 0.0);
    m.j = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    m.c = q.offset;
    for (std::size_t a = 0; a < n; ++a) {
        const auto ia = static_cast<Eigen::Index>(a);
        const double qaa = q.q(ia, ia);
        // Q_aa x_a = Q_aa/2 - Q_aa/2 z_a
        m.h[a] -= 0.5 * qaa;
        m.c += 0.5 * qaa;
        for (std::size_t b = a + 1; b < n; ++b) {
            const auto ib = static_cast<Eigen::Index>(b);
            // 2 Q_ab x_a x_b = Q_ab/2 (1 - z_a - z_b + z_a z_b)
            const double qab = q.q(ia, ib);
            m.c += 0.5 * qab;
            m.h[a] -= 0.5 * qab;
            m.h[b] -= 0.5 * qab;
            m.j(ia, ib) = 0.5 * qab;
        }
    }

    std::vector<std::uint64_t> probes = {0};
    if (n > 0) probes.push_back(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
    std::mt19937_64 rng(check_seed);
    for (std::size_t t = 0; t < checks; ++t) {
        std::uint64_t x = rng();
        if (n < 64) x &= (std::uint64_t{1} << n) - 1;
        probes.push_back(x);
    }
    for (auto x : probes) {
        const double eq = q.energy(x);
        const double ei = m.energy(x);
        if (!energies_agree(eq, ei))
            throw InternalError("QUBO/Ising mismatch at x=" + std::to_string(x) + ": " + std::to_string(eq) +
                                " vs " + std::to_string(ei));
    }
    return m;
}

inline std::string serialize(const QuboModel& q) {
    std::ostringstream os;
    char buf[96];
    os << "# qubo: energy = x^T Q x + offset, Q symmetric, upper triangle listed\n";
    os << "n " << q.size() << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", q.offset);
    os << "offset " << buf << '\n';
    for (Eigen::Index i = 0; i < q.q.rows(); ++i)
        for (Eigen::Index j = i; j < q.q.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", q.q(i, j));
            os << "Q " << i << ' ' << j << ' ' << buf << '\n';
        }
    return os.str();
}

inline std::string serialize(const IsingModel& m) {
    std::ostringstream os;
    char buf[96];
    os << "# ising: H = sum h_i Z_i + sum_{i<j} J_ij Z_i Z_j + c, z_i = 1 - 2 x_i\n";
    os << "n " << m.size() << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", m.c);
    os << "c " << buf << '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", m.h[i]);
        os << "h " << i << ' ' << buf << '\n';
    }
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m.j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            os << "J " << i << ' ' << j << ' ' << buf << '\n';
        }
    return os.str();
}

inline QuboModel parse_qubo(const std::string& text) {
    std::istringstream is(text);
    std::string tag;
    QuboModel q;
    std::size_t n = 0;
    bool sized = false;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        ls >> tag;
        if (tag == "n") {
            ls >> n;
            q.q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
            sized = true;
        } else if (tag == "offset") {
            std::string v;
            ls >> v;
            q.offset = std::strtod(v.c_str(), nullptr);
        } else if (tag == "Q") {
            if (!sized) throw ParseError("qubo: 'Q' before 'n'");
            Eigen::Index i = 0, j = 0;
            std::string v;
            ls >> i >> j >> v;
            if (i < 0 || j < 0 || i >= q.q.rows() || j >= q.q.cols()) throw ParseError("qubo: index out of range");
            const double val = std::strtod(v.c_str(), nullptr);
            q.q(i, j) = val;
            q.q(j, i) = val;
        } else {
            throw ParseError("qubo: unknown tag '" + tag + "'");
        }
    }
    return q;
}

}  // namespace qsd
