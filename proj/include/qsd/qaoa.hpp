#pragma once

// Exact statevector simulation of p-layer QAOA for diagonal (Ising) cost
// Hamiltonians, its variational loop, and shot sampling.
//
// Basis index bit i corresponds to variable x_i (little-endian); the spin is
// z_i = 1 - 2 x_i.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "qsd/error.hpp"
#include "qsd/nelder_mead.hpp"
#include "qsd/qubo.hpp"

namespace qsd {

inline constexpr std::size_t kDefaultQubitCap = 24;

struct QaoaParams {
    std::vector<double> gammas;
    std::vector<double> betas;

    std::size_t depth() const { return gammas.size(); }

    void validate() const {
        if (gammas.empty() || gammas.size() != betas.size())
            throw ConfigError("QAOA parameters need |gamma| = |beta| >= 1");
    }

    std::vector<double> flatten() const {
        std::vector<double> v = gammas;
        v.insert(v.end(), betas.begin(), betas.end());
        return v;
    }

    static QaoaParams unflatten(const std::vector<double>& v) {
        const std::size_t p = v.size() / 2;
        return {std::vector<double>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(p)),
                std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(p), v.end())};
    }
};

using Statevector = std::vector<std::complex<double>>;

/// E(x) for every basis state. Built incrementally: clearing the lowest set
/// bit i of x flips z_i from -1 to +1.
inline std::vector<double> energy_table(const IsingModel& ising, std::size_t qubit_cap = kDefaultQubitCap) {
    const std::size_t n = ising.size();
    if (n > qubit_cap)
        throw ConfigError("simulator limited to " + std::to_string(qubit_cap) + " qubits, instance has " +
                          std::to_string(n));
    // Symmetric coupling rows.
    std::vector<std::vector<double>> jrow(n, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            const double v = ising.j(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            jrow[a][b] = v;
            jrow[b][a] = v;
        }
    const std::size_t dim = std::size_t{1} << n;
    std::vector<double> e(dim);
    double e0 = ising.c;
    for (std::size_t a = 0; a < n; ++a) {
        e0 += ising.h[a];
        for (std::size_t b = a + 1; b < n; ++b) e0 += jrow[a][b];
    }
    e[0] = e0;
    for (std::size_t x = 1; x < dim; ++x) {
        const auto i = static_cast<std::size_t>(std::countr_zero(x));
        const std::size_t prev = x & (x - 1);
        // Field felt by spin i from the other spins, in state prev (== x off i).
        double field = ising.h[i];
        for (std::size_t b = 0; b < n; ++b) {
            if (b == i) continue;
            field += jrow[i][b] * (((prev >> b) & 1u) ? -1.0 : 1.0);
        }
        e[x] = e[prev] - 2.0 * field;
    }
    return e;
}

/// QAOA state evolution against a precomputed energy table.
class QaoaSimulator {
public:
    explicit QaoaSimulator(const IsingModel& ising, std::size_t qubit_cap = kDefaultQubitCap)
        : n_(ising.size()), energies_(energy_table(ising, qubit_cap)) {}

    std::size_t qubits() const { return n_; }
    const std::vector<double>& energies() const { return energies_; }

    Statevector initial_state() const {
        const double a = 1.0 / std::sqrt(static_cast<double>(energies_.size()));
        return Statevector(energies_.size(), {a, 0.0});
    }

    void apply_cost(Statevector& psi, double gamma) const {
        for (std::size_t x = 0; x < psi.size(); ++x) psi[x] *= std::polar(1.0, -gamma * energies_[x]);
    }

    /// exp(-i beta X) on every qubit.
    void apply_mixer(Statevector& psi, double beta) const {
        const double c = std::cos(beta);
        const std::complex<double> ms(0.0, -std::sin(beta));
        for (std::size_t q = 0; q < n_; ++q) {
            const std::size_t bit = std::size_t{1} << q;
            for (std::size_t x = 0; x < psi.size(); ++x) {
                if (x & bit) continue;
                const auto a = psi[x];
                const auto b = psi[x | bit];
                psi[x] = c * a + ms * b;
                psi[x | bit] = ms * a + c * b;
            }
        }
    }

    Statevector simulate(const QaoaParams& params) const {
        params.validate();
        auto psi = initial_state();
        for (std::size_t l = 0; l < params.depth(); ++l) {
            apply_cost(psi, params.gammas[l]);
            apply_mixer(psi, params.betas[l]);
        }
        return psi;
    }

    double expectation(const Statevector& psi) const {
        double f = 0.0;
        for (std::size_t x = 0; x < psi.size(); ++x) f += std::norm(psi[x]) * energies_[x];
        return f;
    }

    double expectation(const QaoaParams& params) const { return expectation(simulate(params)); }

private:
    std::size_t n_;
    std::vector<double> energies_;
};

inline Statevector simulate(const IsingModel& ising, const QaoaParams& params) {
    return QaoaSimulator(ising).simulate(params);
}

inline double expectation(const IsingModel& ising, const QaoaParams& params) {
    return QaoaSimulator(ising).expectation(params);
}

inline std::vector<double> probabilities(const Statevector& psi) {
    std::vector<double> p(psi.size());
    for (std::size_t x = 0; x < psi.size(); ++x) p[x] = std::norm(psi[x]);
    return p;
}

/// Sampled measurement outcomes, sorted by basis index.
struct ShotCounts {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> counts;  // (bitstring, count)
    std::uint64_t shots = 0;
};

/// Multinomial draw of `shots` outcomes from `probs` (inverse CDF).
inline ShotCounts sample_counts(const std::vector<double>& probs, std::uint64_t shots, std::uint64_t seed) {
    if (shots < 1) throw ConfigError("shots must be >= 1");
    std::vector<double> cdf(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        cdf[i] = acc;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, acc);
    std::vector<std::uint64_t> hits(probs.size(), 0);
    for (std::uint64_t s = 0; s < shots; ++s) {
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u(rng));
        if (it == cdf.end()) --it;
        // Skip zero-probability states that share the cdf plateau.
        auto idx = static_cast<std::size_t>(it - cdf.begin());
        while (probs[idx] <= 0.0 && idx + 1 < probs.size()) ++idx;
        ++hits[idx];
    }
    ShotCounts out;
    out.shots = shots;
    for (std::size_t i = 0; i < hits.size(); ++i)
        if (hits[i]) out.counts.emplace_back(i, hits[i]);
    return out;
}

struct QaoaRun {
    QaoaParams params;
    double expectation = 0.0;            // converged F
    std::size_t restarts = 0;
    std::size_t best_restart = 0;
    std::size_t evaluations = 0;
    std::vector<double> start_values;    // F at each restart's initial point
    std::vector<double> probabilities;   // exact |amplitude|^2 per basis state
    ShotCounts counts;

    double frequency(std::uint64_t x) const {
        for (const auto& [b, c] : counts.counts)
            if (b == x) return static_cast<double>(c) / static_cast<double>(counts.shots);
        return 0.0;
    }
};

struct QaoaOptions {
    std::size_t restarts = 5;
    std::size_t max_iters = 100;         // objective evaluations per restart
    double initial_step = 0.25;
    std::uint64_t shots = 100000;
    std::uint64_t seed = 1;
    std::uint64_t noise_shots = 0;       // > 0: F estimated from this many shots
    std::size_t qubit_cap = kDefaultQubitCap;
};

inline constexpr double kWarmPadScale = 0.01;

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index)};
    std::uint64_t out[1];
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    out[0] = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
    return out[0];
}

}  // namespace detail

/// Initial point of restart 0: pi/4 everywhere, or `warm` padded with
/// small uniform values in [-0.01, 0.01] up to depth p.
inline QaoaParams initial_parameters(std::size_t p, const std::optional<QaoaParams>& warm, std::mt19937_64& rng) {
    QaoaParams init;
    if (!warm) {
        init.gammas.assign(p, std::numbers::pi / 4);
        init.betas.assign(p, std::numbers::pi / 4);
        return init;
    }
    std::uniform_real_distribution<double> pad(-kWarmPadScale, kWarmPadScale);
    init = *warm;
    init.gammas.resize(std::min(init.gammas.size(), p));
    init.betas.resize(std::min(init.betas.size(), p));
    while (init.gammas.size() < p) {
        init.gammas.push_back(pad(rng));
        init.betas.push_back(pad(rng));
    }
    return init;
}

/// Multi-start derivative-free minimisation of F(gamma, beta), then final
/// sampling at the best parameters.
inline QaoaRun optimize(const QaoaSimulator& sim, std::size_t p, const QaoaOptions& opt,
                        const std::optional<QaoaParams>& warm = std::nullopt) {
    if (p < 1) throw ConfigError("QAOA depth must be >= 1");
    if (opt.restarts < 1) throw ConfigError("QAOA needs at least one restart");

    std::uint64_t noise_calls = 0;
    auto objective = [&](const std::vector<double>& v) {
        const auto params = QaoaParams::unflatten(v);
        if (opt.noise_shots == 0) return sim.expectation(params);
        const auto probs = probabilities(sim.simulate(params));
        const auto shots = sample_counts(probs, opt.noise_shots, detail::derive_seed(opt.seed, 99, noise_calls++));
        double f = 0.0;
        for (const auto& [x, c] : shots.counts) f += static_cast<double>(c) * sim.energies()[x];
        return f / static_cast<double>(shots.shots);
    };

    QaoaRun run;
    run.restarts = opt.restarts;
    NelderMeadOptions nm;
    nm.max_evaluations = opt.max_iters;
    nm.initial_step = opt.initial_step;
    std::optional<NelderMeadResult> best;
    for (std::size_t r = 0; r < opt.restarts; ++r) {
        std::mt19937_64 rng(detail::derive_seed(opt.seed, 1, r));
        QaoaParams start;
        if (r == 0) {
            start = initial_parameters(p, warm, rng);
        } else {
            std::uniform_real_distribution<double> u(0.0, std::numbers::pi);
            for (std::size_t l = 0; l < p; ++l) start.gammas.push_back(u(rng));
            for (std::size_t l = 0; l < p; ++l) start.betas.push_back(u(rng));
        }
        run.start_values.push_back(objective(start.flatten()));
        auto res = nelder_mead(objective, start.flatten(), nm);
        run.evaluations += res.evaluations;
        if (!best || res.f < best->f) {
            best = std::move(res);
            run.best_restart = r;
        }
    }
    run.params = QaoaParams::unflatten(best->x);
    run.expectation = sim.expectation(run.params);
    run.probabilities = probabilities(sim.simulate(run.params));
    run.counts = sample_counts(run.probabilities, opt.shots, detail::derive_seed(opt.seed, 2, p));
    return run;
}

inline QaoaRun optimize(const IsingModel& ising, std::size_t p, const QaoaOptions& opt,
                        const std::optional<QaoaParams>& warm = std::nullopt) {
    return optimize(QaoaSimulator(ising, opt.qubit_cap), p, opt, warm);
}

/// Sample a fixed parameter set.
inline ShotCounts sample(const IsingModel& ising, const QaoaParams& params, std::uint64_t shots, std::uint64_t seed) {
    return sample_counts(probabilities(simulate(ising, params)), shots, seed);
}

/// One optimize+sample per depth, warm-starting each depth from the
/// previous depth's optimum.
inline std::vector<QaoaRun> run_depth_schedule(const IsingModel& ising, const std::vector<std::size_t>& depths,
                                               const QaoaOptions& opt) {
    if (!std::is_sorted(depths.begin(), depths.end()) ||
        std::adjacent_find(depths.begin(), depths.end()) != depths.end())
        throw ConfigError("QAOA depths must be strictly ascending");
    const QaoaSimulator sim(ising, opt.qubit_cap);
    std::vector<QaoaRun> runs;
    std::optional<QaoaParams> warm;
    for (auto p : depths) {
        QaoaOptions o = opt;
        o.seed = detail::derive_seed(opt.seed, 3, p);
        runs.push_back(optimize(sim, p, o, warm));
        warm = runs.back().params;
    }
    return runs;
}

/// Exact probability mass on bitstrings of Hamming weight within
/// [k - radius, k + radius].
inline double mass_near_weight(const std::vector<double>& probs, std::size_t k, std::size_t radius = 0) {
    double m = 0.0;
    for (std::size_t x = 0; x < probs.size(); ++x) {
        const auto w = static_cast<std::size_t>(std::popcount(x));
        const std::size_t d = w > k ? w - k : k - w;
        if (d <= radius) m += probs[x];
    }
    return m;
}

}  // namespace qsd
