#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"

using namespace qsd;

namespace {

constexpr double kPi = std::numbers::pi;

IsingModel single_spin(double h, double c = 0.0) {
    IsingModel m;
    m.h = {h};
    m.j = Eigen::MatrixXd::Zero(1, 1);
    m.c = c;
    return m;
}

QaoaParams params(std::vector<double> g, std::vector<double> b) { return {std::move(g), std::move(b)}; }

QaoaParams random_params(std::size_t p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-kPi, kPi);
    QaoaParams out;
    for (std::size_t l = 0; l < p; ++l) {
        out.gammas.push_back(u(rng));
        out.betas.push_back(u(rng));
    }
    return out;
}

double norm2(const Statevector& psi) {
    double s = 0;
    for (const auto& a : psi) s += std::norm(a);
    return s;
}

QaoaOptions quick(std::uint64_t seed) {
    QaoaOptions o;
    o.seed = seed;
    o.shots = 2000;
    return o;
}

}  // namespace

TEST(EnergyTable, SingleSpin) {
    auto e = energy_table(single_spin(1.0));
    EXPECT_EQ(e, (std::vector<double>{1.0, -1.0}));
}

TEST(EnergyTable, MatchesQuboEnergies) {
    std::mt19937_64 rng(1);
    for (std::size_t n : {1u, 2u, 5u, 9u, 12u}) {
        auto q = qsd::testing::random_qubo(n, rng);
        auto e = energy_table(qubo_to_ising(q));
        ASSERT_EQ(e.size(), std::size_t{1} << n);
        for (std::uint64_t x = 0; x < e.size(); ++x) EXPECT_NEAR(e[x], q.energy(x), 1e-9 * std::max(1.0, std::abs(e[x])));
    }
}

TEST(EnergyTable, ConstantShiftsEveryEntry) {
    std::mt19937_64 rng(2);
    auto m = qsd::testing::random_ising(6, rng);
    auto a = energy_table(m);
    m.c += 3.5;
    auto b = energy_table(m);
    for (std::size_t x = 0; x < a.size(); ++x) EXPECT_NEAR(b[x] - a[x], 3.5, 1e-12);
    EXPECT_EQ(std::min_element(a.begin(), a.end()) - a.begin(), std::min_element(b.begin(), b.end()) - b.begin());
}

TEST(EnergyTable, QubitCap) {
    std::mt19937_64 rng(3);
    auto m = qsd::testing::random_ising(5, rng);
    EXPECT_THROW(energy_table(m, 4), ConfigError);
    EXPECT_NO_THROW(energy_table(m, 5));
    EXPECT_THROW(QaoaSimulator(m, 4), ConfigError);
}

TEST(Simulate, ZeroAnglesGiveUniformProbabilities) {
    std::mt19937_64 rng(4);
    auto m = qsd::testing::random_ising(5, rng);
    auto g0 = probabilities(simulate(m, params({0.0, 0.0}, {0.7, -1.3})));
    auto b0 = probabilities(simulate(m, params({0.4, 2.1}, {0.0, 0.0})));
    for (std::size_t x = 0; x < 32; ++x) {
        EXPECT_NEAR(g0[x], 1.0 / 32, 1e-12);
        EXPECT_NEAR(b0[x], 1.0 / 32, 1e-12);
    }
}

TEST(Simulate, SingleQubitClosedForm) {
    const double h = 1.0, c = 0.25;
    auto m = single_spin(h, c);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            const double g = -kPi + 2 * kPi * i / 10.0 + 0.05, b = -kPi + 2 * kPi * j / 10.0 + 0.11;
            EXPECT_NEAR(expectation(m, params({g}, {b})), h * std::sin(2 * b) * std::sin(2 * g) + c, 1e-12);
        }
    EXPECT_NEAR(expectation(single_spin(1.0), params({kPi / 4}, {kPi / 4})), 1.0, 1e-12);
}

TEST(Simulate, NormPreservedPerLayer) {
    std::mt19937_64 rng(5);
    auto m = qsd::testing::random_ising(7, rng);
    QaoaSimulator sim(m);
    auto psi = sim.initial_state();
    EXPECT_NEAR(norm2(psi), 1.0, 1e-12);
    auto p = random_params(4, rng);
    for (std::size_t l = 0; l < 4; ++l) {
        auto before = probabilities(psi);
        sim.apply_cost(psi, p.gammas[l]);
        auto after = probabilities(psi);
        for (std::size_t x = 0; x < psi.size(); ++x) EXPECT_NEAR(after[x], before[x], 1e-14);
        sim.apply_mixer(psi, p.betas[l]);
        EXPECT_NEAR(norm2(psi), 1.0, 1e-10);
    }
}

TEST(Simulate, HalfPiMixerFlipsEveryBit) {
    std::mt19937_64 rng(6);
    auto m = qsd::testing::random_ising(6, rng);
    QaoaSimulator sim(m);
    auto psi = sim.simulate(random_params(2, rng));
    auto before = probabilities(psi);
    sim.apply_mixer(psi, kPi / 2);
    auto after = probabilities(psi);
    for (std::size_t x = 0; x < psi.size(); ++x) EXPECT_NEAR(after[x], before[x ^ 63u], 1e-10);
}

TEST(Simulate, ExpectationIsPiPeriodicInBeta) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 10; ++t) {
        auto m = qsd::testing::random_ising(5, rng);
        auto p = random_params(2, rng);
        const double f = expectation(m, p);
        for (std::size_t l = 0; l < 2; ++l) {
            auto shifted = p;
            shifted.betas[l] += kPi;
            EXPECT_NEAR(expectation(m, shifted), f, 1e-10);
        }
    }
}

TEST(Expectation, MeanEnergyAtZeroAndBoundedBelow) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 10; ++t) {
        auto m = qsd::testing::random_ising(6, rng);
        auto e = energy_table(m);
        const double mean = std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
        EXPECT_NEAR(expectation(m, params({0}, {0})), mean, 1e-12);
        const double lo = *std::min_element(e.begin(), e.end());
        for (int s = 0; s < 10; ++s) EXPECT_GE(expectation(m, random_params(3, rng)), lo - 1e-12);
    }
}

TEST(Optimize, SingleQubitReachesGlobalMinimum) {
    auto run = optimize(single_spin(1.0), 1, quick(3));
    EXPECT_LE(run.expectation, -0.999);
    EXPECT_EQ(run.restarts, 5u);
    EXPECT_EQ(run.start_values.size(), 5u);
    EXPECT_NEAR(run.start_values[0], 1.0, 1e-12);  // pi/4 start
    EXPECT_LE(run.evaluations, 5u * 100u);
    EXPECT_GT(run.frequency(1), 0.99);
}

TEST(Optimize, Deterministic) {
    std::mt19937_64 rng(9);
    auto m = qsd::testing::random_ising(6, rng);
    auto a = optimize(m, 2, quick(11));
    auto b = optimize(m, 2, quick(11));
    EXPECT_EQ(a.params.flatten(), b.params.flatten());
    EXPECT_EQ(a.expectation, b.expectation);
    EXPECT_EQ(a.counts.counts, b.counts.counts);
    EXPECT_EQ(a.best_restart, b.best_restart);
}

TEST(Optimize, InvalidSettings) {
    auto m = single_spin(1.0);
    auto o = quick(1);
    EXPECT_THROW(optimize(m, 0, o), ConfigError);
    o.restarts = 0;
    EXPECT_THROW(optimize(m, 1, o), ConfigError);
    EXPECT_THROW(expectation(m, params({0.1, 0.2}, {0.3})), ConfigError);
    EXPECT_THROW(expectation(m, params({}, {})), ConfigError);
}

TEST(Optimize, NoisyObjectiveStillConverges) {
    auto o = quick(4);
    o.noise_shots = 4000;
    auto run = optimize(single_spin(1.0), 1, o);
    EXPECT_LE(run.expectation, -0.95);
}

TEST(WarmStart, DepthTwoStartsFromPaddedDepthOne) {
    std::mt19937_64 rng(10);
    auto q = normalized(qsd::testing::random_qubo(6, rng));
    auto m = qubo_to_ising(q);
    auto o = quick(21);
    auto runs = run_depth_schedule(m, {1, 2}, o);
    ASSERT_EQ(runs.size(), 2u);
    EXPECT_EQ(runs[0].params.depth(), 1u);
    EXPECT_EQ(runs[1].params.depth(), 2u);

    std::mt19937_64 pad(detail::derive_seed(detail::derive_seed(o.seed, 3, 2), 1, 0));
    auto start = initial_parameters(2, runs[0].params, pad);
    EXPECT_EQ(start.gammas[0], runs[0].params.gammas[0]);
    EXPECT_EQ(start.betas[0], runs[0].params.betas[0]);
    EXPECT_LE(std::abs(start.gammas[1]), 0.01);
    EXPECT_LE(std::abs(start.betas[1]), 0.01);
    const double f_start = expectation(m, start);
    EXPECT_NEAR(runs[1].start_values[0], f_start, 1e-12);
    EXPECT_LE(runs[1].expectation, f_start + 1e-12);
    EXPECT_LE(runs[1].expectation, runs[0].expectation + 1e-9);

    auto single = run_depth_schedule(m, {1}, o);
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single[0].params.flatten(), runs[0].params.flatten());
    EXPECT_THROW(run_depth_schedule(m, {2, 1}, o), ConfigError);
    EXPECT_THROW(run_depth_schedule(m, {1, 1}, o), ConfigError);
}

TEST(WarmStart, ColdStartIsQuarterPi) {
    std::mt19937_64 rng(0);
    auto p = initial_parameters(3, std::nullopt, rng);
    for (std::size_t l = 0; l < 3; ++l) {
        EXPECT_EQ(p.gammas[l], kPi / 4);
        EXPECT_EQ(p.betas[l], kPi / 4);
    }
}

TEST(Sampling, UniformTwoQubitFrequencies) {
    std::vector<double> probs(4, 0.25);
    auto s = sample_counts(probs, 100000, 5);
    ASSERT_EQ(s.counts.size(), 4u);
    std::uint64_t total = 0;
    for (auto [x, c] : s.counts) {
        EXPECT_NEAR(static_cast<double>(c) / 100000, 0.25, 0.01);
        total += c;
    }
    EXPECT_EQ(total, 100000u);
}

TEST(Sampling, SingleShot) {
    std::mt19937_64 rng(11);
    auto m = qsd::testing::random_ising(4, rng);
    auto s = sample(m, random_params(1, rng), 1, 3);
    ASSERT_EQ(s.counts.size(), 1u);
    EXPECT_EQ(s.counts[0].second, 1u);
    EXPECT_THROW(sample_counts({1.0}, 0, 1), ConfigError);
}

TEST(Sampling, NeverDrawsZeroProbabilityStates) {
    auto s = sample_counts({0.0, 0.5, 0.0, 0.5, 0.0}, 20000, 9);
    for (auto [x, c] : s.counts) EXPECT_TRUE(x == 1 || x == 3);
}

TEST(Sampling, ConvergesToExactDistribution) {
    std::mt19937_64 rng(12);
    auto m = qsd::testing::random_ising(4, rng);
    auto probs = probabilities(simulate(m, random_params(2, rng)));
    auto tv = [&](std::uint64_t shots) {
        auto s = sample_counts(probs, shots, 17);
        std::vector<double> freq(probs.size(), 0.0);
        for (auto [x, c] : s.counts) freq[x] = static_cast<double>(c) / static_cast<double>(shots);
        double d = 0;
        for (std::size_t x = 0; x < probs.size(); ++x) d += std::abs(freq[x] - probs[x]);
        return d / 2;
    };
    EXPECT_LT(tv(1000000), 0.01);
    EXPECT_LT(tv(1000000), tv(1000));
}

TEST(Sampling, SampledExpectationWithinThreeSigma) {
    std::mt19937_64 rng(13);
    auto m = qsd::testing::random_ising(6, rng);
    auto p = random_params(2, rng);
    auto e = energy_table(m);
    auto probs = probabilities(simulate(m, p));
    const double f = expectation(m, p);
    double var = 0;
    for (std::size_t x = 0; x < e.size(); ++x) var += probs[x] * (e[x] - f) * (e[x] - f);
    const std::uint64_t shots = 1000000;
    auto s = sample_counts(probs, shots, 23);
    double fs = 0;
    for (auto [x, c] : s.counts) fs += static_cast<double>(c) * e[x];
    fs /= static_cast<double>(shots);
    EXPECT_LT(std::abs(fs - f), 3 * std::sqrt(var / shots));
}

TEST(Mass, NearWeight) {
    std::vector<double> probs(8, 0.0);
    probs[0b000] = 0.1;
    probs[0b011] = 0.2;
    probs[0b101] = 0.3;
    probs[0b111] = 0.4;
    EXPECT_NEAR(mass_near_weight(probs, 2), 0.5, 1e-15);
    EXPECT_NEAR(mass_near_weight(probs, 2, 1), 0.9, 1e-15);
    EXPECT_NEAR(mass_near_weight(probs, 0), 0.1, 1e-15);
    EXPECT_NEAR(mass_near_weight(probs, 1), 0.0, 1e-15);
}

TEST(Seeds, DerivedStreamsDiffer) {
    EXPECT_EQ(detail::derive_seed(42, 1, 0), detail::derive_seed(42, 1, 0));
    EXPECT_NE(detail::derive_seed(42, 1, 0), detail::derive_seed(42, 1, 1));
    EXPECT_NE(detail::derive_seed(42, 1, 0), detail::derive_seed(42, 2, 0));
    EXPECT_NE(detail::derive_seed(42, 1, 0), detail::derive_seed(43, 1, 0));
}
