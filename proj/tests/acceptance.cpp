// Acceptance runner. Prints one line per criterion and exits non-zero when a
// gating criterion fails.
//
//   acceptance --synthetic DIR   generate a synthetic corpus in DIR and run on it
//   acceptance --nslkdd          run on the real corpus in $NSLKDD_DIR (exit 77 if unset)

#include <bit>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <string>

#include "support.hpp"

using namespace qsd;
namespace fs = std::filesystem;

namespace {

enum class Verdict { Pass, Fail, Info };

struct Board {
    bool real_data = false;
    int gating_failures = 0;

    // Data-calibrated targets only gate on the real corpus.
    void line(const std::string& id, bool ok, const std::string& text, bool data_calibrated = false) {
        Verdict v = ok ? Verdict::Pass : Verdict::Fail;
        if (data_calibrated && !real_data) v = Verdict::Info;
        if (v == Verdict::Fail) ++gating_failures;
        const char* tag = v == Verdict::Pass ? "PASS" : v == Verdict::Fail ? "FAIL" : "INFO";
        std::printf("[%s] %-4s %s", tag, id.c_str(), text.c_str());
        if (v == Verdict::Info)
            std::printf(" [target %s here; calibrated on NSL-KDD, not gating on synthetic data]", ok ? "met" : "not met");
        std::printf("\n");
        std::fflush(stdout);
    }
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

template <class... A>
std::string fmt(const char* f, A... a) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

// --- property suites ------------------------------------------------------

bool ising_equality() {
    std::mt19937_64 rng(101);
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 1 + t % 12;
        const auto q = qsd::testing::random_qubo(n, rng);
        const auto m = qubo_to_ising(q);
        for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
            // Ising energy evaluated directly from spins s = 1 - 2x.
            double e = m.c;
            for (std::size_t i = 0; i < n; ++i) {
                const double si = (x >> i) & 1 ? -1.0 : 1.0;
                e += m.h[i] * si;
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double sj = (x >> j) & 1 ? -1.0 : 1.0;
                    e += m.j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * si * sj;
                }
            }
            if (std::abs(e - q.energy(x)) > 1e-9 * std::max(1.0, std::abs(e))) return false;
        }
    }
    return true;
}

bool penalty_expansion() {
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 1 + rng() % 20;
        const std::size_t k = rng() % (n + 1);
        const double lambda = u(rng);
        const std::uint64_t x = rng() & ((std::uint64_t{1} << n) - 1);
        const double d = static_cast<double>(std::popcount(x)) - static_cast<double>(k);
        const double direct = lambda * d * d;
        if (std::abs(penalty_qubo(n, lambda, k).energy(x) - direct) > 1e-12 * std::max(1.0, lambda * n * n)) return false;
    }
    return true;
}

bool statevector_properties() {
    constexpr double pi = std::numbers::pi;
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> ang(-pi, pi);
    for (int t = 0; t < 10; ++t) {
        const auto m = qsd::testing::random_ising(2 + t % 7, rng);
        QaoaSimulator sim(m);
        auto psi = sim.initial_state();
        for (int l = 0; l < 3; ++l) {
            sim.apply_cost(psi, ang(rng));
            sim.apply_mixer(psi, ang(rng));
            double s = 0;
            for (const auto& a : psi) s += std::norm(a);
            if (std::abs(s - 1.0) > 1e-10) return false;
        }
        const double dim = static_cast<double>(psi.size());
        for (double p : probabilities(simulate(m, {{0.0}, {ang(rng)}})))
            if (std::abs(p - 1.0 / dim) > 1e-9) return false;
        for (double p : probabilities(simulate(m, {{ang(rng)}, {0.0}})))
            if (std::abs(p - 1.0 / dim) > 1e-9) return false;
    }
    IsingModel one;
    one.h = {0.8};
    one.j = Eigen::MatrixXd::Zero(1, 1);
    one.c = -0.3;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            const double g = -pi + 2 * pi * (i + 0.5) / 10, b = -pi + 2 * pi * (j + 0.25) / 10;
            const double closed = 0.8 * std::sin(2 * b) * std::sin(2 * 0.8 * g) - 0.3;
            if (std::abs(expectation(one, {{g}, {b}}) - closed) > 1e-9) return false;
        }
    return true;
}

unsigned __int128 choose(unsigned n, unsigned k) {
    if (k > n) return 0;
    unsigned __int128 r = 1;
    for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

double fisher_oracle(unsigned a, unsigned b, unsigned c, unsigned d) {
    const unsigned r1 = a + b, r2 = c + d, c1 = a + c, n = r1 + r2;
    const unsigned lo = c1 > r2 ? c1 - r2 : 0, hi = std::min(r1, c1);
    const auto obs = choose(r1, a) * choose(r2, c1 - a);
    const long double cut = static_cast<long double>(obs) * (1.0L + 1e-7L);
    unsigned __int128 sum = 0;
    for (unsigned x = lo; x <= hi; ++x) {
        const auto w = choose(r1, x) * choose(r2, c1 - x);
        if (static_cast<long double>(w) <= cut) sum += w;
    }
    return std::min(1.0, static_cast<double>(static_cast<long double>(sum) / static_cast<long double>(choose(n, c1))));
}

std::pair<bool, std::size_t> fisher_suite() {
    std::size_t checked = 0;
    for (unsigned r1 = 1; r1 <= 30; ++r1)
        for (unsigned r2 = 1; r2 <= 30; r2 += 1 + r2 / 10)
            for (unsigned c1 = 1; c1 < r1 + r2; c1 += 1 + (r1 + r2) / 12)
                for (unsigned a = c1 > r2 ? c1 - r2 : 0; a <= std::min(r1, c1); ++a) {
                    const unsigned b = r1 - a, c = c1 - a, d = r2 - c;
                    const double o = fisher_oracle(a, b, c, d);
                    if (std::abs(fisher_exact(a, b, c, d).p_value - o) > 1e-9 * std::max(1e-3, o)) return {false, checked};
                    ++checked;
                }
    return {true, checked};
}

double permutation_null_ks() {
    std::mt19937_64 rng(104);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> ps;
    for (int t = 0; t < 200; ++t) {
        std::vector<std::vector<int>> rows;
        std::vector<int> y;
        for (int i = 0; i < 1000; ++i) {
            rows.push_back({u(rng) < 0.3});
            y.push_back(u(rng) < 0.3);
        }
        ps.push_back(permutation_test(BinaryDataset::from_dense(rows, y), FeatureSubset::of({0}), 200, rng()).p_value);
    }
    std::sort(ps.begin(), ps.end());
    double ks = 0;
    const double m = static_cast<double>(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i)
        ks = std::max({ks, (i + 1) / m - ps[i], ps[i] - i / m});
    return ks;
}

bool beam_never_beats_exhaustive() {
    std::mt19937_64 rng(105);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 4 + t % 9, rows = 200 + 36 * t;
        const auto d = qsd::testing::random_dense(rows, n, rng);
        const auto bd = BinaryDataset::from_dense(d.rows, d.y);
        const auto exh = exhaustive_enumerate(bd, std::min<std::size_t>(8, n));
        const auto beam = beam_search(bd, {3, n});
        for (const auto& [k, g] : beam.best_by_size) {
            auto it = exh.best_by_size.find(k);
            if (it == exh.best_by_size.end()) continue;
            if (g.metrics.wracc > it->second.metrics.wracc + 1e-15) return false;
            if (std::abs(qsd::testing::naive_wracc(d, g.subset.mask) - g.metrics.wracc) > 1e-12) return false;
        }
    }
    return true;
}

bool hybrid_monotone() {
    std::mt19937_64 rng(106);
    for (int t = 0; t < 20; ++t) {
        const auto train = qsd::testing::random_binary(500, 7, rng);
        const auto test = qsd::testing::random_binary(400, 7, rng);
        const auto nb = BernoulliNaiveBayes::fit(train);
        RuleSet small, large;
        for (int i = 0; i < 2; ++i) small.add({1 + rng() % 127}, RuleSource::Classical);
        large = small;
        for (int i = 0; i < 3; ++i) large.add({1 + rng() % 127}, RuleSource::Quantum);
        const double base = evaluate_hybrid(RuleSet{}, nb, test).overall.detection_rate;
        const double ds = evaluate_hybrid(small, nb, test).overall.detection_rate;
        const double dl = evaluate_hybrid(large, nb, test).overall.detection_rate;
        if (!(base <= ds && ds <= dl)) return false;
    }
    return true;
}

// f0, f1 carry the signal only jointly; f2 is a weak single; f3 is noise.
BinaryDataset weak_singles() {
    std::vector<std::vector<int>> rows;
    std::vector<int> y;
    for (int i = 0; i < 200; ++i) {
        const int pattern = (i / 50) % 4;
        const int f0 = pattern == 0 || pattern == 2, f1 = pattern == 0 || pattern == 3;
        const int label = f0 == f1;
        const int f2 = label ? i % 50 < 30 : i % 50 < 20;
        rows.push_back({f0, f1, f2, i % 2});
        y.push_back(label);
    }
    return BinaryDataset::from_dense(rows, y);
}

// --- runs -----------------------------------------------------------------

int run(const fs::path& data_dir, const fs::path& out_dir, Board& board) {
    PipelineConfig cfg;
    cfg.data_dir = data_dir.string();
    cfg.output_dir = out_dir.string();
    cfg.eval_mode = EvalMode::Full;
    cfg.attack_filter = AttackFilter::R2L;
    cfg.k_feat = 10;
    cfg.k = 6;
    cfg.qubo_mode = QuboMode::Exact;
    cfg.depths = {1, 2};
    cfg.restarts = 5;
    cfg.shots = 100000;

    if (board.real_data) {
        const auto tr = load_nslkdd(data_dir / standard_file_name(EvalMode::Full, FileRole::Train));
        const auto te = load_nslkdd(data_dir / standard_file_name(EvalMode::Full, FileRole::Test));
        const bool ok = tr.size() == 125973 && te.size() == 22544 && std::abs(tr.attack_rate() - 0.465) < 0.0005 &&
                        std::abs(te.attack_rate() - 0.569) < 0.0005;
        board.line("0", ok,
                   fmt("ingest: train %zu rows %.1f%% attack, test %zu rows %.1f%% attack", tr.size(),
                       100 * tr.attack_rate(), te.size(), 100 * te.attack_rate()));
    }

    const auto t0 = std::chrono::steady_clock::now();
    const auto res = run_pipeline(cfg, true);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("       run directory: %s\n", res.run_dir.string().c_str());

    const DepthResult* p1 = nullptr;
    const DepthResult* p2 = nullptr;
    for (const auto& d : res.depths) {
        if (d.run.params.depth() == 1) p1 = &d;
        if (d.run.params.depth() == 2) p2 = &d;
    }

    {
        const bool ok = p1 && p1->wracc.r_w && std::abs(*p1->wracc.r_w - 1.0) < 1e-12 && secs < 300;
        board.line("1", ok,
                   fmt("R2L k_feat=10 K=6 exact p=1: r_W=%.6f, wall %.1fs (limit 300s)",
                       p1 && p1->wracc.r_w ? *p1->wracc.r_w : -1.0, secs));
    }
    {
        const bool ok = p1 && p2 && p2->mass_at_k > p1->mass_at_k;
        board.line("2", ok,
                   fmt("probability mass at weight 6: p=1 %.2f%%, p=2 %.2f%% (sampled %.2f%% / %.2f%%)",
                       p1 ? 100 * p1->mass_at_k : -1.0, p2 ? 100 * p2->mass_at_k : -1.0,
                       p1 ? 100 * p1->sampled_mass_at_k : -1.0, p2 ? 100 * p2->sampled_mass_at_k : -1.0));
    }
    {
        const auto& q = res.fit.quality;
        const double r2 = q.r_squared, rho = q.spearman_rho.value_or(0.0);
        board.line("3", r2 >= 0.97 && std::abs(rho) >= 0.85,
                   fmt("QUBO fit quality: R^2=%.4f (>=0.97), |rho|=%.4f (>=0.85)", r2, std::abs(rho)), true);
    }
    {
        const std::size_t n = res.penalized.size();
        std::uint64_t arg = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
            const double e = res.penalized.energy(x);
            if (e < best) {
                best = e;
                arg = x;
            }
        }
        auto it = res.exhaustive.best_by_size.find(6);
        const bool ok = n == 10 && std::popcount(arg) == 6 && it != res.exhaustive.best_by_size.end() &&
                        it->second.subset.mask == arg;
        board.line("4", ok,
                   fmt("penalized argmin over 2^%zu: mask %llu weight %d, exhaustive optimum mask %llu", n,
                       static_cast<unsigned long long>(arg), std::popcount(arg),
                       static_cast<unsigned long long>(it == res.exhaustive.best_by_size.end() ? 0 : it->second.subset.mask)));
    }
    {
        const std::size_t recall = res.beam_recall.value_or(0);
        board.line("5a", res.beam_recall && recall >= 14 && recall <= 18,
                   fmt("beam recall of exhaustive top-20: %zu (band 14-18)", recall), true);
        const auto ws = weak_singles();
        const auto pair = FeatureSubset::of({0, 1});
        const auto exh = exhaustive_enumerate(ws, 2);
        const bool exh_found = exh.best_by_size.at(2).subset == pair;
        const bool narrow_missed = !beam_search(ws, {1, 2}).contains(pair);
        board.line("5b", exh_found && narrow_missed,
                   fmt("planted weak-singles pair: exhaustive finds it (WRAcc %.4f): %s, width-1 beam misses it: %s",
                       exh.best_by_size.at(2).metrics.wracc, exh_found ? "yes" : "no", narrow_missed ? "yes" : "no"));
    }
    {
        PipelineConfig probe = cfg;
        probe.attack_filter = AttackFilter::Probe;
        probe.k = 3;
        probe.depths = {1};
        probe.restarts = 1;
        probe.max_iters = 20;
        probe.shots = 1000;
        probe.permutations = 10;
        probe.tested_subgroups = 1;
        const auto pr = run_pipeline(probe, false);
        auto it = pr.exhaustive.best_by_size.find(3);
        const double w = it == pr.exhaustive.best_by_size.end() ? 0.0 : it->second.metrics.wracc;
        board.line("6", std::abs(w - 0.103515) <= 0.05 * 0.103515,
                   fmt("Probe top-10 exhaustive k=3 WRAcc=%.6f (0.103515 +/- 5%%)", w), true);
    }
    {
        bool all = true;
        auto sub = [&](const char* id, bool ok, const std::string& text) {
            all = all && ok;
            std::printf("       %s %-4s %s\n", ok ? "ok  " : "FAIL", id, text.c_str());
            std::fflush(stdout);
        };
        sub("7a", ising_equality(), "QUBO/Ising energies agree on all bitstrings, 20 instances n<=12 (1e-9)");
        sub("7b", penalty_expansion(), "penalty expansion equals lambda(sum x - K)^2 on 1000 triples (1e-12)");
        sub("7c", statevector_properties(), "statevector norm, zero-angle uniformity, 1-qubit closed form on 100 points (1e-9)");
        const auto [fok, fcount] = fisher_suite();
        sub("7d", fok, fmt("Fisher p-values match integer oracle on %zu tables with margins <= 30", fcount));
        const double ks = permutation_null_ks();
        sub("7e", ks < 0.1, fmt("permutation null p-values: KS distance %.4f over 200 replicates (< 0.1)", ks));
        sub("7f", beam_never_beats_exhaustive(), "exhaustive >= beam at every size on 50 datasets n<=12 N<=2000");
        sub("7g", hybrid_monotone(), "hybrid detection rate monotone in rule set on 20 pairs");
        board.line("7", all, "property suites");
    }
    {
        const double b = res.baseline.overall.detection_rate, c = res.classical.overall.detection_rate,
                     q = res.quantum.overall.detection_rate;
        board.line("8", q >= c && c >= b,
                   fmt("R2L test detection rate: quantum %.4f >= classical %.4f >= baseline %.4f (combined %.4f)", q,
                       c, b, res.combined.overall.detection_rate));
    }
    return board.gating_failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string mode = argc > 1 ? argv[1] : "";
    Board board;
    fs::path data_dir, out_dir;
    try {
        if (mode == "--synthetic" && argc > 2) {
            data_dir = argv[2];
            out_dir = data_dir / "runs";
            std::printf("generating synthetic corpus in %s\n", data_dir.string().c_str());
            synthetic::write_corpus(data_dir);
        } else if (mode == "--nslkdd") {
            const char* env = std::getenv("NSLKDD_DIR");
            if (!env || !*env) {
                std::printf("NSLKDD_DIR not set; skipping\n");
                return 77;
            }
            data_dir = env;
            out_dir = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "qsd_acceptance_runs";
            board.real_data = true;
        } else {
            std::fprintf(stderr, "usage: acceptance --synthetic DIR | --nslkdd [OUT_DIR]\n");
            return 2;
        }
        const int rc = run(data_dir, out_dir, board);
        std::printf("%s: %d gating failure(s)\n", rc == 0 ? "PASSED" : "FAILED", board.gating_failures);
        return rc;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
