#pragma once

// End-to-end run: preprocessing, classical search, QUBO construction, QAOA
// and evaluation, with JSON/CSV artifacts written to a per-config directory.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qsd/binarize.hpp"
#include "qsd/encoding.hpp"
#include "qsd/error.hpp"
#include "qsd/evaluate.hpp"
#include "qsd/hybrid.hpp"
#include "qsd/nslkdd.hpp"
#include "qsd/qaoa.hpp"
#include "qsd/qubo.hpp"
#include "qsd/search.hpp"
#include "qsd/subgroup.hpp"

namespace qsd {

inline constexpr int kReportSchemaVersion = 1;

enum class QuboMode { Exact, Surrogate };

inline std::string_view to_string(QuboMode m) { return m == QuboMode::Exact ? "exact" : "surrogate"; }

inline QuboMode parse_qubo_mode(std::string_view s) {
    if (s == "exact") return QuboMode::Exact;
    if (s == "surrogate") return QuboMode::Surrogate;
    throw ConfigError("unknown qubo mode '" + std::string(s) + "' (expected exact or surrogate)");
}

struct PipelineConfig {
    std::string data_dir = ".";
    std::string train_path;            // empty: data_dir + standard name for eval_mode
    std::string test_path;
    EvalMode eval_mode = EvalMode::Full;
    double holdout_fraction = 0.2;     // train_only
    AttackFilter attack_filter = AttackFilter::R2L;
    BinarySide side = BinarySide::One;
    ThresholdStrategy threshold = ThresholdStrategy::Mean;
    bool align = true;
    double ig_coverage = 0.9;
    std::size_t k_feat = 10;
    std::size_t k = 6;
    bool free_cardinality = false;
    std::size_t beam_width = 10;
    std::size_t beam_depth = 10;
    std::uint64_t exhaustive_cap = kDefaultExhaustiveCap;
    std::size_t exhaustive_k_max = kExhaustiveMaxCardinality;
    std::size_t recall_top = 20;
    QuboMode qubo_mode = QuboMode::Exact;
    std::size_t oversample = kDefaultSurrogateOversample;
    FitSample fit_sample = FitSample::Weighted;
    std::vector<std::size_t> depths = {1, 2};
    std::size_t restarts = 5;
    std::size_t max_iters = 100;
    std::uint64_t shots = 100000;
    std::size_t n_top = 50;
    std::size_t permutations = 1000;
    std::size_t tested_subgroups = 10;  // per source, for Fisher/permutation tests
    std::size_t classical_rules = 30;
    std::size_t quantum_rules = 15;
    std::uint64_t seed = 42;
    std::string output_dir = "runs";
};

inline void validate(const PipelineConfig& c) {
    if (c.k_feat < 1 || c.k_feat >= kMaxMaskBits) throw ConfigError("k-feat must lie in [1, 63]");
    if (c.k < 1 || c.k > c.k_feat) throw ConfigError("k must lie in [1, k-feat]");
    if (c.ig_coverage <= 0.0 || c.ig_coverage > 1.0) throw ConfigError("ig-coverage must lie in (0, 1]");
    if (c.holdout_fraction <= 0.0 || c.holdout_fraction >= 1.0) throw ConfigError("holdout-fraction must lie in (0, 1)");
    if (c.side == BinarySide::Both && !c.align) throw ConfigError("side=both requires alignment");
    if (c.depths.empty()) throw ConfigError("at least one QAOA depth is required");
    for (auto p : c.depths)
        if (p < 1) throw ConfigError("QAOA depths must be >= 1");
    if (c.restarts < 1) throw ConfigError("restarts must be >= 1");
    if (c.max_iters < 1) throw ConfigError("max-iters must be >= 1");
    if (c.shots < 1) throw ConfigError("shots must be >= 1");
    if (c.n_top < 1) throw ConfigError("n-top must be >= 1");
    if (c.permutations < 1) throw ConfigError("permutations must be >= 1");
    if (c.beam_width < 1 || c.beam_depth < 1) throw ConfigError("beam width and depth must be >= 1");
    if (c.qubo_mode == QuboMode::Exact && c.k_feat > kExactFitMaxFeatures)
        throw ConfigError("exact QUBO mode supports k-feat <= 15; use --qubo-mode surrogate");
    if (c.k_feat > kDefaultQubitCap) throw ConfigError("k-feat exceeds the simulator's 24-qubit cap");
    if (!c.free_cardinality && c.k > std::min({kExhaustiveMaxCardinality, c.exhaustive_k_max, c.k_feat}))
        throw ConfigError("k exceeds the exhaustive cardinality limit");
}

using Json = nlohmann::ordered_json;

inline Json to_json(const PipelineConfig& c) {
    Json j;
    j["data_dir"] = c.data_dir;
    j["train_path"] = c.train_path;
    j["test_path"] = c.test_path;
    j["eval_mode"] = to_string(c.eval_mode);
    j["holdout_fraction"] = c.holdout_fraction;
    j["attack_filter"] = to_string(c.attack_filter);
    j["side"] = to_string(c.side);
    j["threshold"] = to_string(c.threshold);
    j["align"] = c.align;
    j["ig_coverage"] = c.ig_coverage;
    j["k_feat"] = c.k_feat;
    j["k"] = c.k;
    j["free_cardinality"] = c.free_cardinality;
    j["beam_width"] = c.beam_width;
    j["beam_depth"] = c.beam_depth;
    j["exhaustive_cap"] = c.exhaustive_cap;
    j["exhaustive_k_max"] = c.exhaustive_k_max;
    j["recall_top"] = c.recall_top;
    j["qubo_mode"] = to_string(c.qubo_mode);
    j["oversample"] = c.oversample;
    j["fit_sample"] = to_string(c.fit_sample);
    j["depths"] = c.depths;
    j["restarts"] = c.restarts;
    j["max_iters"] = c.max_iters;
    j["shots"] = c.shots;
    j["n_top"] = c.n_top;
    j["permutations"] = c.permutations;
    j["tested_subgroups"] = c.tested_subgroups;
    j["classical_rules"] = c.classical_rules;
    j["quantum_rules"] = c.quantum_rules;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    return j;
}

/// FNV-1a over the config echo, excluding the output directory.
inline std::string config_hash(const PipelineConfig& c) {
    Json j = to_json(c);
    j.erase("output_dir");
    const std::string s = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct SeedStreams {
    std::uint64_t split = 0, surrogate = 0, qaoa = 0, permutation = 0;

    static SeedStreams from(std::uint64_t master) {
        return {detail::derive_seed(master, 10, 0), detail::derive_seed(master, 11, 0),
                detail::derive_seed(master, 12, 0), detail::derive_seed(master, 13, 0)};
    }
};

/// Error raised inside a pipeline phase.
struct PhaseError : Error {
    PhaseError(std::string phase, const Error& cause)
        : Error("[" + phase + "] " + cause.what()), phase(std::move(phase)), kind(kind_of(cause)) {}

    std::string phase;
    std::string kind;

    static std::string kind_of(const Error& e) {
        if (dynamic_cast<const ParseError*>(&e)) return "parse";
        if (dynamic_cast<const ConfigError*>(&e)) return "config";
        if (dynamic_cast<const DataError*>(&e)) return "data";
        if (dynamic_cast<const InternalError*>(&e)) return "internal";
        return "error";
    }
};

struct DepthResult {
    QaoaRun run;
    std::vector<DecodedSample> decoded;
    EnergyRatio energy;
    WraccRatio wracc;
    double mass_at_k = 0.0;          // exact
    double sampled_mass_at_k = 0.0;
};

struct PipelineResult {
    std::filesystem::path run_dir;
    Json report;
    Json timing;

    CategoricalEncoder encoder;
    BinarizationModel model;
    FeatureRanking ranking;
    std::vector<std::string> selected;
    BinaryDataset train;
    BinaryDataset test;

    SearchResult exhaustive;
    SearchResult beam;
    std::optional<std::size_t> beam_recall;

    QuboFit fit;
    double normalization_scale = 1.0;
    PenaltyCalibration calibration;
    QuboModel penalized;
    IsingModel ising;
    std::vector<double> energies;
    std::uint64_t ground_state = 0;

    std::vector<DepthResult> depths;
    std::vector<FeatureSubset> unique;

    TierReport baseline, classical, quantum, combined;
    RuleSet classical_rules, quantum_rules;
};

namespace detail {

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json metrics_json(const SubgroupMetrics& m) {
    Json j;
    j["size"] = m.size;
    j["positives"] = m.positives;
    j["coverage"] = m.coverage;
    j["positive_rate"] = optional_json(m.positive_rate);
    j["contrast"] = m.contrast;
    j["wracc"] = m.wracc;
    return j;
}

inline std::string bitstring(std::uint64_t x, std::size_t n) {
    std::string s(n, '0');
    for (std::size_t i = 0; i < n; ++i)
        if ((x >> i) & 1u) s[i] = '1';
    return s;
}

inline Json subgroup_json(const std::vector<std::string>& names, const ScoredSubgroup& g) {
    Json j;
    j["rule"] = render_rule(names, g.subset);
    j["features"] = feature_list(names, g.subset);
    j["mask"] = g.subset.mask;
    j["k"] = g.subset.cardinality();
    j["metrics"] = metrics_json(g.metrics);
    return j;
}

inline Json tier_json(const TierReport& t) {
    auto dm = [](const DetectionMetrics& m) {
        Json j;
        j["detection_rate"] = m.detection_rate;
        j["precision"] = m.precision;
        j["f1"] = m.f1;
        j["predicted_positive"] = m.predicted_positive;
        j["true_positive"] = m.true_positive;
        j["actual_positive"] = m.actual_positive;
        return j;
    };
    Json j;
    j["rules"] = t.rules;
    j["detection_rate"] = t.overall.detection_rate;
    j["precision"] = t.overall.precision;
    j["f1"] = t.overall.f1;
    j["tier1_flagged"] = t.tier1_flagged;
    j["tier1_precision"] = optional_json(t.tier1_precision);
    j["overall"] = dm(t.overall);
    j["tier2"] = dm(t.tier2);
    return j;
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << s;
}

inline std::filesystem::path resolve(const PipelineConfig& c, const std::string& explicit_path, FileRole role) {
    if (!explicit_path.empty()) return explicit_path;
    return std::filesystem::path(c.data_dir) / standard_file_name(c.eval_mode, role);
}

}  // namespace detail

inline void emit_plot_data(const PipelineResult& res, const PipelineConfig& cfg);

/// Run all five phases. With `write_artifacts` the run directory is
/// `<output_dir>/<config hash>`; on failure a FAILED marker and the partial
/// report are written before the error propagates.
inline PipelineResult run_pipeline(const PipelineConfig& cfg, bool write_artifacts = true) {
    using Clock = std::chrono::steady_clock;
    PipelineResult res;
    Json& rep = res.report;
    WarningCollector warnings(true);
    const SeedStreams seeds = SeedStreams::from(cfg.seed);
    std::string phase = "config";
    Json phase_seconds = Json::object();
    auto phase_start = Clock::now();
    const auto wall_start = std::chrono::system_clock::now();

    auto begin_phase = [&](const std::string& name) {
        const auto now = Clock::now();
        phase_seconds[phase] = std::chrono::duration<double>(now - phase_start).count();
        phase = name;
        phase_start = now;
    };

    rep["schema_version"] = kReportSchemaVersion;
    rep["status"] = "running";
    rep["config"] = to_json(cfg);
    rep["config_hash"] = config_hash(cfg);
    rep["seeds"] = {{"master", cfg.seed},
                    {"split", seeds.split},
                    {"surrogate", seeds.surrogate},
                    {"qaoa", seeds.qaoa},
                    {"permutation", seeds.permutation}};
    rep["conventions"] = {
        {"bit_order", "little-endian: bit i of a mask (character i of a bitstring) is selected feature i; "
                      "index = sum_i x_i 2^i; spin z_i = 1 - 2 x_i"},
        {"fisher_test", "two-sided, hypergeometric tails over tables at most as probable as observed"},
        {"permutation_p", "add-one smoothed: (#null >= observed + 1) / (permutations + 1)"},
        {"undefined", "null"},
        {"r_w", "restricted to |mask| = k; r_w_unrestricted scores every sampled cardinality"}};
    rep["caveats"] = Json::array({
        "absolute WRAcc values depend on preprocessing choices (threshold strategy, category pruning, "
        "feature ranking) and may differ from published figures",
        "the second detection tier is a reference naive Bayes model, so hybrid numbers are comparable "
        "only by ordering"});

    if (write_artifacts) {
        res.run_dir = std::filesystem::path(cfg.output_dir) / rep["config_hash"].get<std::string>();
        std::filesystem::create_directories(res.run_dir);
        std::filesystem::remove(res.run_dir / "FAILED");
    }

    auto finish = [&](const std::string& status) {
        begin_phase("done");
        rep["status"] = status;
        rep["warnings"] = warnings.messages();
        res.timing = {{"started_at", std::chrono::duration<double>(wall_start.time_since_epoch()).count()},
                      {"phase_seconds", phase_seconds}};
        if (!write_artifacts) return;
        detail::write_text(res.run_dir / "report.json", rep.dump(2) + "\n");
        detail::write_text(res.run_dir / "timing.json", res.timing.dump(2) + "\n");
    };

    try {
        validate(cfg);

        // Phase 1: preprocessing.
        begin_phase("preprocess");
        const auto train_path = detail::resolve(cfg, cfg.train_path, FileRole::Train);
        RawDataset raw_train = load_nslkdd(train_path);
        RawDataset raw_test;
        if (cfg.eval_mode == EvalMode::TrainOnly) {
            std::vector<std::size_t> order(raw_train.size());
            std::iota(order.begin(), order.end(), 0);
            std::mt19937_64 rng(seeds.split);
            std::shuffle(order.begin(), order.end(), rng);
            const auto n_test = static_cast<std::size_t>(
                std::llround(cfg.holdout_fraction * static_cast<double>(raw_train.size())));
            std::vector<bool> is_test(raw_train.size(), false);
            for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = true;
            RawDataset kept;
            for (std::size_t i = 0; i < raw_train.size(); ++i)
                (is_test[i] ? raw_test : kept).records.push_back(std::move(raw_train.records[i]));
            raw_train = std::move(kept);
        } else {
            raw_test = load_nslkdd(detail::resolve(cfg, cfg.test_path, FileRole::Test));
        }
        if (raw_train.empty()) throw DataError("training data is empty");
        if (raw_test.empty()) throw DataError("test data is empty");

        res.encoder = fit_categorical_encoder(raw_train, cfg.ig_coverage);
        const auto train_enc = filter_attacks(encode(res.encoder, raw_train), cfg.attack_filter);
        const auto test_enc = filter_attacks(encode(res.encoder, raw_test), cfg.attack_filter);
        res.model = fit_binarization(train_enc, cfg.threshold, cfg.align);
        const auto train_full = apply_binarization(res.model, train_enc, cfg.side);
        auto [train_sel, ranking] = rank_and_select(train_full, cfg.k_feat);
        res.train = std::move(train_sel);
        res.ranking = std::move(ranking);
        res.selected = res.train.feature_names;
        res.test = select_features(apply_binarization(res.model, test_enc, cfg.side), res.selected);
        const auto& names = res.selected;
        const std::size_t n = names.size();

        Json data;
        data["train_file"] = train_path.filename().string();
        data["raw_train_rows"] = raw_train.size();
        data["raw_test_rows"] = raw_test.size();
        data["raw_train_attack_rate"] = raw_train.attack_rate();
        data["raw_test_attack_rate"] = raw_test.attack_rate();
        data["train_rows"] = res.train.rows();
        data["train_positives"] = res.train.positives;
        data["train_baseline_rate"] = res.train.baseline_rate();
        data["test_rows"] = res.test.rows();
        data["test_positives"] = res.test.positives;
        data["test_baseline_rate"] = res.test.baseline_rate();
        data["encoded_columns"] = train_enc.cols();
        Json cats = Json::array();
        for (const auto& col : res.encoder.columns)
            cats.push_back({{"feature", col.feature},
                            {"distinct", col.distinct},
                            {"pruned", col.pruned},
                            {"retained", col.categories}});
        data["categoricals"] = cats;
        rep["data"] = data;

        Json feat;
        feat["label_entropy"] = res.ranking.label_entropy;
        feat["selected"] = names;
        Json ranked = Json::array();
        for (const auto& f : res.ranking.features) ranked.push_back({{"feature", f.name}, {"ig", f.ig}});
        feat["ranking"] = ranked;
        feat["binarization"] = {{"strategy", to_string(res.model.strategy)},
                                {"aligned", res.model.aligned},
                                {"side", to_string(cfg.side)}};
        rep["features"] = feat;

        // Phase 2: classical search.
        begin_phase("search");
        const std::size_t k_max = std::min({kExhaustiveMaxCardinality, cfg.exhaustive_k_max, n});
        res.exhaustive = exhaustive_enumerate(res.train, k_max, cfg.exhaustive_cap);
        res.beam = beam_search(res.train, {cfg.beam_width, cfg.beam_depth});
        if (res.exhaustive.evaluated_by_size.count(cfg.k))
            res.beam_recall = beam_recall(res.exhaustive, res.beam, cfg.k, cfg.recall_top);
        else
            warn("exhaustive search skipped k=" + std::to_string(cfg.k) + "; beam recall unavailable");

        auto search_json = [&](const SearchResult& r) {
            Json j;
            j["subgroups"] = r.subgroups.size();
            Json ev = Json::object();
            for (const auto& [k, c] : r.evaluated_by_size) ev[std::to_string(k)] = c;
            j["evaluated_by_size"] = ev;
            j["skipped_cardinalities"] = r.skipped_cardinalities;
            Json best = Json::object();
            for (const auto& [k, g] : r.best_by_size) best[std::to_string(k)] = detail::subgroup_json(names, g);
            j["best_by_size"] = best;
            return j;
        };
        Json search;
        search["exhaustive"] = search_json(res.exhaustive);
        search["exhaustive"]["k_max"] = k_max;
        search["exhaustive"]["cap"] = cfg.exhaustive_cap;
        search["beam"] = search_json(res.beam);
        search["beam_recall"] = {{"k", cfg.k},
                                 {"top", cfg.recall_top},
                                 {"recall", res.beam_recall ? Json(*res.beam_recall) : Json(nullptr)}};
        rep["search"] = search;
        if (write_artifacts) {
            std::ofstream ex(res.run_dir / "exhaustive.csv", std::ios::binary);
            write_search_csv(ex, res.exhaustive, names);
            std::ofstream bm(res.run_dir / "beam.csv", std::ios::binary);
            write_search_csv(bm, res.beam, names);
        }

        // Phase 3: QUBO construction.
        begin_phase("qubo");
        if (cfg.qubo_mode == QuboMode::Exact)
            res.fit = fit_qubo_exact(res.train, cfg.k, cfg.fit_sample);
        else
            res.fit = fit_qubo_surrogate(res.train, cfg.oversample, seeds.surrogate);
        res.normalization_scale = res.fit.model.max_abs();
        const QuboModel base = normalized(res.fit.model);
        if (cfg.qubo_mode == QuboMode::Exact)
            res.calibration = calibrate_penalty(base, cfg.k);
        else
            res.calibration = calibrate_penalty(base, cfg.k, res.fit.sample);
        res.penalized = add_penalty(base, res.calibration, cfg.free_cardinality);
        res.ising = qubo_to_ising(res.penalized, detail::derive_seed(cfg.seed, 14, 0));
        res.energies = energy_table(res.ising);
        res.ground_state = static_cast<std::uint64_t>(
            std::min_element(res.energies.begin(), res.energies.end()) - res.energies.begin());

        Json qubo;
        qubo["mode"] = to_string(cfg.qubo_mode);
        qubo["fit_sample"] = cfg.qubo_mode == QuboMode::Exact ? Json(to_string(cfg.fit_sample)) : Json("uniform");
        qubo["samples"] = res.fit.quality.samples;
        qubo["r_squared"] = res.fit.quality.r_squared;
        qubo["spearman_rho"] = detail::optional_json(res.fit.quality.spearman_rho);
        qubo["normalization_scale"] = res.normalization_scale;
        qubo["lambda"] = cfg.free_cardinality ? Json(nullptr) : Json(res.calibration.lambda);
        Json need = Json::object(), best_e = Json::object();
        for (const auto& [w, v] : res.calibration.lambda_needed_by_k) need[std::to_string(w)] = v;
        for (const auto& [w, v] : res.calibration.best_energy_by_k) best_e[std::to_string(w)] = v;
        qubo["lambda_needed_by_k"] = need;
        qubo["best_energy_by_k"] = best_e;
        Json gs;
        gs["mask"] = res.ground_state;
        gs["bitstring"] = detail::bitstring(res.ground_state, n);
        gs["hamming_weight"] = std::popcount(res.ground_state);
        gs["energy"] = res.energies[res.ground_state];
        gs["rule"] = render_rule(names, {res.ground_state});
        if (auto it = res.exhaustive.best_by_size.find(cfg.k); it != res.exhaustive.best_by_size.end())
            gs["matches_exhaustive_optimum"] = it->second.subset.mask == res.ground_state;
        qubo["ground_state"] = gs;
        rep["qubo"] = qubo;
        if (write_artifacts) {
            detail::write_text(res.run_dir / "qubo.txt", serialize(res.penalized));
            detail::write_text(res.run_dir / "ising.txt", serialize(res.ising));
            detail::write_text(res.run_dir / "binarization.txt", serialize(res.model));
        }

        // Phase 4: QAOA.
        begin_phase("qaoa");
        QaoaOptions qopt;
        qopt.restarts = cfg.restarts;
        qopt.max_iters = cfg.max_iters;
        qopt.shots = cfg.shots;
        qopt.seed = seeds.qaoa;
        std::vector<std::size_t> depths = cfg.depths;
        std::sort(depths.begin(), depths.end());
        depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
        auto runs = run_depth_schedule(res.ising, depths, qopt);

        // Phase 5: evaluation.
        begin_phase("evaluate");
        Json qaoa = Json::array();
        for (auto& run : runs) {
            DepthResult d;
            d.decoded = decode_top_n(run, cfg.n_top);
            d.energy = energy_ratio(d.decoded, res.energies);
            d.wracc = wracc_ratio(d.decoded, res.train, cfg.k, res.exhaustive, cfg.free_cardinality);
            d.mass_at_k = mass_near_weight(run.probabilities, cfg.k);
            std::uint64_t at_k = 0;
            for (const auto& [x, c] : run.counts.counts)
                if (static_cast<std::size_t>(std::popcount(x)) == cfg.k) at_k += c;
            d.sampled_mass_at_k = static_cast<double>(at_k) / static_cast<double>(run.counts.shots);
            d.run = std::move(run);

            Json j;
            const std::size_t p = d.run.params.depth();
            j["depth"] = p;
            j["gammas"] = d.run.params.gammas;
            j["betas"] = d.run.params.betas;
            j["expectation"] = d.run.expectation;
            j["restarts"] = d.run.restarts;
            j["best_restart"] = d.run.best_restart;
            j["evaluations"] = d.run.evaluations;
            j["start_values"] = d.run.start_values;
            j["distinct_sampled"] = d.run.counts.counts.size();
            j["r_e"] = detail::optional_json(d.energy.r_e);
            j["best_sampled_energy"] = d.energy.best_sampled_energy;
            j["ground_energy"] = d.energy.ground_energy;
            j["r_w"] = detail::optional_json(d.wracc.r_w);
            j["r_w_unrestricted"] = detail::optional_json(d.wracc.r_w_unrestricted);
            j["best_wracc_at_k"] = d.wracc.best_at_k;
            j["best_wracc_unrestricted"] = d.wracc.best_unrestricted;
            j["reference_wracc"] = d.wracc.reference;
            j["best_subset"] = d.wracc.best_subset ? Json(render_rule(names, *d.wracc.best_subset)) : Json(nullptr);
            j["mass_at_k"] = d.mass_at_k;
            j["sampled_mass_at_k"] = d.sampled_mass_at_k;
            Json top = Json::array();
            for (const auto& s : d.decoded)
                top.push_back({{"bitstring", detail::bitstring(s.subset.mask, n)},
                               {"mask", s.subset.mask},
                               {"count", s.count},
                               {"probability", s.probability},
                               {"energy", res.energies[s.subset.mask]},
                               {"wracc", evaluate_subgroup(res.train, s.subset).wracc}});
            j["top"] = top;
            qaoa.push_back(j);

            if (write_artifacts) {
                std::ofstream out(res.run_dir / ("distribution_p" + std::to_string(p) + ".csv"), std::ios::binary);
                out << "bitstring,index,count,probability,energy,hamming_weight\n";
                for (const auto& [x, c] : d.run.counts.counts)
                    out << detail::bitstring(x, n) << ',' << x << ',' << c << ','
                        << format_double(d.run.probabilities[x]) << ',' << format_double(res.energies[x]) << ','
                        << std::popcount(x) << '\n';
            }
            res.depths.push_back(std::move(d));
        }
        rep["qaoa"] = qaoa;

        const auto& deepest = res.depths.back();
        res.unique = qaoa_unique(deepest.decoded, res.beam);
        Json uniq = Json::array();
        for (auto s : res.unique)
            uniq.push_back(detail::subgroup_json(names, {s, evaluate_subgroup(res.train, s)}));
        rep["qaoa_unique"] = uniq;

        // Subgroups reported with train/test metrics and significance tests.
        std::map<std::uint64_t, std::set<std::string>> sources;
        auto tag = [&](FeatureSubset s, const std::string& src) {
            if (!s.empty()) sources[s.mask].insert(src);
        };
        for (const auto& g : res.exhaustive.top_at(cfg.k, cfg.tested_subgroups)) tag(g.subset, "exhaustive");
        for (const auto& g : res.beam.top_at(cfg.k, cfg.tested_subgroups)) tag(g.subset, "beam");
        for (const auto& d : res.depths)
            if (d.wracc.best_subset) tag(*d.wracc.best_subset, "qaoa_p" + std::to_string(d.run.params.depth()));
        {
            std::vector<ScoredSubgroup> u;
            for (auto s : res.unique) u.push_back({s, evaluate_subgroup(res.train, s)});
            std::sort(u.begin(), u.end(), better);
            for (std::size_t i = 0; i < u.size() && i < cfg.tested_subgroups; ++i) tag(u[i].subset, "qaoa_unique");
        }
        std::vector<ScoredSubgroup> reported;
        for (const auto& [mask, _] : sources) reported.push_back({{mask}, evaluate_subgroup(res.train, {mask})});
        std::sort(reported.begin(), reported.end(), better);
        Json subgroups = Json::array();
        for (const auto& g : reported) {
            Json j = detail::subgroup_json(names, g);
            j["sources"] = sources[g.subset.mask];
            j["test"] = detail::metrics_json(evaluate_subgroup(res.test, g.subset));
            const auto f = fisher_exact(res.train, g.subset);
            j["fisher"] = {{"p_value", f.p_value}, {"odds_ratio", detail::optional_json(f.odds_ratio)}};
            const auto pt = permutation_test(res.train, g.subset, cfg.permutations,
                                             detail::derive_seed(seeds.permutation, 5, g.subset.mask));
            j["permutation"] = {{"p_value", pt.p_value},
                                {"z_score", detail::optional_json(pt.z_score)},
                                {"null_mean", pt.null_mean},
                                {"null_std", pt.null_std},
                                {"permutations", pt.permutations}};
            subgroups.push_back(j);
        }
        rep["subgroups"] = subgroups;

        // Hybrid detector.
        for (const auto& g : res.beam.top_at(cfg.k, cfg.classical_rules))
            res.classical_rules.add(g.subset, RuleSource::Classical);
        {
            std::vector<ScoredSubgroup> q;
            for (const auto& s : deepest.decoded)
                if (!s.subset.empty()) q.push_back({s.subset, evaluate_subgroup(res.train, s.subset)});
            std::sort(q.begin(), q.end(), better);
            for (std::size_t i = 0; i < q.size() && i < cfg.quantum_rules; ++i)
                res.quantum_rules.add(q[i].subset, RuleSource::Quantum);
        }
        RuleSet combined = res.classical_rules;
        combined.merge(res.quantum_rules);
        const auto nb = BernoulliNaiveBayes::fit(res.train);
        res.baseline = evaluate_hybrid(RuleSet{}, nb, res.test);
        res.classical = evaluate_hybrid(res.classical_rules, nb, res.test);
        res.quantum = evaluate_hybrid(res.quantum_rules, nb, res.test);
        res.combined = evaluate_hybrid(combined, nb, res.test);
        auto rules_json = [&](const RuleSet& rs) {
            Json a = Json::array();
            for (const auto& r : rs.rules())
                a.push_back({{"rule", render_rule(names, r.subset)}, {"source", to_string(r.source)}});
            return a;
        };
        Json hybrid;
        hybrid["tier2"] = "bernoulli_naive_bayes";
        hybrid["baseline"] = detail::tier_json(res.baseline);
        hybrid["classical"] = detail::tier_json(res.classical);
        hybrid["quantum"] = detail::tier_json(res.quantum);
        hybrid["combined"] = detail::tier_json(res.combined);
        hybrid["rules"] = {{"classical", rules_json(res.classical_rules)},
                           {"quantum", rules_json(res.quantum_rules)}};
        rep["hybrid"] = hybrid;

        if (write_artifacts) {
            begin_phase("plot_data");
            emit_plot_data(res, cfg);
        }
        finish("ok");
    } catch (const Error& e) {
        rep["failed_phase"] = phase;
        rep["error"] = e.what();
        const std::string failed_phase = phase;
        finish("failed");
        if (write_artifacts)
            detail::write_text(res.run_dir / "FAILED", "[" + failed_phase + "] " + e.what() + "\n");
        throw PhaseError(failed_phase, e);
    }
    return res;
}

/// Plot-data CSVs: WRAcc-vs-size scatter, Pareto bubbles, depth comparison
/// and the per-depth scaling table.
inline void emit_plot_data(const PipelineResult& res, const PipelineConfig& cfg) {
    const auto& names = res.selected;
    const auto& dir = res.run_dir;
    {
        std::ofstream out(dir / "scatter.csv", std::ios::binary);
        out << "source,features,k,size,wracc\n";
        auto rows = [&](const SearchResult& r, const char* src) {
            for (const auto& g : r.subgroups)
                out << src << ',' << feature_list(names, g.subset) << ',' << g.subset.cardinality() << ','
                    << g.metrics.size << ',' << format_double(g.metrics.wracc) << '\n';
        };
        rows(res.exhaustive, "exhaustive");
        rows(res.beam, "beam");
        for (const auto& d : res.depths)
            for (const auto& s : d.decoded) {
                if (s.subset.empty()) continue;
                const auto m = evaluate_subgroup(res.train, s.subset);
                out << "qaoa_p" << d.run.params.depth() << ',' << feature_list(names, s.subset) << ','
                    << s.subset.cardinality() << ',' << m.size << ',' << format_double(m.wracc) << '\n';
            }
    }
    {
        std::ofstream out(dir / "pareto.csv", std::ios::binary);
        out << "source,features,k,coverage,positive_rate,wracc,probability\n";
        for (const auto& g : res.exhaustive.top_at(cfg.k, cfg.recall_top))
            out << "exhaustive," << feature_list(names, g.subset) << ',' << g.subset.cardinality() << ','
                << format_double(g.metrics.coverage) << ',' << format_optional(g.metrics.positive_rate) << ','
                << format_double(g.metrics.wracc) << ",\n";
        for (const auto& d : res.depths)
            for (const auto& s : d.decoded) {
                if (s.subset.empty()) continue;
                const auto m = evaluate_subgroup(res.train, s.subset);
                out << "qaoa_p" << d.run.params.depth() << ',' << feature_list(names, s.subset) << ','
                    << s.subset.cardinality() << ',' << format_double(m.coverage) << ','
                    << format_optional(m.positive_rate) << ',' << format_double(m.wracc) << ','
                    << format_double(s.probability) << '\n';
            }
    }
    {
        std::ofstream out(dir / "depth_comparison.csv", std::ios::binary);
        out << "depth,expectation,r_e,r_w,r_w_unrestricted,mass_at_k,sampled_mass_at_k,evaluations\n";
        for (const auto& d : res.depths)
            out << d.run.params.depth() << ',' << format_double(d.run.expectation) << ','
                << format_optional(d.energy.r_e) << ',' << format_optional(d.wracc.r_w) << ','
                << format_optional(d.wracc.r_w_unrestricted) << ',' << format_double(d.mass_at_k) << ','
                << format_double(d.sampled_mass_at_k) << ',' << d.run.evaluations << '\n';
    }
    {
        std::ofstream out(dir / "scaling_table.csv", std::ios::binary);
        out << "attack,qubits,k,classical,quantum,ratio,depth\n";
        for (const auto& d : res.depths)
            out << to_string(cfg.attack_filter) << ',' << names.size() << ',' << cfg.k << ','
                << format_double(d.wracc.reference) << ',' << format_double(d.wracc.best_at_k) << ','
                << format_optional(d.wracc.r_w) << ',' << d.run.params.depth() << '\n';
    }
}

}  // namespace qsd
