// qsd: subgroup discovery on NSL-KDD with classical search and simulated QAOA.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "qsd/qsd.hpp"

namespace {

template <class Enum, class Parse>
CLI::Option* add_enum(CLI::App& app, const std::string& flag, Enum& target, Parse parse, const std::string& help) {
    return app
        .add_option_function<std::string>(flag, [&target, parse](const std::string& v) { target = parse(v); }, help)
        ->default_str(std::string(qsd::to_string(target)));
}

int exit_code(const std::string& kind) {
    if (kind == "config") return 2;
    if (kind == "parse" || kind == "data") return 3;
    return 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum-inspired subgroup discovery for intrusion detection"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a TOML/INI file (use a [run] section for run options)");

    qsd::PipelineConfig cfg;
    auto* run = app.add_subcommand("run", "Run preprocessing, search, QUBO, QAOA and evaluation");
    run->add_option("--data-dir", cfg.data_dir, "Directory holding the standard NSL-KDD files")->capture_default_str();
    run->add_option("--train", cfg.train_path, "Training file (overrides --data-dir)");
    run->add_option("--test", cfg.test_path, "Test file (overrides --data-dir)");
    add_enum(*run, "--eval-mode", cfg.eval_mode, qsd::parse_eval_mode, "full | 20pct | train_only | hard");
    run->add_option("--holdout-fraction", cfg.holdout_fraction, "Held-out share in train_only mode")
        ->capture_default_str();
    add_enum(*run, "--attack-filter", cfg.attack_filter, qsd::parse_attack_filter, "all | DoS | Probe | R2L | U2R");
    add_enum(*run, "--side", cfg.side, qsd::parse_binary_side, "Binarized side: 1 | 0 | both");
    add_enum(*run, "--threshold", cfg.threshold, qsd::parse_threshold_strategy, "mean | entropy");
    run->add_flag("--align,!--no-align", cfg.align, "Directional alignment of binarized features")
        ->capture_default_str();
    run->add_option("--ig-coverage", cfg.ig_coverage, "Cumulative IG share kept for many-valued categoricals")
        ->capture_default_str();
    run->add_option("--k-feat", cfg.k_feat, "Number of selected features (qubits)")->capture_default_str();
    run->add_option("--k", cfg.k, "Target subgroup cardinality")->capture_default_str();
    run->add_flag("--free-cardinality", cfg.free_cardinality, "Omit the cardinality penalty")->capture_default_str();
    run->add_option("--beam-width", cfg.beam_width, "Beam width")->capture_default_str();
    run->add_option("--beam-depth", cfg.beam_depth, "Beam depth")->capture_default_str();
    run->add_option("--exhaustive-cap", cfg.exhaustive_cap, "Max combinations per cardinality")->capture_default_str();
    run->add_option("--exhaustive-k-max", cfg.exhaustive_k_max, "Largest exhaustive cardinality (<= 8)")
        ->capture_default_str();
    run->add_option("--recall-top", cfg.recall_top, "Exhaustive top-N used for beam recall")->capture_default_str();
    add_enum(*run, "--qubo-mode", cfg.qubo_mode, qsd::parse_qubo_mode, "exact | surrogate");
    run->add_option("--oversample", cfg.oversample, "Surrogate sample size as a multiple of the unknowns")
        ->capture_default_str();
    add_enum(*run, "--fit-sample", cfg.fit_sample, qsd::parse_fit_sample, "Exact-fit rows: all | weighted | k-only");
    run->add_option("--depths", cfg.depths, "QAOA depths, warm-started in ascending order")->capture_default_str();
    run->add_option("--restarts", cfg.restarts, "Optimizer restarts per depth")->capture_default_str();
    run->add_option("--max-iters", cfg.max_iters, "Objective evaluations per restart")->capture_default_str();
    run->add_option("--shots", cfg.shots, "Final measurement shots")->capture_default_str();
    run->add_option("--n-top", cfg.n_top, "Most frequent bitstrings decoded")->capture_default_str();
    run->add_option("--permutations", cfg.permutations, "Permutation-test replicates")->capture_default_str();
    run->add_option("--tested-subgroups", cfg.tested_subgroups, "Subgroups per source given significance tests")
        ->capture_default_str();
    run->add_option("--classical-rules", cfg.classical_rules, "Beam rules in the hybrid detector")
        ->capture_default_str();
    run->add_option("--quantum-rules", cfg.quantum_rules, "QAOA rules in the hybrid detector")->capture_default_str();
    run->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
    run->add_option("--output-dir", cfg.output_dir, "Parent of the per-config run directory")->capture_default_str();

    std::string synth_dir = "synthetic";
    qsd::synthetic::CorpusSize synth_size;
    std::uint64_t synth_seed = 2024;
    auto* synth = app.add_subcommand("synth", "Write a synthetic corpus in NSL-KDD format");
    synth->add_option("dir", synth_dir, "Output directory")->capture_default_str();
    synth->add_option("--train-records", synth_size.train, "Records in KDDTrain+.txt")->capture_default_str();
    synth->add_option("--test-records", synth_size.test, "Records in KDDTest+.txt")->capture_default_str();
    synth->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const qsd::Error& e) {
        std::cerr << "error [config]: " << e.what() << '\n';
        return 2;
    }

    if (*synth) {
        try {
            qsd::synthetic::write_corpus(synth_dir, synth_size, synth_seed);
        } catch (const qsd::Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 4;
        }
        std::cout << "wrote synthetic corpus to " << synth_dir << '\n';
        return 0;
    }

    qsd::Warnings::exchange([](const std::string& m) { std::cerr << "warning: " << m << '\n'; });
    try {
        const auto res = qsd::run_pipeline(cfg);
        const auto& rep = res.report;
        std::cout << "run directory: " << res.run_dir.string() << '\n';
        for (const auto& d : rep["qaoa"]) {
            std::cout << "p=" << d["depth"].get<std::size_t>() << "  r_W=" << d["r_w"].dump()
                      << "  r_E=" << d["r_e"].dump() << "  mass@k=" << d["mass_at_k"].get<double>() << '\n';
        }
        std::cout << "QUBO fit R2=" << rep["qubo"]["r_squared"].get<double>()
                  << "  rho=" << rep["qubo"]["spearman_rho"].dump()
                  << "  beam recall=" << rep["search"]["beam_recall"]["recall"].dump() << '\n';
    } catch (const qsd::PhaseError& e) {
        std::cerr << "error " << e.what() << '\n';
        return exit_code(e.kind);
    } catch (const std::exception& e) {
        std::cerr << "error [internal]: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
