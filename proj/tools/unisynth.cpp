// Command-line front end: data generation, learning, factoring and the
// experiment benches.

#include "unisynth/circuit_io.hpp"
#include "unisynth/datagen.hpp"
#include "unisynth/errors.hpp"
#include "unisynth/factorizer.hpp"
#include "unisynth/harness.hpp"
#include "unisynth/objectives.hpp"
#include "unisynth/optimizers.hpp"
#include "unisynth/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

namespace fs = std::filesystem;
using namespace unisynth;
using nlohmann::json;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::size_t trials = 0;  // 0 = experiment default
    std::string out_dir = ".";
    unsigned workers = 1;
    std::string config_path;
    json config = json::object();
};

/// Fills `value` from the JSON config unless the flag was given explicitly.
template <class T>
void from_config(const json& cfg, const CLI::Option* opt, const std::string& key, T& value) {
    if (opt && opt->count() > 0) return;
    if (cfg.contains(key)) value = cfg.at(key).get<T>();
}

std::string out_path(const Globals& g, const std::string& given, const std::string& fallback) {
    if (!given.empty()) return given;
    fs::create_directories(g.out_dir);
    return (fs::path(g.out_dir) / fallback).string();
}

struct LearnFlags {
    std::string method = "GD";
    double alpha = 0.1;
    double beta = 0.1;
    double tol = 1e-15;
    double stall_tol = 1e-18;
    std::size_t max_iters = 100000;
    std::string linesearch = "none";
    std::string initial = "identity";
    std::string initial_in;
    bool sequential = false;
    bool shuffle = false;
    std::string trace_out;
    std::map<std::string, CLI::Option*> opts;

    void add(CLI::App* cmd) {
        opts["method"] = cmd->add_option("--method", method, "GD, GDP, GDLM, DLR, NM; trailing * for constrained");
        opts["alpha"] = cmd->add_option("--alpha", alpha, "learning rate");
        opts["beta"] = cmd->add_option("--beta", beta, "constraint weight");
        opts["tol"] = cmd->add_option("--tol", tol, "convergence tolerance");
        opts["stall_tol"] = cmd->add_option("--stall-tol", stall_tol, "stall threshold on |delta F|");
        opts["max_iters"] = cmd->add_option("--max-iters", max_iters, "iteration cap");
        opts["linesearch"] = cmd->add_option("--linesearch", linesearch, "none, backtracking or wolfe");
        opts["initial"] = cmd->add_option("--initial", initial, "identity, zeros or haar_random");
        opts["initial_in"] = cmd->add_option("--initial-in", initial_in, "matrix file with the initial guess");
        opts["sequential"] = cmd->add_flag("--sequential", sequential, "row-by-row formulation");
        opts["shuffle"] = cmd->add_flag("--shuffle", shuffle, "shuffle DLR example order each epoch");
        opts["trace_out"] = cmd->add_option("--trace-out", trace_out, "CSV of the objective trace");
    }

    LearnConfig config(const Globals& g) {
        const json& c = g.config;
        from_config(c, opts["method"], "method", method);
        from_config(c, opts["alpha"], "alpha", alpha);
        from_config(c, opts["beta"], "beta", beta);
        from_config(c, opts["tol"], "tol", tol);
        from_config(c, opts["stall_tol"], "stall_tol", stall_tol);
        from_config(c, opts["max_iters"], "max_iters", max_iters);
        from_config(c, opts["linesearch"], "linesearch", linesearch);
        from_config(c, opts["initial"], "initial", initial);
        from_config(c, opts["initial_in"], "initial_in", initial_in);
        from_config(c, opts["sequential"], "sequential", sequential);
        from_config(c, opts["shuffle"], "shuffle", shuffle);
        from_config(c, opts["trace_out"], "trace_out", trace_out);

        LearnConfig lc;
        lc.method = parse_method(method, &lc.constrained);
        lc.alpha = alpha;
        lc.beta = beta;
        lc.tol = tol;
        lc.stall_tol = stall_tol;
        lc.max_iters = max_iters;
        lc.linesearch = parse_linesearch(linesearch);
        lc.initial_guess = parse_initial_guess(initial);
        lc.shuffle = shuffle;
        lc.seed = RngSeed{g.seed};
        if (!initial_in.empty()) {
            lc.initial_guess = InitialGuess::explicit_matrix;
            lc.initial_matrix = read_matrix_file(initial_in);
        }
        lc.validate();
        return lc;
    }
};

void write_trace(const std::string& path, const LearnResult& r) {
    std::ostringstream os;
    os << "iteration,f,g\n";
    char buf[96];
    for (const auto& s : r.trace) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", s.iteration, s.f, s.g);
        os << buf;
    }
    write_text_file(path, os.str());
}

std::string factor_report_json(const FactorReport& r, const Circuit& c) {
    nlohmann::ordered_json j{{"qubits", c.num_qubits},
                             {"cnot_count", r.cnot_count},
                             {"total_gates", r.total_gates},
                             {"fidelity_error", r.error},
                             {"projection_distance", r.projection_distance},
                             {"unitarity_defect", r.unitarity_defect},
                             {"wall_time", r.wall_time},
                             {"source_hash", c.metadata.source_hash},
                             {"timestamp", c.metadata.timestamp}};
    return j.dump(2) + "\n";
}

void print_result(const ExperimentResult& r) {
    std::cout << "experiment " << to_string(r.spec.id) << ": " << r.records.size() << " records\n";
    for (const auto& g : r.summary) {
        std::printf("  %-24s trials=%zu converged=%zu stalled=%zu diverged=%zu max_iters=%zu mean_iters=%.1f",
                    g.group.c_str(), g.trials, g.converged, g.stalled, g.diverged, g.max_iters, g.mean_iterations);
        if (r.spec.id == ExperimentId::wall_clock) std::printf(" mean_wall=%.4gs", g.mean_wall_time);
        std::printf("\n");
    }
    for (const auto& [k, a] : r.tuned_alpha) std::printf("  tuned alpha %s = %g\n", k.c_str(), a);
    if (r.fit)
        std::printf("  fit through bin means: slope=%.4g intercept=%.4g R2=%.4g (bins=%zu)\n", r.fit->slope,
                    r.fit->intercept, r.fit->r2, r.fit->n);
    if (r.per_trial_fit)
        std::printf("  per-trial fit: slope=%.4g intercept=%.4g R2=%.4g (n=%zu)\n", r.per_trial_fit->slope,
                    r.per_trial_fit->intercept, r.per_trial_fit->r2, r.per_trial_fit->n);
    for (const auto& c : r.checks)
        std::printf("  [%s] %s %s\n", c.passed ? "ok" : "FAIL", c.name.c_str(), c.detail.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learn unitary operators from input/output states and factor them into circuits"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    CLI::Option* seed_opt = app.add_option("--seed", g.seed, "master seed");
    CLI::Option* trials_opt = app.add_option("--trials", g.trials, "trial count override");
    CLI::Option* out_opt = app.add_option("--out-dir", g.out_dir, "output directory");
    CLI::Option* workers_opt = app.add_option("--workers", g.workers, "worker threads (0 = all cores)");
    app.add_option("--config", g.config_path, "JSON config; explicit flags override it");

    // gen
    auto* gen = app.add_subcommand("gen", "generate operators, state batches and learning problems");
    std::string gen_kind = "problem", gen_target, gen_name = "qft", gen_out, gen_x_out, gen_y_out, gen_u_out,
                gen_meta_out, gen_qasm_out;
    Eigen::Index gen_n = 4, gen_m = 0;
    int gen_qubits = 2, gen_length = 10;
    double gen_cond_cap = 100.0;
    bool gen_unitary_x = false;
    gen->add_option("--kind", gen_kind, "unitary, states, named, sequence or problem")
        ->check(CLI::IsMember({"unitary", "states", "named", "sequence", "problem"}));
    gen->add_option("--n", gen_n, "dimension");
    gen->add_option("--m", gen_m, "number of examples (default n)");
    gen->add_option("--cond-cap", gen_cond_cap, "rejection cap on cond(X); 0 disables it");
    gen->add_option("--name", gen_name, "hadamard, qft or grover");
    gen->add_option("--target", gen_target, "problem target: H1, F<N>, G<N> or 'haar'");
    gen->add_option("--qubits", gen_qubits, "qubits for random gate sequences");
    gen->add_option("--length", gen_length, "gate sequence length");
    gen->add_flag("--unitary-x", gen_unitary_x, "draw X as a Haar unitary");
    gen->add_option("--out", gen_out, "output matrix file");
    gen->add_option("--x-out", gen_x_out, "problem inputs file");
    gen->add_option("--y-out", gen_y_out, "problem outputs file");
    gen->add_option("--u-out", gen_u_out, "problem operator file");
    gen->add_option("--meta-out", gen_meta_out, "batch metadata CSV");
    gen->add_option("--qasm-out", gen_qasm_out, "circuit of a random gate sequence");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "closed-form unitary fit via SVD");
    std::string or_x, or_y, or_out;
    oracle->add_option("--x", or_x, "inputs file")->required();
    oracle->add_option("--y", or_y, "outputs file")->required();
    oracle->add_option("--out", or_out, "output operator file");

    // learn
    auto* learn = app.add_subcommand("learn", "learn a unitary from examples");
    std::string ln_x, ln_y, ln_out;
    LearnFlags learn_flags;
    learn->add_option("--x", ln_x, "inputs file")->required();
    learn->add_option("--y", ln_y, "outputs file")->required();
    learn->add_option("--out", ln_out, "learned operator file");
    learn_flags.add(learn);

    // factor
    auto* fac = app.add_subcommand("factor", "factor a unitary into Rz/Ry/CNOT gates");
    std::string fa_in, fa_qasm, fa_diagram, fa_report;
    fac->add_option("--in", fa_in, "operator file")->required();
    fac->add_option("--qasm-out", fa_qasm, "OpenQASM 2.0 output");
    fac->add_option("--diagram-out", fa_diagram, "ASCII diagram output");
    fac->add_option("--report-out", fa_report, "JSON report output");

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "learn, project, factor and serialize");
    std::string pi_x, pi_y, pi_qasm, pi_diagram, pi_report, pi_u_out;
    LearnFlags pipe_flags;
    pipe_flags.method = "NM";
    pipe->add_option("--x", pi_x, "inputs file")->required();
    pipe->add_option("--y", pi_y, "outputs file")->required();
    pipe->add_option("--qasm-out", pi_qasm, "OpenQASM 2.0 output");
    pipe->add_option("--diagram-out", pi_diagram, "ASCII diagram output");
    pipe->add_option("--report-out", pi_report, "JSON report output");
    pipe->add_option("--u-out", pi_u_out, "learned operator file");
    pipe_flags.add(pipe);

    // bench
    auto* bench = app.add_subcommand("bench", "run an experiment and write CSV/JSON results");
    std::string bench_id;
    bool bench_check = false;
    std::vector<std::string> bench_methods, bench_targets;
    std::vector<Eigen::Index> bench_sizes, bench_ms;
    double bench_alpha = 0, bench_beta = -1, bench_cond_cap = 0;
    std::size_t bench_max_iters = 0;
    bench->add_option("experiment", bench_id, "experiment id")
        ->required()
        ->check(CLI::IsMember({"lit_examples", "wall_clock", "example_count_sweep", "sequential_vs_batch",
                               "xy_distance", "initial_guess", "conditioning", "pipeline"}));
    bench->add_flag("--check", bench_check, "exit with status 2 when an acceptance band is violated");
    bench->add_option("--methods", bench_methods, "method labels");
    bench->add_option("--targets", bench_targets, "named targets");
    bench->add_option("--sizes", bench_sizes, "n grid");
    bench->add_option("--m-grid", bench_ms, "example-count grid");
    bench->add_option("--alpha", bench_alpha, "learning rate");
    bench->add_option("--beta", bench_beta, "constraint weight");
    bench->add_option("--cond-cap", bench_cond_cap, "cond(X) cap; 0 lifts it");
    bench->add_option("--max-iters", bench_max_iters, "iteration cap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (!g.config_path.empty()) {
            std::ifstream in(g.config_path);
            if (!in) throw InvalidRequest("cannot open config '" + g.config_path + "'");
            g.config = json::parse(in);
        }
        from_config(g.config, seed_opt, "seed", g.seed);
        from_config(g.config, trials_opt, "trials", g.trials);
        from_config(g.config, out_opt, "out_dir", g.out_dir);
        from_config(g.config, workers_opt, "workers", g.workers);

        if (*gen) {
            Rng rng = make_rng(RngSeed{g.seed});
            const double cap = gen_cond_cap <= 0 ? std::numeric_limits<double>::infinity() : gen_cond_cap;
            if (gen_kind == "unitary") {
                write_matrix_file(out_path(g, gen_out, "unitary.txt"), haar_random_unitary(gen_n, rng));
            } else if (gen_kind == "named") {
                write_matrix_file(out_path(g, gen_out, gen_name + ".txt"),
                                  named_operator(parse_named_operator(gen_name), gen_n));
            } else if (gen_kind == "states") {
                const Eigen::Index m = gen_m > 0 ? gen_m : gen_n;
                const StateBatchSample s = random_state_batch(gen_n, m, cap, rng);
                write_matrix_file(out_path(g, gen_out, "states.txt"), s.states);
                if (!gen_meta_out.empty())
                    write_text_file(gen_meta_out,
                                    batch_metadata_csv({{"X", gen_n, m, s.condition_number, s.resamples, g.seed}}));
            } else if (gen_kind == "sequence") {
                const GateSequence s = random_gate_sequence(gen_qubits, gen_length, RngSeed{g.seed});
                write_matrix_file(out_path(g, gen_out, "sequence.txt"), s.op);
                if (!gen_qasm_out.empty()) write_text_file(gen_qasm_out, write_qasm(s.circuit));
            } else {
                const Operator u =
                    gen_target.empty() || gen_target == "haar" ? haar_random_unitary(gen_n, rng) : named_target(gen_target);
                const Eigen::Index n = u.rows();
                const Eigen::Index m = gen_m > 0 ? gen_m : n;
                StateBatchSample s;
                if (gen_unitary_x) {
                    if (m != n) throw InvalidRequest("--unitary-x needs m = n");
                    s.states = haar_random_unitary(n, rng);
                } else {
                    s = random_state_batch(n, m, cap, rng);
                }
                write_matrix_file(out_path(g, gen_x_out, "X.txt"), s.states);
                write_matrix_file(out_path(g, gen_y_out, "Y.txt"), u * s.states);
                if (!gen_u_out.empty()) write_matrix_file(gen_u_out, u);
                if (!gen_meta_out.empty())
                    write_text_file(gen_meta_out,
                                    batch_metadata_csv({{"X", n, m, s.condition_number, s.resamples, g.seed}}));
            }
        } else if (*oracle) {
            const Operator u = procrustes_solve(read_matrix_file(or_x), read_matrix_file(or_y));
            write_matrix_file(out_path(g, or_out, "oracle.txt"), u);
        } else if (*learn) {
            const LearnConfig cfg = learn_flags.config(g);
            const StateBatch x = read_matrix_file(ln_x), y = read_matrix_file(ln_y);
            const LearnResult r = learn_flags.sequential ? sequential_learn(cfg, x, y, g.workers) : run(cfg, x, y);
            write_matrix_file(out_path(g, ln_out, "learned.txt"), r.u);
            if (!learn_flags.trace_out.empty()) write_trace(learn_flags.trace_out, r);
            std::printf("%s: %s after %zu iterations, f=%.3g g=%.3g\n", method_label(cfg.method, cfg.constrained).c_str(),
                        to_string(r.status), r.iterations, r.final_f, r.final_g);
        } else if (*fac) {
            const Operator u = read_matrix_file(fa_in);
            const Factorization f = factor(u, qubit_count(u.rows()));
            write_text_file(out_path(g, fa_qasm, "circuit.qasm"), write_qasm(f.circuit));
            write_text_file(out_path(g, fa_diagram, "circuit.txt"), render_ascii(f.circuit));
            write_text_file(out_path(g, fa_report, "factor_report.json"), factor_report_json(f.report, f.circuit));
            std::printf("%zu gates, %zu CNOTs, fidelity error %.3g\n", f.report.total_gates, f.report.cnot_count,
                        f.report.error);
        } else if (*pipe) {
            const LearnConfig cfg = pipe_flags.config(g);
            const PipelineResult p =
                run_pipeline(read_matrix_file(pi_x), read_matrix_file(pi_y), cfg, pipe_flags.sequential, g.workers);
            for (const auto& w : p.warnings) std::cerr << "warning: " << w << "\n";
            write_text_file(out_path(g, pi_qasm, "pipeline.qasm"), p.qasm);
            write_text_file(out_path(g, pi_diagram, "pipeline_diagram.txt"), p.diagram);
            write_text_file(out_path(g, pi_report, "pipeline_report.json"), p.report_json);
            if (!pi_u_out.empty()) write_matrix_file(pi_u_out, p.learn.u);
            if (!pipe_flags.trace_out.empty()) write_trace(pipe_flags.trace_out, p.learn);
            std::printf("learned in %zu iterations (%s); %zu gates, %zu CNOTs, fidelity error %.3g\n",
                        p.learn.iterations, to_string(p.learn.status), p.factorization.report.total_gates,
                        p.factorization.report.cnot_count, p.factorization.report.error);
        } else if (*bench) {
            ExperimentSpec spec = default_spec(parse_experiment(bench_id));
            spec.seed = g.seed;
            spec.workers = g.workers;
            spec.output_path = g.out_dir;
            const json bc = g.config.value("bench", json::object());
            from_config(bc, nullptr, "trials", spec.trials);
            if (g.trials > 0) spec.trials = g.trials;
            if (bc.contains("methods")) spec.methods = bc["methods"].get<std::vector<std::string>>();
            if (bc.contains("targets")) spec.targets = bc["targets"].get<std::vector<std::string>>();
            if (bc.contains("sizes")) spec.sizes = bc["sizes"].get<std::vector<Eigen::Index>>();
            if (bc.contains("m_grid")) spec.example_counts = bc["m_grid"].get<std::vector<Eigen::Index>>();
            from_config(bc, nullptr, "alpha", spec.alpha);
            from_config(bc, nullptr, "beta", spec.beta);
            from_config(bc, nullptr, "max_iters", spec.max_iters);
            if (!bench_methods.empty()) spec.methods = bench_methods;
            if (!bench_targets.empty()) spec.targets = bench_targets;
            if (!bench_sizes.empty()) spec.sizes = bench_sizes;
            if (!bench_ms.empty()) spec.example_counts = bench_ms;
            if (bench_alpha > 0) spec.alpha = bench_alpha;
            if (bench_beta >= 0) spec.beta = bench_beta;
            if (bench->count("--cond-cap") > 0)
                spec.cond_cap = bench_cond_cap <= 0 ? std::numeric_limits<double>::infinity() : bench_cond_cap;
            if (bench_max_iters > 0) spec.max_iters = bench_max_iters;
            const ExperimentResult r = run_experiment(spec);
            print_result(r);
            if (bench_check && std::any_of(r.checks.begin(), r.checks.end(), [](const BandCheck& c) { return !c.passed; }))
                return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
