#include "unisynth/circuit_io.hpp"
#include "unisynth/datagen.hpp"
#include "unisynth/errors.hpp"
#include "unisynth/harness.hpp"
#include "unisynth/objectives.hpp"

#include <doctest.h>

#include <filesystem>

using namespace unisynth;

TEST_CASE("linear fit: exact line and noisy data") {
    const LinearFit f = linear_fit({0, 1, 2, 3}, {1, 3, 5, 7});
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r2 == doctest::Approx(1.0));
    CHECK(f.n == 4);
    // Symmetric scatter around a flat line: no explained variance.
    const LinearFit g = linear_fit({0, 0, 1, 1}, {0, 2, 0, 2});
    CHECK(g.slope == doctest::Approx(0.0));
    CHECK(g.r2 == doctest::Approx(0.0));
}

TEST_CASE("binning: width, first-come cap, empty bins dropped") {
    std::vector<double> x, y;
    for (int i = 0; i < 10; ++i) x.push_back(0.51), y.push_back(i);
    x.push_back(0.95), y.push_back(100);
    const auto bins = bin_samples(x, y, 0.1, 4);
    REQUIRE(bins.size() == 2);
    CHECK(bins[0].count == 4);
    CHECK(bins[0].hi - bins[0].lo == doctest::Approx(0.1));
    CHECK(bins[0].mean_y == doctest::Approx(1.5));
    CHECK(bins[1].count == 1);
    CHECK(bins[1].mean_y == doctest::Approx(100));
}

TEST_CASE("summaries exclude non-converged trials from means") {
    std::vector<TrialRecord> rs(3);
    rs[0].label = rs[1].label = rs[2].label = "a";
    rs[0].status = LearnStatus::converged, rs[0].iterations = 10;
    rs[1].status = LearnStatus::converged, rs[1].iterations = 20;
    rs[2].status = LearnStatus::stalled, rs[2].iterations = 1000;
    const auto s = summarize(rs, [](const TrialRecord& r) { return r.label; });
    REQUIRE(s.size() == 1);
    CHECK(s[0].trials == 3);
    CHECK(s[0].converged == 2);
    CHECK(s[0].stalled == 1);
    CHECK(s[0].mean_iterations == doctest::Approx(15));
}

TEST_CASE("named targets and method labels") {
    CHECK(named_target("H1") == named_operator(NamedOperator::hadamard, 2));
    CHECK(named_target("F8") == named_operator(NamedOperator::qft, 8));
    CHECK(named_target("G16") == named_operator(NamedOperator::grover, 16));
    CHECK_THROWS_AS(named_target("X3"), InvalidRequest);
    const LearnConfig c = method_config("GDLM*", 0.2, 0.3, 50);
    CHECK(c.method == Method::GDLM);
    CHECK(c.constrained);
    CHECK(c.alpha == 0.2);
    CHECK(c.beta == 0.3);
    CHECK(c.max_iters == 50);
    CHECK(parse_experiment("conditioning") == ExperimentId::conditioning);
    CHECK_THROWS_AS(parse_experiment("fig9"), InvalidRequest);
}

TEST_CASE("spec validation") {
    ExperimentSpec s = default_spec(ExperimentId::lit_examples);
    CHECK_NOTHROW(s.validate());
    s.trials = 0;
    CHECK_THROWS_AS(s.validate(), InvalidRequest);
}

TEST_CASE("lit examples: small run is reproducible and worker invariant") {
    ExperimentSpec s = default_spec(ExperimentId::lit_examples);
    s.trials = 4;
    s.seed = 3;
    s.targets = {"H1", "F4"};
    s.methods = {"GD", "NM"};
    const ExperimentResult a = run_experiment(s);
    s.workers = 3;
    const ExperimentResult b = run_experiment(s);
    CHECK(a.records.size() == 16);
    CHECK(records_csv(a.records) == records_csv(b.records));
    CHECK(summary_csv(a.summary) == summary_csv(b.summary));
    for (const auto& r : a.records)
        if (r.method == "NM") CHECK(r.status == LearnStatus::converged);
}

TEST_CASE("sequential vs batch: one dimension is exact and rows never lag") {
    ExperimentSpec s = default_spec(ExperimentId::sequential_vs_batch);
    s.trials = 3;
    s.sizes = {1, 4};
    const ExperimentResult r = run_experiment(s);
    std::map<std::pair<std::uint64_t, Eigen::Index>, double> batch, seq;
    for (const auto& t : r.records) {
        auto& slot = t.label == "batch" ? batch : seq;
        slot[{t.seed, t.n}] = t.effective_iterations();
    }
    REQUIRE(batch.size() == 6);
    for (const auto& [key, it] : batch) {
        if (key.second == 1) CHECK(seq.at(key) == it);
        CHECK(seq.at(key) <= it);
    }
    for (const auto& c : r.checks) CHECK_MESSAGE(c.passed, c.name << ": " << c.detail);
}

TEST_CASE("initial guess: zero distance needs zero iterations") {
    const Operator u = haar_random_unitary(4, RngSeed{1});
    const StateBatchSample b = random_state_batch(4, 4, 100.0, RngSeed{2});
    LearnConfig c = method_config("GDP*", 0.1, 0.1, 1000);
    c.initial_guess = InitialGuess::explicit_matrix;
    c.initial_matrix = u;
    const LearnResult r = run(c, b.states, u * b.states);
    CHECK(r.status == LearnStatus::converged);
    CHECK(r.iterations == 0);
}

TEST_CASE("xy distance: bins have width 0.1 and at most 100 samples") {
    ExperimentSpec s = default_spec(ExperimentId::xy_distance);
    s.trials = 300;
    const ExperimentResult r = run_experiment(s);
    REQUIRE_FALSE(r.bins.empty());
    for (const auto& b : r.bins) {
        CHECK(b.hi - b.lo == doctest::Approx(0.1));
        CHECK(b.count <= 100);
    }
    REQUIRE(r.fit.has_value());
    for (const auto& rec : r.records) {
        CHECK(rec.n == 4);
        CHECK(rec.method == "GDP*");
        CHECK(rec.alpha == 0.1);
        CHECK(rec.beta == 0.1);
    }
}

TEST_CASE("example count sweep: overconstrained targets are consistent") {
    ExperimentSpec s = default_spec(ExperimentId::example_count_sweep);
    s.trials = 1;
    s.sizes = {4};
    s.example_counts = {2, 8};
    s.methods = {"DLR*"};
    const ExperimentResult r = run_experiment(s);
    REQUIRE(r.records.size() == 2);
    // Consistent Y = UX means the learner can drive f to the tolerance.
    for (const auto& rec : r.records) CHECK(rec.final_f < 1e-15);
}

TEST_CASE("outputs: files are written and byte-deterministic") {
    const auto dir = std::filesystem::temp_directory_path() / "unisynth_harness_test";
    std::filesystem::remove_all(dir);
    ExperimentSpec s = default_spec(ExperimentId::conditioning);
    s.trials = 40;
    s.unitary_trials = 3;
    const ExperimentResult a = run_experiment(s);
    write_outputs(a, (dir / "a").string());
    write_outputs(run_experiment(s), (dir / "b").string());
    for (const char* f : {"conditioning.csv", "conditioning_summary.csv", "conditioning_bins.csv",
                          "conditioning_fit.json"}) {
        CHECK(std::filesystem::exists(dir / "a" / f));
        CHECK(read_text_file((dir / "a" / f).string()) == read_text_file((dir / "b" / f).string()));
    }
    CHECK(std::filesystem::exists(dir / "a" / "conditioning_timing.csv"));
    const std::string fit = read_text_file((dir / "a" / "conditioning_fit.json").string());
    for (const char* key : {"\"slope\"", "\"intercept\"", "\"r2\"", "\"n\""}) CHECK(fit.find(key) != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("pipeline: hadamard from the identity batch") {
    const Matrix h = named_operator(NamedOperator::hadamard, 2);
    const PipelineResult p = run_pipeline(Matrix::Identity(2, 2), h, method_config("NM", 0.1, 0.1, 100000));
    CHECK(p.factorization.report.cnot_count == 0);
    // The learner stops at f < 1e-15, so U carries a residual near 4e-8 in
    // norm; the channel itself matches far tighter.
    CHECK(fidelity_error(h, circuit_matrix(read_qasm(p.qasm))) <= 1e-9);
    CHECK((circuit_matrix(read_qasm(p.qasm)) - h).norm() <= 1e-7);
    CHECK((circuit_matrix(read_qasm(p.qasm)) - p.learn.u).norm() <= 1e-7);
    CHECK(p.report_json.find("\"fidelity_error\"") != std::string::npos);
    CHECK_FALSE(p.diagram.empty());
}

TEST_CASE("pipeline: identity batch gives an identity circuit") {
    const Matrix id = Matrix::Identity(4, 4);
    const PipelineResult p = run_pipeline(id, id, method_config("NM", 0.1, 0.1, 100000));
    CHECK(p.learn.iterations == 0);
    CHECK(p.factorization.report.total_gates == 0);
}

TEST_CASE("pipeline: Grover of size eight from a random batch") {
    const Matrix g = named_operator(NamedOperator::grover, 8);
    const StateBatchSample b = random_state_batch(8, 8, 100.0, RngSeed{4});
    const PipelineResult p = run_pipeline(b.states, g * b.states, method_config("NM", 0.1, 0.1, 100000));
    const Circuit c = read_qasm(p.qasm);
    CHECK(fidelity_error(g, circuit_matrix(c)) <= 1e-6);
    CHECK(read_qasm(write_qasm(c)) == c);
}

TEST_CASE("pipeline: stage-tagged errors") {
    const Matrix x = Matrix::Identity(3, 3);
    try {
        run_pipeline(x, x, method_config("NM", 0.1, 0.1, 100));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).rfind("validate: ", 0) == 0);
    }
}
