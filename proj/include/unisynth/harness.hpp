#pragma once

#include "unisynth/factorizer.hpp"
#include "unisynth/optimizers.hpp"
#include "unisynth/types.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace unisynth {

enum class ExperimentId {
    lit_examples,
    wall_clock,
    example_count_sweep,
    sequential_vs_batch,
    xy_distance,
    initial_guess,
    conditioning,
    pipeline,
};

const char* to_string(ExperimentId id);
ExperimentId parse_experiment(const std::string& text);

struct TrialRecord {
    std::string experiment;
    std::string label;  // target name, "batch"/"sequential", ...
    std::uint64_t seed = 0;
    std::string method;
    Eigen::Index n = 0;
    Eigen::Index m = 0;
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t iterations = 0;
    double mean_row_iterations = 0.0;  // sequential runs only
    LearnStatus status = LearnStatus::max_iters;
    double final_f = 0.0;
    double final_g = 0.0;
    double cond_x = 1.0;
    double yx_distance = 0.0;    // ‖Y − X‖_F
    double u_u0_distance = 0.0;  // ‖U − U0‖_F
    double wall_time = 0.0;

    /// Iteration count used in statistics: the mean row count for sequential
    /// runs (iterations to learn one row), the plain count otherwise.
    double effective_iterations() const;
};

struct ExperimentSpec {
    ExperimentId id = ExperimentId::lit_examples;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::string output_path;  // directory for CSV/JSON output; empty disables writing

    std::vector<std::string> targets;         // lit_examples, pipeline
    std::vector<std::string> methods;         // labels such as "GDP*"
    std::vector<Eigen::Index> sizes;          // n grid
    std::vector<Eigen::Index> example_counts; // m grid
    double alpha = 0.1;
    double beta = 0.1;
    std::size_t max_iters = 100000;
    double cond_cap = 100.0;  // infinity lifts the cap
    bool sequential = false;
    double bin_width = 0.1;
    std::size_t per_bin = 100;
    std::size_t min_bin_count = 5;  // bins with fewer samples are left out of fits
    double range_lo = 0.5;          // initial_guess distance range
    double range_hi = 2.5;
    std::size_t pilot_trials = 3;   // wall_clock learning-rate tuning
    std::size_t unitary_trials = 0; // conditioning: extra trials with unitary X (cond = 1)

    void validate() const;
};

/// Paper-scale defaults for each study.
ExperimentSpec default_spec(ExperimentId id);

struct GroupSummary {
    std::string group;
    std::size_t trials = 0;
    std::size_t converged = 0;
    std::size_t stalled = 0;
    std::size_t diverged = 0;
    std::size_t max_iters = 0;
    double mean_iterations = 0.0;  // converged trials only
    double stddev_iterations = 0.0;
    double mean_wall_time = 0.0;
};

struct BinStat {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double mean_x = 0.0;
    double mean_y = 0.0;
    double stddev_y = 0.0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t n = 0;
};

/// Ordinary least squares y ≈ slope·x + intercept.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Bins (x, y) pairs by x with the given width, keeping the first
/// `per_bin` samples of each bin in input order. Empty bins are dropped.
std::vector<BinStat> bin_samples(const std::vector<double>& x, const std::vector<double>& y, double width,
                                 std::size_t per_bin);

struct BandCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<TrialRecord> records;
    std::vector<GroupSummary> summary;
    std::vector<BinStat> bins;
    std::optional<LinearFit> fit;            // through bin means
    std::optional<LinearFit> per_trial_fit;  // supplementary
    std::map<std::string, double> tuned_alpha;
    std::vector<BandCheck> checks;           // acceptance bands for `bench --check`
    std::map<std::string, double> extras;
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

ExperimentResult exp_lit_examples(const ExperimentSpec& spec);
ExperimentResult exp_wall_clock(const ExperimentSpec& spec);
ExperimentResult exp_example_count_sweep(const ExperimentSpec& spec);
ExperimentResult exp_sequential_vs_batch(const ExperimentSpec& spec);
ExperimentResult exp_xy_distance(const ExperimentSpec& spec);
ExperimentResult exp_initial_guess(const ExperimentSpec& spec);
ExperimentResult exp_conditioning(const ExperimentSpec& spec);
ExperimentResult exp_pipeline(const ExperimentSpec& spec);

/// Groups records by `key` and summarizes them; groups keep first-seen order.
std::vector<GroupSummary> summarize(const std::vector<TrialRecord>& records,
                                    const std::function<std::string(const TrialRecord&)>& key);

/// Deterministic record table (no timing columns).
std::string records_csv(const std::vector<TrialRecord>& records);
std::string timing_csv(const std::vector<TrialRecord>& records);
std::string summary_csv(const std::vector<GroupSummary>& summary);
std::string bins_csv(const std::vector<BinStat>& bins);
std::string fit_json(const ExperimentResult& result);

/// Writes <id>.csv, <id>_summary.csv, <id>_timing.csv and, when present,
/// <id>_bins.csv and <id>_fit.json into `dir`.
void write_outputs(const ExperimentResult& result, const std::string& dir);

/// Named lit targets: H1 (2×2 Hadamard), F<N> (QFT), G<N> (Grover).
Operator named_target(const std::string& name);

/// LearnConfig for a method label like "GDLM*".
LearnConfig method_config(const std::string& label, double alpha, double beta, std::size_t max_iters);

struct PipelineResult {
    LearnResult learn;
    Factorization factorization;
    std::string qasm;
    std::string diagram;
    std::string report_json;
    std::vector<std::string> warnings;
};

/// learn → nearest-unitary projection → factor → serialize. Errors are
/// rethrown as Error with the failing stage in the message.
PipelineResult run_pipeline(const StateBatch& x, const StateBatch& y, const LearnConfig& config,
                            bool sequential = false, unsigned workers = 1);

}  // namespace unisynth
