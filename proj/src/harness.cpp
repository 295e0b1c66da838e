#include "unisynth/harness.hpp"

#include "unisynth/circuit_io.hpp"
#include "unisynth/datagen.hpp"
#include "unisynth/errors.hpp"
#include "unisynth/objectives.hpp"
#include "unisynth/oracle.hpp"
#include "unisynth/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>

namespace unisynth {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string short_fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

const std::vector<std::string> kAllMethods = {"GD", "GDP", "GDLM", "DLR", "NM", "GDP*", "GDLM*", "DLR*"};

TrialRecord make_record(const ExperimentSpec& spec, const std::string& label, std::uint64_t seed,
                        const std::string& method, const StateBatch& x, const StateBatch& y, double cond_x,
                        const LearnConfig& config, const LearnResult& r, double wall) {
    TrialRecord rec;
    rec.experiment = to_string(spec.id);
    rec.label = label;
    rec.seed = seed;
    rec.method = method;
    rec.n = x.rows();
    rec.m = x.cols();
    rec.alpha = config.alpha;
    rec.beta = config.beta;
    rec.iterations = r.iterations;
    rec.mean_row_iterations = r.mean_row_iterations;
    rec.status = r.status;
    rec.final_f = r.final_f;
    rec.final_g = r.final_g;
    rec.cond_x = cond_x;
    rec.yx_distance = (y - x).norm();
    rec.wall_time = wall;
    return rec;
}

struct Timed {
    LearnResult result;
    double wall = 0.0;
};

Timed timed_learn(const LearnConfig& config, const StateBatch& x, const StateBatch& y, bool sequential) {
    const auto t0 = Clock::now();
    LearnResult r = sequential ? sequential_learn(config, x, y, 1) : run(config, x, y);
    return {std::move(r), seconds_since(t0)};
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

const GroupSummary* find_group(const std::vector<GroupSummary>& s, const std::string& name) {
    for (const auto& g : s)
        if (g.group == name) return &g;
    return nullptr;
}

void fit_bins(ExperimentResult& out, const std::vector<double>& xs, const std::vector<double>& ys) {
    const ExperimentSpec& spec = out.spec;
    out.bins = bin_samples(xs, ys, spec.bin_width, spec.per_bin);
    std::vector<double> bx, by;
    for (const BinStat& b : out.bins) {
        if (b.count < spec.min_bin_count) continue;
        bx.push_back(b.mean_x);
        by.push_back(b.mean_y);
    }
    if (bx.size() >= 2) out.fit = linear_fit(bx, by);
    if (xs.size() >= 2) out.per_trial_fit = linear_fit(xs, ys);
}

}  // namespace

const char* to_string(ExperimentId id) {
    switch (id) {
        case ExperimentId::lit_examples: return "lit_examples";
        case ExperimentId::wall_clock: return "wall_clock";
        case ExperimentId::example_count_sweep: return "example_count_sweep";
        case ExperimentId::sequential_vs_batch: return "sequential_vs_batch";
        case ExperimentId::xy_distance: return "xy_distance";
        case ExperimentId::initial_guess: return "initial_guess";
        case ExperimentId::conditioning: return "conditioning";
        case ExperimentId::pipeline: return "pipeline";
    }
    return "?";
}

ExperimentId parse_experiment(const std::string& text) {
    for (ExperimentId id : {ExperimentId::lit_examples, ExperimentId::wall_clock, ExperimentId::example_count_sweep,
                            ExperimentId::sequential_vs_batch, ExperimentId::xy_distance, ExperimentId::initial_guess,
                            ExperimentId::conditioning, ExperimentId::pipeline})
        if (text == to_string(id)) return id;
    throw InvalidRequest("unknown experiment '" + text + "'");
}

double TrialRecord::effective_iterations() const {
    return mean_row_iterations > 0 ? mean_row_iterations : static_cast<double>(iterations);
}

void ExperimentSpec::validate() const {
    if (trials < 1) throw InvalidRequest("trial count must be >= 1");
    if (!(alpha > 0)) throw InvalidRequest("alpha must be positive");
    if (!(beta >= 0)) throw InvalidRequest("beta must be non-negative");
    if (max_iters < 1) throw InvalidRequest("max_iters must be >= 1");
    if (!(bin_width > 0)) throw InvalidRequest("bin width must be positive");
    if (per_bin < 1) throw InvalidRequest("per-bin sample cap must be >= 1");
    if (!(cond_cap > 1)) throw InvalidRequest("condition cap must exceed 1");
    if (!(range_hi > range_lo) || range_lo < 0) throw InvalidRequest("invalid distance range");
    for (const auto& m : methods) (void)method_config(m, alpha, beta, max_iters);
    for (const auto& t : targets) (void)named_target(t);
    for (auto n : sizes)
        if (n < 1) throw InvalidRequest("sizes must be positive");
    for (auto m : example_counts)
        if (m < 1) throw InvalidRequest("example counts must be positive");
}

ExperimentSpec default_spec(ExperimentId id) {
    ExperimentSpec s;
    s.id = id;
    switch (id) {
        case ExperimentId::lit_examples:
            s.targets = {"H1", "F4", "F8", "G8", "G16"};
            s.methods = kAllMethods;
            break;
        case ExperimentId::wall_clock:
            s.trials = 10;
            s.sizes = {32};
            s.methods = {"GDP", "GDLM", "DLR"};
            break;
        case ExperimentId::example_count_sweep:
            s.sizes = {16};
            s.example_counts = {4, 8, 12, 16, 24, 32};
            s.methods = {"GDP*", "GDLM*", "DLR*"};
            break;
        case ExperimentId::sequential_vs_batch:
            s.trials = 20;
            s.sizes = {4, 8, 16};
            s.methods = {"DLR"};
            break;
        case ExperimentId::xy_distance:
            s.trials = 2000;
            s.sizes = {4};
            s.methods = {"GDP*"};
            s.sequential = true;
            break;
        case ExperimentId::initial_guess:
            s.trials = 2000;
            s.sizes = {4};
            s.methods = {"GDP*"};
            s.sequential = true;
            break;
        case ExperimentId::conditioning:
            s.trials = 2000;
            s.sizes = {4};
            s.methods = {"GDP*"};
            s.sequential = true;
            s.cond_cap = std::numeric_limits<double>::infinity();
            s.max_iters = 200000;
            s.unitary_trials = 20;
            break;
        case ExperimentId::pipeline:
            s.trials = 1;
            s.targets = {"G8"};
            s.methods = {"NM"};
            break;
    }
    return s;
}

Operator named_target(const std::string& name) {
    if (name == "H1") return named_operator(NamedOperator::hadamard, 2);
    if (name.size() >= 2 && (name[0] == 'F' || name[0] == 'G')) {
        long n = 0;
        try {
            std::size_t used = 0;
            n = std::stol(name.substr(1), &used);
            if (used != name.size() - 1) n = 0;
        } catch (const std::exception&) {
            n = 0;
        }
        if (n >= 1) return named_operator(name[0] == 'F' ? NamedOperator::qft : NamedOperator::grover, n);
    }
    throw InvalidRequest("unknown target '" + name + "' (expected H1, F<N> or G<N>)");
}

LearnConfig method_config(const std::string& label, double alpha, double beta, std::size_t max_iters) {
    LearnConfig c;
    c.method = parse_method(label, &c.constrained);
    c.alpha = alpha;
    c.beta = beta;
    c.max_iters = max_iters;
    c.validate();
    return c;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DimensionMismatch("linear_fit: x and y differ in length");
    if (x.size() < 2) throw InvalidRequest("linear_fit: need at least two points");
    const double mx = mean_of(x), my = mean_of(y);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit f;
    f.n = x.size();
    if (sxx == 0) throw InvalidRequest("linear_fit: x values are all equal");
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

std::vector<BinStat> bin_samples(const std::vector<double>& x, const std::vector<double>& y, double width,
                                 std::size_t per_bin) {
    if (x.size() != y.size()) throw DimensionMismatch("bin_samples: x and y differ in length");
    std::map<long, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto& bucket = members[static_cast<long>(std::floor(x[i] / width))];
        if (bucket.size() < per_bin) bucket.push_back(i);
    }
    std::vector<BinStat> bins;
    for (const auto& [index, ids] : members) {
        BinStat b;
        b.lo = static_cast<double>(index) * width;
        b.hi = b.lo + width;
        b.count = ids.size();
        for (std::size_t i : ids) {
            b.mean_x += x[i];
            b.mean_y += y[i];
        }
        b.mean_x /= static_cast<double>(b.count);
        b.mean_y /= static_cast<double>(b.count);
        double ss = 0;
        for (std::size_t i : ids) ss += (y[i] - b.mean_y) * (y[i] - b.mean_y);
        b.stddev_y = b.count > 1 ? std::sqrt(ss / static_cast<double>(b.count - 1)) : 0.0;
        bins.push_back(b);
    }
    return bins;
}

std::vector<GroupSummary> summarize(const std::vector<TrialRecord>& records,
                                    const std::function<std::string(const TrialRecord&)>& key) {
    std::vector<GroupSummary> out;
    std::map<std::string, std::size_t> index;
    std::vector<std::vector<double>> iters;
    std::vector<double> wall;
    for (const TrialRecord& r : records) {
        const std::string k = key(r);
        auto [it, inserted] = index.emplace(k, out.size());
        if (inserted) {
            out.push_back({});
            out.back().group = k;
            iters.emplace_back();
            wall.push_back(0.0);
        }
        GroupSummary& g = out[it->second];
        ++g.trials;
        wall[it->second] += r.wall_time;
        switch (r.status) {
            case LearnStatus::converged:
                ++g.converged;
                iters[it->second].push_back(r.effective_iterations());
                break;
            case LearnStatus::stalled: ++g.stalled; break;
            case LearnStatus::diverged: ++g.diverged; break;
            case LearnStatus::max_iters: ++g.max_iters; break;
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& v = iters[i];
        out[i].mean_iterations = mean_of(v);
        double ss = 0;
        for (double it : v) ss += (it - out[i].mean_iterations) * (it - out[i].mean_iterations);
        out[i].stddev_iterations = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
        out[i].mean_wall_time = wall[i] / static_cast<double>(out[i].trials);
    }
    return out;
}

// ---------------------------------------------------------------- studies

ExperimentResult exp_lit_examples(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult out;
    out.spec = spec;
    const std::size_t nt = spec.targets.size(), nm = spec.methods.size();
    std::vector<TrialRecord> records(nt * spec.trials * nm);
    parallel_for(nt * spec.trials, spec.workers, [&](std::size_t unit) {
        const std::size_t t = unit / spec.trials, trial = unit % spec.trials;
        const Operator u = named_target(spec.targets[t]);
        const std::uint64_t seed = derive_seed(derive_seed(spec.seed, t), trial);
        const StateBatchSample xs = random_state_batch(u.rows(), u.rows(), spec.cond_cap, RngSeed{seed});
        const StateBatch y = u * xs.states;
        for (std::size_t k = 0; k < nm; ++k) {
            const LearnConfig c = method_config(spec.methods[k], spec.alpha, spec.beta, spec.max_iters);
            const Timed r = timed_learn(c, xs.states, y, spec.sequential);
            TrialRecord rec = make_record(spec, spec.targets[t], seed, spec.methods[k], xs.states, y,
                                          xs.condition_number, c, r.result, r.wall);
            rec.u_u0_distance = (u - Operator::Identity(u.rows(), u.rows())).norm();
            records[unit * nm + k] = std::move(rec);
        }
    });
    out.records = std::move(records);
    out.summary = summarize(out.records, [](const TrialRecord& r) { return r.label + "/" + r.method; });

    for (const auto& target : spec.targets) {
        if (const auto* g = find_group(out.summary, target + "/NM")) {
            out.checks.push_back({target + " NM no stalls", g->stalled == 0, std::to_string(g->stalled) + " stalled"});
            out.checks.push_back({target + " NM mean in [100, 300]",
                                  g->converged > 0 && g->mean_iterations >= 100 && g->mean_iterations <= 300,
                                  short_fmt(g->mean_iterations)});
        }
    }
    for (const auto& method : spec.methods) {
        if (method == "NM") continue;
        const auto* h = find_group(out.summary, "H1/" + method);
        if (h)
            out.checks.push_back({"H1 " + method + " mean in [300, 5000]",
                                  h->converged > 0 && h->mean_iterations >= 300 && h->mean_iterations <= 5000,
                                  short_fmt(h->mean_iterations)});
        const auto* f4 = find_group(out.summary, "F4/" + method);
        const auto* f8 = find_group(out.summary, "F8/" + method);
        if (f4 && f8)
            out.checks.push_back({"F8 " + method + " mean exceeds F4", f8->mean_iterations > f4->mean_iterations,
                                  short_fmt(f4->mean_iterations) + " < " + short_fmt(f8->mean_iterations)});
    }
    return out;
}

ExperimentResult exp_wall_clock(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult out;
    out.spec = spec;
    constexpr double kAlphaFloor = 1.0 / 16;
    for (Eigen::Index n : spec.sizes) {
        // Shared problem instances across methods.
        std::vector<std::pair<StateBatchSample, StateBatch>> problems;
        std::vector<std::uint64_t> seeds;
        for (std::size_t trial = 0; trial < spec.trials; ++trial) {
            const std::uint64_t seed = derive_seed(derive_seed(spec.seed, static_cast<std::uint64_t>(n)), trial);
            Rng rng = make_rng(RngSeed{seed});
            const Operator u = haar_random_unitary(n, rng);
            StateBatchSample xs = random_state_batch(n, n, spec.cond_cap, rng);
            StateBatch y = u * xs.states;
            problems.emplace_back(std::move(xs), std::move(y));
            seeds.push_back(seed);
        }
        for (const auto& method : spec.methods) {
            // Start at α = 1 and halve until the pilot trials all converge. When no
            // rate is stall-free, keep the rate with the most converged pilots.
            double alpha = 1.0, best_alpha = 1.0;
            std::size_t best_converged = 0;
            const std::size_t pilots = std::min(spec.pilot_trials, spec.trials);
            for (double a = 1.0; a >= kAlphaFloor; a /= 2) {
                const LearnConfig c = method_config(method, a, spec.beta, spec.max_iters);
                std::vector<int> ok(pilots, 0);
                parallel_for(pilots, spec.workers, [&](std::size_t i) {
                    ok[i] = run(c, problems[i].first.states, problems[i].second).status == LearnStatus::converged;
                });
                const auto converged = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
                if (converged > best_converged) {
                    best_converged = converged;
                    best_alpha = a;
                }
                if (converged == pilots) break;
            }
            alpha = best_alpha;
            out.tuned_alpha[std::to_string(n) + "/" + method] = alpha;
            const LearnConfig c = method_config(method, alpha, spec.beta, spec.max_iters);
            std::vector<TrialRecord> recs(spec.trials);
            // Timed runs are sequential so concurrent trials do not distort timings.
            for (std::size_t i = 0; i < spec.trials; ++i) {
                const Timed r = timed_learn(c, problems[i].first.states, problems[i].second, false);
                recs[i] = make_record(spec, "n" + std::to_string(n), seeds[i], method, problems[i].first.states,
                                      problems[i].second, problems[i].first.condition_number, c, r.result, r.wall);
            }
            out.records.insert(out.records.end(), recs.begin(), recs.end());
        }
    }
    out.summary = summarize(out.records, [](const TrialRecord& r) { return r.label + "/" + r.method; });
    if (!spec.sizes.empty()) {
        const std::string n = "n" + std::to_string(*std::max_element(spec.sizes.begin(), spec.sizes.end()));
        const auto* dlr = find_group(out.summary, n + "/DLR");
        for (const char* other : {"GDP", "GDLM"}) {
            const auto* g = find_group(out.summary, n + "/" + other);
            if (dlr && g)
                out.checks.push_back({std::string("DLR faster than ") + other + " at " + n,
                                      dlr->converged == dlr->trials && dlr->mean_wall_time < g->mean_wall_time,
                                      short_fmt(dlr->mean_wall_time) + "s vs " + short_fmt(g->mean_wall_time) + "s"});
        }
    }
    return out;
}

ExperimentResult exp_example_count_sweep(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult out;
    out.spec = spec;
    const Eigen::Index n = spec.sizes.empty() ? 16 : spec.sizes.front();
    const std::size_t nm = spec.methods.size(), nc = spec.example_counts.size();
    std::vector<TrialRecord> records(nc * spec.trials * nm);
    parallel_for(nc * spec.trials, spec.workers, [&](std::size_t unit) {
        const std::size_t ci = unit / spec.trials, trial = unit % spec.trials;
        const Eigen::Index m = spec.example_counts[ci];
        const std::uint64_t seed = derive_seed(spec.seed, trial);
        const Operator u = haar_random_unitary(n, RngSeed{derive_seed(seed, 0)});
        const StateBatchSample xs =
            random_state_batch(n, m, spec.cond_cap, RngSeed{derive_seed(seed, static_cast<std::uint64_t>(m))});
        const StateBatch y = u * xs.states;  // consistent examples at every m
        for (std::size_t k = 0; k < nm; ++k) {
            const LearnConfig c = method_config(spec.methods[k], spec.alpha, spec.beta, spec.max_iters);
            const Timed r = timed_learn(c, xs.states, y, spec.sequential);
            TrialRecord rec = make_record(spec, "m" + std::to_string(m), seed, spec.methods[k], xs.states, y,
                                          xs.condition_number, c, r.result, r.wall);
            rec.u_u0_distance = (u - Operator::Identity(n, n)).norm();
            records[unit * nm + k] = std::move(rec);
        }
    });
    out.records = std::move(records);
    out.summary = summarize(out.records, [](const TrialRecord& r) { return r.method + "/" + r.label; });
    for (const auto& method : spec.methods) {
        const auto* m8 = find_group(out.summary, method + "/m8");
        const auto* m16 = find_group(out.summary, method + "/m16");
        const auto* m32 = find_group(out.summary, method + "/m32");
        if (m8 && m16)
            out.checks.push_back({method + " m=8 below m=16", m8->mean_iterations < m16->mean_iterations,
                                  short_fmt(m8->mean_iterations) + " vs " + short_fmt(m16->mean_iterations)});
        if (m32 && m16)
            out.checks.push_back({method + " m=32 below m=16", m32->mean_iterations < m16->mean_iterations,
                                  short_fmt(m32->mean_iterations) + " vs " + short_fmt(m16->mean_iterations)});
    }
    return out;
}

ExperimentResult exp_sequential_vs_batch(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult out;
    out.spec = spec;
    const std::string method = spec.methods.empty() ? "DLR" : spec.methods.front();
    const std::size_t ns = spec.sizes.size();
    std::vector<TrialRecord> records(ns * spec.trials * 2);
    parallel_for(ns * spec.trials, spec.workers, [&](std::size_t unit) {
        const std::size_t si = unit / spec.trials, trial = unit % spec.trials;
        const Eigen::Index n = spec.sizes[si];
        const std::uint64_t seed = derive_seed(derive_seed(spec.seed, static_cast<std::uint64_t>(n)), trial);
        Rng rng = make_rng(RngSeed{seed});
        const Operator u = haar_random_unitary(n, rng);
        const StateBatchSample xs = random_state_batch(n, n, spec.cond_cap, rng);
        const StateBatch y = u * xs.states;
        const LearnConfig c = method_config(method, spec.alpha, spec.beta, spec.max_iters);
        const Timed batch = timed_learn(c, xs.states, y, false);
        const Timed seq = timed_learn(c, xs.states, y, true);
        records[2 * unit] = make_record(spec, "batch", seed, method, xs.states, y, xs.condition_number, c,
                                        batch.result, batch.wall);
        records[2 * unit + 1] =
            make_record(spec, "sequential", seed, method, xs.states, y, xs.condition_number, c, seq.result, seq.wall);
    });
    out.records = std::move(records);
    out.summary = summarize(out.records,
                            [](const TrialRecord& r) { return "n" + std::to_string(r.n) + "/" + r.label; });
    for (Eigen::Index n : spec.sizes) {
        std::size_t violations = 0, pairs = 0;
        for (std::size_t i = 0; i + 1 < out.records.size(); i += 2) {
            const auto& b = out.records[i];
            const auto& s = out.records[i + 1];
            if (b.n != n) continue;
            ++pairs;
            if (s.mean_row_iterations > static_cast<double>(b.iterations)) ++violations;
        }
        out.checks.push_back({"n=" + std::to_string(n) + " per-row <= batch", violations == 0,
                              std::to_string(violations) + "/" + std::to_string(pairs) + " violations"});
    }
    return out;
}

ExperimentResult exp_xy_distance(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult out;
    out.spec = spec;
    const Eigen::Index n = spec.sizes.empty() ? 4 : spec.sizes.front();
    const std::string method = spec.methods.empty() ? "GDP*" : spec.methods.front();
    std::vector<TrialRecord> records(spec.trials);
    parallel_for(spec.trials, spec.workers, [&](std::size_t trial) {
        const std::uint64_t seed = derive_seed(spec.seed, trial);
        Rng rng = make_rng(RngSeed{seed});
        const Operator u = haar_random_unitary(n, rng);
        const StateBatchSample xs = random_state_batch(n, n, spec.cond_cap, rng);
        const StateBatch y = u * xs.states;
        const LearnConfig c = method_config(method, spec.alpha, spec.beta, spec.max_iters);
        const Timed r = timed_learn(c, xs.states, y, spec.sequential);
        records[trial] = make_record(spec, spec.sequential ? "sequential" : "batch", seed, method, xs.states, y,
                                     xs.condition_number, c, r.result, r.wall);
        records[trial].u_u0_distance = (u - Operator::Identity(n, n)).norm();
    });
    out.records = std::move(records);
    out.summary = summarize(out.records, [](const TrialRecord& r) { return r.method; });
    std::vector<double> xs, ys;
    for (const auto& r : out.records) {
        if (r.status != LearnStatus::converged) continue;
        xs.push_back(r.yx_distance);
        ys.push_back(r.effective_iterations());
    }
    fit_bins(out, xs, ys);
    if (out.fit) out.checks.push_back({"xy-distance fit R^2 <= 0.5", out.fit->r2 <= 0.5, short_fmt(out.fit->r2)});
    return out;
}

ExperimentResult exp_initial_guess(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult out;
    out.spec = spec;
    const Eigen::Index n = spec.sizes.empty() ? 4 : spec.sizes.front();
    const std::string method = spec.methods.empty() ? "GDP*" : spec.methods.front();
    // Each instance (U, X, perturbation direction) is reused at every distance bin.
    const auto bins = static_cast<std::size_t>(std::llround((spec.range_hi - spec.range_lo) / spec.bin_width));
    const std::size_t instances = std::max<std::size_t>(1, spec.trials / std::max<std::size_t>(bins, 1));
    std::vector<TrialRecord> records(instances * bins);
    parallel_for(records.size(), spec.workers, [&](std::size_t unit) {
        const std::size_t inst = unit / bins, b = unit % bins;
        const std::uint64_t seed = derive_seed(spec.seed, inst);
        Rng rng = make_rng(RngSeed{seed});
        const Operator u = haar_random_unitary(n, rng);
        const StateBatchSample xs = random_state_batch(n, n, spec.cond_cap, rng);
        Matrix e = gaussian_matrix(n, n, rng);
        e /= e.norm();
        const StateBatch y = u * xs.states;
        const double d = spec.range_lo + (static_cast<double>(b) + 0.5) * spec.bin_width;
        LearnConfig c = method_config(method, spec.alpha, spec.beta, spec.max_iters);
        c.initial_guess = InitialGuess::explicit_matrix;
        c.initial_matrix = u + d * e;
        const Timed r = timed_learn(c, xs.states, y, spec.sequential);
        records[unit] = make_record(spec, spec.sequential ? "sequential" : "batch", seed, method, xs.states, y,
                                    xs.condition_number, c, r.result, r.wall);
        records[unit].u_u0_distance = (u - c.initial_matrix).norm();
    });
    out.records = std::move(records);
    out.summary = summarize(out.records, [](const TrialRecord& r) { return r.method; });
    std::vector<double> xs, ys;
    for (const auto& r : out.records) {
        if (r.status != LearnStatus::converged) continue;
        xs.push_back(r.u_u0_distance);
        ys.push_back(r.effective_iterations());
    }
    fit_bins(out, xs, ys);
    if (out.fit) {
        out.checks.push_back({"initial-guess fit R^2 >= 0.9", out.fit->r2 >= 0.9, short_fmt(out.fit->r2)});
        out.checks.push_back({"initial-guess slope positive", out.fit->slope > 0, short_fmt(out.fit->slope)});
    }
    return out;
}

ExperimentResult exp_conditioning(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult out;
    out.spec = spec;
    const Eigen::Index n = spec.sizes.empty() ? 4 : spec.sizes.front();
    const std::string method = spec.methods.empty() ? "GDP*" : spec.methods.front();
    const std::string label = spec.sequential ? "sequential" : "batch";
    // Trials past spec.trials use a unitary X (cond = 1) and stay out of the fit.
    std::vector<TrialRecord> records(spec.trials + spec.unitary_trials);
    parallel_for(records.size(), spec.workers, [&](std::size_t trial) {
        const std::uint64_t seed = derive_seed(spec.seed, trial);
        Rng rng = make_rng(RngSeed{seed});
        const Operator u = haar_random_unitary(n, rng);
        StateBatchSample xs;
        if (trial < spec.trials) {
            xs = random_state_batch(n, n, spec.cond_cap, rng);
        } else {
            xs.states = haar_random_unitary(n, rng);
            xs.condition_number = condition_number(xs.states);
        }
        const StateBatch y = u * xs.states;
        const LearnConfig c = method_config(method, spec.alpha, spec.beta, spec.max_iters);
        const Timed r = timed_learn(c, xs.states, y, spec.sequential);
        records[trial] = make_record(spec, trial < spec.trials ? label : "unitary_x", seed, method, xs.states, y,
                                     xs.condition_number, c, r.result, r.wall);
        records[trial].u_u0_distance = (u - Operator::Identity(n, n)).norm();
    });
    out.records = std::move(records);
    out.summary = summarize(out.records, [](const TrialRecord& r) { return r.label + "/" + r.method; });
    const auto log_iters = [](const TrialRecord& r) { return std::log10(r.effective_iterations()); };
    std::vector<double> xs, ys, unit;
    for (const auto& r : out.records) {
        if (r.status != LearnStatus::converged || r.iterations == 0) continue;
        if (r.label == "unitary_x") {
            unit.push_back(log_iters(r));
        } else {
            xs.push_back(std::log10(r.cond_x));
            ys.push_back(log_iters(r));
        }
    }
    fit_bins(out, xs, ys);
    if (out.fit) {
        out.checks.push_back({"conditioning slope in [1.4, 2.5]", out.fit->slope >= 1.4 && out.fit->slope <= 2.5,
                              short_fmt(out.fit->slope)});
        out.checks.push_back({"conditioning fit R^2 >= 0.9", out.fit->r2 >= 0.9, short_fmt(out.fit->r2)});
    }
    if (!unit.empty() && !out.bins.empty()) {
        double lowest = std::numeric_limits<double>::infinity();
        for (const BinStat& b : out.bins)
            if (b.count >= spec.min_bin_count) lowest = std::min(lowest, b.mean_y);
        const double u_mean = mean_of(unit);
        out.extras["unitary_x_mean_log10_iterations"] = u_mean;
        out.checks.push_back({"cond(X)=1 trials at the sweep minimum", u_mean <= lowest,
                              short_fmt(std::pow(10.0, u_mean)) + " vs lowest bin " + short_fmt(std::pow(10.0, lowest))});
    }
    return out;
}

ExperimentResult exp_pipeline(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult out;
    out.spec = spec;
    const std::string target = spec.targets.empty() ? "G8" : spec.targets.front();
    const std::string method = spec.methods.empty() ? "NM" : spec.methods.front();
    const Operator u = named_target(target);
    for (std::size_t trial = 0; trial < spec.trials; ++trial) {
        const std::uint64_t seed = derive_seed(spec.seed, trial);
        const Operator x = haar_random_unitary(u.rows(), RngSeed{seed});
        const StateBatch y = u * x;
        const LearnConfig c = method_config(method, spec.alpha, spec.beta, spec.max_iters);
        const auto t0 = Clock::now();
        const PipelineResult p = run_pipeline(x, y, c, spec.sequential, spec.workers);
        TrialRecord rec = make_record(spec, target, seed, method, x, y, 1.0, c, p.learn, seconds_since(t0));
        out.records.push_back(rec);

        const double err = fidelity_error(u, circuit_matrix(p.factorization.circuit));
        const bool round_trip = read_qasm(p.qasm) == p.factorization.circuit;
        out.extras["fidelity_error_" + std::to_string(trial)] = err;
        out.checks.push_back({"trial " + std::to_string(trial) + " fidelity error <= 1e-6", err <= 1e-6, short_fmt(err)});
        out.checks.push_back({"trial " + std::to_string(trial) + " QASM round trip", round_trip, ""});
        if (!spec.output_path.empty() && trial == 0) {
            std::filesystem::create_directories(spec.output_path);
            const std::filesystem::path dir(spec.output_path);
            write_text_file((dir / "pipeline.qasm").string(), p.qasm);
            write_text_file((dir / "pipeline_diagram.txt").string(), p.diagram);
            write_text_file((dir / "pipeline_report.json").string(), p.report_json);
        }
    }
    out.summary = summarize(out.records, [](const TrialRecord& r) { return r.label + "/" + r.method; });
    return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    ExperimentResult r;
    switch (spec.id) {
        case ExperimentId::lit_examples: r = exp_lit_examples(spec); break;
        case ExperimentId::wall_clock: r = exp_wall_clock(spec); break;
        case ExperimentId::example_count_sweep: r = exp_example_count_sweep(spec); break;
        case ExperimentId::sequential_vs_batch: r = exp_sequential_vs_batch(spec); break;
        case ExperimentId::xy_distance: r = exp_xy_distance(spec); break;
        case ExperimentId::initial_guess: r = exp_initial_guess(spec); break;
        case ExperimentId::conditioning: r = exp_conditioning(spec); break;
        case ExperimentId::pipeline: r = exp_pipeline(spec); break;
    }
    if (!spec.output_path.empty()) write_outputs(r, spec.output_path);
    return r;
}

// ---------------------------------------------------------------- output

std::string records_csv(const std::vector<TrialRecord>& records) {
    std::ostringstream os;
    os << "experiment,label,seed,method,n,m,alpha,beta,iterations,mean_row_iterations,status,final_f,final_g,"
          "cond_x,yx_distance,u_u0_distance\n";
    for (const auto& r : records)
        os << r.experiment << ',' << r.label << ',' << r.seed << ',' << r.method << ',' << r.n << ',' << r.m << ','
           << fmt(r.alpha) << ',' << fmt(r.beta) << ',' << r.iterations << ',' << fmt(r.mean_row_iterations) << ','
           << to_string(r.status) << ',' << fmt(r.final_f) << ',' << fmt(r.final_g) << ',' << fmt(r.cond_x) << ','
           << fmt(r.yx_distance) << ',' << fmt(r.u_u0_distance) << '\n';
    return os.str();
}

std::string timing_csv(const std::vector<TrialRecord>& records) {
    std::ostringstream os;
    os << "index,label,method,seed,wall_time\n";
    for (std::size_t i = 0; i < records.size(); ++i)
        os << i << ',' << records[i].label << ',' << records[i].method << ',' << records[i].seed << ','
           << fmt(records[i].wall_time) << '\n';
    return os.str();
}

std::string summary_csv(const std::vector<GroupSummary>& summary) {
    std::ostringstream os;
    os << "group,trials,converged,stalled,diverged,max_iters,mean_iterations,stddev_iterations\n";
    for (const auto& g : summary)
        os << g.group << ',' << g.trials << ',' << g.converged << ',' << g.stalled << ',' << g.diverged << ','
           << g.max_iters << ',' << fmt(g.mean_iterations) << ',' << fmt(g.stddev_iterations) << '\n';
    return os.str();
}

std::string bins_csv(const std::vector<BinStat>& bins) {
    std::ostringstream os;
    os << "lo,hi,count,mean_x,mean_y,stddev_y\n";
    for (const auto& b : bins)
        os << fmt(b.lo) << ',' << fmt(b.hi) << ',' << b.count << ',' << fmt(b.mean_x) << ',' << fmt(b.mean_y) << ','
           << fmt(b.stddev_y) << '\n';
    return os.str();
}

std::string fit_json(const ExperimentResult& result) {
    nlohmann::ordered_json j;
    j["experiment"] = to_string(result.spec.id);
    j["trials"] = result.spec.trials;
    j["seed"] = result.spec.seed;
    const auto fit = [](const LinearFit& f) {
        return nlohmann::ordered_json{{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"n", f.n}};
    };
    if (result.fit) j["bin_mean_fit"] = fit(*result.fit);
    if (result.per_trial_fit) j["per_trial_fit"] = fit(*result.per_trial_fit);
    if (!result.tuned_alpha.empty()) j["tuned_alpha"] = result.tuned_alpha;
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& c : result.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["checks"] = checks;
    return j.dump(2) + "\n";
}

void write_outputs(const ExperimentResult& result, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    const std::string id = to_string(result.spec.id);
    write_text_file((base / (id + ".csv")).string(), records_csv(result.records));
    write_text_file((base / (id + "_summary.csv")).string(), summary_csv(result.summary));
    write_text_file((base / (id + "_timing.csv")).string(), timing_csv(result.records));
    if (!result.bins.empty()) write_text_file((base / (id + "_bins.csv")).string(), bins_csv(result.bins));
    write_text_file((base / (id + "_fit.json")).string(), fit_json(result));
}

// ---------------------------------------------------------------- pipeline

PipelineResult run_pipeline(const StateBatch& x, const StateBatch& y, const LearnConfig& config, bool sequential,
                            unsigned workers) {
    const auto stage = [](const char* name, auto&& fn) {
        try {
            return fn();
        } catch (const std::exception& e) {
            throw Error(std::string(name) + ": " + e.what());
        }
    };
    PipelineResult p;
    stage("validate", [&] {
        require_same_shape(x, y, "inputs and outputs");
        if (!is_power_of_two(x.rows()) || x.rows() < 2)
            throw InvalidDimension("state dimension must be a power of two >= 2");
        return 0;
    });
    p.learn = stage("learn", [&] { return sequential ? sequential_learn(config, x, y, workers) : run(config, x, y); });
    if (p.learn.status != LearnStatus::converged)
        p.warnings.push_back(std::string("learner ") + to_string(p.learn.status) + "; factoring the last iterate");
    if (!p.learn.u.allFinite()) throw Error("learn: iterate is not finite");
    const int k = qubit_count(x.rows());
    p.factorization = stage("factor", [&] {
        // The learned operator is only approximately unitary; project first so
        // the factorizer's unitarity check applies to the projection.
        const Operator projected = nearest_unitary(p.learn.u);
        Factorization f = factor(projected, k);
        f.report.projection_distance = (p.learn.u - projected).norm();
        f.report.unitarity_defect = unitarity_defect(p.learn.u);
        f.circuit.metadata.source_hash = operator_hash(p.learn.u);
        return f;
    });
    stage("serialize", [&] {
        p.qasm = write_qasm(p.factorization.circuit);
        p.diagram = render_ascii(p.factorization.circuit);
        return 0;
    });
    nlohmann::ordered_json j;
    j["learn"] = {{"method", method_label(config.method, config.constrained)},
                  {"sequential", sequential},
                  {"iterations", p.learn.iterations},
                  {"status", to_string(p.learn.status)},
                  {"final_f", p.learn.final_f},
                  {"final_g", p.learn.final_g}};
    const FactorReport& r = p.factorization.report;
    j["factor"] = {{"qubits", k},
                   {"projection_distance", r.projection_distance},
                   {"unitarity_defect", r.unitarity_defect},
                   {"fidelity_error", r.error},
                   {"cnot_count", r.cnot_count},
                   {"total_gates", r.total_gates},
                   {"wall_time", r.wall_time}};
    j["source_hash"] = p.factorization.circuit.metadata.source_hash;
    j["timestamp"] = p.factorization.circuit.metadata.timestamp;
    j["warnings"] = p.warnings;
    p.report_json = j.dump(2) + "\n";
    return p;
}

}  // namespace unisynth
