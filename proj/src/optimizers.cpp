#include "unisynth/optimizers.hpp"

#include "unisynth/datagen.hpp"
#include "unisynth/errors.hpp"
#include "unisynth/objectives.hpp"
#include "unisynth/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace unisynth {

const char* to_string(Method m) {
    switch (m) {
        case Method::GD: return "GD";
        case Method::GDP: return "GDP";
        case Method::GDLM: return "GDLM";
        case Method::DLR: return "DLR";
        case Method::NM: return "NM";
    }
    return "?";
}

const char* to_string(LinesearchKind k) {
    switch (k) {
        case LinesearchKind::none: return "none";
        case LinesearchKind::backtracking: return "backtracking";
        case LinesearchKind::wolfe: return "wolfe";
    }
    return "?";
}

const char* to_string(LearnStatus s) {
    switch (s) {
        case LearnStatus::converged: return "converged";
        case LearnStatus::stalled: return "stalled";
        case LearnStatus::max_iters: return "max_iters";
        case LearnStatus::diverged: return "diverged";
    }
    return "?";
}

const char* to_string(InitialGuess g) {
    switch (g) {
        case InitialGuess::identity: return "identity";
        case InitialGuess::zeros: return "zeros";
        case InitialGuess::haar_random: return "haar_random";
        case InitialGuess::explicit_matrix: return "explicit";
    }
    return "?";
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

Method parse_method(const std::string& text, bool* constrained) {
    std::string t = lower(text);
    const bool star = !t.empty() && t.back() == '*';
    if (star) t.pop_back();
    if (constrained) *constrained = star;
    if (t == "gd") return Method::GD;
    if (t == "gdp") return Method::GDP;
    if (t == "gdlm") return Method::GDLM;
    if (t == "dlr") return Method::DLR;
    if (t == "nm" || t == "newton") return Method::NM;
    throw InvalidRequest("unknown method '" + text + "'");
}

LinesearchKind parse_linesearch(const std::string& text) {
    const std::string t = lower(text);
    if (t == "none") return LinesearchKind::none;
    if (t == "backtracking") return LinesearchKind::backtracking;
    if (t == "wolfe") return LinesearchKind::wolfe;
    throw InvalidRequest("unknown linesearch '" + text + "'");
}

InitialGuess parse_initial_guess(const std::string& text) {
    const std::string t = lower(text);
    if (t == "identity") return InitialGuess::identity;
    if (t == "zeros") return InitialGuess::zeros;
    if (t == "haar_random" || t == "haar") return InitialGuess::haar_random;
    if (t == "explicit") return InitialGuess::explicit_matrix;
    throw InvalidRequest("unknown initial guess '" + text + "'");
}

std::string method_label(Method m, bool constrained) {
    return std::string(to_string(m)) + (constrained ? "*" : "");
}

void LearnConfig::validate() const {
    const auto fail = [](const std::string& why) { throw InvalidRequest("invalid learn config: " + why); };
    if (!(alpha > 0)) fail("alpha must be > 0");
    if (!(beta >= 0)) fail("beta must be >= 0");
    if (!(stall_tol > 0) || !(tol > stall_tol)) fail("need tol > stall_tol > 0");
    if (max_iters < 1) fail("max_iters must be >= 1");
    if (!(divergence_factor > 1)) fail("divergence_factor must exceed 1");
    if (constrained && method == Method::NM) fail("Newton's method has no constrained variant");
    if (constrained && method == Method::GD) fail("GD is unconstrained; use GDP* for the penalty formulation");
    if (linesearch != LinesearchKind::none) {
        if (method != Method::GD && method != Method::GDP) fail("linesearch is supported for GD and GDP only");
        if (!(c1 > 0 && c1 < 1)) fail("need 0 < c1 < 1");
        if (linesearch == LinesearchKind::wolfe && !(c1 < c2 && c2 < 1)) fail("need 0 < c1 < c2 < 1");
        if (linesearch == LinesearchKind::backtracking && !(shrink > 0 && shrink < 1)) fail("need 0 < shrink < 1");
    }
    if (initial_guess == InitialGuess::explicit_matrix && initial_matrix.size() == 0)
        fail("explicit initial guess without a matrix");
}

Operator gd_step(const Operator& u, const StateBatch& x, const StateBatch& y, double alpha) {
    return u - alpha * frobenius_gradient(u, x, y);
}

Operator gdp_step(const Operator& u, const StateBatch& x, const StateBatch& y, double alpha, double beta) {
    Operator next = u - alpha * frobenius_gradient(u, x, y);
    if (beta != 0.0) next -= beta * unitarization_gradient(u);
    return next;
}

MultiplierStep gdlm_step(const Operator& u, double lambda, const StateBatch& x, const StateBatch& y, double alpha,
                         double beta) {
    Operator next = u - alpha * frobenius_gradient(u, x, y);
    if (lambda != 0.0) next -= lambda * unitarization_gradient(u);
    return {std::move(next), lambda + beta * unitarization_objective(u)};
}

Operator dlr_step(const Operator& u, const Vector& x_i, const Vector& y_i, double alpha, double beta) {
    if (u.rows() != u.cols()) throw DimensionMismatch("U must be square");
    if (x_i.size() != u.cols() || y_i.size() != u.rows()) throw DimensionMismatch("example length must match U");
    Operator next = u - alpha * (u * x_i - y_i) * x_i.adjoint();
    if (beta != 0.0) next -= beta * unitarization_gradient(next);
    return next;
}

namespace {

/// Factorization of the flattened Hessian, reused across Newton iterations.
class NewtonSolver {
public:
    explicit NewtonSolver(const StateBatch& x) : n_(x.rows()), lu_(procrustes_hessian(x, x.rows()).flattened()) {
        if (lu_.rank() < lu_.rows()) {
            throw SingularSystem("Newton step: flattened Hessian is singular (rank " + std::to_string(lu_.rank()) +
                                 " of " + std::to_string(lu_.rows()) + "); X must have full row rank");
        }
    }

    Matrix direction(const Matrix& gradient) const {
        return unvectorize(lu_.solve(vectorize(gradient)), n_, n_);
    }

private:
    Eigen::Index n_;
    Eigen::FullPivLU<Matrix> lu_;
};

}  // namespace

Operator newton_step(const Operator& u, const StateBatch& x, const StateBatch& y, double alpha) {
    const Matrix grad = frobenius_gradient(u, x, y);
    if (u.rows() != x.rows()) throw DimensionMismatch("U and X disagree");
    NewtonSolver solver(x);
    return u - alpha * solver.direction(grad);
}

double backtracking_linesearch(const ObjectiveFn& f, const GradientFn& grad, const Matrix& u,
                               const Matrix& direction, double alpha0, double c1, double shrink) {
    const double f0 = f(u);
    const double slope = real_inner(direction, grad(u));
    double alpha = alpha0;
    for (int i = 0; i < kMaxLinesearchIterations; ++i) {
        if (f(u + alpha * direction) <= f0 + c1 * alpha * slope) return alpha;
        alpha *= shrink;
    }
    throw LinesearchFailure("backtracking linesearch: no sufficient-descent step after " +
                            std::to_string(kMaxLinesearchIterations) + " reductions");
}

double wolfe_linesearch(const ObjectiveFn& f, const GradientFn& grad, const Matrix& u, const Matrix& direction,
                        double c1, double c2, double alpha_init) {
    const auto phi = [&](double a) { return f(u + a * direction); };
    const auto dphi = [&](double a) { return real_inner(direction, grad(u + a * direction)); };
    const double phi0 = f(u);
    const double dphi0 = real_inner(direction, grad(u));
    if (dphi0 == 0.0) return alpha_init;
    if (dphi0 > 0.0) throw LinesearchFailure("wolfe linesearch: direction is not a descent direction");

    const auto armijo_ok = [&](double a, double value) { return value <= phi0 + c1 * a * dphi0; };
    const auto curvature_ok = [&](double slope) { return slope >= c2 * dphi0; };

    // Zoom over [lo, hi]; lo always satisfies sufficient descent.
    const auto zoom = [&](double lo, double phi_lo, double hi) {
        for (int i = 0; i < kMaxLinesearchIterations; ++i) {
            const double a = 0.5 * (lo + hi);
            const double value = phi(a);
            if (!armijo_ok(a, value) || value >= phi_lo) {
                hi = a;
                continue;
            }
            const double slope = dphi(a);
            if (curvature_ok(slope)) return a;
            if (slope * (hi - lo) >= 0) hi = lo;
            lo = a;
            phi_lo = value;
        }
        throw LinesearchFailure("wolfe linesearch: zoom did not terminate");
    };

    double prev = 0.0, phi_prev = phi0;
    double a = alpha_init;
    for (int i = 0; i < kMaxLinesearchIterations; ++i) {
        const double value = phi(a);
        if (!armijo_ok(a, value) || (i > 0 && value >= phi_prev)) return zoom(prev, phi_prev, a);
        const double slope = dphi(a);
        if (curvature_ok(slope)) return a;
        if (slope >= 0) return zoom(a, value, prev);
        prev = a;
        phi_prev = value;
        a *= 2.0;
    }
    throw LinesearchFailure("wolfe linesearch: bracketing did not terminate");
}

Operator initial_iterate(const LearnConfig& config, Eigen::Index n) {
    switch (config.initial_guess) {
        case InitialGuess::identity: return Operator::Identity(n, n);
        case InitialGuess::zeros: return Operator::Zero(n, n);
        case InitialGuess::haar_random: return haar_random_unitary(n, config.seed);
        case InitialGuess::explicit_matrix:
            if (config.initial_matrix.rows() != n || config.initial_matrix.cols() != n)
                throw DimensionMismatch("initial guess must be n×n");
            return config.initial_matrix;
    }
    return Operator::Identity(n, n);
}

namespace {

bool keep_sample(std::size_t it) { return it <= kDenseTraceIterations || it % 10 == 0; }

/// Shared termination rule. `previous` is empty on the first iteration.
std::optional<LearnStatus> check_termination(const LearnConfig& config, std::size_t it, double value,
                                             double initial, std::optional<double> previous) {
    if (!std::isfinite(value)) return LearnStatus::diverged;
    if (value < config.tol) return LearnStatus::converged;
    if (it > 0 && value > config.divergence_factor * initial) return LearnStatus::diverged;
    if (previous && std::abs(*previous - value) < config.stall_tol) return LearnStatus::stalled;
    if (it >= config.max_iters) return LearnStatus::max_iters;
    return std::nullopt;
}

std::vector<Eigen::Index> epoch_order(const LearnConfig& config, Eigen::Index m, Rng& rng) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    return order;
}

}  // namespace

LearnResult run(const LearnConfig& config, const StateBatch& x, const StateBatch& y) {
    config.validate();
    require_same_shape(x, y, "run: X and Y");
    const Eigen::Index n = x.rows(), m = x.cols();
    if (n < 1 || m < 1) throw InvalidDimension("run: empty problem");

    LearnResult result;
    Operator u = initial_iterate(config, n);
    const Matrix xh = x.adjoint();
    Matrix resid(n, m), grad(n, n), defect(n, n), penalty(n, n);
    double lambda = config.lambda0;
    const bool with_g = config.constrained;
    const bool multiplier_term = config.method == Method::GDLM && (config.constrained || lambda != 0.0);
    const bool penalty_term = config.method == Method::GDP && config.constrained;

    std::optional<NewtonSolver> newton;
    if (config.method == Method::NM) newton.emplace(x);
    Rng shuffle_rng = make_rng(RngSeed{derive_seed(config.seed.value, 0xD1Au)});

    double initial = 0.0;
    std::optional<double> previous;
    for (std::size_t it = 0;; ++it) {
        resid.noalias() = u * x;
        resid -= y;
        const double f = 0.5 * resid.squaredNorm();
        const bool record = keep_sample(it);
        double g = 0.0;
        const bool need_defect = with_g || multiplier_term || penalty_term;
        if (need_defect || record) {
            defect.noalias() = u.adjoint() * u;
            defect.diagonal().array() -= 1.0;
            g = 0.25 * defect.squaredNorm();
        }
        const double value = f + (with_g ? g : 0.0);
        if (it == 0) initial = value;
        if (record) result.trace.push_back({it, f, g});

        if (auto status = check_termination(config, it, value, initial, previous)) {
            if (!record) {
                defect.noalias() = u.adjoint() * u;
                defect.diagonal().array() -= 1.0;
                g = 0.25 * defect.squaredNorm();
                result.trace.push_back({it, f, g});
            }
            result.status = *status;
            result.iterations = it;
            result.final_f = f;
            result.final_g = g;
            break;
        }
        previous = value;

        switch (config.method) {
            case Method::GD:
            case Method::GDP:
            case Method::GDLM: {
                grad.noalias() = resid * xh;
                if (config.linesearch != LinesearchKind::none) {
                    // Merit is the monitored objective (f, or f + g when constrained).
                    if (with_g) grad.noalias() += u * defect;
                    const ObjectiveFn merit = [&](const Matrix& v) {
                        return frobenius_objective(v, x, y) + (with_g ? unitarization_objective(v) : 0.0);
                    };
                    const GradientFn merit_grad = [&](const Matrix& v) {
                        Matrix gr = frobenius_gradient(v, x, y);
                        if (with_g) gr += unitarization_gradient(v);
                        return gr;
                    };
                    const Matrix dir = -grad;
                    const double step =
                        config.linesearch == LinesearchKind::backtracking
                            ? backtracking_linesearch(merit, merit_grad, u, dir, config.alpha, config.c1, config.shrink)
                            : wolfe_linesearch(merit, merit_grad, u, dir, config.c1, config.c2, config.alpha);
                    u += step * dir;
                    break;
                }
                if (penalty_term || multiplier_term) penalty.noalias() = u * defect;
                u -= config.alpha * grad;
                if (penalty_term) u -= config.beta * penalty;
                if (multiplier_term) {
                    u -= lambda * penalty;
                    if (config.constrained) lambda += config.beta * g;
                }
                break;
            }
            case Method::DLR: {
                const double beta = config.constrained ? config.beta : 0.0;
                Vector r(n);
                for (Eigen::Index i : epoch_order(config, m, shuffle_rng)) {
                    r.noalias() = u * x.col(i);
                    r -= y.col(i);
                    u.noalias() -= config.alpha * r * xh.row(i);
                    if (beta != 0.0) {
                        defect.noalias() = u.adjoint() * u;
                        defect.diagonal().array() -= 1.0;
                        penalty.noalias() = u * defect;
                        u -= beta * penalty;
                    }
                }
                break;
            }
            case Method::NM: {
                grad.noalias() = resid * xh;
                u -= config.alpha * newton->direction(grad);
                break;
            }
        }
    }
    result.u = std::move(u);
    result.lambda_final = lambda;
    return result;
}

namespace {

struct RowOutcome {
    RowVector u;
    LearnStatus status = LearnStatus::max_iters;
    std::size_t iterations = 0;
    double f = 0.0;
    double g = 0.0;
    std::vector<TraceSample> trace;
};

RowOutcome learn_row(const LearnConfig& config, const StateBatch& x, const Matrix& xh, const RowVector& y_row,
                     RowVector u, std::uint64_t row) {
    const Eigen::Index m = x.cols();
    const bool with_g = config.constrained;
    const double beta = config.constrained ? config.beta : 0.0;
    Rng shuffle_rng = make_rng(RngSeed{derive_seed(config.seed.value, 0xD1Au + row)});
    RowVector resid(m), grad(u.size());

    RowOutcome out;
    double initial = 0.0;
    std::optional<double> previous;
    for (std::size_t it = 0;; ++it) {
        resid.noalias() = u * x;
        resid -= y_row;
        const double f = 0.5 * resid.squaredNorm();
        const double norm_defect = u.squaredNorm() - 1.0;
        const double g = 0.25 * norm_defect * norm_defect;
        const double value = f + (with_g ? g : 0.0);
        if (it == 0) initial = value;
        const bool record = keep_sample(it);
        if (record) out.trace.push_back({it, f, g});
        if (auto status = check_termination(config, it, value, initial, previous)) {
            if (!record) out.trace.push_back({it, f, g});
            out.status = *status;
            out.iterations = it;
            out.f = f;
            out.g = g;
            break;
        }
        previous = value;

        if (config.method == Method::DLR) {
            for (Eigen::Index i : epoch_order(config, m, shuffle_rng)) {
                const Complex r = (u * x.col(i)).value() - y_row(i);
                u -= (config.alpha * r) * xh.row(i);
                if (beta != 0.0) u -= (beta * (u.squaredNorm() - 1.0)) * u;
            }
        } else {
            grad.noalias() = resid * xh;
            if (beta != 0.0) u *= 1.0 - beta * norm_defect;
            u -= config.alpha * grad;
        }
    }
    out.u = std::move(u);
    return out;
}

}  // namespace

LearnResult sequential_learn(const LearnConfig& config, const StateBatch& x, const StateBatch& y, unsigned workers) {
    config.validate();
    if (config.method != Method::GD && config.method != Method::GDP && config.method != Method::DLR)
        throw InvalidRequest("sequential_learn supports GD, GDP and DLR only");
    if (config.linesearch != LinesearchKind::none) throw InvalidRequest("sequential_learn uses constant step sizes");
    require_same_shape(x, y, "sequential_learn: X and Y");
    const Eigen::Index n = x.rows();
    if (n < 1 || x.cols() < 1) throw InvalidDimension("sequential_learn: empty problem");

    const Operator u0 = initial_iterate(config, n);
    const Matrix xh = x.adjoint();
    std::vector<RowOutcome> rows(static_cast<std::size_t>(n));
    parallel_for(rows.size(), workers, [&](std::size_t j) {
        const auto jj = static_cast<Eigen::Index>(j);
        rows[j] = learn_row(config, x, xh, y.row(jj), u0.row(jj), j);
    });

    LearnResult result;
    result.u.resize(n, n);
    bool any_stalled = false, any_diverged = false, all_converged = true;
    std::size_t total = 0;
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const RowOutcome& r = rows[j];
        result.u.row(static_cast<Eigen::Index>(j)) = r.u;
        result.row_iterations.push_back(r.iterations);
        result.row_status.push_back(r.status);
        result.iterations = std::max(result.iterations, r.iterations);
        result.final_f += r.f;
        total += r.iterations;
        any_stalled |= r.status == LearnStatus::stalled;
        any_diverged |= r.status == LearnStatus::diverged;
        all_converged &= r.status == LearnStatus::converged;
    }
    result.mean_row_iterations = static_cast<double>(total) / static_cast<double>(n);
    result.status = all_converged  ? LearnStatus::converged
                    : any_diverged ? LearnStatus::diverged
                    : any_stalled  ? LearnStatus::stalled
                                   : LearnStatus::max_iters;
    result.final_g = unitarization_objective(result.u);

    // Aggregate trace: per-row values summed, rows that finished hold their last value.
    std::vector<std::size_t> cursor(rows.size(), 0);
    const auto emit = [&](std::size_t it) {
        TraceSample s{it, 0.0, 0.0};
        for (std::size_t j = 0; j < rows.size(); ++j) {
            const auto& tr = rows[j].trace;
            while (cursor[j] + 1 < tr.size() && tr[cursor[j] + 1].iteration <= it) ++cursor[j];
            s.f += tr[cursor[j]].f;
            s.g += tr[cursor[j]].g;
        }
        result.trace.push_back(s);
    };
    for (std::size_t it = 0; it < result.iterations; ++it)
        if (keep_sample(it)) emit(it);
    emit(result.iterations);
    return result;
}

}  // namespace unisynth
