#pragma once

#include "unisynth/types.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace unisynth {

enum class Method { GD, GDP, GDLM, DLR, NM };
enum class LinesearchKind { none, backtracking, wolfe };
enum class InitialGuess { identity, zeros, haar_random, explicit_matrix };
enum class LearnStatus { converged, stalled, max_iters, diverged };

const char* to_string(Method m);
const char* to_string(LinesearchKind k);
const char* to_string(LearnStatus s);
const char* to_string(InitialGuess g);

/// Accepts "gd", "gdp", "gdp*", "GDLM*", ...; a trailing '*' sets `constrained`.
Method parse_method(const std::string& text, bool* constrained = nullptr);
LinesearchKind parse_linesearch(const std::string& text);
InitialGuess parse_initial_guess(const std::string& text);

/// Method label in the table convention, e.g. "GDP*".
std::string method_label(Method m, bool constrained);

struct LearnConfig {
    Method method = Method::GD;
    /// Adds the unitarization term: penalty for GDP/DLR, multiplier update
    /// for GDLM. Convergence is then tested on f + g.
    bool constrained = false;
    double alpha = 0.1;
    double beta = 0.1;
    double lambda0 = 0.0;
    double tol = 1e-15;
    double stall_tol = 1e-18;
    std::size_t max_iters = 100000;
    LinesearchKind linesearch = LinesearchKind::none;
    double c1 = 1e-4;
    double c2 = 0.9;
    double shrink = 0.5;
    InitialGuess initial_guess = InitialGuess::identity;
    Matrix initial_matrix;  // used with InitialGuess::explicit_matrix
    RngSeed seed{0};        // haar_random initial guess and DLR shuffling
    bool shuffle = false;   // DLR example order per epoch
    double divergence_factor = 1e6;

    /// Throws InvalidRequest describing the first violated constraint.
    void validate() const;
};

struct TraceSample {
    std::size_t iteration;
    double f;
    double g;
};

struct LearnResult {
    Operator u;
    LearnStatus status = LearnStatus::max_iters;
    std::size_t iterations = 0;
    std::vector<TraceSample> trace;
    double lambda_final = 0.0;
    double final_f = 0.0;
    double final_g = 0.0;

    // Populated by sequential_learn.
    std::vector<std::size_t> row_iterations;
    std::vector<LearnStatus> row_status;
    double mean_row_iterations = 0.0;
};

/// Trace keeps every iteration up to this index, then every 10th.
inline constexpr std::size_t kDenseTraceIterations = 10000;

// Single update rules. Each takes the current iterate by value.
Operator gd_step(const Operator& u, const StateBatch& x, const StateBatch& y, double alpha);
Operator gdp_step(const Operator& u, const StateBatch& x, const StateBatch& y, double alpha, double beta);

struct MultiplierStep {
    Operator u;
    double lambda;
};

/// λ' uses the unitarization residual of the incoming U.
MultiplierStep gdlm_step(const Operator& u, double lambda, const StateBatch& x, const StateBatch& y, double alpha,
                         double beta);

/// One delta-rule update for a single example; beta > 0 adds the penalty term.
Operator dlr_step(const Operator& u, const Vector& x_i, const Vector& y_i, double alpha, double beta = 0.0);

/// Newton update with the flattened Hessian; throws SingularSystem when
/// X X^H is not invertible.
Operator newton_step(const Operator& u, const StateBatch& x, const StateBatch& y, double alpha);

using ObjectiveFn = std::function<double(const Matrix&)>;
using GradientFn = std::function<Matrix(const Matrix&)>;

inline constexpr int kMaxLinesearchIterations = 60;

/// Largest alpha0·shrink^i satisfying the sufficient-descent condition.
double backtracking_linesearch(const ObjectiveFn& f, const GradientFn& grad, const Matrix& u,
                               const Matrix& direction, double alpha0, double c1, double shrink);

/// Step length satisfying both Wolfe conditions (bracketing + zoom).
double wolfe_linesearch(const ObjectiveFn& f, const GradientFn& grad, const Matrix& u, const Matrix& direction,
                        double c1, double c2, double alpha_init = 1.0);

Operator initial_iterate(const LearnConfig& config, Eigen::Index n);

LearnResult run(const LearnConfig& config, const StateBatch& x, const StateBatch& y);

/// Row-by-row learning. Rows are independent problems sharing X; they are
/// distributed over `workers` threads (0 = hardware concurrency). The
/// constrained variant penalizes ¼(‖u_j‖² − 1)² per row. Supported
/// methods: GD, GDP, DLR.
LearnResult sequential_learn(const LearnConfig& config, const StateBatch& x, const StateBatch& y,
                             unsigned workers = 1);

}  // namespace unisynth
