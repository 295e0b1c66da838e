#pragma once

#include "unisynth/circuit.hpp"
#include "unisynth/types.hpp"

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace unisynth {

/// Rejection-sampling budget of random_state_batch.
inline constexpr std::size_t kMaxStateBatchAttempts = 10000;

/// Complex matrix with independent N(0,1) real and imaginary parts.
Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

void normalize_columns(Matrix& m);

/// Ratio of the extreme singular values (the min(rows, cols) nonzero ones).
double condition_number(const Matrix& m);

/// Haar-distributed unitary: Gaussian sample, column normalization, QR,
/// then the phases of diag(R) are moved into Q.
Operator haar_random_unitary(Eigen::Index n, RngSeed seed);
Operator haar_random_unitary(Eigen::Index n, Rng& rng);

struct StateBatchSample {
    StateBatch states;
    double condition_number = 1.0;
    std::size_t resamples = 0;
};

/// Unit-norm Gaussian columns, redrawn until cond(X) <= cond_cap.
/// Pass an infinite cap to disable rejection.
StateBatchSample random_state_batch(Eigen::Index n, Eigen::Index m, double cond_cap, RngSeed seed);
StateBatchSample random_state_batch(Eigen::Index n, Eigen::Index m, double cond_cap, Rng& rng);

/// Generator alphabet for random quantum algorithms.
enum class UniversalGate { H, T, CNOT };

struct DrawnGate {
    UniversalGate kind;
    int target;
    int control;  // CNOT only, otherwise -1
};

struct GateSequence {
    std::vector<DrawnGate> drawn;
    Circuit circuit;  // same gates expressed in the Rz/Ry/CNOT basis
    Operator op;      // product of the embedded generator matrices
};

/// Draws `length` gates from {H, T, CNOT} on random qubits. H is the
/// Hadamard as printed in the named-operator table; T = diag(1, e^{iπ/4}).
GateSequence random_gate_sequence(int qubits, int length, RngSeed seed);

enum class NamedOperator { hadamard, qft, grover };

NamedOperator parse_named_operator(const std::string& name);

/// hadamard (N = 2 only): (1/√2)[[1, 1], [−1, 1]];
/// qft: (F_N)_{jk} = ω^{jk}/√N with ω = e^{2πi/N} (0-based j, k);
/// grover: (G_N)_{jk} = 2/N − δ_jk.
Operator named_operator(NamedOperator name, Eigen::Index n);

}  // namespace unisynth
