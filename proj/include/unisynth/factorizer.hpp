#pragma once

#include "unisynth/circuit.hpp"
#include "unisynth/types.hpp"

#include <string>
#include <vector>

namespace unisynth {

/// V = e^{i·phase} Rz(alpha) Ry(beta) Rz(gamma), with alpha, gamma, phase
/// in (−π, π] and beta in [0, π].
struct ZyzAngles {
    double phase = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

ZyzAngles zyz_decompose(const Mat2& v);
Mat2 zyz_matrix(const ZyzAngles& a);

/// Principal square root of a 2×2 unitary (unitary result).
Mat2 unitary_sqrt(const Mat2& w);

/// Identity except on basis states s < t, where `block` acts in (s, t) order.
struct TwoLevel {
    Eigen::Index s = 0;
    Eigen::Index t = 1;
    Mat2 block = Mat2::Identity();
};

Operator two_level_matrix(const TwoLevel& f, Eigen::Index dim);

/// Givens elimination below the diagonal, column by column. The returned
/// factors multiply (in list order, left to right) back to U.
std::vector<TwoLevel> two_level_decompose(const Operator& u);

struct Control {
    int qubit;
    bool value;  // fires when the qubit is |value⟩
};

/// Exact gate expansion of a multi-controlled single-qubit unitary.
std::vector<Gate> controlled_gates(const Mat2& w, int target, const std::vector<Control>& controls);

/// Gray-code routing of a two-level unitary onto the Rz/Ry/CNOT basis.
std::vector<Gate> two_level_to_gates(const TwoLevel& f, int qubits);

struct FactorReport {
    std::size_t cnot_count = 0;
    std::size_t total_gates = 0;
    double error = 0.0;                // 1 − process fidelity against the input
    double wall_time = 0.0;            // seconds
    double projection_distance = 0.0;  // ‖U − nearest unitary‖_F
    double unitarity_defect = 0.0;     // ‖U^H U − I‖_F of the input
};

struct Factorization {
    Circuit circuit;
    FactorReport report;
};

/// Inputs further than this from unitarity are rejected.
inline constexpr double kFactorUnitarityTolerance = 1e-8;

Factorization factor(const Operator& u, int qubits);

/// Stable 64-bit FNV-1a digest of the matrix entries, hex encoded.
std::string operator_hash(const Operator& u);

}  // namespace unisynth
