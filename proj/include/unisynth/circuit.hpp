#pragma once

#include "unisynth/types.hpp"

#include <string>
#include <vector>

namespace unisynth {

/// Gate kinds of the Rz/Ry/CNOT basis. GLOBAL_PHASE multiplies the whole
/// state by e^{i·angle}; it is bookkeeping and not a physical gate.
enum class GateKind { RZ, RY, CNOT, GLOBAL_PHASE };

const char* to_string(GateKind kind);

struct Gate {
    GateKind kind = GateKind::GLOBAL_PHASE;
    int target = 0;
    int control = -1;  // CNOT only
    double angle = 0.0;

    static Gate rz(int qubit, double angle) { return {GateKind::RZ, qubit, -1, angle}; }
    static Gate ry(int qubit, double angle) { return {GateKind::RY, qubit, -1, angle}; }
    static Gate cnot(int control, int target) { return {GateKind::CNOT, target, control, 0.0}; }
    static Gate global_phase(double angle) { return {GateKind::GLOBAL_PHASE, 0, -1, angle}; }

    bool operator==(const Gate&) const = default;
};

struct CircuitMetadata {
    std::string source_hash;
    std::string timestamp;
};

/// Ordered gate list; gates[0] is applied first. Qubit 0 is the most
/// significant bit of a basis-state index.
struct Circuit {
    int num_qubits = 1;
    std::vector<Gate> gates;
    CircuitMetadata metadata;

    explicit Circuit(int qubits = 1) : num_qubits(qubits) {}

    /// Throws InvalidRequest on an out-of-range qubit or control == target.
    void validate() const;

    void append(const Gate& g) { gates.push_back(g); }
    void append(const Circuit& other);
};

/// Equality ignores metadata.
bool operator==(const Circuit& a, const Circuit& b);

Mat2 rz_matrix(double angle);
Mat2 ry_matrix(double angle);

/// Left-multiplies `m` (2^k rows) by the embedded gate.
void apply_gate(Matrix& m, const Gate& gate, int num_qubits);

/// Left-multiplies `m` by an arbitrary single-qubit matrix on `qubit`.
void apply_single_qubit(Matrix& m, const Mat2& u, int qubit, int num_qubits);

/// Full 2^k×2^k matrix of the circuit: G_last ⋯ G_1 G_0.
Operator circuit_matrix(const Circuit& c);

struct GateCounts {
    std::size_t cnot_count = 0;
    std::size_t total_gates = 0;   // rotations + CNOTs
    std::size_t phase_gates = 0;   // GLOBAL_PHASE, counted separately
};

GateCounts gate_counts(const Circuit& c);

/// Reduces an angle to (−π, π].
double wrap_angle(double angle);

}  // namespace unisynth
