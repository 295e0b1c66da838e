#include "unisynth/circuit.hpp"

#include "unisynth/errors.hpp"

#include <cmath>
#include <numbers>

namespace unisynth {

const char* to_string(GateKind kind) {
    switch (kind) {
        case GateKind::RZ: return "rz";
        case GateKind::RY: return "ry";
        case GateKind::CNOT: return "cx";
        case GateKind::GLOBAL_PHASE: return "global_phase";
    }
    return "?";
}

void Circuit::validate() const {
    if (num_qubits < 1) throw InvalidRequest("circuit needs at least one qubit");
    for (std::size_t i = 0; i < gates.size(); ++i) {
        const Gate& g = gates[i];
        const auto bad = [&](const std::string& why) {
            throw InvalidRequest("gate " + std::to_string(i) + " (" + to_string(g.kind) + "): " + why);
        };
        if (g.kind == GateKind::GLOBAL_PHASE) continue;
        if (g.target < 0 || g.target >= num_qubits) bad("target qubit out of range");
        if (g.kind == GateKind::CNOT) {
            if (g.control < 0 || g.control >= num_qubits) bad("control qubit out of range");
            if (g.control == g.target) bad("control equals target");
        }
    }
}

void Circuit::append(const Circuit& other) {
    gates.insert(gates.end(), other.gates.begin(), other.gates.end());
}

bool operator==(const Circuit& a, const Circuit& b) {
    return a.num_qubits == b.num_qubits && a.gates == b.gates;
}

Mat2 rz_matrix(double angle) {
    Mat2 m = Mat2::Zero();
    m(0, 0) = std::polar(1.0, -angle / 2);
    m(1, 1) = std::polar(1.0, angle / 2);
    return m;
}

Mat2 ry_matrix(double angle) {
    const double c = std::cos(angle / 2), s = std::sin(angle / 2);
    Mat2 m;
    m << c, -s, s, c;
    return m;
}

void apply_single_qubit(Matrix& m, const Mat2& u, int qubit, int num_qubits) {
    const Eigen::Index bit = Eigen::Index{1} << (num_qubits - 1 - qubit);
    const Eigen::Index dim = m.rows();
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (i & bit) continue;
        const Eigen::Index j = i | bit;
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const Complex a = m(i, c), b = m(j, c);
            m(i, c) = u(0, 0) * a + u(0, 1) * b;
            m(j, c) = u(1, 0) * a + u(1, 1) * b;
        }
    }
}

void apply_gate(Matrix& m, const Gate& gate, int num_qubits) {
    switch (gate.kind) {
        case GateKind::RZ: apply_single_qubit(m, rz_matrix(gate.angle), gate.target, num_qubits); return;
        case GateKind::RY: apply_single_qubit(m, ry_matrix(gate.angle), gate.target, num_qubits); return;
        case GateKind::GLOBAL_PHASE: m *= std::polar(1.0, gate.angle); return;
        case GateKind::CNOT: {
            const Eigen::Index cbit = Eigen::Index{1} << (num_qubits - 1 - gate.control);
            const Eigen::Index tbit = Eigen::Index{1} << (num_qubits - 1 - gate.target);
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                if ((i & cbit) && !(i & tbit)) m.row(i).swap(m.row(i | tbit));
            }
            return;
        }
    }
}

Operator circuit_matrix(const Circuit& c) {
    c.validate();
    const Eigen::Index dim = Eigen::Index{1} << c.num_qubits;
    Operator m = Operator::Identity(dim, dim);
    for (const Gate& g : c.gates) apply_gate(m, g, c.num_qubits);
    return m;
}

GateCounts gate_counts(const Circuit& c) {
    GateCounts counts;
    for (const Gate& g : c.gates) {
        if (g.kind == GateKind::GLOBAL_PHASE) {
            ++counts.phase_gates;
            continue;
        }
        ++counts.total_gates;
        if (g.kind == GateKind::CNOT) ++counts.cnot_count;
    }
    return counts;
}

double wrap_angle(double angle) {
    constexpr double pi = std::numbers::pi;
    double a = std::remainder(angle, 2 * pi);  // [−π, π]
    if (a <= -pi) a += 2 * pi;
    return a;
}

}  // namespace unisynth
