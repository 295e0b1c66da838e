#include "unisynth/factorizer.hpp"

#include "unisynth/errors.hpp"
#include "unisynth/objectives.hpp"
#include "unisynth/oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <numbers>
#include <sstream>

namespace unisynth {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAngleEpsilon = 1e-15;
constexpr double kSkipEpsilon = 1e-14;

/// Wraps an Rz/Ry angle and returns the number of 2π shifts applied.
/// Each shift flips the sign of the rotation matrix.
double wrap_rotation(double angle, double& phase) {
    const double wrapped = wrap_angle(angle);
    const long shifts = std::lround((angle - wrapped) / (2 * kPi));
    if (shifts % 2 != 0) phase += kPi;
    return wrapped;
}

void push_rotation(std::vector<Gate>& out, GateKind kind, int qubit, double angle) {
    angle = wrap_angle(angle);  // sign flips from wrapping are absorbed by the caller's phase
    if (std::abs(angle) < kAngleEpsilon) return;
    out.push_back(kind == GateKind::RZ ? Gate::rz(qubit, angle) : Gate::ry(qubit, angle));
}

/// Emits e^{i·phase}·Rz(α)Ry(β)Rz(γ) on `qubit` with the phase tracked exactly.
void emit_single(std::vector<Gate>& out, const Mat2& w, int qubit) {
    const ZyzAngles a = zyz_decompose(w);
    if (std::abs(a.gamma) >= kAngleEpsilon) out.push_back(Gate::rz(qubit, a.gamma));
    if (std::abs(a.beta) >= kAngleEpsilon) out.push_back(Gate::ry(qubit, a.beta));
    if (std::abs(a.alpha) >= kAngleEpsilon) out.push_back(Gate::rz(qubit, a.alpha));
    if (std::abs(a.phase) >= kAngleEpsilon) out.push_back(Gate::global_phase(a.phase));
}

/// Rotation whose wrapped angle may differ from `angle` by a multiple of 2π;
/// the resulting sign is compensated with a global phase so the block is exact.
void push_exact_rotation(std::vector<Gate>& out, GateKind kind, int qubit, double angle) {
    double phase = 0.0;
    const double wrapped = wrap_rotation(angle, phase);
    push_rotation(out, kind, qubit, wrapped);
    if (phase != 0.0) out.push_back(Gate::global_phase(phase));
}

bool is_pauli_x(const Mat2& w) {
    return std::abs(w(0, 0)) == 0.0 && std::abs(w(1, 1)) == 0.0 && w(0, 1) == Complex(1.0) &&
           w(1, 0) == Complex(1.0);
}

void emit_positive_controlled(std::vector<Gate>& out, const Mat2& w, int target, const std::vector<int>& controls) {
    if (controls.empty()) {
        emit_single(out, w, target);
        return;
    }
    if (controls.size() == 1) {
        const int c = controls.front();
        if (is_pauli_x(w)) {
            out.push_back(Gate::cnot(c, target));
            return;
        }
        // W = e^{iφ} A X B X C with ABC = I.
        const ZyzAngles a = zyz_decompose(w);
        push_exact_rotation(out, GateKind::RZ, target, (a.gamma - a.alpha) / 2);  // C
        out.push_back(Gate::cnot(c, target));
        push_exact_rotation(out, GateKind::RZ, target, -(a.gamma + a.alpha) / 2);  // B
        push_exact_rotation(out, GateKind::RY, target, -a.beta / 2);
        out.push_back(Gate::cnot(c, target));
        push_exact_rotation(out, GateKind::RY, target, a.beta / 2);  // A
        push_exact_rotation(out, GateKind::RZ, target, a.alpha);
        // diag(1, e^{iφ}) on the control = e^{iφ/2} Rz(φ)
        push_exact_rotation(out, GateKind::RZ, c, a.phase);
        if (std::abs(a.phase) >= kAngleEpsilon) out.push_back(Gate::global_phase(a.phase / 2));
        return;
    }
    // C^n(W) = C(V)·C^{n−1}(X)·C(V†)·C^{n−1}(X)·C^{n−1}(V), V² = W.
    const Mat2 v = unitary_sqrt(w);
    const int last = controls.back();
    const std::vector<int> rest(controls.begin(), controls.end() - 1);
    Mat2 x;
    x << 0, 1, 1, 0;
    emit_positive_controlled(out, v, target, {last});
    emit_positive_controlled(out, x, last, rest);
    emit_positive_controlled(out, v.adjoint(), target, {last});
    emit_positive_controlled(out, x, last, rest);
    emit_positive_controlled(out, v, target, rest);
}

}  // namespace

ZyzAngles zyz_decompose(const Mat2& v) {
    const double defect = (v.adjoint() * v - Mat2::Identity()).norm();
    if (!(defect <= 1e-10)) throw NonUnitary("zyz_decompose: input is not unitary", defect);
    ZyzAngles out;
    out.phase = std::arg(v.determinant()) / 2;
    const Mat2 w = v * std::polar(1.0, -out.phase);
    const double c = std::abs(w(0, 0)), s = std::abs(w(1, 0));
    out.beta = 2 * std::atan2(s, c);
    if (s < kSkipEpsilon) {
        out.alpha = 2 * std::arg(w(1, 1));
        out.gamma = 0.0;
    } else if (c < kSkipEpsilon) {
        out.alpha = 2 * std::arg(w(1, 0));
        out.gamma = 0.0;
    } else {
        out.alpha = std::arg(w(1, 1)) + std::arg(w(1, 0));
        out.gamma = std::arg(w(1, 1)) - std::arg(w(1, 0));
    }
    out.alpha = wrap_rotation(out.alpha, out.phase);
    out.gamma = wrap_rotation(out.gamma, out.phase);
    out.phase = wrap_angle(out.phase);
    if (std::abs(out.alpha) < kAngleEpsilon) out.alpha = 0.0;
    if (std::abs(out.gamma) < kAngleEpsilon) out.gamma = 0.0;
    if (std::abs(out.phase) < kAngleEpsilon) out.phase = 0.0;
    return out;
}

Mat2 zyz_matrix(const ZyzAngles& a) {
    return std::polar(1.0, a.phase) * rz_matrix(a.alpha) * ry_matrix(a.beta) * rz_matrix(a.gamma);
}

Mat2 unitary_sqrt(const Mat2& w) {
    const double half_phase = std::arg(w.determinant()) / 2;
    Mat2 su = w * std::polar(1.0, -half_phase);  // det = 1
    Complex extra(1.0);
    if (su.trace().real() < 0) {
        su = -su;                 // sqrt(−S) = i·sqrt(S)
        extra = Complex(0.0, 1.0);
    }
    const double cos_half = std::clamp(su.trace().real() / 2, -1.0, 1.0);  // cos(θ/2) ≥ 0
    const double cos_quarter = std::sqrt((1 + cos_half) / 2);
    Mat2 root = cos_quarter * Mat2::Identity() + (su - cos_half * Mat2::Identity()) / (2 * cos_quarter);
    return extra * std::polar(1.0, half_phase / 2) * root;
}

Operator two_level_matrix(const TwoLevel& f, Eigen::Index dim) {
    Operator m = Operator::Identity(dim, dim);
    m(f.s, f.s) = f.block(0, 0);
    m(f.s, f.t) = f.block(0, 1);
    m(f.t, f.s) = f.block(1, 0);
    m(f.t, f.t) = f.block(1, 1);
    return m;
}

std::vector<TwoLevel> two_level_decompose(const Operator& u) {
    if (u.rows() != u.cols() || !is_power_of_two(u.rows()) || u.rows() < 2)
        throw InvalidDimension("two_level_decompose: dimension must be a power of two >= 2");
    const double defect = unitarity_defect(u);
    if (!(defect <= 1e-10)) throw NonUnitary("two_level_decompose: input is not unitary", defect);

    const Eigen::Index n = u.rows();
    Operator work = u;
    std::vector<TwoLevel> givens;  // each entry stores G†
    std::vector<bool> rotated(static_cast<std::size_t>(n), false);
    for (Eigen::Index c = 0; c + 1 < n; ++c) {
        for (Eigen::Index r = c + 1; r < n; ++r) {
            const Complex b = work(r, c);
            if (std::abs(b) <= kSkipEpsilon) continue;
            const Complex a = work(c, c);
            const double rho = std::hypot(std::abs(a), std::abs(b));
            Mat2 g;
            g << std::conj(a) / rho, std::conj(b) / rho, -b / rho, a / rho;
            for (Eigen::Index k = 0; k < n; ++k) {
                const Complex top = work(c, k), bottom = work(r, k);
                work(c, k) = g(0, 0) * top + g(0, 1) * bottom;
                work(r, k) = g(1, 0) * top + g(1, 1) * bottom;
            }
            work(r, c) = 0.0;
            givens.push_back({c, r, g.adjoint()});
            rotated[static_cast<std::size_t>(c)] = true;
        }
    }

    // work is now diagonal; peel off its phases as two-level factors.
    std::vector<TwoLevel> factors = std::move(givens);
    for (Eigen::Index c = 0; c < n; ++c) {
        const Complex d = work(c, c);
        if (std::abs(d - 1.0) <= kSkipEpsilon) continue;
        const Complex phase = d / std::abs(d);
        TwoLevel p;
        if (c + 1 < n) {
            p = {c, n - 1, Mat2::Identity()};
            p.block(0, 0) = phase;
        } else {
            p = {n - 2, n - 1, Mat2::Identity()};
            p.block(1, 1) = phase;
        }
        factors.push_back(p);
    }

    std::vector<TwoLevel> merged;
    for (const TwoLevel& f : factors) {
        if (!merged.empty() && merged.back().s == f.s && merged.back().t == f.t) {
            merged.back().block = merged.back().block * f.block;
            if ((merged.back().block - Mat2::Identity()).norm() <= kSkipEpsilon) merged.pop_back();
        } else {
            merged.push_back(f);
        }
    }
    return merged;
}

std::vector<Gate> controlled_gates(const Mat2& w, int target, const std::vector<Control>& controls) {
    std::vector<Gate> out;
    std::vector<int> positive;
    for (const Control& c : controls) {
        if (c.qubit == target) throw InvalidRequest("control qubit equals target");
        if (!c.value) out.push_back(Gate::ry(c.qubit, kPi));
        positive.push_back(c.qubit);
    }
    emit_positive_controlled(out, w, target, positive);
    for (const Control& c : controls)
        if (!c.value) out.push_back(Gate::ry(c.qubit, -kPi));
    return out;
}

std::vector<Gate> two_level_to_gates(const TwoLevel& f, int qubits) {
    const Eigen::Index dim = Eigen::Index{1} << qubits;
    if (qubits < 1) throw InvalidDimension("two_level_to_gates: need at least one qubit");
    if (f.s == f.t || f.s < 0 || f.t < 0 || f.s >= dim || f.t >= dim)
        throw InvalidRequest("two_level_to_gates: invalid basis indices");
    const auto bit_of = [&](Eigen::Index state, int q) { return ((state >> (qubits - 1 - q)) & 1) != 0; };
    const auto controls_except = [&](Eigen::Index state, int skip) {
        std::vector<Control> cs;
        for (int q = 0; q < qubits; ++q)
            if (q != skip) cs.push_back({q, bit_of(state, q)});
        return cs;
    };

    // Gray path s = g0 → ... → gL = t, flipping differing bits from qubit 0 upward.
    std::vector<Eigen::Index> path{f.s};
    std::vector<int> flipped;
    for (int q = 0; q < qubits; ++q) {
        if (bit_of(f.s, q) != bit_of(f.t, q)) {
            path.push_back(path.back() ^ (Eigen::Index{1} << (qubits - 1 - q)));
            flipped.push_back(q);
        }
    }
    const std::size_t steps = flipped.size();
    Mat2 x;
    x << 0, 1, 1, 0;

    std::vector<Gate> out;
    const auto append = [&](const std::vector<Gate>& gs) { out.insert(out.end(), gs.begin(), gs.end()); };
    for (std::size_t i = 0; i + 1 < steps; ++i) append(controlled_gates(x, flipped[i], controls_except(path[i], flipped[i])));

    const int q = flipped.back();
    Mat2 w = f.block;
    if (bit_of(path[steps - 1], q)) {
        // s sits on |1⟩ of the target qubit: reverse the block's basis order.
        w << f.block(1, 1), f.block(1, 0), f.block(0, 1), f.block(0, 0);
    }
    append(controlled_gates(w, q, controls_except(f.t, q)));

    for (std::size_t i = steps - 1; i-- > 0;) append(controlled_gates(x, flipped[i], controls_except(path[i], flipped[i])));
    return out;
}

std::string operator_hash(const Operator& u) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    const auto mix = [&](const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ull;
        }
    };
    const std::int64_t dims[2] = {u.rows(), u.cols()};
    mix(dims, sizeof(dims));
    for (Eigen::Index j = 0; j < u.rows(); ++j)
        for (Eigen::Index k = 0; k < u.cols(); ++k) {
            const double parts[2] = {u(j, k).real(), u(j, k).imag()};
            mix(parts, sizeof(parts));
        }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

Factorization factor(const Operator& u, int qubits) {
    const auto start = std::chrono::steady_clock::now();
    if (qubits < 1 || u.rows() != u.cols() || u.rows() != (Eigen::Index{1} << qubits))
        throw InvalidDimension("factor: operator must be 2^k × 2^k");
    const double defect = unitarity_defect(u);
    if (!(defect <= kFactorUnitarityTolerance)) {
        std::ostringstream os;
        os << "factor: input is not unitary, ||U^H U - I||_F = " << defect;
        throw NonUnitary(os.str(), defect);
    }
    const Operator projected = nearest_unitary(u);

    Factorization out;
    out.circuit = Circuit(qubits);
    const std::vector<TwoLevel> factors = two_level_decompose(projected);
    double phase = 0.0;
    for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
        for (const Gate& g : two_level_to_gates(*it, qubits)) {
            if (g.kind == GateKind::GLOBAL_PHASE)
                phase += g.angle;
            else
                out.circuit.append(g);
        }
    }
    phase = wrap_angle(phase);
    if (std::abs(phase) >= kAngleEpsilon) out.circuit.append(Gate::global_phase(phase));
    out.circuit.metadata = {operator_hash(u), utc_timestamp()};

    const GateCounts counts = gate_counts(out.circuit);
    out.report.cnot_count = counts.cnot_count;
    out.report.total_gates = counts.total_gates;
    out.report.error = fidelity_error(u, circuit_matrix(out.circuit));
    out.report.projection_distance = (u - projected).norm();
    out.report.unitarity_defect = defect;
    out.report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace unisynth
