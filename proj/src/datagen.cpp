#include "unisynth/datagen.hpp"

#include "unisynth/errors.hpp"

#include <cmath>
#include <numbers>

namespace unisynth {

namespace {

void require_positive(Eigen::Index v, const char* what) {
    if (v < 1) throw InvalidDimension(std::string(what) + " must be >= 1, got " + std::to_string(v));
}

}  // namespace

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    // Real parts fill first, then imaginary, so the draw order is fixed.
    Eigen::MatrixXd re(rows, cols), im(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) re(r, c) = normal(rng);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) im(r, c) = normal(rng);
    m.real() = re;
    m.imag() = im;
    return m;
}

void normalize_columns(Matrix& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double norm = m.col(c).norm();
        if (norm > 0) m.col(c) /= norm;
    }
}

double condition_number(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0) return 1.0;
    const double smin = s(s.size() - 1);
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

Operator haar_random_unitary(Eigen::Index n, Rng& rng) {
    require_positive(n, "dimension");
    Matrix z = gaussian_matrix(n, n, rng);
    normalize_columns(z);
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    const Matrix& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < n; ++j) {
        const Complex d = r(j, j);
        const double mag = std::abs(d);
        q.col(j) *= (mag > 0 ? d / mag : Complex(1.0));
    }
    return q;
}

Operator haar_random_unitary(Eigen::Index n, RngSeed seed) {
    Rng rng = make_rng(seed);
    return haar_random_unitary(n, rng);
}

StateBatchSample random_state_batch(Eigen::Index n, Eigen::Index m, double cond_cap, Rng& rng) {
    require_positive(n, "dimension");
    require_positive(m, "example count");
    if (!(cond_cap > 1.0)) throw InvalidRequest("condition-number cap must exceed 1");
    StateBatchSample out;
    for (std::size_t attempt = 0; attempt < kMaxStateBatchAttempts; ++attempt) {
        Matrix x = gaussian_matrix(n, m, rng);
        normalize_columns(x);
        const double cond = condition_number(x);
        if (cond <= cond_cap) {
            out.states = std::move(x);
            out.condition_number = cond;
            out.resamples = attempt;
            return out;
        }
    }
    throw GenerationFailure("random_state_batch: no sample with cond <= " + std::to_string(cond_cap) + " in " +
                            std::to_string(kMaxStateBatchAttempts) + " attempts");
}

StateBatchSample random_state_batch(Eigen::Index n, Eigen::Index m, double cond_cap, RngSeed seed) {
    Rng rng = make_rng(seed);
    return random_state_batch(n, m, cond_cap, rng);
}

GateSequence random_gate_sequence(int qubits, int length, RngSeed seed) {
    if (qubits < 1) throw InvalidDimension("qubit count must be >= 1");
    if (length < 1) throw InvalidDimension("sequence length must be >= 1");
    constexpr double pi = std::numbers::pi;
    Rng rng = make_rng(seed);
    std::uniform_int_distribution<int> kind_dist(0, qubits >= 2 ? 2 : 1);
    std::uniform_int_distribution<int> qubit_dist(0, qubits - 1);
    std::uniform_int_distribution<int> other_dist(0, qubits >= 2 ? qubits - 2 : 0);

    const Mat2 h = named_operator(NamedOperator::hadamard, 2);
    Mat2 t = Mat2::Identity();
    t(1, 1) = std::polar(1.0, pi / 4);

    const Eigen::Index dim = Eigen::Index{1} << qubits;
    GateSequence seq;
    seq.circuit = Circuit(qubits);
    seq.op = Operator::Identity(dim, dim);
    for (int i = 0; i < length; ++i) {
        DrawnGate g{static_cast<UniversalGate>(kind_dist(rng)), qubit_dist(rng), -1};
        switch (g.kind) {
            case UniversalGate::H:
                apply_single_qubit(seq.op, h, g.target, qubits);
                seq.circuit.append(Gate::ry(g.target, -pi / 2));
                break;
            case UniversalGate::T:
                apply_single_qubit(seq.op, t, g.target, qubits);
                seq.circuit.append(Gate::rz(g.target, pi / 4));
                seq.circuit.append(Gate::global_phase(pi / 8));
                break;
            case UniversalGate::CNOT: {
                int c = other_dist(rng);
                if (c >= g.target) ++c;
                g.control = c;
                // Explicit permutation, independent of apply_gate.
                const Eigen::Index cbit = Eigen::Index{1} << (qubits - 1 - c);
                const Eigen::Index tbit = Eigen::Index{1} << (qubits - 1 - g.target);
                Matrix p = Matrix::Zero(dim, dim);
                for (Eigen::Index s = 0; s < dim; ++s) p((s & cbit) ? (s ^ tbit) : s, s) = 1.0;
                seq.op = p * seq.op;
                seq.circuit.append(Gate::cnot(c, g.target));
                break;
            }
        }
        seq.drawn.push_back(g);
    }
    return seq;
}

NamedOperator parse_named_operator(const std::string& name) {
    if (name == "hadamard" || name == "H") return NamedOperator::hadamard;
    if (name == "qft" || name == "F") return NamedOperator::qft;
    if (name == "grover" || name == "G") return NamedOperator::grover;
    throw InvalidRequest("unknown named operator '" + name + "'");
}

Operator named_operator(NamedOperator name, Eigen::Index n) {
    switch (name) {
        case NamedOperator::hadamard: {
            if (n != 2) throw InvalidRequest("hadamard is defined for N = 2 only");
            const double s = 1.0 / std::sqrt(2.0);
            Operator h(2, 2);
            h << s, s, -s, s;
            return h;
        }
        case NamedOperator::qft: {
            if (n < 1) throw InvalidRequest("qft requires N >= 1");
            Operator f(n, n);
            const double scale = 1.0 / std::sqrt(static_cast<double>(n));
            for (Eigen::Index j = 0; j < n; ++j)
                for (Eigen::Index k = 0; k < n; ++k) {
                    // reduce the exponent mod N before taking the angle
                    const auto e = (j * k) % n;
                    f(j, k) = std::polar(scale, 2 * std::numbers::pi * static_cast<double>(e) / n);
                }
            return f;
        }
        case NamedOperator::grover: {
            if (n < 1) throw InvalidRequest("grover requires N >= 1");
            Operator g = Operator::Constant(n, n, Complex(2.0 / static_cast<double>(n)));
            g.diagonal().array() -= 1.0;
            return g;
        }
    }
    throw InvalidRequest("unknown named operator");
}

}  // namespace unisynth
