#include "unisynth/objectives.hpp"

#include "unisynth/errors.hpp"

#include <algorithm>
#include <string>

namespace unisynth {

namespace {

void check_problem(const Operator& u, const StateBatch& x, const StateBatch& y) {
    if (u.rows() != u.cols()) throw DimensionMismatch("U must be square");
    if (x.rows() != u.cols()) throw DimensionMismatch("X rows must match U columns");
    require_same_shape(x, y, "X and Y");
}

}  // namespace

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch(std::string(what) + ": shapes " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + " differ");
    }
}

double frobenius_objective(const Operator& u, const StateBatch& x, const StateBatch& y) {
    check_problem(u, x, y);
    return 0.5 * (u * x - y).squaredNorm();
}

Matrix frobenius_gradient(const Operator& u, const StateBatch& x, const StateBatch& y) {
    check_problem(u, x, y);
    return (u * x - y) * x.adjoint();
}

double unitarization_objective(const Operator& u) {
    if (u.rows() != u.cols()) throw DimensionMismatch("U must be square");
    return 0.25 * (u.adjoint() * u - Matrix::Identity(u.cols(), u.cols())).squaredNorm();
}

Matrix unitarization_gradient(const Operator& u) {
    if (u.rows() != u.cols()) throw DimensionMismatch("U must be square");
    return u * (u.adjoint() * u - Matrix::Identity(u.cols(), u.cols()));
}

Complex HessianTensor::entry(Eigen::Index j, Eigen::Index k, Eigen::Index m, Eigen::Index n) const {
    return j == m ? gram(k, n) : Complex(0.0);
}

Matrix HessianTensor::flattened() const {
    const Eigen::Index n = dim;
    Matrix h = Matrix::Zero(n * n, n * n);
    for (Eigen::Index j = 0; j < n; ++j) h.block(j * n, j * n, n, n) = gram;
    return h;
}

HessianTensor procrustes_hessian(const StateBatch& x, Eigen::Index n) {
    if (x.rows() != n) throw DimensionMismatch("X must have n rows");
    return HessianTensor{n, x.conjugate() * x.transpose()};
}

Vector vectorize(const Matrix& a) {
    Vector v(a.size());
    for (Eigen::Index j = 0; j < a.rows(); ++j)
        for (Eigen::Index k = 0; k < a.cols(); ++k) v(j * a.cols() + k) = a(j, k);
    return v;
}

Matrix unvectorize(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
    if (v.size() != rows * cols) throw DimensionMismatch("vector length does not match shape");
    Matrix a(rows, cols);
    for (Eigen::Index j = 0; j < rows; ++j)
        for (Eigen::Index k = 0; k < cols; ++k) a(j, k) = v(j * cols + k);
    return a;
}

double process_fidelity(const Operator& u, const Operator& v) {
    require_same_shape(u, v, "process_fidelity");
    if (u.rows() != u.cols()) throw DimensionMismatch("operators must be square");
    const double d = static_cast<double>(u.rows());
    const Complex tr = (u.adjoint() * v).trace();
    return std::clamp(std::norm(tr) / (d * d), 0.0, 1.0);
}

double fidelity_error(const Operator& u, const Operator& v) {
    return std::clamp(1.0 - process_fidelity(u, v), 0.0, 1.0);
}

}  // namespace unisynth
