#include "oracles.hpp"

#include "unisynth/datagen.hpp"
#include "unisynth/errors.hpp"
#include "unisynth/objectives.hpp"

#include <doctest.h>

using namespace unisynth;

namespace {

Matrix scalar(Complex v) {
    Matrix m(1, 1);
    m(0, 0) = v;
    return m;
}

}  // namespace

TEST_CASE("frobenius objective: hand values") {
    CHECK(frobenius_objective(scalar(2), scalar(1), scalar(1)) == doctest::Approx(0.5));
    Rng rng = make_rng(RngSeed{1});
    const Matrix x = gaussian_matrix(4, 3, rng), y = gaussian_matrix(4, 3, rng);
    const Matrix u = gaussian_matrix(4, 4, rng);
    CHECK(frobenius_objective(Matrix::Zero(4, 4), x, y) == doctest::Approx(0.5 * y.squaredNorm()));
    CHECK(frobenius_objective(u, x, u * x) <= 1e-28);
    CHECK(frobenius_objective(u, x, y) >= 0.0);
}

TEST_CASE("frobenius gradient: hand values and zero at the solution") {
    CHECK(frobenius_gradient(scalar(2), scalar(1), scalar(1))(0, 0) == Complex(1));
    Rng rng = make_rng(RngSeed{2});
    const Matrix x = gaussian_matrix(3, 3, rng), u = gaussian_matrix(3, 3, rng);
    CHECK(frobenius_gradient(u, x, u * x).norm() <= 1e-13);
}

TEST_CASE("objectives: shape mismatches are rejected") {
    const Matrix u = Matrix::Identity(2, 2), x = Matrix::Identity(2, 3), y = Matrix::Identity(3, 3);
    CHECK_THROWS_AS(frobenius_objective(u, x, y), DimensionMismatch);
    CHECK_THROWS_AS(frobenius_gradient(u, x, y), DimensionMismatch);
    CHECK_THROWS_AS(process_fidelity(u, y), DimensionMismatch);
    CHECK_THROWS_AS(fidelity_error(u, y), DimensionMismatch);
}

TEST_CASE("unitarization objective and gradient: hand values") {
    for (Eigen::Index n : {1, 2, 5}) {
        const double dn = static_cast<double>(n);
        CHECK(unitarization_objective(Matrix::Zero(n, n)) == doctest::Approx(dn / 4));
        CHECK(unitarization_objective(2.0 * Matrix::Identity(n, n)) == doctest::Approx(9 * dn / 4));
        CHECK((unitarization_gradient(2.0 * Matrix::Identity(n, n)) - 6.0 * Matrix::Identity(n, n)).norm() <= 1e-15);
        const Matrix q = haar_random_unitary(n, RngSeed{static_cast<std::uint64_t>(n)});
        CHECK(unitarization_objective(q) <= 1e-28);
        CHECK(unitarization_gradient(q).norm() <= 1e-13);
    }
}

TEST_CASE("gradients match central finite differences on 100 random instances") {
    Rng rng = make_rng(RngSeed{3});
    double worst_f = 0, worst_g = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = Eigen::Index{2} << (trial % 3);
        const Matrix u = gaussian_matrix(n, n, rng), x = gaussian_matrix(n, n, rng), y = gaussian_matrix(n, n, rng);
        const Matrix fd_f = oracle::fd_gradient([&](const Matrix& v) { return frobenius_objective(v, x, y); }, u);
        const Matrix fd_g = oracle::fd_gradient([](const Matrix& v) { return unitarization_objective(v); }, u);
        worst_f = std::max(worst_f, oracle::relative_error(frobenius_gradient(u, x, y), fd_f));
        worst_g = std::max(worst_g, oracle::relative_error(unitarization_gradient(u), fd_g));
    }
    CHECK(worst_f <= 1e-6);
    CHECK(worst_g <= 1e-6);
}

TEST_CASE("hessian: identity batch gives the identity") {
    const HessianTensor h = procrustes_hessian(Matrix::Identity(2, 2), 2);
    CHECK((h.flattened() - Matrix::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("hessian: flattened view matches finite differences of the gradient") {
    // Column (m, n) of the flattened Hessian is the derivative of the
    // vectorized gradient along the real direction E_mn.
    for (Eigen::Index n : {2, 3, 4}) {
        Rng rng = make_rng(RngSeed{static_cast<std::uint64_t>(10 + n)});
        const Matrix x = gaussian_matrix(n, n, rng), y = gaussian_matrix(n, n, rng), u = gaussian_matrix(n, n, rng);
        const Matrix flat = procrustes_hessian(x, n).flattened();
        const double h = 1e-6;
        double worst = 0;
        for (Eigen::Index m = 0; m < n; ++m)
            for (Eigen::Index c = 0; c < n; ++c) {
                Matrix p = u, q = u;
                p(m, c) += h;
                q(m, c) -= h;
                const Vector col = vectorize((frobenius_gradient(p, x, y) - frobenius_gradient(q, x, y)) / (2 * h));
                worst = std::max(worst, (col - flat.col(m * n + c)).cwiseAbs().maxCoeff());
            }
        CHECK(worst <= 1e-5);
    }
}

TEST_CASE("hessian: entry formula, Hermitian PSD, independent of U") {
    Rng rng = make_rng(RngSeed{4});
    const Matrix x = gaussian_matrix(3, 5, rng);
    const HessianTensor h = procrustes_hessian(x, 3);
    const Matrix flat = h.flattened();
    CHECK((flat - flat.adjoint()).norm() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> es(flat);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    for (Eigen::Index j = 0; j < 3; ++j)
        for (Eigen::Index k = 0; k < 3; ++k)
            for (Eigen::Index m = 0; m < 3; ++m)
                for (Eigen::Index q = 0; q < 3; ++q) {
                    Complex expect = 0;
                    if (j == m)
                        for (Eigen::Index c = 0; c < 5; ++c) expect += std::conj(x(k, c)) * x(q, c);
                    CHECK(std::abs(h.entry(j, k, m, q) - expect) <= 1e-12);
                    CHECK(std::abs(flat(j * 3 + k, m * 3 + q) - expect) <= 1e-12);
                }
    // The Hessian has no U argument; re-evaluating at a new batch copy is identical.
    CHECK(procrustes_hessian(Matrix(x), 3).flattened() == flat);
}

TEST_CASE("vectorization is row-major and invertible") {
    Matrix a(2, 3);
    a << 1, 2, 3, 4, 5, 6;
    const Vector v = vectorize(a);
    for (Eigen::Index i = 0; i < 6; ++i) CHECK(v(i) == Complex(static_cast<double>(i + 1)));
    CHECK(unvectorize(v, 2, 3) == a);
}

TEST_CASE("process fidelity: invariances and the bit-flip example") {
    const Matrix id = Matrix::Identity(2, 2);
    const Matrix g2 = named_operator(NamedOperator::grover, 2);
    CHECK(process_fidelity(id, g2) == doctest::Approx(0.0));
    CHECK(fidelity_error(id, g2) == doctest::Approx(1.0));
    CHECK(oracle::pauli_fidelity(id, g2) == doctest::Approx(0.0));
    const Matrix u = haar_random_unitary(4, RngSeed{5});
    CHECK(process_fidelity(u, u) == doctest::Approx(1.0));
    CHECK(fidelity_error(u, u) <= 1e-14);
    for (double theta : {0.3, -2.0, 3.1}) {
        CHECK(process_fidelity(u, std::polar(1.0, theta) * u) == doctest::Approx(1.0));
        CHECK(fidelity_error(u, std::polar(1.0, theta) * u) <= 1e-14);
    }
}

TEST_CASE("process fidelity: symmetric and equal to the Pauli-basis sum") {
    Rng rng = make_rng(RngSeed{6});
    for (int d : {1, 2}) {
        for (int i = 0; i < 50; ++i) {
            const Matrix u = haar_random_unitary(Eigen::Index{1} << d, rng);
            const Matrix v = haar_random_unitary(Eigen::Index{1} << d, rng);
            const double f = process_fidelity(u, v);
            CHECK(std::abs(f - process_fidelity(v, u)) <= 1e-14);
            CHECK(std::abs(f - oracle::pauli_fidelity(u, v)) <= 1e-12);
            CHECK(f >= 0.0);
            CHECK(f <= 1.0);
        }
    }
}
