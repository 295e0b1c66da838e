#include "oracles.hpp"

#include "unisynth/datagen.hpp"
#include "unisynth/objectives.hpp"
#include "unisynth/oracle.hpp"

#include <doctest.h>

using namespace unisynth;

TEST_CASE("procrustes: identical batches give the identity") {
    const StateBatchSample b = random_state_batch(4, 4, 100.0, RngSeed{1});
    CHECK((procrustes_solve(b.states, b.states) - Matrix::Identity(4, 4)).norm() <= 1e-12);
}

TEST_CASE("procrustes: recovers the printed hadamard from X = I") {
    const Matrix h = named_operator(NamedOperator::hadamard, 2);
    CHECK((procrustes_solve(Matrix::Identity(2, 2), h) - h).norm() <= 1e-12);
}

TEST_CASE("procrustes: exact recovery of Y = QX") {
    for (Eigen::Index n : {2, 4, 8, 16}) {
        const Matrix q = haar_random_unitary(n, RngSeed{static_cast<std::uint64_t>(n)});
        const StateBatchSample b = random_state_batch(n, n, 100.0, RngSeed{static_cast<std::uint64_t>(100 + n)});
        const Matrix u = procrustes_solve(b.states, q * b.states);
        CHECK((u - q).norm() <= 1e-10);
        CHECK(unitarity_defect(u) <= 1e-12);
    }
}

TEST_CASE("procrustes: output unitary even when YX^H is rank deficient") {
    Rng rng = make_rng(RngSeed{7});
    const Matrix x = gaussian_matrix(4, 1, rng), y = gaussian_matrix(4, 1, rng);
    CHECK(unitarity_defect(procrustes_solve(x, y)) <= 1e-12);
    CHECK(unitarity_defect(procrustes_solve(Matrix::Zero(3, 3), Matrix::Zero(3, 3))) <= 1e-12);
}

TEST_CASE("procrustes: no random unitary does better") {
    Rng rng = make_rng(RngSeed{8});
    for (Eigen::Index n : {1, 2, 4}) {
        const Matrix x = gaussian_matrix(n, 3, rng), y = gaussian_matrix(n, 3, rng);
        const double best = frobenius_objective(procrustes_solve(x, y), x, y);
        double lowest = 1e300;
        for (int i = 0; i < 1000; ++i)
            lowest = std::min(lowest, frobenius_objective(haar_random_unitary(n, rng), x, y));
        CHECK(best <= lowest + 1e-10);
    }
}

TEST_CASE("procrustes: dense one-qubit search agrees") {
    // Brute force over e^{iφ}Rz(a)Ry(b)Rz(c) on a coarse grid, then compare.
    Rng rng = make_rng(RngSeed{9});
    const Matrix x = gaussian_matrix(2, 2, rng), y = gaussian_matrix(2, 2, rng);
    const double best = frobenius_objective(procrustes_solve(x, y), x, y);
    double lowest = 1e300;
    constexpr int kSteps = 24;
    const double pi = std::numbers::pi;
    for (int p = 0; p < kSteps; ++p)
        for (int a = 0; a < kSteps; ++a)
            for (int b = 0; b <= kSteps / 2; ++b)
                for (int c = 0; c < kSteps; ++c) {
                    const Matrix v = std::polar(1.0, 2 * pi * p / kSteps) * oracle::rz(2 * pi * a / kSteps) *
                                     oracle::ry(2 * pi * b / kSteps) * oracle::rz(2 * pi * c / kSteps);
                    lowest = std::min(lowest, frobenius_objective(v, x, y));
                }
    CHECK(best <= lowest + 1e-10);
    CHECK(lowest - best <= 0.5);  // the grid comes close to the optimum
}

TEST_CASE("nearest unitary: fixes unitaries and projects perturbations") {
    const Matrix q = haar_random_unitary(4, RngSeed{10});
    CHECK((nearest_unitary(q) - q).norm() <= 1e-12);
    Rng rng = make_rng(RngSeed{11});
    const Matrix p = q + 1e-3 * gaussian_matrix(4, 4, rng);
    const Matrix w = nearest_unitary(p);
    CHECK(unitarity_defect(w) <= 1e-12);
    CHECK((w - p).norm() <= (q - p).norm() + 1e-12);
}
