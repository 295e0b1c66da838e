#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>

namespace unisynth {

using Complex = std::complex<double>;

/// Dense complex matrix; used for n×n operators and n×m state batches.
using Matrix = Eigen::MatrixXcd;
using Operator = Matrix;
using StateBatch = Matrix;
using RowVector = Eigen::RowVectorXcd;
using Vector = Eigen::VectorXcd;
using Mat2 = Eigen::Matrix2cd;

struct RngSeed {
    std::uint64_t value = 0;
};

/// Mixes (master, stream) into an independent 64-bit seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

using Rng = std::mt19937_64;

inline Rng make_rng(RngSeed seed) { return Rng(seed.value); }

/// Frobenius inner product Re tr(A^H B).
inline double real_inner(const Matrix& a, const Matrix& b) {
    return (a.array().conjugate() * b.array()).real().sum();
}

/// ‖U^H U − I‖_F
double unitarity_defect(const Matrix& u);

bool is_power_of_two(Eigen::Index n);
int qubit_count(Eigen::Index dim);

}  // namespace unisynth
