#include "unisynth/types.hpp"

namespace unisynth {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double unitarity_defect(const Matrix& u) {
    return (u.adjoint() * u - Matrix::Identity(u.cols(), u.cols())).norm();
}

bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

int qubit_count(Eigen::Index dim) {
    int k = 0;
    while ((Eigen::Index{1} << k) < dim) ++k;
    return k;
}

}  // namespace unisynth
