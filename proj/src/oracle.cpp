#include "unisynth/oracle.hpp"

#include "unisynth/errors.hpp"
#include "unisynth/objectives.hpp"

namespace unisynth {

Operator procrustes_solve(const StateBatch& x, const StateBatch& y) {
    require_same_shape(x, y, "procrustes_solve");
    if (!x.allFinite() || !y.allFinite()) throw NumericalError("procrustes_solve: non-finite input");
    const Matrix cross = y * x.adjoint();
    Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) throw NumericalError("procrustes_solve: SVD did not converge");
    return svd.matrixU() * svd.matrixV().adjoint();
}

Operator nearest_unitary(const Matrix& u) {
    if (u.rows() != u.cols()) throw DimensionMismatch("nearest_unitary: matrix must be square");
    return procrustes_solve(Matrix::Identity(u.rows(), u.cols()), u);
}

}  // namespace unisynth
