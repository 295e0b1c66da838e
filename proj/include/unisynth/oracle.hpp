#pragma once

#include "unisynth/types.hpp"

namespace unisynth {

/// Closed-form minimizer of ½‖UX − Y‖²_F over unitary U: with the SVD
/// YX^H = W Σ Z^H the solution is U = W Z^H. Rank-deficient YX^H yields
/// whatever orthonormal completion the SVD produces.
Operator procrustes_solve(const StateBatch& x, const StateBatch& y);

/// Nearest unitary in Frobenius norm (the X = I case of procrustes_solve).
Operator nearest_unitary(const Matrix& u);

}  // namespace unisynth
