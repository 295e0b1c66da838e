#pragma once

#include "unisynth/types.hpp"

namespace unisynth {

/// ½‖UX − Y‖²_F
double frobenius_objective(const Operator& u, const StateBatch& x, const StateBatch& y);

/// (UX − Y)X^H. With this convention the directional derivative of the
/// objective along dU is Re⟨dU, G⟩, i.e. Re G = ∂f/∂Re U and Im G = ∂f/∂Im U.
Matrix frobenius_gradient(const Operator& u, const StateBatch& x, const StateBatch& y);

/// ¼‖U^H U − I‖²_F
double unitarization_objective(const Operator& u);

/// U(U^H U − I)
Matrix unitarization_gradient(const Operator& u);

/// Second derivative of the Frobenius objective,
/// H(j,k,m,n) = δ_jm Σ_c conj(X_kc) X_nc. It depends on X only.
struct HessianTensor {
    Eigen::Index dim = 0;
    Matrix gram;  // conj(X) Xᵀ, n×n

    Complex entry(Eigen::Index j, Eigen::Index k, Eigen::Index m, Eigen::Index n) const;

    /// n²×n² matrix I ⊗ gram under row-major vectorization.
    Matrix flattened() const;
};

HessianTensor procrustes_hessian(const StateBatch& x, Eigen::Index n);

/// Row-major vectorization: entry (j, k) lands at j·cols + k.
Vector vectorize(const Matrix& a);
Matrix unvectorize(const Vector& v, Eigen::Index rows, Eigen::Index cols);

/// |Tr(U^H V)|² / d² for unitary channels.
double process_fidelity(const Operator& u, const Operator& v);

/// 1 − process_fidelity, clamped to [0, 1].
double fidelity_error(const Operator& u, const Operator& v);

void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

}  // namespace unisynth
