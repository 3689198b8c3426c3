#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace cplda {

/// Thin singular value decomposition A ≈ U diag(s) Vᵀ.
///
/// Singular values are descending. Sign convention: the largest-magnitude
/// entry of every left vector is nonnegative (ties go to the lowest index),
/// the matching right vector is flipped with it.
struct SvdResult {
    Eigen::VectorXd singular_values;
    Eigen::MatrixXd left;
    Eigen::MatrixXd right;
};

/// Full thin SVD by one-sided (Hestenes) Jacobi on the taller orientation.
/// Throws InvalidArgument on non-finite entries.
SvdResult thin_svd(const Eigen::MatrixXd& a);

/// Leading k singular triplets. Requires 1 <= k <= min(rows, cols).
SvdResult top_k_svd(const Eigen::MatrixXd& a, std::size_t k);

/// Leading left singular vector, sign-normalized. Throws InvalidArgument for a zero matrix.
Eigen::VectorXd top_left_singular_vector(const Eigen::MatrixXd& a);

/// Flip `v` so that its largest-magnitude entry is nonnegative.
void apply_sign_convention(Eigen::Ref<Eigen::VectorXd> v);

/// B = A (AᵀA)⁻¹, so that AᵀB = I. Throws SingularityError when the smallest
/// eigenvalue of AᵀA is below 1e-12 times the largest.
Eigen::MatrixXd right_inverse(const Eigen::MatrixXd& a);

/// Lower-triangular L with L Lᵀ = s. Throws DefinitenessError with the
/// failing pivot, InvalidArgument when s is not symmetric.
Eigen::MatrixXd chol_factor(const Eigen::MatrixXd& s);

/// Inverse of a symmetric positive-definite matrix via its Cholesky factor.
Eigen::MatrixXd sym_inverse(const Eigen::MatrixXd& s);

/// Eigenvalues of a symmetric matrix in ascending order.
Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& s);

/// Largest singular value.
double spectral_norm(const Eigen::MatrixXd& a);

} // namespace cplda
