#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cplda/tensor.hpp"

namespace cplda {

/// Pooled within-class mode covariances.
///
/// covs[m] = (n1+n2)⁻¹ d_{-m}⁻¹ Σ_k Σ_i mat_m(X_i - X̄_k) mat_m(X_i - X̄_k)ᵀ, then the
/// last mode is divided by c_sigma = Π_m covs[m](0,0) / Var̂(X_{0..0}), where
/// Var̂ is the pooled within-class variance of the first entry with divisor
/// n1+n2. Samples are summed in a canonical (sorted) order, so the results
/// do not depend on how the input is ordered.
struct ModeCovariances {
    std::vector<Eigen::MatrixXd> covs;
    double c_sigma = 1.0;
};

struct PrecisionEstimate {
    std::vector<Eigen::MatrixXd> precisions;
    std::vector<double> ridge; ///< γ_m per mode, 0 when the direct inverse was used
};

struct DiscriminantEstimate {
    DenseTensor b_hat;
    std::vector<Eigen::MatrixXd> precisions;
    DenseTensor mean1;
    DenseTensor mean2;
    double prior1 = 0.5;
    double prior2 = 0.5;
    double c_sigma = 1.0;
    std::vector<double> ridge_used;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
};

DenseTensor sample_mean(std::span<const DenseTensor> samples);

/// Throws InvalidArgument when a class has fewer than 2 samples and
/// NormalizationError when Var̂(X_{0..0}) <= 1e-14.
ModeCovariances mode_covariances(std::span<const DenseTensor> class1,
                                 std::span<const DenseTensor> class2);

/// Inverts each covariance, falling back to covs[m] + γ_m I when
/// n_per_class <= d_m / d_{-m} or the eigenvalue ratio is below 1e-10.
/// γ_m = max(ridge_override, 0.01 · tr(covs[m]) / d_m).
PrecisionEstimate safe_precisions(const std::vector<Eigen::MatrixXd>& covs, std::size_t n_per_class,
                                  std::optional<double> ridge_override = std::nullopt);

/// B̂ = (X̄_2 - X̄_1) ×_m Σ̂_m⁻¹ with the estimated priors n_k / (n1+n2).
DiscriminantEstimate sample_discriminant(std::span<const DenseTensor> class1,
                                         std::span<const DenseTensor> class2,
                                         std::optional<double> ridge_override = std::nullopt);

} // namespace cplda
