#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "cplda/rng.hpp"
#include "cplda/tensor.hpp"

namespace cplda {

/// Two-class tensor Gaussian mixture with shared separable covariance.
struct TgmmParams {
    DenseTensor mean1;
    DenseTensor mean2;
    std::vector<Eigen::MatrixXd> covs; ///< Σ_m, d_m x d_m
    double prior1 = 0.5;
    double prior2 = 0.5;

    /// Throws on inconsistent shapes, non-SPD covariances or invalid priors.
    void validate() const;
};

struct LabeledSample {
    DenseTensor x;
    int label = 1; ///< 1 or 2
};

/// Draws M + Z ×_1 L_1 ⋯ ×_M L_M with L_m the Cholesky factor of Σ_m.
///
/// The factors are computed once; identity covariances skip their mode product.
class TensorNormalSampler {
public:
    TensorNormalSampler(DenseTensor mean, const std::vector<Eigen::MatrixXd>& covs);

    DenseTensor draw(Rng& rng) const;
    std::vector<DenseTensor> draw(std::size_t n, Rng& rng) const;

    const DenseTensor& mean() const noexcept { return mean_; }

private:
    DenseTensor mean_;
    std::vector<Eigen::MatrixXd> factors_;
    std::vector<bool> identity_;
};

DenseTensor sample_tensor_normal(const DenseTensor& mean, const std::vector<Eigen::MatrixXd>& covs,
                                 Rng& rng);

/// n labeled draws; each label is 1 with probability prior1.
std::vector<LabeledSample> sample_tgmm(const TgmmParams& params, std::size_t n, Rng& rng);

/// Standard normal CDF.
double normal_cdf(double x);

/// Optimal misclassification error of the two-class rule at signal-to-noise ratio delta.
double bayes_error(double delta, double prior1, double prior2);

/// Δ = sqrt(<B, D>); small negative roundoff is clamped to 0.
double snr(const DenseTensor& b, const DenseTensor& d);

} // namespace cplda
