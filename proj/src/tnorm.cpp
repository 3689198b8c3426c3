#include "cplda/tnorm.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cplda/error.hpp"
#include "cplda/linalg.hpp"

namespace cplda {

namespace {

void check_covs(const std::vector<std::size_t>& dims, const std::vector<Eigen::MatrixXd>& covs) {
    if (covs.size() != dims.size())
        throw DimensionError("need one covariance per mode (" + std::to_string(dims.size()) +
                             "), got " + std::to_string(covs.size()));
    for (std::size_t m = 0; m < dims.size(); ++m)
        if (static_cast<std::size_t>(covs[m].rows()) != dims[m] ||
            static_cast<std::size_t>(covs[m].cols()) != dims[m])
            throw DimensionError("covariance " + std::to_string(m) + " does not match mode dimension");
}

} // namespace

void TgmmParams::validate() const {
    require_same_shape(mean1, mean2, "TGMM means");
    check_covs(mean1.dims(), covs);
    for (const auto& c : covs) (void)chol_factor(c);
    if (!(prior1 >= 0.0 && prior1 <= 1.0) || !(prior2 >= 0.0 && prior2 <= 1.0) ||
        std::abs(prior1 + prior2 - 1.0) > 1e-12)
        throw InvalidArgument("TGMM priors must lie in [0,1] and sum to 1");
}

TensorNormalSampler::TensorNormalSampler(DenseTensor mean, const std::vector<Eigen::MatrixXd>& covs)
    : mean_(std::move(mean)) {
    check_covs(mean_.dims(), covs);
    for (const auto& c : covs) {
        const bool is_identity = c.isIdentity(0.0);
        identity_.push_back(is_identity);
        factors_.push_back(is_identity ? Eigen::MatrixXd() : chol_factor(c));
    }
}

DenseTensor TensorNormalSampler::draw(Rng& rng) const {
    DenseTensor z(mean_.dims());
    for (double& v : z.data()) v = rng.normal();
    for (std::size_t m = 0; m < factors_.size(); ++m)
        if (!identity_[m]) z = mode_product(z, m, factors_[m]);
    z += mean_;
    return z;
}

std::vector<DenseTensor> TensorNormalSampler::draw(std::size_t n, Rng& rng) const {
    std::vector<DenseTensor> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(draw(rng));
    return out;
}

DenseTensor sample_tensor_normal(const DenseTensor& mean, const std::vector<Eigen::MatrixXd>& covs,
                                 Rng& rng) {
    return TensorNormalSampler(mean, covs).draw(rng);
}

std::vector<LabeledSample> sample_tgmm(const TgmmParams& params, std::size_t n, Rng& rng) {
    if (n == 0) throw InvalidArgument("sample_tgmm: n must be at least 1");
    params.validate();
    const TensorNormalSampler class1(params.mean1, params.covs);
    const TensorNormalSampler class2(params.mean2, params.covs);
    std::vector<LabeledSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = rng.uniform() < params.prior1 ? 1 : 2;
        out.push_back({label == 1 ? class1.draw(rng) : class2.draw(rng), label});
    }
    return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double bayes_error(double delta, double prior1, double prior2) {
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("bayes_error: delta must be finite and >= 0");
    if (!(prior1 > 0.0 && prior2 > 0.0) || std::abs(prior1 + prior2 - 1.0) > 1e-12)
        throw DomainError("bayes_error: priors must be positive and sum to 1");
    if (delta == 0.0) {
        if (prior1 != prior2) throw DomainError("bayes_error: delta = 0 with unequal priors");
        return 0.5;
    }
    const double shift = std::log(prior2 / prior1) / delta;
    // 1 - Φ(x) written as Φ(-x) to keep the tail accurate.
    return prior1 * normal_cdf(shift - delta / 2.0) + prior2 * normal_cdf(-(shift + delta / 2.0));
}

double snr(const DenseTensor& b, const DenseTensor& d) {
    const double ip = inner(b, d);
    if (ip < -1e-6 * frob_norm(b) * frob_norm(d))
        throw ModelInconsistencyError("snr: <B, D> = " + std::to_string(ip) + " is negative");
    return std::sqrt(std::max(ip, 0.0));
}

} // namespace cplda
