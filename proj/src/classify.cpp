#include "cplda/classify.hpp"

#include <cmath>
#include <string>

#include "cplda/cp_refine.hpp"
#include "cplda/error.hpp"

namespace cplda {

CpLdaRule CpLdaRule::make(DenseTensor discriminant, const DenseTensor& mean1, const DenseTensor& mean2,
                          double prior1, double prior2) {
    require_same_shape(discriminant, mean1, "CpLdaRule");
    require_same_shape(mean1, mean2, "CpLdaRule");
    if (!(prior1 > 0.0 && prior2 > 0.0)) throw InvalidArgument("CpLdaRule: priors must be positive");
    CpLdaRule rule;
    rule.discriminant = std::move(discriminant);
    rule.midpoint = (mean1 + mean2) * 0.5;
    rule.log_prior_ratio = std::log(prior2 / prior1);
    if (!std::isfinite(rule.log_prior_ratio)) throw InvalidArgument("CpLdaRule: log prior ratio is not finite");
    return rule;
}

double CpLdaRule::statistic(const DenseTensor& z) const {
    require_same_shape(z, midpoint, "CpLdaRule::statistic");
    const auto zd = z.data();
    const auto md = midpoint.data();
    const auto bd = discriminant.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < zd.size(); ++i) acc += (zd[i] - md[i]) * bd[i];
    return acc + log_prior_ratio;
}

int CpLdaRule::predict(const DenseTensor& z) const { return statistic(z) >= 0.0 ? 2 : 1; }

double misclassification_rate(const CpLdaRule& rule, std::span<const DenseTensor> test1,
                              std::span<const DenseTensor> test2) {
    const std::size_t total = test1.size() + test2.size();
    if (total == 0) throw InvalidArgument("misclassification_rate: empty test set");
    std::size_t wrong = 0;
    for (const auto& z : test1) wrong += rule.predict(z) == 2 ? 1 : 0;
    for (const auto& z : test2) wrong += rule.predict(z) == 1 ? 1 : 0;
    return static_cast<double>(wrong) / static_cast<double>(total);
}

std::vector<std::size_t> match_components(const CpModel& estimate, const CpModel& truth) {
    estimate.validate();
    truth.validate();
    if (estimate.rank() != truth.rank())
        throw DimensionError("match_components: rank mismatch (" + std::to_string(estimate.rank()) + " vs " +
                             std::to_string(truth.rank()) + ")");
    if (estimate.dims() != truth.dims()) throw DimensionError("match_components: dimension mismatch");
    const std::size_t rank = truth.rank();
    Eigen::MatrixXd sim = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(rank), static_cast<Eigen::Index>(rank));
    for (std::size_t m = 0; m < truth.order(); ++m)
        sim.array() *= (estimate.factors[m].transpose() * truth.factors[m]).array().abs();

    std::vector<std::size_t> match(rank, rank);
    std::vector<bool> est_used(rank, false);
    std::vector<bool> truth_used(rank, false);
    for (std::size_t step = 0; step < rank; ++step) {
        double best = -1.0;
        std::size_t bi = 0;
        std::size_t bj = 0;
        for (std::size_t i = 0; i < rank; ++i) {
            if (est_used[i]) continue;
            for (std::size_t j = 0; j < rank; ++j) {
                if (truth_used[j]) continue;
                const double s = sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (s > best) {
                    best = s;
                    bi = i;
                    bj = j;
                }
            }
        }
        match[bi] = bj;
        est_used[bi] = true;
        truth_used[bj] = true;
    }
    return match;
}

double basis_error(const CpModel& estimate, const CpModel& truth) {
    const auto match = match_components(estimate, truth);
    double out = 0.0;
    for (std::size_t k = 0; k < match.size(); ++k)
        for (std::size_t m = 0; m < truth.order(); ++m)
            out = std::max(out, sin_angle(truth.basis(match[k], m), estimate.basis(k, m)));
    return out;
}

double rel_tensor_error(const DenseTensor& b_est, const DenseTensor& b_true) {
    require_same_shape(b_est, b_true, "rel_tensor_error");
    const double denom = frob_norm(b_true);
    if (!(denom > 0.0)) throw DomainError("rel_tensor_error: reference tensor is zero");
    return frob_norm(b_est - b_true) / denom;
}

} // namespace cplda
