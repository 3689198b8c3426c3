#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cplda/cp_model.hpp"
#include "cplda/tensor.hpp"

namespace cplda {

/// Plug-in linear rule: class 2 iff <z - midpoint, B> + log(π₂/π₁) >= 0.
struct CpLdaRule {
    DenseTensor discriminant;
    DenseTensor midpoint;
    double log_prior_ratio = 0.0;

    static CpLdaRule make(DenseTensor discriminant, const DenseTensor& mean1, const DenseTensor& mean2,
                          double prior1, double prior2);

    double statistic(const DenseTensor& z) const;
    /// 1 or 2; a statistic of exactly 0 goes to class 2.
    int predict(const DenseTensor& z) const;
};

/// Fraction of class-1 points labelled 2 plus class-2 points labelled 1.
double misclassification_rate(const CpLdaRule& rule, std::span<const DenseTensor> test1,
                              std::span<const DenseTensor> test2);

/// Greedy one-to-one matching of estimated to true components by descending
/// Π_m |â_{r,m}ᵀ a_{s,m}|. Entry k is the truth index matched to estimate k.
std::vector<std::size_t> match_components(const CpModel& estimate, const CpModel& truth);

/// max over matched components and modes of √(1 - (âᵀa)²).
double basis_error(const CpModel& estimate, const CpModel& truth);

/// ‖b_est - b_true‖_F / ‖b_true‖_F.
double rel_tensor_error(const DenseTensor& b_est, const DenseTensor& b_true);

} // namespace cplda
