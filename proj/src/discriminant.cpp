#include "cplda/discriminant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cplda/error.hpp"
#include "cplda/linalg.hpp"

namespace cplda {

namespace {

void check_class(std::span<const DenseTensor> samples, const char* name) {
    if (samples.size() < 2)
        throw InvalidArgument(std::string("class ") + name + " needs at least 2 samples, got " +
                              std::to_string(samples.size()));
}

// G_m += mat_m(x) mat_m(x)ᵀ, lower triangle only.
void accumulate_gram(const DenseTensor& x, std::vector<Eigen::MatrixXd>& grams) {
    using ConstMat = Eigen::Map<const Eigen::MatrixXd>;
    const auto& dims = x.dims();
    std::size_t inner = 1;
    for (std::size_t m = 0; m < dims.size(); ++m) {
        const std::size_t dm = dims[m];
        const std::size_t outer = x.size() / (inner * dm);
        auto g = grams[m].selfadjointView<Eigen::Lower>();
        if (inner == 1) {
            ConstMat xm(x.data().data(), static_cast<Eigen::Index>(dm), static_cast<Eigen::Index>(outer));
            g.rankUpdate(xm);
        } else {
            for (std::size_t o = 0; o < outer; ++o) {
                ConstMat slab(x.data().data() + o * inner * dm, static_cast<Eigen::Index>(inner),
                              static_cast<Eigen::Index>(dm));
                g.rankUpdate(slab.transpose());
            }
        }
        inner *= dm;
    }
}

// Samples sorted by their entries, so sums do not depend on the input order.
std::vector<const DenseTensor*> canonical_order(std::span<const DenseTensor> samples) {
    std::vector<const DenseTensor*> order;
    order.reserve(samples.size());
    for (const auto& s : samples) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(), [](const DenseTensor* a, const DenseTensor* b) {
        const auto da = a->data();
        const auto db = b->data();
        return std::lexicographical_compare(da.begin(), da.end(), db.begin(), db.end());
    });
    return order;
}

} // namespace

DenseTensor sample_mean(std::span<const DenseTensor> samples) {
    if (samples.empty()) throw InvalidArgument("sample_mean: no samples");
    DenseTensor mean(samples.front().dims());
    for (const DenseTensor* s : canonical_order(samples)) {
        require_same_shape(*s, mean, "sample_mean");
        mean += *s;
    }
    mean *= 1.0 / static_cast<double>(samples.size());
    return mean;
}

ModeCovariances mode_covariances(std::span<const DenseTensor> class1,
                                 std::span<const DenseTensor> class2) {
    check_class(class1, "1");
    check_class(class2, "2");
    const auto dims = class1.front().dims();
    const std::size_t order = dims.size();
    const std::size_t total = product(dims);

    std::vector<Eigen::MatrixXd> grams;
    for (std::size_t d : dims)
        grams.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));

    double first_entry_ss = 0.0;
    for (auto samples : {class1, class2}) {
        const DenseTensor mean = sample_mean(samples);
        for (const DenseTensor* x : canonical_order(samples)) {
            require_same_shape(*x, mean, "mode_covariances");
            DenseTensor centered = *x - mean;
            first_entry_ss += centered[0] * centered[0];
            accumulate_gram(centered, grams);
        }
    }

    const double n_total = static_cast<double>(class1.size() + class2.size());
    ModeCovariances out;
    for (std::size_t m = 0; m < order; ++m) {
        const double d_minus = static_cast<double>(total / dims[m]);
        Eigen::MatrixXd cov = grams[m].selfadjointView<Eigen::Lower>();
        cov /= n_total * d_minus;
        out.covs.push_back(std::move(cov));
    }

    const double var_first = first_entry_ss / n_total;
    if (!(var_first > 1e-14))
        throw NormalizationError("mode_covariances: pooled variance of the first entry is " +
                                 std::to_string(var_first) + "; cannot normalize scale");
    double diag_product = 1.0;
    for (const auto& c : out.covs) diag_product *= c(0, 0);
    out.c_sigma = diag_product / var_first;
    if (!(out.c_sigma > 0.0) || !std::isfinite(out.c_sigma))
        throw NormalizationError("mode_covariances: scale constant is not positive");
    out.covs.back() /= out.c_sigma;
    return out;
}

PrecisionEstimate safe_precisions(const std::vector<Eigen::MatrixXd>& covs, std::size_t n_per_class,
                                  std::optional<double> ridge_override) {
    std::size_t total = 1;
    for (const auto& c : covs) {
        if (c.rows() != c.cols() || c.rows() == 0) throw DimensionError("safe_precisions: covariance must be square");
        total *= static_cast<std::size_t>(c.rows());
    }
    PrecisionEstimate out;
    for (std::size_t m = 0; m < covs.size(); ++m) {
        const Eigen::MatrixXd& cov = covs[m];
        const double dm = static_cast<double>(cov.rows());
        const double d_minus = static_cast<double>(total) / dm;
        const Eigen::VectorXd ev = sym_eigenvalues(cov);
        const double largest = ev(ev.size() - 1);
        const bool enough_samples = static_cast<double>(n_per_class) > dm / d_minus;
        if (enough_samples && largest > 0.0 && ev(0) > 1e-10 * largest) {
            out.precisions.push_back(sym_inverse(cov));
            out.ridge.push_back(0.0);
            continue;
        }
        const double gamma = std::max(ridge_override.value_or(0.0), 0.01 * cov.trace() / dm);
        if (!(gamma > 0.0))
            throw SingularityError("safe_precisions: mode " + std::to_string(m) +
                                   " covariance is singular and the ridge is zero");
        const Eigen::MatrixXd ridged =
            cov + gamma * Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
        try {
            out.precisions.push_back(sym_inverse(ridged));
        } catch (const DefinitenessError&) {
            throw SingularityError("safe_precisions: mode " + std::to_string(m) +
                                   " covariance is singular after ridge");
        }
        out.ridge.push_back(gamma);
    }
    return out;
}

DiscriminantEstimate sample_discriminant(std::span<const DenseTensor> class1,
                                         std::span<const DenseTensor> class2,
                                         std::optional<double> ridge_override) {
    ModeCovariances mc = mode_covariances(class1, class2);
    const std::size_t n = std::min(class1.size(), class2.size());
    PrecisionEstimate pe = safe_precisions(mc.covs, n, ridge_override);

    DiscriminantEstimate est;
    est.mean1 = sample_mean(class1);
    est.mean2 = sample_mean(class2);
    DenseTensor b = est.mean2 - est.mean1;
    for (std::size_t m = 0; m < pe.precisions.size(); ++m) b = mode_product(b, m, pe.precisions[m]);
    est.b_hat = std::move(b);
    est.precisions = std::move(pe.precisions);
    est.ridge_used = std::move(pe.ridge);
    est.c_sigma = mc.c_sigma;
    est.n1 = class1.size();
    est.n2 = class2.size();
    const double n_total = static_cast<double>(est.n1 + est.n2);
    est.prior1 = static_cast<double>(est.n1) / n_total;
    est.prior2 = static_cast<double>(est.n2) / n_total;
    return est;
}

} // namespace cplda
