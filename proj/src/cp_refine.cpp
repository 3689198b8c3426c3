#include "cplda/cp_refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cplda/error.hpp"
#include "cplda/linalg.hpp"

namespace cplda {

namespace {

constexpr double kDegenerateNorm = 1e-14;

void check_warm(const DenseTensor& b_hat, const std::vector<Eigen::MatrixXd>& warm) {
    if (warm.size() != b_hat.order())
        throw DimensionError("distip_cp: need one warm factor per mode");
    const Eigen::Index rank = warm.front().cols();
    if (rank == 0) throw DimensionError("distip_cp: rank must be at least 1");
    for (std::size_t m = 0; m < warm.size(); ++m) {
        if (warm[m].cols() != rank) throw DimensionError("distip_cp: warm factors disagree on rank");
        if (static_cast<std::size_t>(warm[m].rows()) != b_hat.dim(m))
            throw DimensionError("distip_cp: warm factor " + std::to_string(m) + " has wrong dimension");
        for (Eigen::Index r = 0; r < rank; ++r)
            if (std::abs(warm[m].col(r).norm() - 1.0) > 1e-8)
                throw InvalidArgument("distip_cp: warm-start bases must be unit vectors");
    }
}

double min_singular_value(const std::vector<Eigen::MatrixXd>& factors) {
    double out = std::numeric_limits<double>::infinity();
    for (const auto& f : factors) out = std::min(out, thin_svd(f).singular_values.minCoeff());
    return out;
}

Eigen::MatrixXd checked_right_inverse(const Eigen::MatrixXd& a, std::size_t mode, std::size_t iteration) {
    try {
        return right_inverse(a);
    } catch (const SingularityError& e) {
        throw SingularityError("distip_cp: iteration " + std::to_string(iteration) + ", mode " +
                               std::to_string(mode) + ": " + e.what());
    }
}

} // namespace

double sin_angle(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (u.size() != v.size()) throw DimensionError("sin_angle: length mismatch");
    const double c = u.dot(v);
    return std::clamp((v - c * u).norm(), 0.0, 1.0);
}

double basis_change(const std::vector<Eigen::MatrixXd>& prev, const std::vector<Eigen::MatrixXd>& next) {
    if (prev.size() != next.size()) throw DimensionError("basis_change: mode count mismatch");
    double out = 0.0;
    for (std::size_t m = 0; m < prev.size(); ++m) {
        if (prev[m].rows() != next[m].rows() || prev[m].cols() != next[m].cols())
            throw DimensionError("basis_change: factor shape mismatch");
        for (Eigen::Index r = 0; r < prev[m].cols(); ++r)
            out = std::max(out, sin_angle(prev[m].col(r), next[m].col(r)));
    }
    return out;
}

FitReport distip_cp(const DenseTensor& b_hat, const std::vector<Eigen::MatrixXd>& warm_factors,
                    const RefineOptions& options) {
    check_warm(b_hat, warm_factors);
    if (!(options.tolerance > 0.0)) throw InvalidArgument("distip_cp: tolerance must be positive");
    if (options.max_iterations < 1) throw InvalidArgument("distip_cp: need at least one iteration");

    const std::size_t order = b_hat.order();
    const auto rank = static_cast<std::size_t>(warm_factors.front().cols());
    std::vector<Eigen::MatrixXd> a = warm_factors;
    std::vector<Eigen::MatrixXd> b(order);
    for (std::size_t m = 0; m < order; ++m) b[m] = checked_right_inverse(a[m], m, 0);

    FitReport report;
    std::vector<Eigen::VectorXd> proj(order);
    for (std::size_t t = 1; t <= options.max_iterations; ++t) {
        const std::vector<Eigen::MatrixXd> prev = a;
        for (std::size_t m = 0; m < order; ++m) {
            for (std::size_t r = 0; r < rank; ++r) {
                const auto ri = static_cast<Eigen::Index>(r);
                for (std::size_t l = 0; l < order; ++l)
                    if (l != m) proj[l] = b[l].col(ri);
                const Eigen::VectorXd z = contract_all_but(b_hat, proj, m);
                const double norm = z.norm();
                if (!(norm >= kDegenerateNorm))
                    throw DegenerateComponentError("distip_cp: projection annihilated component " +
                                                       std::to_string(r) + " in mode " + std::to_string(m) +
                                                       " at iteration " + std::to_string(t),
                                                   r, m);
                a[m].col(ri) = z / norm;
            }
            b[m] = checked_right_inverse(a[m], m, t);
        }
        const double change = basis_change(prev, a);
        report.basis_changes.push_back(change);
        report.min_singular_values.push_back(min_singular_value(a));
        report.iterations_run = t;
        if (change <= options.tolerance) {
            report.converged = true;
            break;
        }
    }

    // Signed weights B̂ ×_m b_{r,m}ᵀ.
    std::vector<double> signed_w(rank);
    for (std::size_t r = 0; r < rank; ++r) {
        for (std::size_t m = 0; m < order; ++m) proj[m] = b[m].col(static_cast<Eigen::Index>(r));
        signed_w[r] = contract_all(b_hat, proj);
    }
    std::vector<std::size_t> perm(rank);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::stable_sort(perm.begin(), perm.end(),
                     [&](std::size_t x, std::size_t y) { return std::abs(signed_w[x]) > std::abs(signed_w[y]); });

    CpModel& model = report.model;
    model.weights.resize(rank);
    model.factors.assign(order, Eigen::MatrixXd());
    for (std::size_t m = 0; m < order; ++m) model.factors[m].resize(a[m].rows(), static_cast<Eigen::Index>(rank));
    for (std::size_t k = 0; k < rank; ++k) {
        const std::size_t r = perm[k];
        const auto ri = static_cast<Eigen::Index>(r);
        const auto ki = static_cast<Eigen::Index>(k);
        model.weights[k] = std::abs(signed_w[r]);
        for (std::size_t m = 0; m < order; ++m) model.factors[m].col(ki) = a[m].col(ri);
        if (signed_w[r] < 0.0) model.factors[0].col(ki) *= -1.0;
    }
    return report;
}

} // namespace cplda
