#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "cplda/cp_model.hpp"
#include "cplda/tensor.hpp"

namespace cplda {

struct RefineOptions {
    double tolerance = 1e-6;        ///< stop once the largest basis change is at or below this
    std::size_t max_iterations = 50;
};

/// Outcome of the iterative projection refinement.
struct FitReport {
    CpModel model;
    std::size_t iterations_run = 0;
    std::vector<double> basis_changes;       ///< one per iteration
    std::vector<double> min_singular_values; ///< smallest singular value over all Â_m, per iteration
    bool converged = false;
};

/// √(1 - (uᵀv)²) for unit vectors, computed as ‖v - (uᵀv)u‖ and clamped to [0, 1].
double sin_angle(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Largest sin_angle over matching columns of every factor matrix.
double basis_change(const std::vector<Eigen::MatrixXd>& prev, const std::vector<Eigen::MatrixXd>& next);

/// Iterative orthogonalized projection refinement of CP bases.
///
/// Each sweep visits modes in ascending order; for mode m every component r is
/// re-estimated as the normalized projection of B̂ onto the right-inverse
/// columns b_{r,l} of all other modes (already refreshed for l < m), after
/// which mode m's right inverse is recomputed. Weights are |B̂ ×_m b_{r,m}ᵀ|;
/// the sign is folded into the mode-0 basis and components are sorted by
/// descending weight (stable).
FitReport distip_cp(const DenseTensor& b_hat, const std::vector<Eigen::MatrixXd>& warm_factors,
                    const RefineOptions& options = {});

} // namespace cplda
