#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "cplda/tensor.hpp"

namespace cplda {

/// CP representation sum_r w_r a_{r,0} ∘ ... ∘ a_{r,M-1}.
///
/// `factors[m]` is the d_m x R matrix A_m whose column r is a_{r,m}.
struct CpModel {
    std::vector<double> weights;
    std::vector<Eigen::MatrixXd> factors;

    std::size_t rank() const noexcept { return weights.size(); }
    std::size_t order() const noexcept { return factors.size(); }
    std::vector<std::size_t> dims() const;
    Eigen::VectorXd basis(std::size_t r, std::size_t m) const { return factors[m].col(static_cast<Eigen::Index>(r)); }

    /// Throws DimensionError on inconsistent shapes.
    void validate() const;
};

/// Dense tensor of a CP model.
DenseTensor cp_compose(const CpModel& model);

} // namespace cplda
