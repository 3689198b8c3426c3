#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cplda/cp_model.hpp"
#include "cplda/rng.hpp"
#include "cplda/tensor.hpp"

namespace testing_util {

using cplda::DenseTensor;
using cplda::Rng;

inline DenseTensor random_tensor(std::vector<std::size_t> dims, Rng& rng) {
    DenseTensor x(std::move(dims));
    for (auto& v : x.data()) v = rng.normal();
    return x;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Eigen::MatrixXd a(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = rng.normal();
    return a;
}

inline Eigen::VectorXd random_unit(Eigen::Index n, Rng& rng) {
    Eigen::VectorXd v = random_matrix(n, 1, rng).col(0);
    return v / v.norm();
}

inline Eigen::MatrixXd random_orthonormal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rows, cols, rng));
    return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

/// Multi-index of flat offset `k` in colex order.
inline std::vector<std::size_t> multi_index(std::size_t k, const std::vector<std::size_t>& dims) {
    std::vector<std::size_t> idx(dims.size());
    for (std::size_t m = 0; m < dims.size(); ++m) {
        idx[m] = k % dims[m];
        k /= dims[m];
    }
    return idx;
}

/// (row, column) of a multi-index in mat_S by the explicit formula
/// j = Σ_{k∉S} i_k Π_{l∉S, l<k} d_l, and likewise for rows over S.
inline std::pair<std::size_t, std::size_t> matricized_position(const std::vector<std::size_t>& idx,
                                                               const std::vector<std::size_t>& dims,
                                                               const std::vector<bool>& in_rows) {
    std::size_t row = 0, col = 0, row_stride = 1, col_stride = 1;
    for (std::size_t m = 0; m < dims.size(); ++m) {
        if (in_rows[m]) {
            row += idx[m] * row_stride;
            row_stride *= dims[m];
        } else {
            col += idx[m] * col_stride;
            col_stride *= dims[m];
        }
    }
    return {row, col};
}

/// Random CP model with orthonormal bases.
inline cplda::CpModel orthogonal_model(const std::vector<std::size_t>& dims, std::vector<double> weights, Rng& rng) {
    cplda::CpModel m;
    m.weights = std::move(weights);
    for (std::size_t d : dims)
        m.factors.push_back(random_orthonormal(static_cast<Eigen::Index>(d),
                                               static_cast<Eigen::Index>(m.weights.size()), rng));
    return m;
}

/// sin of the angle between unit vectors as ‖u - v‖·‖u + v‖ / 2, which stays
/// accurate for tiny angles, unlike √(1 - c²).
inline double sin_between(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    return (u - v).norm() * (u + v).norm() / 2.0;
}

} // namespace testing_util
