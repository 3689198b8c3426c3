#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cplda {

/// Dense order-M real tensor.
///
/// Storage is colexicographic: the first index varies fastest, so the flat
/// buffer is exactly vec(X). Element (i_0, ..., i_{M-1}) (0-based) lives at
/// offset sum_m i_m * prod_{l<m} d_l. Mode indices throughout the library are
/// 0-based.
class DenseTensor {
public:
    /// A 1-element order-1 tensor holding 0.
    DenseTensor();
    /// Zero tensor of the given shape.
    explicit DenseTensor(std::vector<std::size_t> dims);
    DenseTensor(std::vector<std::size_t> dims, std::vector<double> data);

    std::size_t order() const noexcept { return dims_.size(); }
    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    double operator[](std::size_t flat) const { return data_[flat]; }
    double& operator[](std::size_t flat) { return data_[flat]; }

    /// Flat offset of a multi-index; throws DimensionError when out of range.
    std::size_t offset(std::span<const std::size_t> index) const;
    double at(std::span<const std::size_t> index) const { return data_[offset(index)]; }
    double& at(std::span<const std::size_t> index) { return data_[offset(index)]; }
    double at(std::initializer_list<std::size_t> index) const;
    double& at(std::initializer_list<std::size_t> index);

    /// Column view of the flat buffer.
    Eigen::Map<const Eigen::VectorXd> as_vector() const;
    Eigen::Map<Eigen::VectorXd> as_vector();

    DenseTensor& operator+=(const DenseTensor& other);
    DenseTensor& operator-=(const DenseTensor& other);
    DenseTensor& operator*=(double scale) noexcept;

    friend DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
    friend DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
    friend DenseTensor operator*(DenseTensor a, double s) { return a *= s; }
    friend DenseTensor operator*(double s, DenseTensor a) { return a *= s; }

    bool operator==(const DenseTensor& other) const = default;

private:
    std::vector<std::size_t> dims_;
    std::vector<double> data_;
};

/// Product of a dimension list (1 for an empty list).
std::size_t product(std::span<const std::size_t> dims);

/// Throws DimensionError when `a` and `b` differ in shape.
void require_same_shape(const DenseTensor& a, const DenseTensor& b, const char* what);

double inner(const DenseTensor& x, const DenseTensor& y);
double frob_norm(const DenseTensor& x);
/// The colexicographic flattening vec(x).
std::vector<double> vec(const DenseTensor& x);

/// A matricization together with the modes that produced it.
struct ModeMatrix {
    Eigen::MatrixXd values;
    std::vector<std::size_t> row_modes; ///< ascending
    std::vector<std::size_t> col_modes; ///< ascending complement
    std::vector<std::size_t> dims;      ///< shape of the source tensor
};

/// Mode-m unfolding: d_m x (d / d_m); remaining modes are ordered
/// colexicographically in the column index.
ModeMatrix unfold(const DenseTensor& x, std::size_t mode);

/// Multi-mode unfolding mat_S. `modes` must be a nonempty proper subset; it is
/// sorted before use.
ModeMatrix unfold(const DenseTensor& x, std::span<const std::size_t> modes);

/// Inverse of `unfold`.
DenseTensor fold(const ModeMatrix& m);

/// x ×_mode a, with a of shape (d̃ x d_mode).
DenseTensor mode_product(const DenseTensor& x, std::size_t mode, const Eigen::MatrixXd& a);

/// x ×_mode vᵀ; the result keeps its order with dimension 1 at `mode`.
DenseTensor contract(const DenseTensor& x, std::size_t mode, const Eigen::VectorXd& v);

/// x ×_{l != keep} v_lᵀ, returned as a d_keep vector. `vectors[keep]` is ignored.
Eigen::VectorXd contract_all_but(const DenseTensor& x, std::span<const Eigen::VectorXd> vectors,
                                 std::size_t keep);

/// x ×_{l} v_lᵀ over every mode.
double contract_all(const DenseTensor& x, std::span<const Eigen::VectorXd> vectors);

/// v_0 ∘ v_1 ∘ ... ∘ v_{M-1}.
DenseTensor outer_product(std::span<const Eigen::VectorXd> vectors);

} // namespace cplda
