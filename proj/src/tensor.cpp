#include "cplda/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cplda/error.hpp"

namespace cplda {

namespace {

void validate_dims(const std::vector<std::size_t>& dims) {
    if (dims.empty()) throw DimensionError("tensor order must be at least 1");
    for (std::size_t d : dims)
        if (d == 0) throw DimensionError("tensor dimensions must be positive");
}

// View of a tensor around `mode` as (inner x d_mode x outer), colexicographic.
struct SlabShape {
    std::size_t inner = 1;
    std::size_t dim = 1;
    std::size_t outer = 1;
};

SlabShape slab_shape(const std::vector<std::size_t>& dims, std::size_t mode) {
    SlabShape s;
    for (std::size_t l = 0; l < mode; ++l) s.inner *= dims[l];
    s.dim = dims[mode];
    for (std::size_t l = mode + 1; l < dims.size(); ++l) s.outer *= dims[l];
    return s;
}

// y[i + inner*o] = sum_k x[i + inner*(k + dim*o)] * v[k]
void contract_raw(const double* x, const SlabShape& s, const double* v, double* y) {
    using ConstMat = Eigen::Map<const Eigen::MatrixXd>;
    using Mat = Eigen::Map<Eigen::MatrixXd>;
    Eigen::Map<const Eigen::VectorXd> vv(v, static_cast<Eigen::Index>(s.dim));
    if (s.inner == 1) {
        // x is dim x outer
        ConstMat xm(x, static_cast<Eigen::Index>(s.dim), static_cast<Eigen::Index>(s.outer));
        Eigen::Map<Eigen::VectorXd>(y, static_cast<Eigen::Index>(s.outer)).noalias() =
            xm.transpose() * vv;
        return;
    }
    for (std::size_t o = 0; o < s.outer; ++o) {
        ConstMat slab(x + o * s.inner * s.dim, static_cast<Eigen::Index>(s.inner),
                      static_cast<Eigen::Index>(s.dim));
        Mat out(y + o * s.inner, static_cast<Eigen::Index>(s.inner), 1);
        out.noalias() = slab * vv;
    }
}

void check_mode(const DenseTensor& x, std::size_t mode) {
    if (mode >= x.order())
        throw DimensionError("mode " + std::to_string(mode) + " out of range for order-" +
                             std::to_string(x.order()) + " tensor");
}

} // namespace

DenseTensor::DenseTensor() : dims_{1}, data_(1, 0.0) {}

DenseTensor::DenseTensor(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    validate_dims(dims_);
    data_.assign(product(dims_), 0.0);
}

DenseTensor::DenseTensor(std::vector<std::size_t> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
    validate_dims(dims_);
    if (data_.size() != product(dims_))
        throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                             " does not match dimension product " +
                             std::to_string(product(dims_)));
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
    if (index.size() != dims_.size()) throw DimensionError("index order mismatch");
    std::size_t off = 0;
    std::size_t stride = 1;
    for (std::size_t m = 0; m < dims_.size(); ++m) {
        if (index[m] >= dims_[m]) throw DimensionError("index out of range");
        off += index[m] * stride;
        stride *= dims_[m];
    }
    return off;
}

double DenseTensor::at(std::initializer_list<std::size_t> index) const {
    return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

double& DenseTensor::at(std::initializer_list<std::size_t> index) {
    return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

Eigen::Map<const Eigen::VectorXd> DenseTensor::as_vector() const {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
}

Eigen::Map<Eigen::VectorXd> DenseTensor::as_vector() {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
    require_same_shape(*this, other, "tensor addition");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& other) {
    require_same_shape(*this, other, "tensor subtraction");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

DenseTensor& DenseTensor::operator*=(double scale) noexcept {
    for (double& v : data_) v *= scale;
    return *this;
}

std::size_t product(std::span<const std::size_t> dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

void require_same_shape(const DenseTensor& a, const DenseTensor& b, const char* what) {
    if (a.dims() != b.dims()) throw DimensionError(std::string(what) + ": shape mismatch");
}

double inner(const DenseTensor& x, const DenseTensor& y) {
    require_same_shape(x, y, "inner product");
    double acc = 0.0;
    const auto xd = x.data();
    const auto yd = y.data();
    for (std::size_t i = 0; i < xd.size(); ++i) acc += xd[i] * yd[i];
    return acc;
}

double frob_norm(const DenseTensor& x) { return std::sqrt(inner(x, x)); }

std::vector<double> vec(const DenseTensor& x) { return {x.data().begin(), x.data().end()}; }

ModeMatrix unfold(const DenseTensor& x, std::size_t mode) {
    check_mode(x, mode);
    const std::size_t modes[1] = {mode};
    return unfold(x, std::span<const std::size_t>(modes));
}

ModeMatrix unfold(const DenseTensor& x, std::span<const std::size_t> modes) {
    const std::size_t order = x.order();
    std::vector<bool> in_rows(order, false);
    for (std::size_t m : modes) {
        check_mode(x, m);
        in_rows[m] = true;
    }
    ModeMatrix out;
    out.dims = x.dims();
    for (std::size_t m = 0; m < order; ++m)
        (in_rows[m] ? out.row_modes : out.col_modes).push_back(m);
    if (out.row_modes.empty() || out.row_modes.size() != modes.size())
        throw DimensionError("mode set must be nonempty and free of duplicates");
    if (out.col_modes.empty() && order > 1)
        throw DimensionError("mode set must be a proper subset of the modes");

    // Per-mode stride inside the row or column index.
    std::vector<std::size_t> stride(order, 0);
    std::size_t rows = 1;
    std::size_t cols = 1;
    for (std::size_t m = 0; m < order; ++m) {
        if (in_rows[m]) {
            stride[m] = rows;
            rows *= x.dim(m);
        } else {
            stride[m] = cols;
            cols *= x.dim(m);
        }
    }
    out.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));

    std::vector<std::size_t> idx(order, 0);
    std::size_t row = 0;
    std::size_t col = 0;
    const auto data = x.data();
    for (std::size_t flat = 0; flat < data.size(); ++flat) {
        out.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = data[flat];
        // Odometer increment, first mode fastest.
        for (std::size_t m = 0; m < order; ++m) {
            std::size_t& r_or_c = in_rows[m] ? row : col;
            if (++idx[m] < x.dim(m)) {
                r_or_c += stride[m];
                break;
            }
            r_or_c -= stride[m] * (x.dim(m) - 1);
            idx[m] = 0;
        }
    }
    return out;
}

DenseTensor fold(const ModeMatrix& mm) {
    const std::size_t order = mm.dims.size();
    std::vector<bool> in_rows(order, false);
    for (std::size_t m : mm.row_modes) {
        if (m >= order) throw DimensionError("fold: row mode out of range");
        in_rows[m] = true;
    }
    std::vector<std::size_t> stride(order, 0);
    std::size_t rows = 1;
    std::size_t cols = 1;
    for (std::size_t m = 0; m < order; ++m) {
        if (in_rows[m]) {
            stride[m] = rows;
            rows *= mm.dims[m];
        } else {
            stride[m] = cols;
            cols *= mm.dims[m];
        }
    }
    if (static_cast<std::size_t>(mm.values.rows()) != rows ||
        static_cast<std::size_t>(mm.values.cols()) != cols)
        throw DimensionError("fold: matrix shape does not match provenance");

    DenseTensor x(mm.dims);
    std::vector<std::size_t> idx(order, 0);
    std::size_t row = 0;
    std::size_t col = 0;
    auto data = x.data();
    for (std::size_t flat = 0; flat < data.size(); ++flat) {
        data[flat] = mm.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
        for (std::size_t m = 0; m < order; ++m) {
            std::size_t& r_or_c = in_rows[m] ? row : col;
            if (++idx[m] < mm.dims[m]) {
                r_or_c += stride[m];
                break;
            }
            r_or_c -= stride[m] * (mm.dims[m] - 1);
            idx[m] = 0;
        }
    }
    return x;
}

// Computes fold(A * mat_m(x)) slab by slab: every outer slice of the
// colexicographic buffer is an (inner x d_m) column-major block whose product
// with Aᵀ is the corresponding block of the result.
DenseTensor mode_product(const DenseTensor& x, std::size_t mode, const Eigen::MatrixXd& a) {
    check_mode(x, mode);
    if (static_cast<std::size_t>(a.cols()) != x.dim(mode))
        throw DimensionError("mode_product: matrix has " + std::to_string(a.cols()) +
                             " columns, mode " + std::to_string(mode) + " has dimension " +
                             std::to_string(x.dim(mode)));
    if (a.rows() == 0) throw DimensionError("mode_product: matrix has no rows");
    const SlabShape s = slab_shape(x.dims(), mode);
    std::vector<std::size_t> out_dims = x.dims();
    out_dims[mode] = static_cast<std::size_t>(a.rows());
    DenseTensor y(out_dims);

    using ConstMat = Eigen::Map<const Eigen::MatrixXd>;
    using Mat = Eigen::Map<Eigen::MatrixXd>;
    const auto new_dim = static_cast<Eigen::Index>(a.rows());
    if (s.inner == 1) {
        ConstMat xm(x.data().data(), static_cast<Eigen::Index>(s.dim),
                    static_cast<Eigen::Index>(s.outer));
        Mat ym(y.data().data(), new_dim, static_cast<Eigen::Index>(s.outer));
        ym.noalias() = a * xm;
        return y;
    }
    for (std::size_t o = 0; o < s.outer; ++o) {
        ConstMat slab(x.data().data() + o * s.inner * s.dim, static_cast<Eigen::Index>(s.inner),
                      static_cast<Eigen::Index>(s.dim));
        Mat out(y.data().data() + o * s.inner * static_cast<std::size_t>(new_dim),
                static_cast<Eigen::Index>(s.inner), new_dim);
        out.noalias() = slab * a.transpose();
    }
    return y;
}

DenseTensor contract(const DenseTensor& x, std::size_t mode, const Eigen::VectorXd& v) {
    check_mode(x, mode);
    if (static_cast<std::size_t>(v.size()) != x.dim(mode))
        throw DimensionError("contract: vector length does not match mode dimension");
    const SlabShape s = slab_shape(x.dims(), mode);
    std::vector<std::size_t> out_dims = x.dims();
    out_dims[mode] = 1;
    DenseTensor y(out_dims);
    contract_raw(x.data().data(), s, v.data(), y.data().data());
    return y;
}

Eigen::VectorXd contract_all_but(const DenseTensor& x, std::span<const Eigen::VectorXd> vectors,
                                 std::size_t keep) {
    check_mode(x, keep);
    if (vectors.size() != x.order())
        throw DimensionError("contract_all_but: need one vector per mode");
    std::vector<std::size_t> dims = x.dims();
    std::vector<double> cur(x.data().begin(), x.data().end());
    std::vector<double> next;
    // Contract the largest-stride modes first so every step shrinks the buffer.
    for (std::size_t step = x.order(); step-- > 0;) {
        if (step == keep) continue;
        if (static_cast<std::size_t>(vectors[step].size()) != dims[step])
            throw DimensionError("contract_all_but: vector length does not match mode dimension");
        const SlabShape s = slab_shape(dims, step);
        next.assign(s.inner * s.outer, 0.0);
        contract_raw(cur.data(), s, vectors[step].data(), next.data());
        dims[step] = 1;
        cur.swap(next);
    }
    return Eigen::Map<const Eigen::VectorXd>(cur.data(), static_cast<Eigen::Index>(cur.size()));
}

double contract_all(const DenseTensor& x, std::span<const Eigen::VectorXd> vectors) {
    if (vectors.size() != x.order()) throw DimensionError("contract_all: need one vector per mode");
    const Eigen::VectorXd rest = contract_all_but(x, vectors, 0);
    if (static_cast<std::size_t>(vectors[0].size()) != x.dim(0))
        throw DimensionError("contract_all: vector length does not match mode dimension");
    return rest.dot(vectors[0]);
}

DenseTensor outer_product(std::span<const Eigen::VectorXd> vectors) {
    if (vectors.empty()) throw DimensionError("outer_product: need at least one vector");
    std::vector<std::size_t> dims;
    for (const auto& v : vectors) dims.push_back(static_cast<std::size_t>(v.size()));
    DenseTensor x(dims);
    auto data = x.data();
    // Build up colexicographically: after k modes the prefix holds v_0 ∘ ... ∘ v_{k-1}.
    data[0] = 1.0;
    std::size_t filled = 1;
    for (const auto& v : vectors) {
        const std::size_t n = static_cast<std::size_t>(v.size());
        for (std::size_t k = n; k-- > 0;)
            for (std::size_t i = 0; i < filled; ++i) data[k * filled + i] = data[i] * v[static_cast<Eigen::Index>(k)];
        filled *= n;
    }
    return x;
}

} // namespace cplda
