#include "cplda/cp_model.hpp"

#include "cplda/error.hpp"

namespace cplda {

std::vector<std::size_t> CpModel::dims() const {
    std::vector<std::size_t> d;
    d.reserve(factors.size());
    for (const auto& f : factors) d.push_back(static_cast<std::size_t>(f.rows()));
    return d;
}

void CpModel::validate() const {
    if (factors.empty()) throw DimensionError("CP model has no modes");
    for (const auto& f : factors) {
        if (static_cast<std::size_t>(f.cols()) != weights.size())
            throw DimensionError("CP model: factor column count differs from rank");
        if (f.rows() == 0) throw DimensionError("CP model: empty mode");
    }
}

DenseTensor cp_compose(const CpModel& model) {
    model.validate();
    DenseTensor out(model.dims());
    std::vector<Eigen::VectorXd> cols(model.order());
    for (std::size_t r = 0; r < model.rank(); ++r) {
        for (std::size_t m = 0; m < model.order(); ++m) cols[m] = model.basis(r, m);
        DenseTensor term = outer_product(cols);
        term *= model.weights[r];
        out += term;
    }
    return out;
}

} // namespace cplda
