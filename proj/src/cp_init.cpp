#include "cplda/cp_init.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cplda/error.hpp"
#include "cplda/linalg.hpp"

namespace cplda {

namespace {

std::vector<std::size_t> complement(std::size_t order, const std::vector<std::size_t>& modes) {
    std::vector<std::size_t> out;
    for (std::size_t m = 0; m < order; ++m)
        if (std::find(modes.begin(), modes.end(), m) == modes.end()) out.push_back(m);
    return out;
}

std::vector<std::size_t> dims_of(std::span<const std::size_t> dims, const std::vector<std::size_t>& modes) {
    std::vector<std::size_t> out;
    out.reserve(modes.size());
    for (std::size_t m : modes) out.push_back(dims[m]);
    return out;
}

Eigen::VectorXd normalized(const Eigen::VectorXd& v) {
    const double n = v.norm();
    if (!(n > 0.0)) throw InvalidArgument("cannot normalize a zero vector");
    Eigen::VectorXd out = v / n;
    apply_sign_convention(out);
    return out;
}

} // namespace

void InitConfig::validate() const {
    if (rank < 1) throw InvalidArgument("InitConfig: rank must be at least 1");
    if (!(c0 > 0.0 && c0 < 1.0)) throw InvalidArgument("InitConfig: c0 must lie in (0, 1)");
    if (!(nu > 0.0 && nu < 1.0)) throw InvalidArgument("InitConfig: nu must lie in (0, 1)");
}

std::size_t InitConfig::resolved_projections(std::size_t projection_dim) const {
    return projections > 0 ? projections : std::max<std::size_t>(100, 2 * projection_dim);
}

std::vector<std::size_t> choose_split(std::span<const std::size_t> dims,
                                      std::span<const std::size_t> requested) {
    const std::size_t order = dims.size();
    if (order < 2) throw InvalidArgument("choose_split: tensor order must be at least 2");
    if (!requested.empty()) {
        std::vector<std::size_t> s(requested.begin(), requested.end());
        std::sort(s.begin(), s.end());
        if (std::adjacent_find(s.begin(), s.end()) != s.end() || s.back() >= order || s.size() >= order)
            throw InvalidArgument("choose_split: requested modes must be a proper subset without duplicates");
        return s;
    }
    if (order >= 63) throw InvalidArgument("choose_split: order too large for exhaustive search");
    const std::size_t total = product(dims);
    std::vector<std::size_t> best;
    std::size_t best_score = 0;
    for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << order); ++mask) {
        std::vector<std::size_t> subset;
        std::size_t ds = 1;
        for (std::size_t m = 0; m < order; ++m)
            if (mask & (std::uint64_t{1} << m)) {
                subset.push_back(m);
                ds *= dims[m];
            }
        const std::size_t score = std::min(ds, total / ds);
        if (best.empty() || score > best_score || (score == best_score && subset < best)) {
            best = std::move(subset);
            best_score = score;
        }
    }
    return best;
}

std::vector<GapGroup> eigengap_groups(const Eigen::VectorXd& lambda, double c0) {
    const auto rank = static_cast<std::size_t>(lambda.size());
    std::vector<GapGroup> groups;
    if (rank == 0) return groups;
    const double threshold = c0 * lambda(lambda.size() - 1);
    for (std::size_t r = 0; r < rank; ++r) {
        const auto i = static_cast<Eigen::Index>(r);
        const double prev = r == 0 ? std::numeric_limits<double>::infinity() : lambda(i - 1);
        const double next = r + 1 == rank ? 0.0 : lambda(i + 1);
        const double gap = std::min(std::abs(lambda(i) - prev), std::abs(lambda(i) - next));
        const bool separated = gap > threshold;
        if (separated || groups.empty() || groups.back().separated)
            groups.push_back({{r}, separated});
        else
            groups.back().indices.push_back(r);
    }
    return groups;
}

std::vector<Eigen::VectorXd> cpca_extract(const Eigen::VectorXd& v, std::span<const std::size_t> side_dims) {
    if (side_dims.empty()) throw InvalidArgument("cpca_extract: no modes on this side");
    if (static_cast<std::size_t>(v.size()) != product(side_dims))
        throw DimensionError("cpca_extract: vector length does not match side dimensions");
    if (!(v.norm() > 0.0)) throw InvalidArgument("cpca_extract: zero vector");
    if (side_dims.size() == 1) return {normalized(v)};
    const DenseTensor reshaped(std::vector<std::size_t>(side_dims.begin(), side_dims.end()),
                               std::vector<double>(v.data(), v.data() + v.size()));
    std::vector<Eigen::VectorXd> out;
    for (std::size_t k = 0; k < side_dims.size(); ++k)
        out.push_back(top_left_singular_vector(unfold(reshaped, k).values));
    return out;
}

std::size_t projection_mode(std::span<const std::size_t> dims) {
    if (dims.empty()) throw InvalidArgument("projection_mode: empty dimension list");
    if (dims[0] > 1) return 0;
    std::size_t best = 0;
    for (std::size_t m = 1; m < dims.size(); ++m)
        if (dims[m] > dims[best]) best = m;
    return best;
}

std::vector<std::vector<Eigen::VectorXd>> randomized_projection(const DenseTensor& xi, std::size_t s,
                                                                const InitConfig& cfg, Rng& rng) {
    cfg.validate();
    const std::size_t order = xi.order();
    if (order < 2) throw InvalidArgument("randomized_projection: tensor order must be at least 2");
    if (s == 0) throw InvalidArgument("randomized_projection: rank must be at least 1");
    const auto& dims = xi.dims();
    const std::size_t proj = projection_mode(dims);
    const std::size_t num_proj = cfg.resolved_projections(dims[proj]);
    if (num_proj < s)
        throw InvalidArgument("randomized_projection: need at least as many projections as components");

    // Split of the remaining modes into row and column sides.
    const std::vector<std::size_t> rest = complement(order, {proj});
    std::vector<std::size_t> row_side;
    std::vector<std::size_t> col_side;
    if (rest.size() == 1) {
        row_side = rest;
    } else {
        const std::vector<std::size_t> rest_dims = dims_of(dims, rest);
        for (std::size_t local : choose_split(rest_dims)) row_side.push_back(rest[local]);
        for (std::size_t m : rest)
            if (std::find(row_side.begin(), row_side.end(), m) == row_side.end()) col_side.push_back(m);
    }
    const std::vector<std::size_t> row_dims = dims_of(dims, row_side);
    const std::vector<std::size_t> col_dims = dims_of(dims, col_side);

    std::vector<std::vector<Eigen::VectorXd>> pool(num_proj, std::vector<Eigen::VectorXd>(order));
    std::vector<double> score(num_proj, 0.0);
    Eigen::VectorXd theta(static_cast<Eigen::Index>(dims[proj]));
    for (std::size_t l = 0; l < num_proj; ++l) {
        for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = rng.normal();
        const DenseTensor projected = contract(xi, proj, theta);
        const Eigen::MatrixXd mat = unfold(projected, row_side).values;
        const SvdResult top = top_k_svd(mat, 1);
        auto& tuple = pool[l];
        if (!(top.singular_values(0) > 0.0)) {
            // Projection annihilated Ξ; keep a placeholder that can never win.
            for (std::size_t m = 0; m < order; ++m)
                tuple[m] = Eigen::VectorXd::Unit(static_cast<Eigen::Index>(dims[m]), 0);
            score[l] = -1.0;
            continue;
        }
        const auto row_vecs = cpca_extract(top.left.col(0), row_dims);
        for (std::size_t k = 0; k < row_side.size(); ++k) tuple[row_side[k]] = row_vecs[k];
        if (!col_side.empty()) {
            const auto col_vecs = cpca_extract(top.right.col(0), col_dims);
            for (std::size_t k = 0; k < col_side.size(); ++k) tuple[col_side[k]] = col_vecs[k];
        }
        tuple[proj] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dims[proj]));
        const Eigen::VectorXd lead = contract_all_but(xi, tuple, proj);
        if (lead.norm() > 0.0) {
            tuple[proj] = normalized(lead);
            score[l] = std::abs(contract_all(xi, tuple));
        } else {
            tuple[proj] = Eigen::VectorXd::Unit(static_cast<Eigen::Index>(dims[proj]), 0);
            score[l] = 0.0;
        }
    }

    std::vector<bool> alive(num_proj, true);
    for (std::size_t l = 0; l < num_proj; ++l)
        if (score[l] < 0.0) alive[l] = false;
    std::vector<std::vector<Eigen::VectorXd>> chosen;
    for (std::size_t r = 0; r < s; ++r) {
        std::size_t best = num_proj;
        for (std::size_t l = 0; l < num_proj; ++l)
            if (alive[l] && (best == num_proj || score[l] > score[best])) best = l;
        if (best == num_proj)
            throw PoolExhaustedError("randomized_projection: only " + std::to_string(r) + " of " +
                                     std::to_string(s) +
                                     " components survived pruning; increase the number of "
                                     "projections or the overlap threshold nu");
        chosen.push_back(pool[best]);
        const auto& pick = chosen.back();
        for (std::size_t l = 0; l < num_proj; ++l) {
            if (!alive[l]) continue;
            double overlap = 0.0;
            for (std::size_t m = 0; m < order; ++m) overlap = std::max(overlap, std::abs(pool[l][m].dot(pick[m])));
            if (overlap > cfg.nu) alive[l] = false;
        }
        alive[best] = false;
    }
    return chosen;
}

WarmStart rcpca(const DenseTensor& b_hat, const InitConfig& cfg, Rng& rng) {
    cfg.validate();
    const auto& dims = b_hat.dims();
    const std::size_t order = dims.size();
    WarmStart ws;
    ws.split = choose_split(dims, cfg.split);
    const std::vector<std::size_t> col_modes = complement(order, ws.split);
    const std::vector<std::size_t> row_dims = dims_of(dims, ws.split);
    const std::vector<std::size_t> col_dims = dims_of(dims, col_modes);

    const ModeMatrix mat = unfold(b_hat, ws.split);
    const auto max_rank = static_cast<std::size_t>(std::min(mat.values.rows(), mat.values.cols()));
    if (cfg.rank > max_rank)
        throw InvalidArgument("rcpca: rank " + std::to_string(cfg.rank) +
                              " exceeds the matricization rank bound " + std::to_string(max_rank));
    const SvdResult svd = top_k_svd(mat.values, cfg.rank);
    ws.singular_values = svd.singular_values;

    for (std::size_t d : dims)
        ws.factors.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                                   static_cast<Eigen::Index>(cfg.rank)));

    for (const GapGroup& g : eigengap_groups(svd.singular_values, cfg.c0)) {
        if (g.indices.size() == 1) {
            const std::size_t r = g.indices.front();
            const auto ri = static_cast<Eigen::Index>(r);
            const auto row_vecs = cpca_extract(svd.left.col(ri), row_dims);
            const auto col_vecs = cpca_extract(svd.right.col(ri), col_dims);
            for (std::size_t k = 0; k < ws.split.size(); ++k) ws.factors[ws.split[k]].col(ri) = row_vecs[k];
            for (std::size_t k = 0; k < col_modes.size(); ++k) ws.factors[col_modes[k]].col(ri) = col_vecs[k];
            ws.groups.push_back({g.indices, InitBranch::cpca});
            continue;
        }
        ModeMatrix group_mat{Eigen::MatrixXd::Zero(mat.values.rows(), mat.values.cols()), mat.row_modes,
                             mat.col_modes, mat.dims};
        for (std::size_t r : g.indices) {
            const auto ri = static_cast<Eigen::Index>(r);
            group_mat.values.noalias() += svd.singular_values(ri) * svd.left.col(ri) * svd.right.col(ri).transpose();
        }
        const DenseTensor xi = fold(group_mat);
        const auto tuples = randomized_projection(xi, g.indices.size(), cfg, rng);
        for (std::size_t k = 0; k < g.indices.size(); ++k) {
            const auto ri = static_cast<Eigen::Index>(g.indices[k]);
            for (std::size_t m = 0; m < order; ++m) ws.factors[m].col(ri) = tuples[k][m];
        }
        ws.groups.push_back({g.indices, InitBranch::randomized});
    }
    return ws;
}

} // namespace cplda
