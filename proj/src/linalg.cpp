#include "cplda/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "cplda/error.hpp"

namespace cplda {

namespace {

constexpr int kMaxSweeps = 80;
constexpr double kOrthTol = 1e-15;

void require_finite(const Eigen::MatrixXd& a, const char* what) {
    if (!a.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite entries");
}

// Orthonormal completion of column j of `u` against columns [0, j).
void complete_column(Eigen::MatrixXd& u, Eigen::Index j) {
    const Eigen::Index n = u.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd w = Eigen::VectorXd::Unit(n, i);
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index k = 0; k < j; ++k) w -= u.col(k).dot(w) * u.col(k);
        const double nw = w.norm();
        if (nw > 0.5) {
            u.col(j) = w / nw;
            return;
        }
    }
    throw SingularityError("svd: unable to complete orthonormal basis");
}

// One-sided Jacobi for rows >= cols. Returns unsorted columns.
void hestenes(Eigen::MatrixXd& u, Eigen::MatrixXd& v) {
    const Eigen::Index n = u.cols();
    v = Eigen::MatrixXd::Identity(n, n);
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double alpha = u.col(p).squaredNorm();
                const double beta = u.col(q).squaredNorm();
                const double gamma = u.col(p).dot(u.col(q));
                if (alpha == 0.0 || beta == 0.0) continue;
                if (std::abs(gamma) <= kOrthTol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (Eigen::Index i = 0; i < u.rows(); ++i) {
                    const double up = u(i, p);
                    const double uq = u(i, q);
                    u(i, p) = c * up - s * uq;
                    u(i, q) = s * up + c * uq;
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double vp = v(i, p);
                    const double vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) return;
    }
}

SvdResult svd_tall(const Eigen::MatrixXd& a) {
    Eigen::MatrixXd u = a;
    Eigen::MatrixXd v;
    hestenes(u, v);
    const Eigen::Index n = u.cols();
    Eigen::VectorXd norms(n);
    for (Eigen::Index j = 0; j < n; ++j) norms(j) = u.col(j).norm();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return norms(x) > norms(y); });

    SvdResult out;
    out.singular_values.resize(n);
    out.left.resize(u.rows(), n);
    out.right.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index j = order[static_cast<std::size_t>(k)];
        out.singular_values(k) = norms(j);
        out.right.col(k) = v.col(j);
        if (norms(j) > 0.0)
            out.left.col(k) = u.col(j) / norms(j);
        else
            complete_column(out.left, k);
    }
    return out;
}

} // namespace

void apply_sign_convention(Eigen::Ref<Eigen::VectorXd> v) {
    if (v.size() == 0) return;
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (std::abs(v(i)) > std::abs(v(best))) best = i;
    if (v(best) < 0.0) v = -v;
}

SvdResult thin_svd(const Eigen::MatrixXd& a) {
    require_finite(a, "thin_svd");
    if (a.size() == 0) throw InvalidArgument("thin_svd: empty matrix");
    SvdResult out;
    if (a.rows() >= a.cols()) {
        out = svd_tall(a);
    } else {
        SvdResult t = svd_tall(a.transpose());
        out.singular_values = std::move(t.singular_values);
        out.left = std::move(t.right);
        out.right = std::move(t.left);
    }
    for (Eigen::Index k = 0; k < out.left.cols(); ++k) {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < out.left.rows(); ++i)
            if (std::abs(out.left(i, k)) > std::abs(out.left(best, k))) best = i;
        if (out.left(best, k) < 0.0) {
            out.left.col(k) *= -1.0;
            out.right.col(k) *= -1.0;
        }
    }
    return out;
}

SvdResult top_k_svd(const Eigen::MatrixXd& a, std::size_t k) {
    const auto min_dim = static_cast<std::size_t>(std::min(a.rows(), a.cols()));
    if (k == 0 || k > min_dim)
        throw InvalidArgument("top_k_svd: k=" + std::to_string(k) + " outside [1, " +
                              std::to_string(min_dim) + "]");
    SvdResult full = thin_svd(a);
    const auto kk = static_cast<Eigen::Index>(k);
    SvdResult out;
    out.singular_values = full.singular_values.head(kk);
    out.left = full.left.leftCols(kk);
    out.right = full.right.leftCols(kk);
    return out;
}

Eigen::VectorXd top_left_singular_vector(const Eigen::MatrixXd& a) {
    if (a.cols() == 1) {
        require_finite(a, "top_left_singular_vector");
        const double n = a.col(0).norm();
        if (n == 0.0) throw InvalidArgument("top_left_singular_vector: zero matrix");
        Eigen::VectorXd v = a.col(0) / n;
        apply_sign_convention(v);
        return v;
    }
    SvdResult s = top_k_svd(a, 1);
    if (s.singular_values(0) == 0.0) throw InvalidArgument("top_left_singular_vector: zero matrix");
    return s.left.col(0);
}

Eigen::MatrixXd right_inverse(const Eigen::MatrixXd& a) {
    require_finite(a, "right_inverse");
    if (a.cols() == 0 || a.rows() < a.cols())
        throw SingularityError("right_inverse: matrix cannot have full column rank");
    const Eigen::MatrixXd gram = a.transpose() * a;
    const Eigen::VectorXd ev = sym_eigenvalues(gram);
    const double largest = ev(ev.size() - 1);
    if (!(largest > 0.0) || ev(0) < 1e-12 * largest)
        throw SingularityError("right_inverse: Gram matrix is rank deficient (smallest eigenvalue " +
                               std::to_string(ev(0)) + ", largest " + std::to_string(largest) + ")");
    return a * sym_inverse(gram);
}

Eigen::MatrixXd chol_factor(const Eigen::MatrixXd& s) {
    require_finite(s, "chol_factor");
    if (s.rows() != s.cols() || s.rows() == 0) throw DimensionError("chol_factor: matrix must be square");
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw InvalidArgument("chol_factor: matrix is not symmetric");
    const Eigen::Index n = s.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = s(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0))
            throw DefinitenessError("chol_factor: matrix is not positive definite at pivot " +
                                        std::to_string(j),
                                    static_cast<std::size_t>(j));
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double acc = s(i, j);
            for (Eigen::Index k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
            l(i, j) = acc / ljj;
        }
    }
    return l;
}

Eigen::MatrixXd sym_inverse(const Eigen::MatrixXd& s) {
    const Eigen::MatrixXd l = chol_factor(s);
    const Eigen::Index n = s.rows();
    const Eigen::MatrixXd l_inv =
        l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd inv = l_inv.transpose() * l_inv;
    return 0.5 * (inv + inv.transpose());
}

Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& s) {
    require_finite(s, "sym_eigenvalues");
    if (s.rows() != s.cols()) throw DimensionError("sym_eigenvalues: matrix must be square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

double spectral_norm(const Eigen::MatrixXd& a) { return thin_svd(a).singular_values(0); }

} // namespace cplda
