#include <gtest/gtest.h>

#include <numeric>

#include "cplda/cp_model.hpp"
#include "cplda/error.hpp"
#include "cplda/tensor.hpp"
#include "helpers.hpp"

using namespace cplda;
using testing_util::matricized_position;
using testing_util::multi_index;
using testing_util::random_matrix;
using testing_util::random_tensor;
using testing_util::random_unit;

namespace {

DenseTensor iota_tensor(std::vector<std::size_t> dims) {
    std::vector<double> data(product(dims));
    std::iota(data.begin(), data.end(), 1.0);
    return DenseTensor(std::move(dims), std::move(data));
}

} // namespace

TEST(DenseTensor, ConstructionChecksShape) {
    EXPECT_THROW(DenseTensor({2, 3}, std::vector<double>(5)), DimensionError);
    EXPECT_THROW(DenseTensor(std::vector<std::size_t>{2, 0}), DimensionError);
    EXPECT_THROW(DenseTensor(std::vector<std::size_t>{}), DimensionError);
    DenseTensor x({2, 3, 4});
    EXPECT_EQ(x.size(), 24u);
    EXPECT_EQ(x.order(), 3u);
}

TEST(DenseTensor, OffsetIsColexicographic) {
    const DenseTensor x = iota_tensor({2, 3, 4});
    for (std::size_t k = 0; k < x.size(); ++k) {
        const auto idx = multi_index(k, x.dims());
        EXPECT_EQ(x.offset(idx), k);
        EXPECT_EQ(x.at(idx), static_cast<double>(k + 1));
    }
    EXPECT_EQ(x.at({1, 0, 0}), 2.0);
    EXPECT_EQ(x.at({0, 1, 0}), 3.0);
    EXPECT_EQ(x.at({0, 0, 1}), 7.0);
    EXPECT_THROW((void)x.at({2, 0, 0}), DimensionError);
    EXPECT_THROW((void)x.at({0, 0}), DimensionError);
}

TEST(Unfold, OrderTwoIsTheMatrixAndItsTranspose) {
    const DenseTensor x = iota_tensor({2, 2});
    Eigen::MatrixXd m1(2, 2), m2(2, 2);
    m1 << 1, 3, 2, 4;
    m2 << 1, 2, 3, 4;
    EXPECT_EQ(unfold(x, 0).values, m1);
    EXPECT_EQ(unfold(x, 1).values, m2);
}

TEST(Unfold, ModeMatchesIndexMapExhaustively) {
    const DenseTensor x = iota_tensor({2, 3, 2});
    for (std::size_t mode = 0; mode < 3; ++mode) {
        const ModeMatrix mm = unfold(x, mode);
        ASSERT_EQ(mm.values.rows(), static_cast<Eigen::Index>(x.dim(mode)));
        ASSERT_EQ(mm.values.cols(), static_cast<Eigen::Index>(x.size() / x.dim(mode)));
        std::vector<bool> rows(3, false);
        rows[mode] = true;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const auto idx = multi_index(k, x.dims());
            const auto [r, c] = matricized_position(idx, x.dims(), rows);
            EXPECT_EQ(mm.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)), x[k]);
        }
    }
}

TEST(Unfold, MultiModeTwoByTwoByTwoStacksSlices) {
    const DenseTensor x = iota_tensor({2, 2, 2});
    const std::vector<std::size_t> s{0, 1};
    const ModeMatrix mm = unfold(x, s);
    ASSERT_EQ(mm.values.rows(), 4);
    ASSERT_EQ(mm.values.cols(), 2);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t i = 0; i < 2; ++i)
                EXPECT_EQ(mm.values(static_cast<Eigen::Index>(i + 2 * j), static_cast<Eigen::Index>(c)),
                          x.at({i, j, c}));
}

TEST(Unfold, SingletonSetEqualsModeUnfolding) {
    Rng rng(11);
    const DenseTensor x = random_tensor({3, 4, 5}, rng);
    for (std::size_t m = 0; m < 3; ++m) {
        const std::vector<std::size_t> s{m};
        EXPECT_EQ(unfold(x, s).values, unfold(x, m).values);
    }
}

TEST(Unfold, RejectsBadModeSets) {
    const DenseTensor x = iota_tensor({2, 2, 2});
    EXPECT_THROW(unfold(x, 3), DimensionError);
    EXPECT_THROW(unfold(x, std::vector<std::size_t>{}), DimensionError);
    EXPECT_THROW(unfold(x, std::vector<std::size_t>{0, 1, 2}), DimensionError);
    EXPECT_THROW(unfold(x, std::vector<std::size_t>{0, 0}), DimensionError);
}

TEST(Unfold, AllSubsetsMatchIndexMapAndRoundTripBitwise) {
    Rng rng(5);
    for (std::size_t order = 2; order <= 4; ++order) {
        std::vector<std::size_t> dims;
        for (std::size_t m = 0; m < order; ++m) dims.push_back(2 + (m * 3 + order) % 3);
        const DenseTensor x = random_tensor(dims, rng);
        const double norm = frob_norm(x);
        for (unsigned mask = 1; mask + 1 < (1u << order); ++mask) {
            std::vector<std::size_t> s;
            std::vector<bool> rows(order, false);
            for (std::size_t m = 0; m < order; ++m)
                if (mask & (1u << m)) {
                    s.push_back(m);
                    rows[m] = true;
                }
            const ModeMatrix mm = unfold(x, s);
            for (std::size_t k = 0; k < x.size(); ++k) {
                const auto [r, c] = matricized_position(multi_index(k, dims), dims, rows);
                ASSERT_EQ(mm.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)), x[k]);
            }
            EXPECT_EQ(fold(mm), x);
            EXPECT_NEAR(mm.values.norm(), norm, 1e-12 * norm);
        }
    }
}

TEST(ModeProduct, IdentityLeavesTensorUnchanged) {
    Rng rng(3);
    const DenseTensor x = random_tensor({3, 4, 2}, rng);
    for (std::size_t m = 0; m < 3; ++m) {
        const auto d = static_cast<Eigen::Index>(x.dim(m));
        EXPECT_EQ(mode_product(x, m, Eigen::MatrixXd::Identity(d, d)), x);
    }
}

TEST(ModeProduct, MatchesTripleLoopOracle) {
    Rng rng(4);
    const DenseTensor x = random_tensor({3, 4, 2}, rng);
    const Eigen::MatrixXd a = random_matrix(5, 4, rng);
    const DenseTensor y = mode_product(x, 1, a);
    ASSERT_EQ(y.dims(), (std::vector<std::size_t>{3, 5, 2}));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            for (std::size_t k = 0; k < 2; ++k) {
                double s = 0.0;
                for (std::size_t l = 0; l < 4; ++l)
                    s += x.at({i, l, k}) * a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l));
                EXPECT_NEAR(y.at({i, j, k}), s, 1e-12);
            }
}

TEST(ModeProduct, EqualsFoldOfMatrixTimesUnfolding) {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const DenseTensor x = random_tensor({2, 3, 4, 2}, rng);
        for (std::size_t m = 0; m < 4; ++m) {
            const Eigen::MatrixXd a = random_matrix(3, static_cast<Eigen::Index>(x.dim(m)), rng);
            ModeMatrix mm = unfold(x, m);
            mm.values = a * mm.values;
            mm.dims[m] = 3;
            const DenseTensor expect = fold(mm);
            const DenseTensor got = mode_product(x, m, a);
            ASSERT_EQ(got.dims(), expect.dims());
            EXPECT_LT(frob_norm(got - expect), 1e-12 * (1.0 + frob_norm(expect)));
        }
    }
}

TEST(ModeProduct, OuterProductMultilinearity) {
    Rng rng(9);
    const std::vector<Eigen::VectorXd> v{random_unit(3, rng), random_unit(4, rng), random_unit(2, rng)};
    const Eigen::MatrixXd a = random_matrix(5, 3, rng);
    const std::vector<Eigen::VectorXd> w{a * v[0], v[1], v[2]};
    EXPECT_LT(frob_norm(mode_product(outer_product(v), 0, a) - outer_product(w)), 1e-12);
}

TEST(ModeProduct, ProductsOnDistinctModesCommute) {
    Rng rng(10);
    for (int trial = 0; trial < 10; ++trial) {
        const DenseTensor x = random_tensor({3, 2, 4}, rng);
        const Eigen::MatrixXd a = random_matrix(2, 3, rng);
        const Eigen::MatrixXd b = random_matrix(5, 4, rng);
        const DenseTensor ab = mode_product(mode_product(x, 0, a), 2, b);
        const DenseTensor ba = mode_product(mode_product(x, 2, b), 0, a);
        EXPECT_LT(frob_norm(ab - ba), 1e-12 * frob_norm(ab));
    }
}

TEST(ModeProduct, RejectsWrongShape) {
    const DenseTensor x({3, 4});
    EXPECT_THROW(mode_product(x, 0, Eigen::MatrixXd::Zero(2, 4)), DimensionError);
    EXPECT_THROW(mode_product(x, 2, Eigen::MatrixXd::Zero(2, 2)), DimensionError);
}

TEST(Inner, MatchesFlatDotAndNorm) {
    Rng rng(12);
    const DenseTensor x = random_tensor({2, 2, 2}, rng);
    const DenseTensor y = random_tensor({2, 2, 2}, rng);
    double dot = 0.0;
    for (std::size_t k = 0; k < 8; ++k) dot += x[k] * y[k];
    EXPECT_NEAR(inner(x, y), dot, 1e-14);
    EXPECT_NEAR(inner(x, x), frob_norm(x) * frob_norm(x), 1e-12);
    EXPECT_EQ(vec(x), std::vector<double>(x.data().begin(), x.data().end()));
    EXPECT_THROW(inner(x, DenseTensor({2, 4})), DimensionError);
}

TEST(Inner, SeparatesOverOuterProducts) {
    Rng rng(13);
    const Eigen::VectorXd a = random_unit(3, rng), b = random_unit(4, rng);
    const Eigen::VectorXd c = random_unit(3, rng), d = random_unit(4, rng);
    const std::vector<Eigen::VectorXd> ab{a, b}, cd{c, d};
    EXPECT_NEAR(inner(outer_product(ab), outer_product(cd)), a.dot(c) * b.dot(d), 1e-14);
}

TEST(Contract, AllButAndAllAgreeWithDenseOracle) {
    Rng rng(14);
    const DenseTensor x = random_tensor({3, 4, 2}, rng);
    std::vector<Eigen::VectorXd> v{random_unit(3, rng), random_unit(4, rng), random_unit(2, rng)};
    const Eigen::VectorXd z = contract_all_but(x, v, 1);
    for (std::size_t j = 0; j < 4; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t k = 0; k < 2; ++k)
                s += x.at({i, j, k}) * v[0](static_cast<Eigen::Index>(i)) * v[2](static_cast<Eigen::Index>(k));
        EXPECT_NEAR(z(static_cast<Eigen::Index>(j)), s, 1e-12);
    }
    EXPECT_NEAR(contract_all(x, v), inner(x, outer_product(v)), 1e-12);
    // The kept mode's vector is never read.
    v[1] = Eigen::VectorXd::Zero(7);
    EXPECT_EQ(contract_all_but(x, v, 1), z);
}

TEST(CpCompose, SingleSpike) {
    CpModel m;
    m.weights = {2.0};
    for (Eigen::Index d : {3, 2, 4}) m.factors.push_back(Eigen::VectorXd::Unit(d, 0));
    const DenseTensor x = cp_compose(m);
    EXPECT_EQ(x.at({0, 0, 0}), 2.0);
    EXPECT_EQ(frob_norm(x), 2.0);
}

TEST(CpCompose, OrthonormalBasesObeyParseval) {
    Rng rng(15);
    const CpModel m = testing_util::orthogonal_model({5, 6, 4}, {3.0, 2.0, 0.5}, rng);
    EXPECT_NEAR(frob_norm(cp_compose(m)), std::sqrt(9.0 + 4.0 + 0.25), 1e-12);
}

TEST(CpCompose, NonOrthogonalMatchesElementwiseLoop) {
    Rng rng(16);
    CpModel m;
    m.weights = {1.5, -0.7};
    for (Eigen::Index d : {3, 4, 2}) {
        Eigen::MatrixXd f = random_matrix(d, 2, rng);
        f.colwise().normalize();
        m.factors.push_back(f);
    }
    const DenseTensor x = cp_compose(m);
    for (std::size_t k = 0; k < x.size(); ++k) {
        const auto idx = multi_index(k, x.dims());
        double s = 0.0;
        for (Eigen::Index r = 0; r < 2; ++r) {
            double term = m.weights[static_cast<std::size_t>(r)];
            for (std::size_t mode = 0; mode < 3; ++mode) term *= m.factors[mode](static_cast<Eigen::Index>(idx[mode]), r);
            s += term;
        }
        EXPECT_NEAR(x[k], s, 1e-14);
    }
}

TEST(CpCompose, RankOneFactorizationOfUnfoldingIsIdempotent) {
    Rng rng(17);
    const CpModel m = testing_util::orthogonal_model({4, 3, 5}, {2.5}, rng);
    const DenseTensor x = cp_compose(m);
    // Rank-one factorization of mat_1: columns are multiples of a_1.
    const Eigen::MatrixXd u = unfold(x, 0).values;
    Eigen::Index jmax;
    u.colwise().norm().maxCoeff(&jmax);
    const Eigen::VectorXd a0 = u.col(jmax).normalized();
    const Eigen::VectorXd rest = u.transpose() * a0;
    const DenseTensor rest_t({3, 5}, std::vector<double>(rest.data(), rest.data() + rest.size()));
    const Eigen::MatrixXd r1 = unfold(rest_t, 0).values;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r1, Eigen::ComputeThinU | Eigen::ComputeThinV);
    CpModel back;
    back.weights = {svd.singularValues()(0)};
    back.factors = {a0, svd.matrixU().col(0), svd.matrixV().col(0)};
    const DenseTensor y = cp_compose(back);
    EXPECT_LT(frob_norm(y - x), 1e-12 * frob_norm(x));
}

TEST(CpCompose, RejectsInconsistentModels) {
    CpModel m;
    m.weights = {1.0, 2.0};
    m.factors = {Eigen::MatrixXd::Identity(3, 2), Eigen::MatrixXd::Identity(3, 1)};
    EXPECT_THROW(cp_compose(m), DimensionError);
}
