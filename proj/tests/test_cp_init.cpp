#include <gtest/gtest.h>

#include <cmath>

#include "cplda/cp_init.hpp"
#include "cplda/error.hpp"
#include "cplda/linalg.hpp"
#include "helpers.hpp"

using namespace cplda;
using testing_util::orthogonal_model;
using testing_util::random_unit;
using testing_util::sin_between;

namespace {

// Brute-force best split: every proper subset scored by min(d_S, d/d_S), first maximum in
// lexicographic order of the sorted subset.
std::vector<std::size_t> brute_split(const std::vector<std::size_t>& dims) {
    std::vector<std::vector<std::size_t>> subsets;
    const std::size_t order = dims.size();
    for (unsigned mask = 1; mask + 1 < (1u << order); ++mask) {
        std::vector<std::size_t> s;
        for (std::size_t m = 0; m < order; ++m)
            if (mask & (1u << m)) s.push_back(m);
        subsets.push_back(s);
    }
    std::sort(subsets.begin(), subsets.end());
    std::size_t total = 1;
    for (std::size_t d : dims) total *= d;
    std::vector<std::size_t> best;
    std::size_t best_score = 0;
    for (const auto& s : subsets) {
        std::size_t ds = 1;
        for (std::size_t m : s) ds *= dims[m];
        const std::size_t score = std::min(ds, total / ds);
        if (score > best_score) {
            best_score = score;
            best = s;
        }
    }
    return best;
}

double max_basis_error(const std::vector<Eigen::MatrixXd>& est, const CpModel& truth) {
    double e = 0.0;
    for (std::size_t m = 0; m < truth.order(); ++m)
        for (Eigen::Index r = 0; r < truth.factors[m].cols(); ++r)
            e = std::max(e, sin_between(est[m].col(r), truth.factors[m].col(r)));
    return e;
}

// Truth components matched to estimates by the best overlap; returns the max error.
double matched_basis_error(const std::vector<std::vector<Eigen::VectorXd>>& tuples, const CpModel& truth) {
    double worst = 0.0;
    for (const auto& t : tuples) {
        double best = 2.0;
        for (std::size_t r = 0; r < truth.rank(); ++r) {
            double e = 0.0;
            for (std::size_t m = 0; m < truth.order(); ++m) e = std::max(e, sin_between(t[m], truth.basis(r, m)));
            best = std::min(best, e);
        }
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace

TEST(ChooseSplit, DocumentedExamples) {
    EXPECT_EQ(choose_split(std::vector<std::size_t>{30, 30, 30}), (std::vector<std::size_t>{0}));
    EXPECT_EQ(choose_split(std::vector<std::size_t>{2, 8}), (std::vector<std::size_t>{0}));
    EXPECT_EQ(choose_split(std::vector<std::size_t>{4, 4}), (std::vector<std::size_t>{0}));
    EXPECT_EQ(choose_split(std::vector<std::size_t>{2, 3, 4, 5}), brute_split({2, 3, 4, 5}));
    EXPECT_EQ(choose_split(std::vector<std::size_t>{3, 4}, std::vector<std::size_t>{1}), (std::vector<std::size_t>{1}));
    EXPECT_THROW(choose_split(std::vector<std::size_t>{3, 4}, std::vector<std::size_t>{0, 1}), InvalidArgument);
    EXPECT_THROW(choose_split(std::vector<std::size_t>{3}), InvalidArgument);
}

TEST(ChooseSplit, AgreesWithBruteForce) {
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t order = 2 + rng.next_u64() % 4;
        std::vector<std::size_t> dims;
        for (std::size_t m = 0; m < order; ++m) dims.push_back(1 + rng.next_u64() % 9);
        EXPECT_EQ(choose_split(dims), brute_split(dims));
    }
}

TEST(EigengapGroups, DocumentedExamples) {
    auto g = eigengap_groups(Eigen::Vector3d(10, 5, 1), 0.1);
    ASSERT_EQ(g.size(), 3u);
    for (const auto& grp : g) EXPECT_TRUE(grp.separated);

    g = eigengap_groups(Eigen::Vector3d(5, 5, 5), 0.1);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g[0].indices, (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_FALSE(g[0].separated);

    g = eigengap_groups(Eigen::Vector4d(10, 5.02, 5.00, 1), 0.1);
    ASSERT_EQ(g.size(), 3u);
    EXPECT_EQ(g[0].indices, (std::vector<std::size_t>{0}));
    EXPECT_EQ(g[1].indices, (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(g[2].indices, (std::vector<std::size_t>{3}));
    EXPECT_FALSE(g[1].separated);
}

TEST(EigengapGroups, PartitionsIndicesContiguously) {
    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index r = 1 + Eigen::Index(rng.next_u64() % 6);
        Eigen::VectorXd lam(r);
        double v = 10.0;
        for (Eigen::Index i = 0; i < r; ++i) {
            lam(i) = v;
            v -= (rng.uniform() < 0.5 ? 0.01 : 1.0);
        }
        const auto groups = eigengap_groups(lam, 0.1);
        std::size_t next = 0;
        for (const auto& g : groups) {
            if (g.separated) EXPECT_EQ(g.indices.size(), 1u);
            for (std::size_t idx : g.indices) EXPECT_EQ(idx, next++);
        }
        EXPECT_EQ(next, std::size_t(r));
    }
}

TEST(CpcaExtract, ExactRankOneAndSingleMode) {
    Rng rng(3);
    const Eigen::VectorXd a = random_unit(4, rng), b = random_unit(5, rng);
    const std::vector<Eigen::VectorXd> ab{a, b};
    const Eigen::VectorXd u = outer_product(ab).as_vector();
    const auto got = cpca_extract(u, std::vector<std::size_t>{4, 5});
    ASSERT_EQ(got.size(), 2u);
    EXPECT_LT(sin_between(got[0], a), 1e-12);
    EXPECT_LT(sin_between(got[1], b), 1e-12);

    const auto single = cpca_extract(a * 3.0, std::vector<std::size_t>{4});
    ASSERT_EQ(single.size(), 1u);
    EXPECT_NEAR(single[0].norm(), 1.0, 1e-15);
    EXPECT_LT(sin_between(single[0], a), 1e-15);
    EXPECT_THROW(cpca_extract(Eigen::VectorXd::Zero(4), std::vector<std::size_t>{4}), InvalidArgument);
    EXPECT_THROW(cpca_extract(a, std::vector<std::size_t>{2, 3}), DimensionError);
}

TEST(CpcaExtract, SmallNoiseSmallError) {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd a = random_unit(5, rng), b = random_unit(6, rng);
        const std::vector<Eigen::VectorXd> ab{a, b};
        Eigen::VectorXd u = outer_product(ab).as_vector();
        for (Eigen::Index i = 0; i < u.size(); ++i) u(i) += 0.01 * rng.normal();
        const auto got = cpca_extract(u, std::vector<std::size_t>{5, 6});
        EXPECT_LT(sin_between(got[0], a), 0.05);
        EXPECT_LT(sin_between(got[1], b), 0.05);
    }
}

TEST(RandomizedProjection, RankOneExact) {
    Rng rng(5);
    const CpModel truth = orthogonal_model({5, 4, 6}, {2.0}, rng);
    const DenseTensor xi = cp_compose(truth);
    InitConfig cfg;
    cfg.projections = 3;
    Rng prng(9);
    const auto tuples = randomized_projection(xi, 1, cfg, prng);
    ASSERT_EQ(tuples.size(), 1u);
    EXPECT_LT(matched_basis_error(tuples, truth), 1e-10);
}

TEST(RandomizedProjection, RankTwoOrthogonalEqualWeights) {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const CpModel truth = orthogonal_model({6, 5, 7}, {3.0, 3.0}, rng);
        InitConfig cfg;
        cfg.projections = 50;
        cfg.nu = 0.5;
        Rng prng(100 + trial);
        const auto tuples = randomized_projection(cp_compose(truth), 2, cfg, prng);
        ASSERT_EQ(tuples.size(), 2u);
        EXPECT_LT(matched_basis_error(tuples, truth), 1e-6);
        // Distinct components: the first-mode vectors are not parallel.
        EXPECT_LT(std::abs(tuples[0][0].dot(tuples[1][0])), 0.5);
    }
}

TEST(RandomizedProjection, PoolExhaustionIsReported) {
    Rng rng(7);
    const CpModel truth = orthogonal_model({6, 5, 7}, {3.0, 3.0}, rng);
    const DenseTensor xi = cp_compose(truth);
    InitConfig cfg;
    cfg.projections = 2;
    bool exhausted = false;
    for (std::uint64_t seed = 0; seed < 200 && !exhausted; ++seed) {
        Rng prng(seed);
        try {
            randomized_projection(xi, 2, cfg, prng);
        } catch (const PoolExhaustedError&) {
            exhausted = true;
        }
    }
    EXPECT_TRUE(exhausted) << "some seed must send both projections to the same component";
    cfg.projections = 1;
    Rng prng(0);
    EXPECT_THROW(randomized_projection(xi, 2, cfg, prng), InvalidArgument);
}

TEST(ProjectionMode, SkipsDegenerateFirstMode) {
    EXPECT_EQ(projection_mode(std::vector<std::size_t>{3, 5, 4}), 0u);
    EXPECT_EQ(projection_mode(std::vector<std::size_t>{1, 5, 7}), 2u);
    EXPECT_EQ(projection_mode(std::vector<std::size_t>{1, 5, 5}), 1u);
}

TEST(Rcpca, NoiselessDistinctWeightsUseCpcaOnly) {
    Rng rng(8);
    const CpModel truth = orthogonal_model({7, 6, 8}, {5, 4, 3, 2, 1}, rng);
    InitConfig cfg;
    cfg.rank = 5;
    Rng prng(1);
    const WarmStart ws = rcpca(cp_compose(truth), cfg, prng);
    for (const auto& g : ws.groups) EXPECT_EQ(g.branch, InitBranch::cpca);
    EXPECT_EQ(ws.groups.size(), 5u);
    EXPECT_LT(max_basis_error(ws.factors, truth), 1e-8);
    for (Eigen::Index r = 0; r < 5; ++r) EXPECT_NEAR(ws.singular_values(r), 5.0 - double(r), 1e-10);
    for (const auto& f : ws.factors)
        for (Eigen::Index r = 0; r < f.cols(); ++r) EXPECT_NEAR(f.col(r).norm(), 1.0, 1e-10);
}

TEST(Rcpca, NoiselessEqualWeightsUseRandomizedBranch) {
    Rng rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        const CpModel truth = orthogonal_model({7, 6, 8}, {3, 3, 3}, rng);
        InitConfig cfg;
        cfg.rank = 3;
        Rng prng(50 + trial);
        const WarmStart ws = rcpca(cp_compose(truth), cfg, prng);
        ASSERT_EQ(ws.groups.size(), 1u);
        EXPECT_EQ(ws.groups[0].branch, InitBranch::randomized);
        std::vector<std::vector<Eigen::VectorXd>> tuples(3);
        for (Eigen::Index r = 0; r < 3; ++r)
            for (const auto& f : ws.factors) tuples[std::size_t(r)].push_back(f.col(r));
        EXPECT_LT(matched_basis_error(tuples, truth), 1e-6);
    }
}

TEST(Rcpca, DeterministicAndSignInvariantQuality) {
    Rng rng(10);
    const CpModel truth = orthogonal_model({5, 5, 5}, {4, 2.5}, rng);
    DenseTensor b = cp_compose(truth);
    for (auto& v : b.data()) v += 0.01 * rng.normal();
    InitConfig cfg;
    cfg.rank = 2;
    Rng p1(3), p2(3);
    const WarmStart a = rcpca(b, cfg, p1);
    const WarmStart c = rcpca(b, cfg, p2);
    for (std::size_t m = 0; m < 3; ++m) EXPECT_EQ(a.factors[m], c.factors[m]);
    // Reflecting the input flips no reported error.
    Rng p3(3);
    const WarmStart neg = rcpca(b * -1.0, cfg, p3);
    EXPECT_NEAR(max_basis_error(neg.factors, truth), max_basis_error(a.factors, truth), 1e-12);
}

TEST(Rcpca, RejectsTooLargeRank) {
    Rng rng(11);
    InitConfig cfg;
    cfg.rank = 4;
    EXPECT_THROW(rcpca(DenseTensor({3, 3, 3}), cfg, rng), InvalidArgument);
    cfg.rank = 1;
    cfg.c0 = 1.5;
    EXPECT_THROW(rcpca(DenseTensor({3, 3, 3}), cfg, rng), InvalidArgument);
}
