#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

#include "cplda/cp_refine.hpp"
#include "cplda/discriminant.hpp"
#include "cplda/error.hpp"
#include "cplda/io.hpp"
#include "helpers.hpp"

using namespace cplda;
using testing_util::orthogonal_model;
using testing_util::random_tensor;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("cplda_io_" + name + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST(Dten, ByteLayout) {
    const DenseTensor x({2, 1}, {1.0, -2.5});
    const std::string bytes = encode_dten(x);
    ASSERT_EQ(bytes.size(), 5u + 4u + 8u + 16u);
    EXPECT_EQ(bytes.substr(0, 5), "DTEN1");
    EXPECT_EQ(bytes.substr(5, 4), std::string("\x02\x00\x00\x00", 4));
    EXPECT_EQ(bytes.substr(9, 8), std::string("\x02\x00\x00\x00\x01\x00\x00\x00", 8));
    double v = 0;
    std::memcpy(&v, bytes.data() + 25, 8);
    EXPECT_EQ(v, -2.5);
}

TEST(Dten, RoundTripIsBitwise) {
    Rng rng(1);
    for (const auto& dims : std::vector<std::vector<std::size_t>>{{3}, {2, 5}, {4, 3, 2}, {2, 2, 2, 3}}) {
        const DenseTensor x = random_tensor(dims, rng);
        EXPECT_EQ(decode_dten(encode_dten(x)), x);
    }
    const fs::path dir = scratch("dten");
    const DenseTensor x = random_tensor({3, 4, 5}, rng);
    write_dten(dir / "sub" / "x.dten", x);
    EXPECT_EQ(read_dten(dir / "sub" / "x.dten"), x);
    fs::remove_all(dir);
}

TEST(Dten, RejectsMalformedInput) {
    const std::string good = encode_dten(DenseTensor({2, 2}, {1, 2, 3, 4}));
    std::string bad_magic = good;
    bad_magic[0] = 'X';
    EXPECT_THROW(decode_dten(bad_magic), IoError);
    EXPECT_THROW(decode_dten(good.substr(0, good.size() - 1)), IoError);
    EXPECT_THROW(decode_dten(good + "x"), IoError);
    EXPECT_THROW(decode_dten("DTEN1"), IoError);
    std::string zero_order = good.substr(0, 5) + std::string(4, '\0');
    EXPECT_THROW(decode_dten(zero_order), IoError);
    EXPECT_THROW(read_dten("/nonexistent/cplda/x.dten"), IoError);
}

TEST(JsonIo, CpModelRoundTrip) {
    Rng rng(2);
    const CpModel m = orthogonal_model({3, 4, 5}, {2.5, 1.25}, rng);
    const Json j = to_json(m);
    EXPECT_EQ(j.at("rank"), 2);
    EXPECT_EQ(j.at("dims"), Json({3, 4, 5}));
    const CpModel back = cp_model_from_json(Json::parse(j.dump()));
    EXPECT_EQ(back.weights, m.weights);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(back.factors[k], m.factors[k]);
    Json broken = j;
    broken["dims"] = Json({3, 4});
    EXPECT_ANY_THROW(cp_model_from_json(broken));
}

TEST(JsonIo, WarmStartRoundTrip) {
    Rng rng(3);
    WarmStart w;
    w.factors = orthogonal_model({3, 4}, {1, 1}, rng).factors;
    w.singular_values = Eigen::Vector2d(3.0, 1.5);
    w.split = {0};
    w.groups = {{{0}, InitBranch::cpca}, {{1}, InitBranch::randomized}};
    const WarmStart back = warm_start_from_json(Json::parse(to_json(w).dump()));
    EXPECT_EQ(back.factors[1], w.factors[1]);
    EXPECT_EQ(back.singular_values, w.singular_values);
    EXPECT_EQ(back.split, w.split);
    ASSERT_EQ(back.groups.size(), 2u);
    EXPECT_EQ(back.groups[1].branch, InitBranch::randomized);
    EXPECT_EQ(to_json(w).at("groups")[0].at("branch"), "cpca");
}

TEST(DiscriminantIo, RoundTrip) {
    Rng rng(4);
    std::vector<DenseTensor> c1, c2;
    for (int i = 0; i < 6; ++i) {
        c1.push_back(random_tensor({3, 3}, rng));
        c2.push_back(random_tensor({3, 3}, rng));
    }
    const DiscriminantEstimate est = sample_discriminant(c1, c2);
    const fs::path dir = scratch("disc");
    save_discriminant(dir, est);
    const DiscriminantEstimate back = load_discriminant(dir);
    EXPECT_EQ(back.b_hat, est.b_hat);
    EXPECT_EQ(back.mean1, est.mean1);
    EXPECT_EQ(back.mean2, est.mean2);
    EXPECT_EQ(back.c_sigma, est.c_sigma);
    EXPECT_EQ(back.ridge_used, est.ridge_used);
    EXPECT_EQ(back.n1, 6u);
    for (std::size_t m = 0; m < 2; ++m) EXPECT_EQ(back.precisions[m], est.precisions[m]);
    fs::remove_all(dir);
}

TEST(DatasetIo, RoundTripAndLabels) {
    Rng rng(5);
    Dataset d;
    for (int i = 0; i < 5; ++i) {
        d.samples.push_back(random_tensor({2, 3}, rng));
        d.labels.push_back(i % 2 ? 2 : 1);
    }
    const fs::path dir = scratch("data");
    save_dataset(dir, d);
    EXPECT_TRUE(fs::exists(dir / "x000000.dten"));
    const Dataset back = load_dataset(dir);
    EXPECT_EQ(back.labels, d.labels);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(back.samples[i], d.samples[i]);
    EXPECT_EQ(back.class_samples(2).size(), 2u);
    EXPECT_THROW(load_dataset(dir / "missing"), IoError);
    fs::remove_all(dir);
}

TEST(CsvIo, FitReportAndPredictions) {
    FitReport rep;
    rep.iterations_run = 2;
    rep.basis_changes = {0.5, 0.25};
    rep.min_singular_values = {0.9, 0.95};
    std::ostringstream a;
    write_fit_report_csv(a, rep);
    EXPECT_EQ(a.str(), "iteration,basis_change,min_singular_value\n1,0.5,0.90000000000000002\n2,0.25,0.94999999999999996\n");
    std::ostringstream b;
    write_predictions_csv(b, {-1.5, 2.0}, {1, 2});
    EXPECT_EQ(b.str().substr(0, 23), "index,statistic,label\n0");
}
