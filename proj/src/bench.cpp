#include "cplda/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <thread>

#include "cplda/classify.hpp"
#include "cplda/discriminant.hpp"
#include "cplda/error.hpp"
#include "cplda/linalg.hpp"

namespace cplda {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

const char* const kMetricNames[] = {"sample_rel_error", "cp_rel_error",   "cp_basis_error",
                                    "sample_misclass",  "cp_misclass",    "runtime_seconds"};

std::vector<double> metric_values(const ReplicationResult& r) {
    return {r.sample_rel_error,          r.cp_rel_error,        r.basis_error,
            r.sample_misclassification, r.cp_misclassification, r.runtime_seconds};
}

} // namespace

std::string_view to_string(BasisKind k) { return k == BasisKind::orthogonal ? "orthogonal" : "non_orthogonal"; }
std::string_view to_string(CovKind k) { return k == CovKind::identity ? "identity" : "general"; }
std::string_view to_string(WeightSchedule k) { return k == WeightSchedule::equal ? "equal" : "geometric"; }
std::string_view to_string(ThetaRule k) { return k == ThetaRule::per_component ? "per_component" : "fixed_rank"; }

BasisKind parse_basis_kind(std::string_view s) {
    if (s == "orthogonal" || s == "orth") return BasisKind::orthogonal;
    if (s == "non_orthogonal" || s == "nonorth") return BasisKind::non_orthogonal;
    throw InvalidArgument("unknown basis kind '" + std::string(s) + "'");
}

CovKind parse_cov_kind(std::string_view s) {
    if (s == "identity" || s == "id") return CovKind::identity;
    if (s == "general" || s == "gen") return CovKind::general;
    throw InvalidArgument("unknown covariance kind '" + std::string(s) + "'");
}

WeightSchedule parse_weight_schedule(std::string_view s) {
    if (s == "equal") return WeightSchedule::equal;
    if (s == "geometric" || s == "unequal") return WeightSchedule::geometric;
    throw InvalidArgument("unknown weight schedule '" + std::string(s) + "'");
}

ThetaRule parse_theta_rule(std::string_view s) {
    if (s == "per_component") return ThetaRule::per_component;
    if (s == "fixed_rank") return ThetaRule::fixed_rank;
    throw InvalidArgument("unknown theta rule '" + std::string(s) + "'");
}

void Scenario::validate() const {
    if (dims.size() < 2) throw InvalidArgument("scenario: tensor order must be at least 2");
    for (std::size_t d : dims)
        if (d < rank) throw InvalidArgument("scenario: rank exceeds a mode dimension");
    if (rank < 1) throw InvalidArgument("scenario: rank must be at least 1");
    if (n1 < 2 || n2 < 2) throw InvalidArgument("scenario: each class needs at least 2 training samples");
    if (!(w_max > 0.0)) throw InvalidArgument("scenario: w_max must be positive");
    if (schedule == WeightSchedule::geometric && !(ratio >= 1.0))
        throw InvalidArgument("scenario: geometric ratio must be at least 1");
    if (basis == BasisKind::non_orthogonal && !(delta > 0.0 && delta < 1.0))
        throw InvalidArgument("scenario: delta must lie in (0, 1)");
    if (replications < 1) throw InvalidArgument("scenario: need at least one replication");
}

std::vector<double> Scenario::weights() const {
    std::vector<double> w(rank, w_max);
    if (schedule == WeightSchedule::geometric)
        for (std::size_t r = 1; r < rank; ++r) w[r] = w[r - 1] / ratio;
    return w;
}

std::vector<Eigen::MatrixXd> make_bases(const std::vector<std::size_t>& dims, std::size_t rank, BasisKind kind,
                                        double delta, Rng& rng, ThetaRule rule) {
    const std::size_t order = dims.size();
    const auto rk = static_cast<Eigen::Index>(rank);
    std::vector<Eigen::MatrixXd> out;
    for (std::size_t m = 0; m < order; ++m) {
        if (dims[m] < rank)
            throw InvalidArgument("make_bases: rank " + std::to_string(rank) + " exceeds dimension " +
                                  std::to_string(dims[m]) + " of mode " + std::to_string(m));
        const auto d = static_cast<Eigen::Index>(dims[m]);
        Eigen::MatrixXd raw(d, rk);
        for (Eigen::Index j = 0; j < rk; ++j)
            for (Eigen::Index i = 0; i < d; ++i) raw(i, j) = rng.uniform();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, rk);
        out.push_back(std::move(q));
    }
    if (kind == BasisKind::orthogonal) return out;

    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("make_bases: delta must lie in (0, 1)");
    const double order_d = static_cast<double>(order);
    for (std::size_t m = 0; m < order; ++m) {
        const Eigen::MatrixXd a = out[m];
        for (std::size_t r = 1; r < rank; ++r) {
            const double denom = rule == ThetaRule::per_component ? static_cast<double>(r)
                                                                   : static_cast<double>(rank - 1);
            const double theta = delta / denom;
            const double eta = std::sqrt(std::pow(theta, -2.0 / order_d) - 1.0);
            Eigen::VectorXd v = a.col(0) + eta * a.col(static_cast<Eigen::Index>(r));
            out[m].col(static_cast<Eigen::Index>(r)) = v / v.norm();
        }
    }
    return out;
}

Eigen::MatrixXd general_covariance(std::size_t d) {
    const auto n = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd s = Eigen::MatrixXd::Constant(n, n, 2.0 / static_cast<double>(d));
    s.diagonal().setOnes();
    return s;
}

ScenarioTruth make_scenario_params(const Scenario& scn, Rng& rng) {
    scn.validate();
    ScenarioTruth truth;
    truth.model.weights = scn.weights();
    truth.model.factors = make_bases(scn.dims, scn.rank, scn.basis, scn.delta, rng, scn.theta_rule);
    truth.b = cp_compose(truth.model);

    auto& p = truth.params;
    p.mean1 = DenseTensor(scn.dims);
    p.mean2 = truth.b;
    for (std::size_t m = 0; m < scn.dims.size(); ++m) {
        const auto d = static_cast<Eigen::Index>(scn.dims[m]);
        if (scn.cov == CovKind::identity) {
            p.covs.push_back(Eigen::MatrixXd::Identity(d, d));
        } else {
            p.covs.push_back(general_covariance(scn.dims[m]));
            p.mean2 = mode_product(p.mean2, m, p.covs.back());
        }
    }
    p.prior1 = 0.5;
    p.prior2 = 0.5;
    p.validate();
    return truth;
}

ReplicationResult run_replication(const Scenario& scn, std::size_t index, bool record_timing) {
    ReplicationResult res;
    const auto start = Clock::now();
    try {
        Rng rng = Rng::substream(scn.seed, index);
        const ScenarioTruth truth = make_scenario_params(scn, rng);
        const TensorNormalSampler class1(truth.params.mean1, truth.params.covs);
        const TensorNormalSampler class2(truth.params.mean2, truth.params.covs);
        const std::vector<DenseTensor> train1 = class1.draw(scn.n1, rng);
        const std::vector<DenseTensor> train2 = class2.draw(scn.n2, rng);

        const DiscriminantEstimate est = sample_discriminant(train1, train2);
        InitConfig init = scn.init;
        init.rank = scn.rank;
        init.seed = rng.next_u64();
        Rng init_rng(init.seed);
        const WarmStart warm = rcpca(est.b_hat, init, init_rng);
        const FitReport fit = distip_cp(est.b_hat, warm.factors, scn.refine);
        const DenseTensor b_cp = cp_compose(fit.model);

        res.sample_rel_error = rel_tensor_error(est.b_hat, truth.b);
        res.cp_rel_error = rel_tensor_error(b_cp, truth.b);
        res.basis_error = basis_error(fit.model, truth.model);
        res.iterations = fit.iterations_run;

        if (scn.n_test > 0) {
            const CpLdaRule sample_rule = CpLdaRule::make(est.b_hat, est.mean1, est.mean2, est.prior1, est.prior2);
            const CpLdaRule cp_rule = CpLdaRule::make(b_cp, est.mean1, est.mean2, est.prior1, est.prior2);
            // Test points are streamed, never stored.
            std::size_t wrong_sample = 0;
            std::size_t wrong_cp = 0;
            for (int label : {1, 2}) {
                const TensorNormalSampler& sampler = label == 1 ? class1 : class2;
                for (std::size_t i = 0; i < scn.n_test; ++i) {
                    const DenseTensor z = sampler.draw(rng);
                    wrong_sample += sample_rule.predict(z) != label ? 1 : 0;
                    wrong_cp += cp_rule.predict(z) != label ? 1 : 0;
                }
            }
            const double total = 2.0 * static_cast<double>(scn.n_test);
            res.sample_misclassification = static_cast<double>(wrong_sample) / total;
            res.cp_misclassification = static_cast<double>(wrong_cp) / total;
        }
        res.ok = true;
    } catch (const std::exception& e) {
        res.ok = false;
        res.error = e.what();
    }
    res.runtime_seconds = record_timing ? seconds_since(start) : 0.0;
    return res;
}

const MetricSummary& ScenarioSummary::metric(std::string_view name) const {
    for (const auto& m : metrics)
        if (m.name == name) return m;
    throw InvalidArgument("unknown metric '" + std::string(name) + "'");
}

double sample_std(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::size_t default_thread_count() {
    if (const char* env = std::getenv("CPLDA_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

ScenarioSummary run_scenario(const Scenario& scn, const BenchOptions& options) {
    scn.validate();
    const auto start = Clock::now();
    ScenarioSummary summary;
    summary.scenario = scn;
    summary.replications.resize(scn.replications);

    const std::size_t threads =
        std::min(options.threads > 0 ? options.threads : default_thread_count(), scn.replications);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < scn.replications; i = next++)
            summary.replications[i] = run_replication(scn, i, options.record_timing);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    for (const auto& r : summary.replications) (r.ok ? summary.used : summary.failed) += 1;
    if (summary.failed * 10 >= scn.replications && summary.failed > 0) {
        std::string first_error;
        for (const auto& r : summary.replications)
            if (!r.ok) {
                first_error = r.error;
                break;
            }
        throw Error("scenario " + scn.id + " aborted: " + std::to_string(summary.failed) + " of " +
                    std::to_string(scn.replications) + " replications failed (first: " + first_error + ")");
    }

    constexpr std::size_t kMetrics = std::size(kMetricNames);
    std::vector<std::vector<double>> columns(kMetrics);
    for (const auto& r : summary.replications) {
        if (!r.ok) continue;
        const auto vals = metric_values(r);
        for (std::size_t k = 0; k < kMetrics; ++k) columns[k].push_back(vals[k]);
    }
    for (std::size_t k = 0; k < kMetrics; ++k) {
        double mean = 0.0;
        for (double v : columns[k]) mean += v;
        mean /= static_cast<double>(columns[k].size());
        summary.metrics.push_back({kMetricNames[k], mean, sample_std(columns[k])});
    }
    summary.wall_seconds = options.record_timing ? seconds_since(start) : 0.0;
    return summary;
}

void write_bench_csv_header(std::ostream& os) {
    os << "scenario_id,basis_kind,cov_kind,weight_schedule,w_max,metric,mean,std,replications,seed,wall_seconds\n";
}

void write_bench_csv_rows(std::ostream& os, const ScenarioSummary& s) {
    const Scenario& scn = s.scenario;
    for (const auto& m : s.metrics)
        os << scn.id << ',' << to_string(scn.basis) << ',' << to_string(scn.cov) << ',' << to_string(scn.schedule)
           << ',' << fmt_num(scn.w_max) << ',' << m.name << ',' << fmt_num(m.mean) << ',' << fmt_num(m.std) << ','
           << s.used << ',' << scn.seed << ',' << fmt_num(s.wall_seconds) << '\n';
}

namespace {

struct WeightToken {
    const char* token;
    WeightSchedule schedule;
    double w_max;
};

constexpr WeightToken kWeightTokens[] = {
    {"w1.5", WeightSchedule::equal, 1.5},      {"w2.5", WeightSchedule::equal, 2.5},
    {"w3.5", WeightSchedule::equal, 3.5},      {"w5", WeightSchedule::equal, 5.0},
    {"wmax3", WeightSchedule::geometric, 3.0}, {"wmax4", WeightSchedule::geometric, 4.0},
    {"wmax6", WeightSchedule::geometric, 6.0},
};

std::vector<std::string> split_dash(std::string_view s) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = s.find('-', pos);
        parts.emplace_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return parts;
}

} // namespace

Scenario preset(std::string_view name) {
    const auto parts = split_dash(name);
    const auto fail = [&] { return InvalidArgument("unknown preset '" + std::string(name) + "'"); };
    if (parts.size() != 4 || parts[0].size() != 2 || parts[0][0] != 't') throw fail();
    const char table = parts[0][1];
    if (table < '1' || table > '4') throw fail();
    Scenario scn;
    scn.id = std::string(name);
    if (parts[1] == "orth")
        scn.basis = BasisKind::orthogonal;
    else if (parts[1] == "nonorth")
        scn.basis = BasisKind::non_orthogonal;
    else
        throw fail();
    const bool general_table = table == '2' || table == '4';
    if (parts[2] != (general_table ? "gen" : "id")) throw fail();
    scn.cov = general_table ? CovKind::general : CovKind::identity;
    bool found = false;
    for (const auto& w : kWeightTokens) {
        if (parts[3] != w.token) continue;
        if (general_table && std::string_view(w.token) == "w1.5") throw fail();
        scn.schedule = w.schedule;
        scn.w_max = w.w_max;
        found = true;
    }
    if (!found) throw fail();
    return scn;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (char table : {'1', '2', '3', '4'}) {
        const bool general_table = table == '2' || table == '4';
        for (const char* basis : {"orth", "nonorth"})
            for (const auto& w : kWeightTokens) {
                if (general_table && std::string_view(w.token) == "w1.5") continue;
                names.push_back(std::string("t") + table + "-" + basis + "-" + (general_table ? "gen" : "id") + "-" +
                                w.token);
            }
    }
    return names;
}

} // namespace cplda
