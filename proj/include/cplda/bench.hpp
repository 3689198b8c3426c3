#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cplda/cp_init.hpp"
#include "cplda/cp_model.hpp"
#include "cplda/cp_refine.hpp"
#include "cplda/rng.hpp"
#include "cplda/tnorm.hpp"

namespace cplda {

enum class BasisKind { orthogonal, non_orthogonal };
enum class CovKind { identity, general };
enum class WeightSchedule { equal, geometric };
/// ϑ in the non-orthogonal construction: δ/(r-1) per component, or δ/(R-1) for all.
enum class ThetaRule { per_component, fixed_rank };

std::string_view to_string(BasisKind k);
std::string_view to_string(CovKind k);
std::string_view to_string(WeightSchedule k);
std::string_view to_string(ThetaRule k);
BasisKind parse_basis_kind(std::string_view s);
CovKind parse_cov_kind(std::string_view s);
WeightSchedule parse_weight_schedule(std::string_view s);
ThetaRule parse_theta_rule(std::string_view s);

/// One simulation configuration.
struct Scenario {
    std::string id = "custom";
    std::vector<std::size_t> dims{30, 30, 30};
    std::size_t rank = 5;
    std::size_t n1 = 200;
    std::size_t n2 = 200;
    std::size_t n_test = 500; ///< per class
    WeightSchedule schedule = WeightSchedule::equal;
    double w_max = 5.0;
    double ratio = 1.25; ///< w_r / w_{r+1} for the geometric schedule
    BasisKind basis = BasisKind::orthogonal;
    double delta = 0.1;
    ThetaRule theta_rule = ThetaRule::per_component;
    CovKind cov = CovKind::identity;
    std::size_t replications = 10;
    std::uint64_t seed = 20240601;
    InitConfig init;       ///< rank and seed are taken from the scenario
    RefineOptions refine;

    void validate() const;
    std::vector<double> weights() const;
};

/// Per-mode basis matrices (d_m x R, unit columns).
std::vector<Eigen::MatrixXd> make_bases(const std::vector<std::size_t>& dims, std::size_t rank, BasisKind kind,
                                        double delta, Rng& rng, ThetaRule rule = ThetaRule::per_component);

/// Unit diagonal, constant off-diagonal 2/d.
Eigen::MatrixXd general_covariance(std::size_t d);

struct ScenarioTruth {
    CpModel model;
    DenseTensor b;
    TgmmParams params;
};

/// Truth CP model and the TGMM it induces: M1 = 0, M2 = B ×_m Σ_m, equal priors.
ScenarioTruth make_scenario_params(const Scenario& scn, Rng& rng);

struct ReplicationResult {
    double sample_rel_error = 0.0;
    double cp_rel_error = 0.0;
    double basis_error = 0.0;
    double sample_misclassification = 0.0;
    double cp_misclassification = 0.0;
    double runtime_seconds = 0.0;
    std::size_t iterations = 0;
    bool ok = false;
    std::string error;
};

/// Runs replication `index` with its own random stream.
ReplicationResult run_replication(const Scenario& scn, std::size_t index, bool record_timing = true);

struct MetricSummary {
    std::string name;
    double mean = 0.0;
    double std = 0.0;
};

struct ScenarioSummary {
    Scenario scenario;
    std::vector<ReplicationResult> replications;
    std::vector<MetricSummary> metrics;
    std::size_t used = 0;
    std::size_t failed = 0;
    double wall_seconds = 0.0;

    const MetricSummary& metric(std::string_view name) const;
};

struct BenchOptions {
    std::size_t threads = 0;    ///< 0 reads CPLDA_THREADS, else hardware concurrency
    bool record_timing = true;  ///< false writes 0 for all timings, making CSVs bit-reproducible
};

/// Sample standard deviation (divisor n-1); 0 for fewer than two values.
double sample_std(const std::vector<double>& values);

/// Runs all replications and aggregates mean and std per metric. Failed
/// replications are dropped when fewer than 10% fail; otherwise throws.
ScenarioSummary run_scenario(const Scenario& scn, const BenchOptions& options = {});

void write_bench_csv_header(std::ostream& os);
void write_bench_csv_rows(std::ostream& os, const ScenarioSummary& summary);

/// Simulation presets named t<table>-<orth|nonorth>-<id|gen>-<w1.5|w2.5|w3.5|w5|wmax3|wmax4|wmax6>.
Scenario preset(std::string_view name);
std::vector<std::string> preset_names();

/// Worker count from CPLDA_THREADS, defaulting to the hardware concurrency.
std::size_t default_thread_count();

} // namespace cplda
