#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "cplda/bench.hpp"
#include "cplda/io.hpp"

namespace cplda {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitCompute = 1, kExitUsage = 2 };

/// Scenario fields read from a JSON config, starting from `base`.
Scenario scenario_from_json(const Json& j, Scenario base = {});
Json scenario_to_json(const Scenario& scn);

struct CvSettings {
    std::vector<std::size_t> ranks;
    std::size_t folds = 10;
    std::size_t holdout_per_class = 5;
    std::uint64_t seed = 0;
    InitConfig init;
    RefineOptions refine;
    std::optional<double> ridge;
};

struct CvResult {
    std::size_t chosen_rank = 0;
    std::vector<double> mean_error;          ///< per candidate rank
    std::vector<std::size_t> failed_folds;   ///< per candidate rank; a failed fold counts as all wrong
};

/// Leave-k-out rank selection with balanced held-out sets; ties go to the smaller rank.
CvResult cv_select_rank(const std::vector<DenseTensor>& class1, const std::vector<DenseTensor>& class2,
                        const CvSettings& settings);

/// Entry point of the `cplda` executable.
int run_cli(int argc, char** argv);

} // namespace cplda
