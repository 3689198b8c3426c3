#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cplda/cp_init.hpp"
#include "cplda/cp_model.hpp"
#include "cplda/cp_refine.hpp"
#include "cplda/discriminant.hpp"
#include "cplda/tensor.hpp"

namespace cplda {

namespace fs = std::filesystem;
using Json = nlohmann::json;

// DTEN1: "DTEN1", u32 order, u32 dims, f64 data in colex order, all little-endian.
std::string encode_dten(const DenseTensor& x);
DenseTensor decode_dten(const std::string& bytes);
void write_dten(const fs::path& path, const DenseTensor& x);
DenseTensor read_dten(const fs::path& path);

Json to_json(const Eigen::MatrixXd& factor_columns);
Json to_json(const CpModel& model);
CpModel cp_model_from_json(const Json& j);
Json to_json(const WarmStart& warm);
WarmStart warm_start_from_json(const Json& j);

void write_json(const fs::path& path, const Json& j);
Json read_json(const fs::path& path);

/// b_hat.dten, mean1.dten, mean2.dten and discriminant.json in `dir`.
void save_discriminant(const fs::path& dir, const DiscriminantEstimate& est);
DiscriminantEstimate load_discriminant(const fs::path& dir);

void write_fit_report_csv(std::ostream& os, const FitReport& report);
void write_predictions_csv(std::ostream& os, const std::vector<double>& statistics, const std::vector<int>& labels);

/// Labelled samples stored as one DTEN1 file each plus labels.csv.
struct Dataset {
    std::vector<DenseTensor> samples;
    std::vector<int> labels;

    std::vector<DenseTensor> class_samples(int label) const;
};

void save_dataset(const fs::path& dir, const Dataset& data);
Dataset load_dataset(const fs::path& dir);

/// Opens `path` for writing, creating parent directories; throws IoError.
std::ofstream open_output(const fs::path& path);

} // namespace cplda
