#include "cplda/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <iterator>
#include <sstream>

#include "cplda/error.hpp"

namespace cplda {

namespace {

constexpr char kMagic[] = "DTEN1";
constexpr std::size_t kMagicLen = 5;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_f64(std::string& out, double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint64_t get_le(const std::string& in, std::size_t pos, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + static_cast<std::size_t>(i)])) << (8 * i);
    return v;
}

std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json matrix_rows(const Eigen::MatrixXd& a) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_rows(const Json& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = n == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.at(0).size());
    Eigen::MatrixXd a(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Json& row = rows.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != p) throw IoError("json: ragged matrix");
        for (Eigen::Index j = 0; j < p; ++j) a(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
    }
    return a;
}

// bases[r][m] is the basis vector of component r in mode m.
std::vector<Eigen::MatrixXd> factors_from_bases(const Json& bases, const std::vector<std::size_t>& dims) {
    const std::size_t rank = bases.size();
    std::vector<Eigen::MatrixXd> factors;
    for (std::size_t m = 0; m < dims.size(); ++m)
        factors.emplace_back(static_cast<Eigen::Index>(dims[m]), static_cast<Eigen::Index>(rank));
    for (std::size_t r = 0; r < rank; ++r) {
        const Json& comp = bases.at(r);
        if (comp.size() != dims.size()) throw IoError("json: component " + std::to_string(r) + " has wrong order");
        for (std::size_t m = 0; m < dims.size(); ++m) {
            const Json& v = comp.at(m);
            if (v.size() != dims[m]) throw IoError("json: basis vector has wrong length");
            for (std::size_t i = 0; i < dims[m]; ++i)
                factors[m](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) = v.at(i).get<double>();
        }
    }
    return factors;
}

Json bases_json(const std::vector<Eigen::MatrixXd>& factors) {
    Json bases = Json::array();
    const Eigen::Index rank = factors.empty() ? 0 : factors.front().cols();
    for (Eigen::Index r = 0; r < rank; ++r) {
        Json comp = Json::array();
        for (const auto& f : factors) {
            Json v = Json::array();
            for (Eigen::Index i = 0; i < f.rows(); ++i) v.push_back(f(i, r));
            comp.push_back(std::move(v));
        }
        bases.push_back(std::move(comp));
    }
    return bases;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

std::string encode_dten(const DenseTensor& x) {
    std::string out(kMagic, kMagicLen);
    out.reserve(kMagicLen + 4 * (x.order() + 1) + 8 * x.size());
    put_u32(out, static_cast<std::uint32_t>(x.order()));
    for (std::size_t d : x.dims()) put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : x.data()) put_f64(out, v);
    return out;
}

DenseTensor decode_dten(const std::string& bytes) {
    if (bytes.size() < kMagicLen || bytes.compare(0, kMagicLen, kMagic) != 0)
        throw IoError("DTEN1: bad magic");
    std::size_t pos = kMagicLen;
    if (bytes.size() < pos + 4) throw IoError("DTEN1: truncated header");
    const auto order = static_cast<std::size_t>(get_le(bytes, pos, 4));
    pos += 4;
    if (order == 0) throw IoError("DTEN1: order must be at least 1");
    if (bytes.size() < pos + 4 * order) throw IoError("DTEN1: truncated dimensions");
    std::vector<std::size_t> dims(order);
    std::size_t count = 1;
    for (auto& d : dims) {
        d = static_cast<std::size_t>(get_le(bytes, pos, 4));
        pos += 4;
        if (d == 0) throw IoError("DTEN1: zero dimension");
        count *= d;
    }
    if (bytes.size() - pos != 8 * count)
        throw IoError("DTEN1: payload has " + std::to_string(bytes.size() - pos) + " bytes, expected " +
                      std::to_string(8 * count));
    std::vector<double> data(count);
    for (auto& v : data) {
        v = std::bit_cast<double>(get_le(bytes, pos, 8));
        pos += 8;
    }
    return DenseTensor(std::move(dims), std::move(data));
}

std::ofstream open_output(const fs::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void write_dten(const fs::path& path, const DenseTensor& x) {
    auto out = open_output(path);
    const std::string bytes = encode_dten(x);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

DenseTensor read_dten(const fs::path& path) {
    try {
        return decode_dten(read_file(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

Json to_json(const Eigen::MatrixXd& a) { return matrix_rows(a); }

Json to_json(const CpModel& model) {
    model.validate();
    Json j;
    j["rank"] = model.rank();
    j["dims"] = model.dims();
    j["weights"] = model.weights;
    j["bases"] = bases_json(model.factors);
    return j;
}

CpModel cp_model_from_json(const Json& j) {
    try {
        CpModel model;
        model.weights = j.at("weights").get<std::vector<double>>();
        const auto dims = j.at("dims").get<std::vector<std::size_t>>();
        const Json& bases = j.at("bases");
        if (bases.size() != model.weights.size() || j.at("rank").get<std::size_t>() != model.weights.size())
            throw IoError("cp model json: rank disagrees with weights or bases");
        model.factors = factors_from_bases(bases, dims);
        model.validate();
        return model;
    } catch (const Json::exception& e) {
        throw IoError(std::string("cp model json: ") + e.what());
    }
}

Json to_json(const WarmStart& warm) {
    Json j;
    j["bases"] = bases_json(warm.factors);
    std::vector<std::size_t> dims;
    for (const auto& f : warm.factors) dims.push_back(static_cast<std::size_t>(f.rows()));
    j["dims"] = dims;
    j["singular_values"] = std::vector<double>(warm.singular_values.begin(), warm.singular_values.end());
    j["split"] = warm.split;
    Json groups = Json::array();
    for (const auto& g : warm.groups)
        groups.push_back({{"indices", g.indices}, {"branch", g.branch == InitBranch::cpca ? "cpca" : "randomized"}});
    j["groups"] = std::move(groups);
    return j;
}

WarmStart warm_start_from_json(const Json& j) {
    try {
        WarmStart warm;
        const auto dims = j.at("dims").get<std::vector<std::size_t>>();
        warm.factors = factors_from_bases(j.at("bases"), dims);
        const auto sv = j.at("singular_values").get<std::vector<double>>();
        warm.singular_values = Eigen::Map<const Eigen::VectorXd>(sv.data(), static_cast<Eigen::Index>(sv.size()));
        warm.split = j.at("split").get<std::vector<std::size_t>>();
        for (const auto& g : j.at("groups")) {
            InitGroup group;
            group.indices = g.at("indices").get<std::vector<std::size_t>>();
            const auto branch = g.at("branch").get<std::string>();
            if (branch == "cpca")
                group.branch = InitBranch::cpca;
            else if (branch == "randomized")
                group.branch = InitBranch::randomized;
            else
                throw IoError("warm start json: unknown branch '" + branch + "'");
            warm.groups.push_back(std::move(group));
        }
        return warm;
    } catch (const Json::exception& e) {
        throw IoError(std::string("warm start json: ") + e.what());
    }
}

void write_json(const fs::path& path, const Json& j) {
    auto out = open_output(path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

Json read_json(const fs::path& path) {
    const std::string text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const Json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void save_discriminant(const fs::path& dir, const DiscriminantEstimate& est) {
    write_dten(dir / "b_hat.dten", est.b_hat);
    write_dten(dir / "mean1.dten", est.mean1);
    write_dten(dir / "mean2.dten", est.mean2);
    Json j;
    Json precisions = Json::array();
    for (const auto& p : est.precisions) precisions.push_back(matrix_rows(p));
    j["precisions"] = std::move(precisions);
    j["prior1"] = est.prior1;
    j["prior2"] = est.prior2;
    j["c_sigma"] = est.c_sigma;
    j["ridge_used"] = est.ridge_used;
    j["n1"] = est.n1;
    j["n2"] = est.n2;
    write_json(dir / "discriminant.json", j);
}

DiscriminantEstimate load_discriminant(const fs::path& dir) {
    DiscriminantEstimate est;
    est.b_hat = read_dten(dir / "b_hat.dten");
    est.mean1 = read_dten(dir / "mean1.dten");
    est.mean2 = read_dten(dir / "mean2.dten");
    require_same_shape(est.b_hat, est.mean1, "load_discriminant");
    require_same_shape(est.b_hat, est.mean2, "load_discriminant");
    const Json j = read_json(dir / "discriminant.json");
    try {
        for (const auto& p : j.at("precisions")) est.precisions.push_back(matrix_from_rows(p));
        est.prior1 = j.at("prior1").get<double>();
        est.prior2 = j.at("prior2").get<double>();
        est.c_sigma = j.at("c_sigma").get<double>();
        est.ridge_used = j.at("ridge_used").get<std::vector<double>>();
        est.n1 = j.at("n1").get<std::size_t>();
        est.n2 = j.at("n2").get<std::size_t>();
    } catch (const Json::exception& e) {
        throw IoError((dir / "discriminant.json").string() + ": " + e.what());
    }
    return est;
}

void write_fit_report_csv(std::ostream& os, const FitReport& report) {
    os << "iteration,basis_change,min_singular_value\n";
    for (std::size_t t = 0; t < report.basis_changes.size(); ++t)
        os << t + 1 << ',' << fmt_num(report.basis_changes[t]) << ',' << fmt_num(report.min_singular_values[t])
           << '\n';
}

void write_predictions_csv(std::ostream& os, const std::vector<double>& statistics, const std::vector<int>& labels) {
    if (statistics.size() != labels.size()) throw DimensionError("write_predictions_csv: length mismatch");
    os << "index,statistic,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) os << i << ',' << fmt_num(statistics[i]) << ',' << labels[i] << '\n';
}

std::vector<DenseTensor> Dataset::class_samples(int label) const {
    std::vector<DenseTensor> out;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (labels[i] == label) out.push_back(samples[i]);
    return out;
}

void save_dataset(const fs::path& dir, const Dataset& data) {
    if (data.samples.size() != data.labels.size()) throw DimensionError("save_dataset: length mismatch");
    auto index = open_output(dir / "labels.csv");
    index << "index,file,label\n";
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "x%06zu.dten", i);
        write_dten(dir / name, data.samples[i]);
        index << i << ',' << name << ',' << data.labels[i] << '\n';
    }
    if (!index) throw IoError("write failed: " + (dir / "labels.csv").string());
}

Dataset load_dataset(const fs::path& dir) {
    std::istringstream in(read_file(dir / "labels.csv"));
    std::string line;
    if (!std::getline(in, line) || line.rfind("index,file,label", 0) != 0)
        throw IoError((dir / "labels.csv").string() + ": missing header");
    Dataset data;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw IoError("labels.csv row " + std::to_string(row) + ": expected 3 fields");
        const std::string file = line.substr(c1 + 1, c2 - c1 - 1);
        const std::string label = line.substr(c2 + 1);
        if (label != "1" && label != "2")
            throw IoError("labels.csv row " + std::to_string(row) + ": label must be 1 or 2");
        data.samples.push_back(read_dten(dir / file));
        data.labels.push_back(label == "1" ? 1 : 2);
        if (data.samples.back().dims() != data.samples.front().dims())
            throw IoError("dataset: " + file + " has a different shape");
        ++row;
    }
    if (data.samples.empty()) throw IoError((dir / "labels.csv").string() + ": no samples");
    return data;
}

} // namespace cplda
