#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cplda/bench.hpp"
#include "cplda/classify.hpp"
#include "cplda/cp_init.hpp"
#include "cplda/cp_refine.hpp"
#include "cplda/discriminant.hpp"
#include "cplda/error.hpp"
#include "cplda/io.hpp"
#include "cplda/linalg.hpp"
#include "cplda/tensor.hpp"
#include "cplda/tnorm.hpp"

namespace py = pybind11;
using namespace cplda;

namespace {

using FArray = py::array_t<double, py::array::f_style | py::array::forcecast>;

// numpy arrays are taken in Fortran order so the buffer is vec(X).
DenseTensor to_tensor(const FArray& a) {
    if (a.ndim() == 0) throw DimensionError("expected an array with at least one axis");
    std::vector<std::size_t> dims(a.shape(), a.shape() + a.ndim());
    return DenseTensor(dims, std::vector<double>(a.data(), a.data() + a.size()));
}

FArray to_array(const DenseTensor& x) {
    std::vector<py::ssize_t> shape(x.dims().begin(), x.dims().end());
    FArray out(shape);
    std::copy(x.data().begin(), x.data().end(), out.mutable_data());
    return out;
}

std::vector<DenseTensor> to_tensors(const std::vector<FArray>& xs) {
    std::vector<DenseTensor> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(to_tensor(x));
    return out;
}

py::dict fit_cp(const FArray& b_hat, std::size_t rank, std::uint64_t seed, double tolerance,
                std::size_t max_iterations) {
    const DenseTensor b = to_tensor(b_hat);
    InitConfig init;
    init.rank = rank;
    init.seed = seed;
    Rng rng(seed);
    const WarmStart warm = rcpca(b, init, rng);
    const FitReport fit = distip_cp(b, warm.factors, {tolerance, max_iterations});
    py::dict out;
    out["weights"] = fit.model.weights;
    out["factors"] = fit.model.factors;
    out["warm_factors"] = warm.factors;
    out["iterations"] = fit.iterations_run;
    out["converged"] = fit.converged;
    out["basis_changes"] = fit.basis_changes;
    return out;
}

CpModel make_model(const std::vector<double>& weights, const std::vector<Eigen::MatrixXd>& factors) {
    CpModel m{weights, factors};
    m.validate();
    return m;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "CP low-rank discriminant analysis for tensor-valued data";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def("unfold", [](const FArray& x, std::size_t mode) { return unfold(to_tensor(x), mode).values; },
          py::arg("x"), py::arg("mode"));
    m.def("mode_product",
          [](const FArray& x, std::size_t mode, const Eigen::MatrixXd& a) {
              return to_array(mode_product(to_tensor(x), mode, a));
          },
          py::arg("x"), py::arg("mode"), py::arg("a"));
    m.def("thin_svd",
          [](const Eigen::MatrixXd& a) {
              SvdResult r = thin_svd(a);
              return py::make_tuple(r.left, r.singular_values, r.right);
          },
          py::arg("a"), "Returns (U, s, V) with a = U diag(s) Vᵀ.");
    m.def("cp_compose",
          [](const std::vector<double>& w, const std::vector<Eigen::MatrixXd>& f) {
              return to_array(cp_compose(make_model(w, f)));
          },
          py::arg("weights"), py::arg("factors"));

    m.def("sample_discriminant",
          [](const std::vector<FArray>& class1, const std::vector<FArray>& class2) {
              const auto c1 = to_tensors(class1);
              const auto c2 = to_tensors(class2);
              const DiscriminantEstimate est = sample_discriminant(c1, c2);
              py::dict out;
              out["b_hat"] = to_array(est.b_hat);
              out["mean1"] = to_array(est.mean1);
              out["mean2"] = to_array(est.mean2);
              out["precisions"] = est.precisions;
              out["prior1"] = est.prior1;
              out["prior2"] = est.prior2;
              return out;
          },
          py::arg("class1"), py::arg("class2"));
    m.def("fit_cp", &fit_cp, py::arg("b_hat"), py::arg("rank"), py::arg("seed") = 0, py::arg("tolerance") = 1e-6,
          py::arg("max_iterations") = 50,
          "rc-PCA warm start followed by projection refinement; returns a dict.");
    m.def("predict",
          [](const FArray& discriminant, const FArray& mean1, const FArray& mean2, double prior1, double prior2,
             const std::vector<FArray>& samples) {
              const CpLdaRule rule =
                  CpLdaRule::make(to_tensor(discriminant), to_tensor(mean1), to_tensor(mean2), prior1, prior2);
              std::vector<int> labels;
              for (const auto& z : samples) labels.push_back(rule.predict(to_tensor(z)));
              return labels;
          },
          py::arg("discriminant"), py::arg("mean1"), py::arg("mean2"), py::arg("prior1"), py::arg("prior2"),
          py::arg("samples"));

    m.def("sample_tensor_normal",
          [](const FArray& mean, const std::vector<Eigen::MatrixXd>& covs, std::size_t n, std::uint64_t seed) {
              Rng rng(seed);
              const TensorNormalSampler sampler(to_tensor(mean), covs);
              py::list out;
              for (std::size_t i = 0; i < n; ++i) out.append(to_array(sampler.draw(rng)));
              return out;
          },
          py::arg("mean"), py::arg("covs"), py::arg("n"), py::arg("seed"));
    m.def("bayes_error", &bayes_error, py::arg("delta"), py::arg("prior1") = 0.5, py::arg("prior2") = 0.5);

    m.def("write_dten", [](const std::filesystem::path& p, const FArray& x) { write_dten(p, to_tensor(x)); },
          py::arg("path"), py::arg("x"));
    m.def("read_dten", [](const std::filesystem::path& p) { return to_array(read_dten(p)); }, py::arg("path"));

    m.def("preset_names", &preset_names);
    m.def("run_preset",
          [](const std::string& name, std::size_t replications, std::uint64_t seed) {
              Scenario scn = preset(name);
              scn.replications = replications;
              scn.seed = seed;
              ScenarioSummary s;
              {
                  py::gil_scoped_release release;
                  s = run_scenario(scn, {0, false});
              }
              py::dict out;
              for (const auto& metric : s.metrics) out[py::str(metric.name)] = py::make_tuple(metric.mean, metric.std);
              return out;
          },
          py::arg("name"), py::arg("replications") = 1, py::arg("seed") = 20240601,
          "Mean and std of every metric for a simulation preset.");
}
