#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "chaoslab/fbm.hpp"
#include "chaoslab/limit_laws.hpp"
#include "chaoslab/parallel.hpp"
#include "chaoslab/suites.hpp"
#include "chaoslab/variations.hpp"

namespace py = pybind11;
using namespace chaoslab;

namespace {

py::array_t<double> to_array(const std::vector<double>& v, std::size_t rows = 0, std::size_t cols = 0) {
  if (rows == 0) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
  }
  py::array_t<double> out({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Normalization parse_normalization(const std::string& s) {
  if (s == "monic") return Normalization::monic;
  if (s == "scaled") return Normalization::scaled;
  throw std::invalid_argument("normalization must be 'monic' or 'scaled'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Weighted Hermite variations of fractional Brownian motion";

  m.def("rho", &rho, py::arg("hurst"), py::arg("lag"), "Correlation of unit-spaced fBm increments.");
  m.def("regime", [](int q, double h) { return to_string(classify_regime(q, h).regime); }, py::arg("q"),
        py::arg("hurst"));
  m.def(
      "sigma_sq", [](double h, int q) { return sigma_hq(h, q).sigma_sq; }, py::arg("hurst"), py::arg("q"));
  m.def("correction_constant",
        [](int q, const std::string& norm) { return correction_constant(q, parse_normalization(norm)); },
        py::arg("q"), py::arg("normalization") = "monic");
  m.def("weight", [](const std::string& spec, py::array_t<double, py::array::c_style | py::array::forcecast> x,
                     int order) {
    const WeightFunction f = WeightFunction::parse(spec);
    py::array_t<double> out(x.size());
    const double* in = x.data();
    double* o = out.mutable_data();
    for (py::ssize_t i = 0; i < x.size(); ++i) o[i] = f.derivative(order, in[i]);
    return out;
  }, py::arg("spec"), py::arg("x"), py::arg("order") = 0);

  m.def("sample_paths", [](double h, std::size_t n, std::size_t paths, std::uint64_t seed,
                           std::optional<std::string> method) {
    std::optional<SamplingMethod> sm;
    if (method) sm = parse_sampling_method(*method);
    FbmPathBatch b;
    {
      py::gil_scoped_release release;
      b = sample_paths(FbmGrid{h, n}, paths, seed, sm);
    }
    py::dict d;
    d["levels"] = to_array(b.levels, paths, n + 1);
    d["increments"] = to_array(b.increments, paths, n);
    d["method"] = b.method ? to_string(*b.method) : std::string("none");
    return d;
  }, py::arg("hurst"), py::arg("n"), py::arg("m"), py::arg("seed"), py::arg("method") = py::none());

  m.def("weighted_variation", [](double h, std::size_t n, std::size_t paths, int q, const std::string& weight,
                                 std::uint64_t seed, const std::string& norm, bool decompose) {
    VariationResult r;
    {
      py::gil_scoped_release release;
      const FbmSampler sampler(FbmGrid{h, n});
      r = weighted_variation(sampler, seed, paths, q, WeightFunction::parse(weight), parse_normalization(norm),
                             decompose);
    }
    py::dict d;
    d["g_n"] = to_array(r.g_n);
    d["correction"] = to_array(r.correction);
    d["renormalized"] = to_array(r.renormalized);
    d["regime"] = to_string(r.regime.regime);
    if (r.decomposed) {
      d["main"] = to_array(r.main_term);
      py::list middle;
      for (const auto& v : r.middle) middle.append(to_array(v));
      d["middle"] = middle;
      d["remainder"] = to_array(r.remainder);
      d["residual"] = to_array(r.residual);
    }
    return d;
  }, py::arg("hurst"), py::arg("n"), py::arg("m"), py::arg("q"), py::arg("weight") = "cos:1,1",
     py::arg("seed") = 1, py::arg("normalization") = "monic", py::arg("decompose") = false);

  m.def("fourth_moment", [](double h, std::size_t n) {
    const FourthMoment f = chaos2_fourth_moment_exact(h, n);
    py::dict d;
    d["variance"] = f.variance;
    d["fourth_moment"] = f.fourth_moment;
    d["normalized_m4"] = f.normalized_m4;
    return d;
  }, py::arg("hurst"), py::arg("n"));

  m.def("ks_two_sample", [](std::vector<double> a, std::vector<double> b, double alpha) {
    const TestReport r = ks_two_sample(a, b, alpha);
    return py::make_tuple(r.statistic, r.threshold, r.pass);
  }, py::arg("a"), py::arg("b"), py::arg("alpha") = 0.01);

  m.def("run_suite", [](const std::string& config_json) {
    const RunConfig c = RunConfig::from_json(nlohmann::json::parse(config_json));
    c.validate();
    SuiteResult r;
    {
      py::gil_scoped_release release;
      r = run_suite(c);
    }
    return py::make_tuple(r.report.dump(), r.pass);
  }, py::arg("config_json"));

  m.def("set_worker_count", &set_worker_count, py::arg("workers"));
  m.def("worker_count", &worker_count);

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const std::domain_error& e) {
      PyErr_SetString(PyExc_ArithmeticError, e.what());
    }
  });
}
