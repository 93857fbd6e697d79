#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "blindcapon/baselines.hpp"
#include "blindcapon/bounds.hpp"
#include "blindcapon/capon_ice.hpp"
#include "blindcapon/capon_ive.hpp"
#include "blindcapon/monte_carlo.hpp"
#include "blindcapon/stft.hpp"
#include "blindcapon/version.hpp"

namespace py = pybind11;
using namespace blindcapon;

namespace {

SteeringModel model_for(int d, const std::optional<rvec>& weights) {
  return weights ? SteeringModel(*weights) : SteeringModel::ula(d);
}

py::dict capon_result(const CaponResult& r) {
  py::dict out;
  out["lambda_hat"] = r.state.lambda;
  out["w"] = r.state.w;
  out["s"] = r.state.s;
  out["iterations"] = r.iterations;
  out["converged"] = r.converged;
  out["fallback_steps"] = r.fallback_steps;
  out["lambda_trace"] = r.lambda_trace;
  out["contrast_trace"] = r.contrast_trace;
  return out;
}

StftTensor to_stft(const rmat& x, double fs, int fft, int hop) {
  return stft(x, fs, {fft, hop});
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Blind Capon beamformer: CaponICE, bounds and baselines";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "BlindCaponError", PyExc_RuntimeError);

  m.def("steering", [](double lambda, int d) { return steering(SteeringModel::ula(d), lambda); },
        py::arg("lambda_"), py::arg("d"));
  m.def(
      "mpdr_weights",
      [](const cmat& c, const cvec& a) {
        const auto r = mpdr_weights(c, a);
        return py::make_tuple(r.w, r.sigma2);
      },
      py::arg("cov"), py::arg("a"));

  m.def(
      "contrast",
      [](const cmat& x, double lambda, double nu, std::optional<rvec> weights) {
        const CaponObjective obj(SnapshotMatrix(x), model_for(int(x.rows()), weights),
                                 rational_nonlinearity());
        return obj.contrast(lambda, nu);
      },
      py::arg("x"), py::arg("lambda_"), py::arg("score_normalizer") = 1.0,
      py::arg("weights") = py::none());
  m.def(
      "contrast_derivative",
      [](const cmat& x, double lambda, std::optional<rvec> weights) {
        const CaponObjective obj(SnapshotMatrix(x), model_for(int(x.rows()), weights),
                                 rational_nonlinearity());
        // nu is returned so that finite differences can hold it fixed
        const auto st = obj.state(lambda);
        return py::make_tuple(obj.first_derivative(st), st.stats.nu);
      },
      py::arg("x"), py::arg("lambda_"), py::arg("weights") = py::none());

  m.def(
      "capon_ice",
      [](const cmat& x, double lambda_ini, int max_iters, double tol_w, double step_cap,
         std::optional<rvec> weights) {
        CaponConfig cfg;
        cfg.lambda_ini = lambda_ini;
        cfg.max_iters = max_iters;
        cfg.tol_w = tol_w;
        cfg.step_cap = step_cap;
        py::gil_scoped_release nogil;
        const auto r = run_capon_ice(SnapshotMatrix(x), model_for(int(x.rows()), weights),
                                     rational_nonlinearity(), cfg);
        py::gil_scoped_acquire gil;
        return capon_result(r);
      },
      py::arg("x"), py::arg("lambda_ini"), py::arg("max_iters") = 100, py::arg("tol_w") = 1e-6,
      py::arg("step_cap") = 0.5, py::arg("weights") = py::none());

  m.def("crib_ice", &crib_ice, py::arg("kappa_bar"), py::arg("d"), py::arg("n"));
  m.def("crib_capon", &crib_capon, py::arg("kappa_bar"), py::arg("d"), py::arg("n"));

  m.def(
      "root_music",
      [](const cmat& c, int k, double q) { return root_music(c, k, q).lambda_hat; },
      py::arg("cov"), py::arg("num_sources"), py::arg("lambda_query") = 0.0);
  m.def(
      "tls_esprit",
      [](const cmat& c, int k, double q) { return tls_esprit(c, k, q).lambda_hat; },
      py::arg("cov"), py::arg("num_sources"), py::arg("lambda_query") = 0.0);

  m.def(
      "generate_mixture",
      [](int d, int n, double lambda_star, double isir_db, const std::string& law,
         std::uint64_t seed) {
        MixtureSpec spec;
        spec.d = d;
        spec.n = n;
        spec.lambda_star = lambda_star;
        spec.isir_db = isir_db;
        spec.source_law = parse_source_law(law);
        spec.seed = seed;
        const auto mx = generate_mixture(spec);
        py::dict out;
        out["x"] = mx.x.data();
        out["mixing"] = mx.mixing;
        out["source_powers"] = mx.source_powers;
        out["sources"] = mx.sources;
        return out;
      },
      py::arg("d") = 5, py::arg("n") = 500, py::arg("lambda_star") = 0.0,
      py::arg("isir_db") = 0.0, py::arg("source_law") = "laplacean", py::arg("seed") = 0);
  m.def("output_sir", [](const cvec& w, const cmat& a, const rvec& p) { return output_sir(w, a, p); },
        py::arg("w"), py::arg("mixing"), py::arg("source_powers"));

  m.def(
      "extract",
      [](const rmat& x, double fs, double theta_ini, double spacing_m, double c, int fft,
         int hop) {
        ArrayGeometry geom;
        geom.spacing_m = spacing_m;
        geom.c = c;
        geom.d = int(x.rows());
        IveConfig cfg;
        cfg.theta_ini_deg = theta_ini;
        py::gil_scoped_release nogil;
        const auto r = run_ive(to_stft(x, fs, fft, hop), geom, cfg);
        const rmat y = istft(r.beam.output);
        py::gil_scoped_acquire gil;
        py::dict out;
        out["theta_hat_deg"] = r.theta_hat_deg;
        out["iterations"] = r.iterations;
        out["converged"] = r.converged;
        out["theta_trace"] = r.theta_trace;
        out["y"] = rvec(y.row(0).transpose());
        return out;
      },
      py::arg("x"), py::arg("sample_rate"), py::arg("theta_ini_deg") = 90.0,
      py::arg("spacing_m") = 0.05, py::arg("c") = 343.0, py::arg("fft") = 1024,
      py::arg("hop") = 128);
}
