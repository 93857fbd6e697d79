#include "blindcapon/capon_ice.hpp"

#include <algorithm>
#include <cmath>

namespace blindcapon {

void CaponConfig::validate() const {
  require(max_iters >= 1, "max_iters must be >= 1");
  require(tol_w > 0.0, "tol_w must be positive");
  require(step_cap > 0.0, "step_cap must be positive");
  require(damping > 0.0 && damping <= 1.0, "damping must lie in (0, 1]");
  require(std::isfinite(lambda_ini), "lambda_ini must be finite");
}

NewtonStep newton_step(double first, double second, const CaponConfig& cfg) {
  NewtonStep step;
  if (second < 0.0 && std::isfinite(second)) {
    step.delta = -first / second;
  } else {
    // Curvature approximation is only valid near the solution.
    step.fallback = true;
    const double sign = (first > 0.0) - (first < 0.0);
    step.delta = sign * 0.1 * cfg.step_cap;
  }
  step.delta = std::clamp(step.delta, -cfg.step_cap, cfg.step_cap) * cfg.damping;
  return step;
}

CaponObjective::CaponObjective(SnapshotMatrix x, SteeringModel model,
                               Nonlinearity phi)
    : x_(std::move(x)),
      model_(std::move(model)),
      phi_(std::move(phi)),
      cov_(sample_covariance(x_)) {
  require(model_.d() == x_.d(), "steering model and data dimensions differ");
  require(x_.n() >= x_.d(), "need at least d samples");
}

ExtractionState CaponObjective::state(double lambda) const {
  return make_state(x_, cov_, model_, lambda, phi_);
}

// -log sigma^2 - E[z^H C_z^{-1} z] - log det C_z + (d - 2) log |gamma|^2 with
// C_z = B C B^H the covariance of the background z = B x.
//
// Forming B C B^H and factorizing it costs cond(C) * eps of noise, which
// swamps finite differences of the contrast. Both terms have exact forms:
// E[z^H C_z^{-1} z] = d - 1 when C_z is the covariance of z itself, and
// [C^{-1} a / (a^H C^{-1} a), B]^H block-diagonalizes C, which gives
//   log det C_z = log det C + (d - 2) log |gamma|^2 + log(a^H C^{-1} a).
double background_terms(const Covariance& cov, double gamma2, double quad, double sigma2) {
  const int d = cov.d();
  if (!(gamma2 > 0.0) || !(quad > 0.0))
    throw Error(ErrorCode::SingularCovariance, "background covariance is singular");
  const double log_det_cz = cov.log_det() + (d - 2) * std::log(gamma2) + std::log(quad);
  return -std::log(sigma2) - (d - 1) - log_det_cz + (d - 2) * std::log(gamma2);
}

double background_terms(const Covariance& cov, const cvec& a, double sigma2) {
  require(a.size() == cov.d(), "steering vector dimension mismatch");
  return background_terms(cov, std::norm(a[0]), a.dot(cov.solve(a)).real(), sigma2);
}

double CaponObjective::contrast(double lambda, double score_normalizer) const {
  const cvec a = steering(model_, lambda);
  const MpdrWeights m = mpdr_weights(cov_, a);
  return contrast_w(m.w, score_normalizer);
}

double CaponObjective::contrast_w(const cvec& w, double score_normalizer) const {
  require(score_normalizer != 0.0, "score normalizer must be nonzero");
  const double sigma2 = w.dot(cov_.matrix() * w).real();
  const cvec a = cov_.matrix() * w / sigma2;
  const cvec s = (w.adjoint() * x_.data()).transpose();
  const double sigma = std::sqrt(s.squaredNorm() / s.size());
  double g = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) g += phi_.log_density(s[i] / sigma);
  g /= static_cast<double>(s.size());
  // a = C w / sigma2 gives a^H C^{-1} a = 1 / sigma2 without a solve
  return g / score_normalizer + background_terms(cov_, std::norm(a[0]), 1.0 / sigma2, sigma2);
}

cvec CaponObjective::grad_w(const ExtractionState& st) const {
  const SoiStatistics& stats = st.stats;
  if (!(std::abs(stats.nu) >= 1e-12))
    throw Error(ErrorCode::ScoreDegenerate, "|nu| is below 1e-12");
  const double sigma = std::sqrt(stats.sigma2);
  const cmat& x = x_.data();
  cvec acc = cvec::Zero(x_.d());
  for (Eigen::Index i = 0; i < x.cols(); ++i)
    acc += phi_.phi(st.s[i] / sigma) * x.col(i);
  acc /= static_cast<double>(x.cols()) * sigma;
  // a(w) must come from the same covariance as the sample sigma^2 of s,
  // otherwise the loading leaks into the gradient.
  const cvec cw = cov_.sample() * st.w;
  const cvec a_of_w = cw / st.w.dot(cw).real();
  return a_of_w - acc / stats.nu;
}

cvec CaponObjective::grad_a(const ExtractionState& st) const {
  const double sigma2 = st.w.dot(cov_.matrix() * st.w).real();
  return sigma2 * cov_.solve(grad_w(st));
}

double CaponObjective::first_derivative(const ExtractionState& st) const {
  const double sigma2 = st.w.dot(cov_.matrix() * st.w).real();
  const cvec av = st.a.cwiseProduct(model_.weights().cast<cplx>());
  return -2.0 * sigma2 * grad_w(st).dot(cov_.solve(av)).imag();
}

double CaponObjective::first_derivative_via_a(const ExtractionState& st) const {
  const cvec av = st.a.cwiseProduct(model_.weights().cast<cplx>());
  return -2.0 * grad_a(st).dot(av).imag();
}

double CaponObjective::second_derivative_approx(const ExtractionState& st) const {
  const CConstants c = c_constants(st.stats);
  const double sigma2 = st.w.dot(cov_.matrix() * st.w).real();
  const cvec av = st.a.cwiseProduct(model_.weights().cast<cplx>());
  const double quad = av.dot(cov_.solve(av)).real();
  const double proj = std::norm(st.w.dot(av));
  return 2.0 * c.c1 * sigma2 * (sigma2 * quad - proj);
}

double contrast(const SnapshotMatrix& x, const SteeringModel& model,
                double lambda, const Nonlinearity& phi) {
  return CaponObjective(x, model, phi).contrast(lambda);
}

CaponResult run_capon_ice(const CaponObjective& obj, const CaponConfig& cfg) {
  cfg.validate();
  const bool periodic = obj.model().integer_weights();
  double lambda = periodic ? wrap_angle(cfg.lambda_ini) : cfg.lambda_ini;
  double travelled = 0.0;

  CaponResult res;
  cvec w_prev;
  for (;;) {
    ExtractionState st = obj.state(lambda);
    res.lambda_trace.push_back(lambda);
    res.contrast_trace.push_back(obj.contrast(lambda));
    res.distortionless_error.push_back(std::abs(st.w.dot(st.a) - 1.0));

    const bool have_prev = w_prev.size() == st.w.size();
    if (have_prev && (st.w - w_prev).cwiseAbs().maxCoeff() <= cfg.tol_w) {
      res.converged = true;
      res.state = std::move(st);
      return res;
    }
    if (res.iterations >= cfg.max_iters) {
      res.state = std::move(st);
      return res;
    }

    const double first = obj.first_derivative(st);
    const double second = obj.second_derivative_approx(st);
    const NewtonStep step = newton_step(first, second, cfg);
    if (step.fallback) ++res.fallback_steps;
    if (!std::isfinite(step.delta))
      throw Error(ErrorCode::Diverged, "non-finite Newton step");

    travelled += step.delta;
    if (std::abs(travelled) > kPi)
      throw Error(ErrorCode::Diverged, "lambda left the principal period around lambda_ini");
    lambda = periodic ? wrap_angle(lambda + step.delta) : lambda + step.delta;
    w_prev = std::move(st.w);
    ++res.iterations;
  }
}

CaponResult run_capon_ice(const SnapshotMatrix& x, const SteeringModel& model,
                          const Nonlinearity& phi, const CaponConfig& cfg) {
  cfg.validate();
  return run_capon_ice(CaponObjective(x, model, phi), cfg);
}

}  // namespace blindcapon
