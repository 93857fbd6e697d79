#pragma once

#include <vector>

#include "blindcapon/core.hpp"

namespace blindcapon {

struct CaponConfig {
  double lambda_ini = 0.0;
  int max_iters = 100;
  double tol_w = 1e-6;     // stop when ||w_k - w_{k-1}||_inf <= tol_w
  double step_cap = 0.5;   // max |delta lambda| per iteration
  double damping = 1.0;    // in (0, 1]

  void validate() const;
};

struct CaponResult {
  ExtractionState state;
  int iterations = 0;
  bool converged = false;
  int fallback_steps = 0;              // iterations that used the gradient step
  std::vector<double> contrast_trace;  // contrast at every visited lambda
  std::vector<double> lambda_trace;
  std::vector<double> distortionless_error;  // |w^H a - 1| per visited lambda
};

struct NewtonStep {
  double delta = 0.0;
  bool fallback = false;
};

/// Safeguarded update: Newton when the curvature is negative, otherwise a
/// short step along the sign of the slope. Clipped to step_cap, then damped.
NewtonStep newton_step(double first, double second, const CaponConfig& cfg);

/// Non-SOI part of the contrast at mixing vector a with SOI variance sigma2:
/// -log sigma2 - E[z^H C_z^{-1} z] - log det C_z + (d - 2) log |gamma|^2.
double background_terms(const Covariance& cov, const cvec& a, double sigma2);
/// Same, given |gamma|^2 and quad = a^H C^{-1} a directly.
double background_terms(const Covariance& cov, double gamma2, double quad, double sigma2);

/// Orthogonally constrained ICE objective over the single phase parameter.
///
/// Holds the data and its loaded covariance so repeated evaluations at
/// different lambda reuse one Cholesky factorization.
class CaponObjective {
 public:
  CaponObjective(SnapshotMatrix x, SteeringModel model, Nonlinearity phi);

  const SnapshotMatrix& data() const { return x_; }
  const Covariance& covariance() const { return cov_; }
  const SteeringModel& model() const { return model_; }
  const Nonlinearity& nonlinearity() const { return phi_; }

  ExtractionState state(double lambda) const;

  /// Sample contrast along the constraint path. The model log-density is
  /// scaled by 1 / score_normalizer; pass the current nu to obtain the
  /// function whose slope is first_derivative() at that point.
  double contrast(double lambda, double score_normalizer = 1.0) const;

  /// Unstructured contrast C_w(w) with a(w) = C w / (w^H C w).
  double contrast_w(const cvec& w, double score_normalizer = 1.0) const;

  /// dC_w / dw^* = a(w) - nu^{-1} E[phi(s / sigma) x / sigma].
  cvec grad_w(const ExtractionState& st) const;

  /// dC_a / da^* = sigma^2 C^{-1} grad_w.
  cvec grad_a(const ExtractionState& st) const;

  /// -2 sigma^2 Im{grad_w^H C^{-1} (a .* v)}.
  double first_derivative(const ExtractionState& st) const;

  /// Same slope through the mixing-vector gradient: -2 Im{grad_a^H (a .* v)}.
  double first_derivative_via_a(const ExtractionState& st) const;

  /// At-solution curvature 2 c1 sigma^2 (sigma^2 |a.*v|^2_{C^-1} - |w^H (a.*v)|^2).
  double second_derivative_approx(const ExtractionState& st) const;

 private:
  SnapshotMatrix x_;
  SteeringModel model_;
  Nonlinearity phi_;
  Covariance cov_;
};

double contrast(const SnapshotMatrix& x, const SteeringModel& model,
                double lambda, const Nonlinearity& phi);

/// Newton-Raphson maximization of the contrast over lambda (CaponICE).
CaponResult run_capon_ice(const CaponObjective& objective, const CaponConfig& cfg);
CaponResult run_capon_ice(const SnapshotMatrix& x, const SteeringModel& model,
                          const Nonlinearity& phi, const CaponConfig& cfg);

}  // namespace blindcapon
