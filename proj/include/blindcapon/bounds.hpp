#pragma once

#include <cmath>
#include <functional>
#include <optional>

#include "blindcapon/core.hpp"

namespace blindcapon {

/// Mean-ISR lower bound for unstructured ICE: (d - 1) / (N (kappa_bar - 1)).
/// Returns +inf at kappa_bar = 1.
double crib_ice(double kappa_bar, int d, int n);

/// Mean-ISR lower bound for the phase-shift model:
/// ((d - 1) / kappa_bar + 1 / (2 kappa_bar (kappa_bar - 1))) / N.
double crib_capon(double kappa_bar, int d, int n);

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

struct CribReport {
  double kappa_bar = 1.0;
  int d = 0;
  int n = 0;
  bool identifiable = false;
  // Empty when the source is not identifiable (kappa_bar == 1).
  std::optional<double> crib_ice;
  std::optional<double> crib_capon;
  std::optional<double> crib_ice_db;
  std::optional<double> crib_capon_db;
};

CribReport crib_report(double kappa_bar, int d, int n);

/// Fisher information for theta = [h^T, h^H, lambda]^T at h = 0, lambda = 0,
/// (2d - 1) x (2d - 1).
cmat fim(double kappa, double sigma2, const cmat& c_z, const rvec& v_tilde);

/// Bound obtained numerically from the FIM: (1 / sigma2) tr{C_z CRLB(h)}
/// with CRLB(h) the upper-left block of F^{-1} / N.
double crib_from_fim(double kappa, double sigma2, const cmat& c_z,
                     const rvec& v_tilde, int n);

struct KappaEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

using ScoreFn = std::function<cplx(cplx)>;

/// kappa_bar = E[|psi(s)|^2] * E[|s|^2] from samples of the SOI law.
KappaEstimate empirical_kappa_bar(const cvec& samples, const ScoreFn& score);

/// Score of s = (L1 + i L2) / sqrt(2) * scale with L1, L2 unit-variance
/// real Laplace: psi(s) = (sgn Re s - i sgn Im s) / scale.
ScoreFn laplace_score(double scale = 1.0);

/// Score of a circular Gaussian with variance sigma2: conj(s) / sigma2.
ScoreFn gaussian_score(double sigma2 = 1.0);

}  // namespace blindcapon
