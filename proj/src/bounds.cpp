#include "blindcapon/bounds.hpp"

#include <cmath>
#include <limits>

namespace blindcapon {

namespace {

void check_domain(double kappa_bar, int d, int n) {
  if (!(kappa_bar >= 1.0))
    throw Error(ErrorCode::DomainError, "kappa_bar must be >= 1");
  require(d >= 2, "d must be >= 2");
  require(n >= 1, "N must be >= 1");
}

}  // namespace

double crib_ice(double kappa_bar, int d, int n) {
  check_domain(kappa_bar, d, n);
  if (kappa_bar == 1.0) return std::numeric_limits<double>::infinity();
  return (d - 1) / (kappa_bar - 1.0) / n;
}

double crib_capon(double kappa_bar, int d, int n) {
  check_domain(kappa_bar, d, n);
  if (kappa_bar == 1.0) return std::numeric_limits<double>::infinity();
  return ((d - 1) / kappa_bar + 0.5 / (kappa_bar * (kappa_bar - 1.0))) / n;
}

CribReport crib_report(double kappa_bar, int d, int n) {
  CribReport r;
  r.kappa_bar = kappa_bar;
  r.d = d;
  r.n = n;
  const double ice = crib_ice(kappa_bar, d, n);
  const double capon = crib_capon(kappa_bar, d, n);
  r.identifiable = std::isfinite(ice);
  if (r.identifiable) {
    r.crib_ice = ice;
    r.crib_capon = capon;
    r.crib_ice_db = to_db(ice);
    r.crib_capon_db = to_db(capon);
  }
  return r;
}

cmat fim(double kappa, double sigma2, const cmat& c_z, const rvec& v_tilde) {
  const Eigen::Index m = c_z.rows();
  require(c_z.cols() == m && m >= 1, "C_z must be square");
  require(v_tilde.size() == m, "v_tilde must have d - 1 entries");
  require(kappa > 0.0 && sigma2 > 0.0, "kappa and sigma2 must be positive");

  Eigen::LLT<cmat> llt(c_z);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::DomainError, "C_z must be positive definite");
  const cvec vt = v_tilde.cast<cplx>();
  const cplx i(0.0, 1.0);

  cmat f = cmat::Zero(2 * m + 1, 2 * m + 1);
  f.topLeftCorner(m, m) = kappa * c_z;
  f.block(m, m, m, m) = kappa * c_z.conjugate();
  f.block(0, 2 * m, m, 1) = -i * vt;
  f.block(m, 2 * m, m, 1) = i * vt;
  f.block(2 * m, 0, 1, m) = i * vt.transpose();
  f.block(2 * m, m, 1, m) = -i * vt.transpose();
  f(2 * m, 2 * m) = 2.0 * sigma2 * vt.dot(llt.solve(vt)).real();
  return f;
}

double crib_from_fim(double kappa, double sigma2, const cmat& c_z,
                     const rvec& v_tilde, int n) {
  require(n >= 1, "N must be >= 1");
  const cmat f = fim(kappa, sigma2, c_z, v_tilde);
  const Eigen::Index m = c_z.rows();

  // Schur complement of the lambda entry: 2 v^T C_z^{-1} v (sigma2 - 1/kappa).
  // It vanishes exactly when kappa * sigma2 == 1.
  if (!(kappa * sigma2 - 1.0 > 1e-12))
    throw Error(ErrorCode::SingularFim, "FIM is singular for kappa_bar <= 1");

  require((f - f.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * f.cwiseAbs().maxCoeff(),
          "FIM must be Hermitian");
  Eigen::LDLT<cmat> ldlt(f);
  if (ldlt.info() != Eigen::Success)
    throw Error(ErrorCode::SingularFim, "FIM factorization failed");
  const cmat finv = ldlt.solve(cmat::Identity(f.rows(), f.cols()));
  const cmat crlb_h = finv.topLeftCorner(m, m) / static_cast<double>(n);
  return (c_z * crlb_h).trace().real() / sigma2;
}

KappaEstimate empirical_kappa_bar(const cvec& samples, const ScoreFn& score) {
  require(samples.size() >= 2, "need at least two samples");
  const double n = static_cast<double>(samples.size());
  double sp = 0.0, ss = 0.0, spp = 0.0, sss = 0.0, sps = 0.0;
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    const double p = std::norm(score(samples[i]));
    const double q = std::norm(samples[i]);
    sp += p;
    ss += q;
    spp += p * p;
    sss += q * q;
    sps += p * q;
  }
  const double mp = sp / n, ms = ss / n;
  const double vp = spp / n - mp * mp;
  const double vs = sss / n - ms * ms;
  const double cps = sps / n - mp * ms;
  KappaEstimate k;
  k.value = mp * ms;
  // Delta method for the product of two sample means.
  const double var = (ms * ms * vp + mp * mp * vs + 2.0 * mp * ms * cps) / n;
  k.stderr_ = std::sqrt(std::max(var, 0.0));
  return k;
}

ScoreFn laplace_score(double scale) {
  require(scale > 0.0, "scale must be positive");
  return [scale](cplx s) {
    const double re = (s.real() > 0.0) - (s.real() < 0.0);
    const double im = (s.imag() > 0.0) - (s.imag() < 0.0);
    return cplx(re, -im) / scale;
  };
}

ScoreFn gaussian_score(double sigma2) {
  require(sigma2 > 0.0, "sigma2 must be positive");
  return [sigma2](cplx s) { return std::conj(s) / sigma2; };
}

}  // namespace blindcapon
