#include "blindcapon/core.hpp"

#include <cmath>

namespace blindcapon {

SteeringModel::SteeringModel(rvec weights) : v_(std::move(weights)) {
  require(v_.size() >= 2, "steering model needs at least two sensors");
  require(v_[0] == 0.0, "first sensor weight must be exactly zero");
  integer_ = true;
  for (Eigen::Index j = 0; j < v_.size(); ++j) {
    require(std::isfinite(v_[j]), "sensor weights must be finite");
    if (v_[j] != std::round(v_[j])) integer_ = false;
  }
}

SteeringModel SteeringModel::ula(int d) {
  require(d >= 2, "ULA needs at least two sensors");
  return SteeringModel(rvec::LinSpaced(d, 0.0, static_cast<double>(d - 1)));
}

bool SteeringModel::is_ula() const {
  for (Eigen::Index j = 0; j < v_.size(); ++j)
    if (v_[j] != static_cast<double>(j)) return false;
  return true;
}

cvec steering(const SteeringModel& model, double lambda) {
  const rvec& v = model.weights();
  cvec a(v.size());
  a[0] = 1.0;
  for (Eigen::Index j = 1; j < v.size(); ++j)
    a[j] = std::polar(1.0, lambda * v[j]);
  return a;
}

SnapshotMatrix::SnapshotMatrix(cmat data) : data_(std::move(data)) {
  require(data_.rows() >= 1, "snapshot matrix needs at least one sensor");
  require(data_.cols() >= 1, "snapshot matrix needs at least one sample");
}

cmat sample_covariance(const cmat& x) {
  require(x.cols() >= 1, "sample covariance needs N >= 1");
  cmat c = x * x.adjoint() / static_cast<double>(x.cols());
  // Enforce exact Hermitian symmetry.
  return (c + c.adjoint()) * 0.5;
}

Covariance::Covariance(const cmat& c, double loading) {
  require(c.rows() == c.cols() && c.rows() >= 1, "covariance must be square");
  const double scale = c.trace().real() / static_cast<double>(c.rows());
  raw_ = (c + c.adjoint()) * 0.5;
  c_ = raw_;
  c_.diagonal().array() += loading * scale;
  llt_.compute(c_);
  if (llt_.info() != Eigen::Success || !std::isfinite(scale) || scale <= 0.0)
    throw Error(ErrorCode::SingularCovariance,
                "covariance is not positive definite after loading");
}

double Covariance::log_det() const {
  double acc = 0.0;
  const cmat& l = llt_.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i).real());
  return 2.0 * acc;
}

MpdrWeights mpdr_weights(const Covariance& cov, const cvec& a) {
  require(a.size() == cov.d(), "steering vector dimension mismatch");
  cvec ci_a = cov.solve(a);
  const double denom = a.dot(ci_a).real();  // a^H C^{-1} a
  if (!(denom > 0.0) || !std::isfinite(denom))
    throw Error(ErrorCode::SingularCovariance, "a^H C^{-1} a is not positive");
  MpdrWeights out;
  out.sigma2 = 1.0 / denom;
  out.w = ci_a * out.sigma2;
  return out;
}

MpdrWeights mpdr_weights(const cmat& c_x, const cvec& a) {
  return mpdr_weights(Covariance(c_x), a);
}

Nonlinearity rational_nonlinearity() {
  Nonlinearity n;
  n.name = "rational";
  n.phi = [](cplx s) { return std::conj(s) / (1.0 + std::norm(s)); };
  n.dphi_ds = [](cplx s) {
    const double q = 1.0 + std::norm(s);
    return -std::conj(s) * std::conj(s) / (q * q);
  };
  n.dphi_dsconj = [](cplx s) {
    const double q = 1.0 + std::norm(s);
    return cplx(1.0 / (q * q), 0.0);
  };
  n.log_density = [](cplx s) { return -std::log1p(std::norm(s)); };
  return n;
}

Nonlinearity linear_nonlinearity() {
  Nonlinearity n;
  n.name = "linear";
  n.phi = [](cplx s) { return std::conj(s); };
  n.dphi_ds = [](cplx) { return cplx(0.0, 0.0); };
  n.dphi_dsconj = [](cplx) { return cplx(1.0, 0.0); };
  n.log_density = [](cplx s) { return -std::norm(s); };
  return n;
}

SoiStatistics soi_statistics(const cvec& s, const Nonlinearity& phi) {
  require(s.size() >= 2, "statistics need at least two samples");
  const double n = static_cast<double>(s.size());
  SoiStatistics st;
  st.sigma2 = s.squaredNorm() / n;
  if (!(st.sigma2 >= 1e-30))
    throw Error(ErrorCode::DegenerateSignal, "extracted signal has zero power");
  const double sigma = std::sqrt(st.sigma2);
  cplx nu_acc = 0.0, rho_acc = 0.0, eta_acc = 0.0;
  double xi_acc = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const cplx u = s[i] / sigma;
    const cplx dconj = phi.dphi_dsconj(u);
    nu_acc += phi.phi(u) * u;
    rho_acc += dconj;
    xi_acc += (dconj * std::norm(u)).real();
    eta_acc += phi.dphi_ds(u) * u * u;
  }
  st.nu = nu_acc.real() / n;
  st.nu_imag = nu_acc.imag() / n;
  st.rho = rho_acc / n;
  st.xi = xi_acc / n;
  st.eta = eta_acc / n;
  return st;
}

CConstants c_constants(const SoiStatistics& st) {
  if (!(std::abs(st.nu) >= 1e-12))
    throw Error(ErrorCode::ScoreDegenerate, "|nu| is below 1e-12");
  CConstants c;
  c.c1 = (st.nu - st.rho.real()) / (st.nu * st.sigma2);
  c.c3 = (st.xi - st.eta - st.nu) / (2.0 * st.nu);
  c.c2 = -st.sigma2 * c.c1 - c.c3;
  return c;
}

ExtractionState make_state(const SnapshotMatrix& x, const Covariance& cov,
                           const SteeringModel& model, double lambda,
                           const Nonlinearity& phi) {
  require(model.d() == x.d(), "steering model and data dimensions differ");
  ExtractionState st;
  st.lambda = lambda;
  st.a = steering(model, lambda);
  st.w = mpdr_weights(cov, st.a).w;
  st.s = (st.w.adjoint() * x.data()).transpose();
  st.stats = soi_statistics(st.s, phi);
  return st;
}

double wrap_angle(double lambda) {
  double r = std::remainder(lambda, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

}  // namespace blindcapon
