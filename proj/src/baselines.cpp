#include "blindcapon/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

namespace blindcapon {

std::string_view to_string(DoaMethod m) {
  switch (m) {
    case DoaMethod::RootMusic: return "RootMusic";
    case DoaMethod::TlsEsprit: return "TlsEsprit";
    case DoaMethod::SrpPhat: return "SrpPhat";
  }
  return "Unknown";
}

namespace {

double angular_distance(double a, double b) { return std::abs(wrap_angle(a - b)); }

// Eigen-decomposition with eigenvalues in ascending order; checks that the
// requested signal subspace is actually present.
Eigen::SelfAdjointEigenSolver<cmat> decompose(const cmat& c_x, int num_sources) {
  const Eigen::Index d = c_x.rows();
  require(c_x.cols() == d, "covariance must be square");
  require(num_sources >= 1 && num_sources < d, "need 1 <= num_sources < d");
  Eigen::SelfAdjointEigenSolver<cmat> eig((c_x + c_x.adjoint()) * 0.5);
  if (eig.info() != Eigen::Success)
    throw Error(ErrorCode::RankDeficient, "eigendecomposition failed");
  const rvec& ev = eig.eigenvalues();
  const double top = ev[d - 1];
  if (!(top > 0.0) || ev[d - num_sources] <= 1e-14 * top)
    throw Error(ErrorCode::RankDeficient, "signal subspace has fewer than num_sources dimensions");
  return eig;
}

// Picks the candidate nearest to the query direction; near-ties go to the
// candidate closest to broadside (smallest |lambda|).
Eigen::Index pick_nearest(const rvec& cands, double lambda_query) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < cands.size(); ++i) {
    const double di = angular_distance(cands[i], lambda_query);
    const double db = angular_distance(cands[best], lambda_query);
    if (di < db - 1e-9 || (std::abs(di - db) <= 1e-9 &&
                           std::abs(cands[i]) < std::abs(cands[best])))
      best = i;
  }
  return best;
}

}  // namespace

DoaEstimate root_music(const cmat& c_x, int num_sources, double lambda_query) {
  const auto eig = decompose(c_x, num_sources);
  const Eigen::Index d = c_x.rows();
  const cmat en = eig.eigenvectors().leftCols(d - num_sources);
  const cmat pn = en * en.adjoint();

  // a^H Pn a = sum_l c_l z^l, z = exp(i lambda), l = k - j in [-(d-1), d-1].
  // Multiplying by z^(d-1) gives a polynomial of degree 2(d-1) in z.
  const Eigen::Index deg = 2 * (d - 1);
  cvec coef = cvec::Zero(deg + 1);  // coef[m] multiplies z^m
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index k = 0; k < d; ++k) coef[k - j + d - 1] += pn(j, k);

  const cplx lead = coef[deg];
  if (std::abs(lead) < 1e-300)
    throw Error(ErrorCode::RankDeficient, "degenerate MUSIC polynomial");
  cmat companion = cmat::Zero(deg, deg);
  companion.block(1, 0, deg - 1, deg - 1).setIdentity();
  for (Eigen::Index m = 0; m < deg; ++m) companion(m, deg - 1) = -coef[m] / lead;
  Eigen::ComplexEigenSolver<cmat> roots_solver(companion, false);
  const cvec roots = roots_solver.eigenvalues();

  // Roots closest to the unit circle from inside (numerically split double
  // roots may sit a hair outside, so allow a small margin).
  std::vector<Eigen::Index> order;
  for (Eigen::Index i = 0; i < roots.size(); ++i)
    if (std::abs(roots[i]) <= 1.0 + 1e-6) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(1.0 - std::abs(roots[a])) < std::abs(1.0 - std::abs(roots[b]));
  });

  std::vector<double> cands, moduli;
  for (Eigen::Index idx : order) {
    if (static_cast<int>(cands.size()) == num_sources) break;
    const double ang = wrap_angle(std::arg(roots[idx]));
    bool dup = false;
    for (double c : cands) dup = dup || angular_distance(c, ang) < 1e-4;
    if (dup) continue;
    cands.push_back(ang);
    moduli.push_back(std::abs(roots[idx]));
  }
  if (cands.empty())
    throw Error(ErrorCode::RankDeficient, "no MUSIC root inside the unit circle");

  DoaEstimate est;
  est.method = DoaMethod::RootMusic;
  est.candidates = Eigen::Map<rvec>(cands.data(), static_cast<Eigen::Index>(cands.size()));
  est.diagnostics = Eigen::Map<rvec>(moduli.data(), static_cast<Eigen::Index>(moduli.size()));
  est.lambda_hat = est.candidates[pick_nearest(est.candidates, lambda_query)];
  return est;
}

DoaEstimate tls_esprit(const cmat& c_x, int num_sources, double lambda_query) {
  const auto eig = decompose(c_x, num_sources);
  const Eigen::Index d = c_x.rows();
  const Eigen::Index k = num_sources;
  const cmat es = eig.eigenvectors().rightCols(k);

  cmat ec(d - 1, 2 * k);
  ec.leftCols(k) = es.topRows(d - 1);
  ec.rightCols(k) = es.bottomRows(d - 1);

  // Total least squares: eigenvectors of Ec^H Ec in descending order.
  Eigen::SelfAdjointEigenSolver<cmat> tls(ec.adjoint() * ec);
  const cmat v = tls.eigenvectors().rowwise().reverse();
  const cmat v12 = v.block(0, k, k, k);
  const cmat v22 = v.block(k, k, k, k);
  Eigen::FullPivLU<cmat> lu(v22);
  if (!lu.isInvertible())
    throw Error(ErrorCode::RankDeficient, "TLS ESPRIT partition is singular");
  const cmat psi = -v12 * lu.inverse();
  Eigen::ComplexEigenSolver<cmat> ces(psi, false);
  const cvec rot = ces.eigenvalues();

  DoaEstimate est;
  est.method = DoaMethod::TlsEsprit;
  est.candidates.resize(k);
  est.diagnostics.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    est.candidates[i] = wrap_angle(std::arg(rot[i]));
    est.diagnostics[i] = std::abs(rot[i]);
  }
  est.lambda_hat = est.candidates[pick_nearest(est.candidates, lambda_query)];
  return est;
}

FastIcaResult fastica_one_unit(const SnapshotMatrix& x, const Nonlinearity& phi,
                               const cvec& w_ini, const FastIcaConfig& cfg) {
  require(cfg.max_iters >= 1, "max_iters must be >= 1");
  require(w_ini.size() == x.d(), "w_ini dimension mismatch");
  require(w_ini.norm() > 0.0, "w_ini must be nonzero");

  const Covariance cov(sample_covariance(x));
  Eigen::SelfAdjointEigenSolver<cmat> eig(cov.matrix());
  const rvec& ev = eig.eigenvalues();
  if (!(ev.minCoeff() > 0.0))
    throw Error(ErrorCode::SingularCovariance, "covariance is not positive definite");
  const cmat& e = eig.eigenvectors();
  const cmat whiten = e * ev.cwiseInverse().cwiseSqrt().asDiagonal() * e.adjoint();
  const cmat unwhiten = e * ev.cwiseSqrt().asDiagonal() * e.adjoint();
  const cmat z = whiten * x.data();
  const double n = static_cast<double>(x.n());

  // s = w_x^H x = w_z^H z with w_x = W w_z, hence w_z = C^{1/2} w_x.
  cvec w = unwhiten * w_ini;
  w.normalize();

  FastIcaResult res;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const Eigen::RowVectorXcd y = w.adjoint() * z;
    cvec acc = cvec::Zero(w.size());
    cplx dacc = 0.0;
    for (Eigen::Index i = 0; i < z.cols(); ++i) {
      acc += phi.phi(y[i]) * z.col(i);
      dacc += phi.dphi_dsconj(y[i]);
    }
    cvec w_new = acc / n - (dacc / n) * w;
    const double norm = w_new.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) break;
    w_new /= norm;
    const double change = 1.0 - std::abs(w_new.dot(w));
    w = std::move(w_new);
    res.iterations = it + 1;
    if (change < cfg.tol) {
      res.converged = true;
      break;
    }
  }

  ExtractionState& st = res.state;
  st.lambda = std::numeric_limits<double>::quiet_NaN();
  st.w = whiten * w;
  const double sigma2 = st.w.dot(cov.matrix() * st.w).real();
  st.a = cov.matrix() * st.w / sigma2;
  st.s = (st.w.adjoint() * x.data()).transpose();
  st.stats = soi_statistics(st.s, phi);
  return res;
}

}  // namespace blindcapon
