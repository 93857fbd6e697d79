#include "blindcapon/capon_ive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/QR>

namespace blindcapon {

void ArrayGeometry::validate() const {
  require(spacing_m > 0.0 && std::isfinite(spacing_m), "spacing_m must be positive");
  require(c > 0.0 && std::isfinite(c), "speed of sound must be positive");
  require(d >= 2, "need at least two microphones");
}

double theta_to_mu(double theta_deg) { return std::cos(theta_deg * kPi / 180.0); }

double mu_to_theta(double mu) {
  return std::acos(std::clamp(mu, -1.0, 1.0)) * 180.0 / kPi;
}

double bin_omega(int k, double fs, int fft_len) {
  return 2.0 * kPi * k * fs / fft_len;
}

namespace {

cvec ula_phase(int d, double lambda) {
  cvec a(d);
  for (int j = 0; j < d; ++j) a[j] = std::polar(1.0, lambda * j);
  return a;
}

cvec ula_weights(int d) {
  cvec v(d);
  for (int j = 0; j < d; ++j) v[j] = static_cast<double>(j);
  return v;
}

std::vector<unsigned> select_bins(const StftTensor& x, const BinSelection& sel) {
  const int k = x.num_bins();
  std::vector<unsigned> flags(k, 0u);
  for (int b = 0; b < k; ++b) {
    const double hz = b * x.sample_rate / x.fft_len;
    if (hz < sel.min_freq_hz) flags[b] |= kBinExcluded;
    if (b == 0 && sel.exclude_dc) flags[b] |= kBinExcluded;
    if (b == k - 1 && sel.exclude_nyquist) flags[b] |= kBinExcluded;
  }
  for (int b : sel.exclude) {
    require(b >= 0 && b < k, "excluded bin out of range");
    flags[b] |= kBinExcluded;
  }
  return flags;
}

void check_tensor(const StftTensor& x, const ArrayGeometry& geom) {
  geom.validate();
  require(x.num_bins() >= 2, "STFT has no bins");
  require(x.num_bins() == x.fft_len / 2 + 1, "bin count does not match fft_len");
  require(x.d() == geom.d, "channel count does not match the array geometry");
}

}  // namespace

BroadbandSteering steering_broadband(const ArrayGeometry& geom, double theta_deg,
                                     int k, double fs, int fft_len) {
  geom.validate();
  require(fft_len >= 2 && k >= 0 && k <= fft_len / 2, "bin index out of range");
  require(fs > 0.0, "sample rate must be positive");
  BroadbandSteering out;
  const double tau = geom.spacing_m * theta_to_mu(theta_deg) / geom.c;
  out.lambda = bin_omega(k, fs, fft_len) * tau;
  out.aliased = std::abs(out.lambda) > kPi * (1.0 + 1e-12);
  out.a = ula_phase(geom.d, out.lambda);
  return out;
}

IveObjective::IveObjective(const StftTensor& x, ArrayGeometry geom, const BinSelection& sel)
    : geom_(geom) {
  check_tensor(x, geom_);
  frames_ = x.frames();
  require(frames_ > geom_.d, "need more frames than microphones");
  flags_ = select_bins(x, sel);
  for (int b = 0; b < x.num_bins(); ++b) {
    if (flags_[b] & kBinExcluded) continue;
    try {
      Covariance cov(sample_covariance(x.bins[b]));
      cov_.push_back(std::move(cov));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularCovariance) throw;
      flags_[b] |= kBinSingular;
      continue;
    }
    active_.push_back(b);
    x_.push_back(x.bins[b]);
    beta_.push_back(bin_omega(b, x.sample_rate, x.fft_len) * geom_.spacing_m / geom_.c);
  }
  if (active_.empty()) throw Error(ErrorCode::InvalidArgument, "no usable frequency bins");
}

IveObjective::State IveObjective::state(double mu) const {
  const std::size_t kb = active_.size();
  const double n = static_cast<double>(frames_);
  State st;
  st.mu = mu;
  st.a.resize(kb);
  st.w.resize(kb);
  st.s.resize(kb);
  st.stats.resize(kb);
  st.radius = rvec::Zero(frames_);
  std::vector<double> inv_sigma(kb);
  for (std::size_t i = 0; i < kb; ++i) {
    st.a[i] = ula_phase(geom_.d, beta_[i] * mu);
    const MpdrWeights m = mpdr_weights(cov_[i], st.a[i]);
    st.w[i] = m.w;
    st.s[i] = (m.w.adjoint() * x_[i]).transpose();
    const double sigma2 = st.s[i].squaredNorm() / n;
    if (!(sigma2 >= 1e-30))
      throw Error(ErrorCode::DegenerateSignal, "extracted bin has zero power");
    st.stats[i].sigma2 = sigma2;
    inv_sigma[i] = 1.0 / std::sqrt(sigma2);
    st.radius += st.s[i].cwiseAbs2() / sigma2;
  }
  // Joint score statistics; every bin sees the shared radius.
  for (std::size_t i = 0; i < kb; ++i) {
    double nu = 0.0, rho = 0.0, xi = 0.0, eta = 0.0;
    for (int t = 0; t < frames_; ++t) {
      const double u2 = std::norm(st.s[i][t]) * inv_sigma[i] * inv_sigma[i];
      const double q = 1.0 + st.radius[t];
      const double dconj = (q - u2) / (q * q);
      nu += u2 / q;
      rho += dconj;
      xi += dconj * u2;
      eta -= u2 * u2 / (q * q);
    }
    SoiStatistics& s = st.stats[i];
    s.nu = nu / n;
    s.rho = rho / n;
    s.xi = xi / n;
    s.eta = eta / n;
  }
  return st;
}

double IveObjective::contrast(double mu) const {
  const State st = state(mu);
  double g = 0.0;
  for (int t = 0; t < frames_; ++t) g -= std::log1p(st.radius[t]);
  g /= frames_;
  // w is the MPDR solution for a unit-modulus a, so a^H C^{-1} a = 1 / sigma2
  for (std::size_t i = 0; i < active_.size(); ++i) {
    const double sigma2 = st.w[i].dot(cov_[i].matrix() * st.w[i]).real();
    g += background_terms(cov_[i], 1.0, 1.0 / sigma2, sigma2);
  }
  return g / static_cast<double>(active_.size());
}

double IveObjective::partial_contrast(double mu, const State& at) const {
  require(at.s.size() == active_.size(), "state does not belong to this objective");
  double g = 0.0;
  for (std::size_t i = 0; i < active_.size(); ++i) {
    const cvec a = ula_phase(geom_.d, beta_[i] * mu);
    const MpdrWeights m = mpdr_weights(cov_[i], a);
    const cvec s = (m.w.adjoint() * x_[i]).transpose();
    const double sigma2 = s.squaredNorm() / frames_;
    const double sigma2_at = at.stats[i].sigma2;
    double lf = 0.0;
    for (int t = 0; t < frames_; ++t) {
      const double others = at.radius[t] - std::norm(at.s[i][t]) / sigma2_at;
      lf -= std::log1p(others + std::norm(s[t]) / sigma2);
    }
    g += lf / frames_ / at.stats[i].nu + background_terms(cov_[i], 1.0, 1.0 / m.sigma2, m.sigma2);
  }
  return g / static_cast<double>(active_.size());
}

cvec IveObjective::bin_gradient(const State& st, std::size_t i) const {
  const SoiStatistics& stats = st.stats[i];
  const double nu = stats.nu;
  if (!(std::abs(nu) >= 1e-12))
    throw Error(ErrorCode::ScoreDegenerate, "|nu| is below 1e-12");
  const double sigma = std::sqrt(stats.sigma2);
  cvec acc = cvec::Zero(geom_.d);
  for (int t = 0; t < frames_; ++t)
    acc += (std::conj(st.s[i][t] / sigma) / (1.0 + st.radius[t])) * x_[i].col(t);
  acc /= static_cast<double>(frames_) * sigma;
  const cvec cw = cov_[i].sample() * st.w[i];
  return cw / st.w[i].dot(cw).real() - acc / nu;
}

double IveObjective::bin_first_derivative(const State& st, std::size_t i) const {
  const cvec& w = st.w[i];
  const double sigma2 = w.dot(cov_[i].matrix() * w).real();
  const cvec av = st.a[i].cwiseProduct(ula_weights(geom_.d));
  return -2.0 * sigma2 * bin_gradient(st, i).dot(cov_[i].solve(av)).imag();
}

double IveObjective::first_derivative(const State& st) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < active_.size(); ++i)
    acc += beta_[i] * bin_first_derivative(st, i);
  return acc / static_cast<double>(active_.size());
}

double IveObjective::second_derivative_approx(const State& st) const {
  double acc = 0.0;
  const cvec v = ula_weights(geom_.d);
  for (std::size_t i = 0; i < active_.size(); ++i) {
    const CConstants c = c_constants(st.stats[i]);
    const cvec& w = st.w[i];
    const double sigma2 = w.dot(cov_[i].matrix() * w).real();
    const cvec av = st.a[i].cwiseProduct(v);
    const double quad = av.dot(cov_[i].solve(av)).real();
    const double proj = std::norm(w.dot(av));
    acc += beta_[i] * beta_[i] * 2.0 * c.c1 * sigma2 * (sigma2 * quad - proj);
  }
  return acc / static_cast<double>(active_.size());
}

BeamformerOutput mpdr_beamform(const StftTensor& x, const ArrayGeometry& geom,
                               double theta_deg, const BinSelection& sel) {
  check_tensor(x, geom);
  BeamformerOutput out;
  out.flags = select_bins(x, sel);
  out.weights.assign(x.num_bins(), cvec::Zero(geom.d));
  out.output.sample_rate = x.sample_rate;
  out.output.fft_len = x.fft_len;
  out.output.hop = x.hop;
  out.output.signal_len = x.signal_len;
  out.output.bins.assign(x.num_bins(), cmat::Zero(1, x.frames()));
  for (int b = 0; b < x.num_bins(); ++b) {
    const BroadbandSteering st = steering_broadband(geom, theta_deg, b, x.sample_rate, x.fft_len);
    if (st.aliased) out.flags[b] |= kBinAliased;
    try {
      const MpdrWeights m = mpdr_weights(sample_covariance(x.bins[b]), st.a);
      out.weights[b] = m.w;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularCovariance) throw;
      out.flags[b] |= kBinSingular;
      continue;
    }
    out.output.bins[b] = out.weights[b].adjoint() * x.bins[b];
  }
  return out;
}

IveResult run_ive(const StftTensor& x, const ArrayGeometry& geom, const IveConfig& cfg) {
  CaponConfig newton = cfg.newton;
  newton.lambda_ini = 0.0;
  newton.validate();
  require(std::isfinite(cfg.theta_ini_deg), "theta_ini must be finite");
  const IveObjective obj(x, geom, cfg.bins);

  const double mu_ini = theta_to_mu(cfg.theta_ini_deg);
  double mu = mu_ini;
  IveResult res;
  std::vector<cvec> w_prev;
  double prev_slope = 0.0;
  for (;;) {
    IveObjective::State st = obj.state(mu);
    res.theta_trace.push_back(mu_to_theta(mu));
    res.contrast_trace.push_back(obj.contrast(mu));

    if (!w_prev.empty()) {
      double change = 0.0;
      for (std::size_t i = 0; i < st.w.size(); ++i)
        change = std::max(change, (st.w[i] - w_prev[i]).cwiseAbs().maxCoeff());
      if (change <= newton.tol_w) {
        res.converged = true;
        break;
      }
    }
    if (res.iterations >= newton.max_iters) break;

    // The joint contrast peak is far narrower than the flat region around
    // it, so capped steps can straddle it forever. Halve the cap whenever
    // the slope changes sign.
    const double slope = obj.first_derivative(st);
    if (slope * prev_slope < 0.0) newton.step_cap *= 0.5;
    prev_slope = slope;
    const NewtonStep step = newton_step(slope, obj.second_derivative_approx(st), newton);
    if (step.fallback) ++res.fallback_steps;
    if (!std::isfinite(step.delta)) throw Error(ErrorCode::Diverged, "non-finite Newton step");
    mu += step.delta;
    // mu = cos(theta) spans [-1, 1]; wandering further than that is divergence.
    if (std::abs(mu - mu_ini) > 2.0)
      throw Error(ErrorCode::Diverged, "delay parameter left the physical range");
    w_prev = std::move(st.w);
    ++res.iterations;
  }

  res.mu_hat = mu;
  res.mu_out_of_range = std::abs(mu) > 1.0;
  res.theta_hat_deg = mu_to_theta(mu);
  res.beam = mpdr_beamform(x, geom, res.theta_hat_deg, cfg.bins);
  for (int b = 0; b < obj.num_bins(); ++b) res.beam.flags[b] |= obj.flags()[b];
  return res;
}

SrpPhat::SrpPhat(const StftTensor& x, ArrayGeometry geom, const BinSelection& sel)
    : geom_(geom) {
  check_tensor(x, geom_);
  const std::vector<unsigned> flags = select_bins(x, sel);
  for (int b = 0; b < x.num_bins(); ++b) {
    if (flags[b] & kBinExcluded) continue;
    cmat norm = x.bins[b];
    for (Eigen::Index i = 0; i < norm.size(); ++i) {
      const double m = std::abs(norm(i));
      norm(i) = m > 0.0 ? norm(i) / m : cplx(0.0);
    }
    cmat g = norm * norm.adjoint() / static_cast<double>(x.frames());
    g.diagonal().setZero();
    cross_.push_back(std::move(g));
    omega_.push_back(bin_omega(b, x.sample_rate, x.fft_len));
  }
  require(!cross_.empty(), "no usable frequency bins");
}

double SrpPhat::operator()(double theta_deg) const {
  const double tau = geom_.spacing_m * theta_to_mu(theta_deg) / geom_.c;
  const int d = geom_.d;
  double acc = 0.0;
  for (std::size_t i = 0; i < cross_.size(); ++i) {
    const cvec a = ula_phase(d, omega_[i] * tau);
    acc += a.dot(cross_[i] * a).real();
  }
  return acc / (static_cast<double>(cross_.size()) * d * (d - 1));
}

SrpResult srp_phat(const StftTensor& x, const ArrayGeometry& geom, double theta_ini_deg,
                   const SrpConfig& cfg) {
  require(cfg.max_evals >= 2 && cfg.initial_step_deg > 0.0 && cfg.tol_deg > 0.0,
          "invalid SRP-PHAT search settings");
  require(std::isfinite(theta_ini_deg), "theta_ini must be finite");
  const SrpPhat srp(x, geom, cfg.bins);
  SrpResult res;
  auto eval = [&](double th) {
    ++res.evaluations;
    return -srp(std::clamp(th, 0.0, 180.0));
  };

  // One-dimensional Nelder-Mead (reflection, expansion, contraction).
  double xb = std::clamp(theta_ini_deg, 0.0, 180.0);
  double xw = xb + cfg.initial_step_deg;
  double fb = eval(xb), fw = eval(xw);
  while (res.evaluations < cfg.max_evals) {
    if (fw < fb) {
      std::swap(xb, xw);
      std::swap(fb, fw);
    }
    if (std::abs(xw - xb) < cfg.tol_deg) {
      res.converged = true;
      break;
    }
    const double xr = xb + (xb - xw);
    const double fr = eval(xr);
    if (fr < fb) {
      const double xe = xb + 2.0 * (xb - xw);
      const double fe = eval(xe);
      if (fe < fr) {
        xw = xe;
        fw = fe;
      } else {
        xw = xr;
        fw = fr;
      }
    } else if (fr < fw) {
      xw = xr;
      fw = fr;
    } else {
      xw = xb + 0.5 * (xw - xb);
      fw = eval(xw);
    }
  }
  if (fw < fb) {
    std::swap(xb, xw);
    std::swap(fb, fw);
  }
  res.theta_deg = std::clamp(xb, 0.0, 180.0);
  res.coherence = -fb;
  if (res.coherence < cfg.min_coherence) {
    res.stalled = true;
    res.theta_deg = theta_ini_deg;
  }
  return res;
}

SirReport sir_from_images(const std::vector<StftTensor>& images,
                          const std::vector<cvec>& weights, int target, int ref_channel) {
  require(images.size() >= 2, "need at least two source images");
  require(target >= 0 && target < static_cast<int>(images.size()), "target out of range");
  const int k = images[0].num_bins();
  require(static_cast<int>(weights.size()) == k, "one weight vector per bin expected");
  require(ref_channel >= 0 && ref_channel < images[0].d(), "reference channel out of range");
  std::vector<double> p_in(images.size(), 0.0), p_out(images.size(), 0.0);
  for (std::size_t j = 0; j < images.size(); ++j) {
    require(images[j].num_bins() == k && images[j].frames() == images[0].frames() &&
                images[j].d() == images[0].d(),
            "source images differ in shape");
    for (int b = 0; b < k; ++b) {
      p_in[j] += images[j].bins[b].row(ref_channel).squaredNorm();
      p_out[j] += (weights[b].adjoint() * images[j].bins[b]).squaredNorm();
    }
  }
  auto ratio_db = [&](const std::vector<double>& p) {
    double interf = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j)
      if (static_cast<int>(j) != target) interf += p[j];
    return 10.0 * std::log10(p[target] / interf);
  };
  SirReport rep;
  rep.target = target;
  rep.sir_in_db = ratio_db(p_in);
  rep.sir_out_db = ratio_db(p_out);
  return rep;
}

double projection_sir_db(const StftTensor& y, const std::vector<StftTensor>& refs,
                         int target, int channel) {
  require(refs.size() >= 2, "need at least two references");
  require(target >= 0 && target < static_cast<int>(refs.size()), "target out of range");
  const int k = y.num_bins();
  const int frames = y.frames();
  const Eigen::Index nref = static_cast<Eigen::Index>(refs.size());
  for (const StftTensor& r : refs)
    require(r.num_bins() == k && r.frames() == frames, "reference shape differs from signal");
  require(channel >= 0 && channel < y.d(), "channel out of range");

  double p_target = 0.0, p_interf = 0.0;
  cmat r(frames, nref);
  for (int b = 0; b < k; ++b) {
    for (Eigen::Index j = 0; j < nref; ++j) r.col(j) = refs[j].bins[b].row(0).transpose();
    if (r.squaredNorm() == 0.0) continue;
    const cvec yb = y.bins[b].row(channel).transpose();
    const cvec g = r.colPivHouseholderQr().solve(yb);
    cvec interf = cvec::Zero(frames);
    for (Eigen::Index j = 0; j < nref; ++j)
      if (j != target) interf += g[j] * r.col(j);
    p_target += (g[target] * r.col(target)).squaredNorm();
    p_interf += interf.squaredNorm();
  }
  return 10.0 * std::log10(p_target / p_interf);
}

}  // namespace blindcapon
