#include "blindcapon/fixture.hpp"

#include <cmath>
#include <random>

#include <unsupported/Eigen/FFT>

namespace blindcapon {

rvec speech_shaped_noise(int len, double sample_rate, std::uint64_t seed) {
  require(len >= 2 && sample_rate > 0.0, "invalid noise length or sample rate");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // One-pole low-pass tilt, roughly -6 dB/octave above a few hundred Hz.
  rvec x(len);
  double y = 0.0;
  for (int n = 0; n < len; ++n) {
    y = 0.9 * y + gauss(rng);
    x[n] = y;
  }

  // Syllable-like segments of 80-300 ms with log-uniform gain between -30
  // and 0 dB, joined by 10 ms raised-cosine ramps.
  rvec env(len);
  const int ramp = std::max(1, static_cast<int>(0.01 * sample_rate));
  double prev_gain = 0.0;
  int n = 0;
  while (n < len) {
    const int seg = static_cast<int>((0.08 + 0.22 * unif(rng)) * sample_rate);
    const double gain = std::pow(10.0, -1.5 * unif(rng));
    for (int i = 0; i < seg && n < len; ++i, ++n) {
      const double r = i < ramp ? 0.5 - 0.5 * std::cos(kPi * i / ramp) : 1.0;
      env[n] = prev_gain + r * (gain - prev_gain);
    }
    prev_gain = gain;
  }
  x = x.cwiseProduct(env);
  return x / std::sqrt(x.squaredNorm() / len);
}

Fixture make_anechoic_fixture(const FixtureSpec& spec) {
  spec.geom.validate();
  require(!spec.theta_deg.empty(), "need at least one source");
  require(spec.sample_rate > 0.0 && spec.duration_s > 0.0, "invalid duration or rate");
  const int len = static_cast<int>(std::lround(spec.sample_rate * spec.duration_s));
  require(len >= 16, "fixture too short");
  const int d = spec.geom.d;
  const int nsrc = static_cast<int>(spec.theta_deg.size());

  Fixture fx;
  fx.dry.resize(nsrc, len);
  fx.mixture = rmat::Zero(d, len);
  Eigen::FFT<double> fft;
  std::vector<double> buf(len), out;
  std::vector<cplx> spec_src, shifted(len);
  for (int p = 0; p < nsrc; ++p) {
    const rvec s = speech_shaped_noise(len, spec.sample_rate, spec.seed + 7919u * (p + 1));
    fx.dry.row(p) = s.transpose();
    for (int n = 0; n < len; ++n) buf[n] = s[n];
    fft.fwd(spec_src, buf);
    const double tau = spec.geom.spacing_m * theta_to_mu(spec.theta_deg[p]) / spec.geom.c;
    rmat img(d, len);
    for (int j = 0; j < d; ++j) {
      for (int b = 0; b < len; ++b) {
        // Signed frequency of DFT bin b; the Nyquist bin of even lengths
        // has no well-defined sign and is dropped.
        if (len % 2 == 0 && b == len / 2) {
          shifted[b] = 0.0;
          continue;
        }
        const int f = b <= len / 2 ? b : b - len;
        const double omega = 2.0 * kPi * f * spec.sample_rate / len;
        shifted[b] = spec_src[b] * std::polar(1.0, omega * tau * j);
      }
      fft.inv(out, shifted);
      for (int n = 0; n < len; ++n) img(j, n) = out[n];
    }
    fx.mixture += img;
    fx.images.push_back(std::move(img));
  }
  if (std::isfinite(spec.noise_db)) {
    std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ull);
    const double std = std::sqrt(std::pow(10.0, spec.noise_db / 10.0));
    std::normal_distribution<double> gauss(0.0, std);
    for (Eigen::Index i = 0; i < fx.mixture.size(); ++i) fx.mixture(i) += gauss(rng);
  }
  return fx;
}

StftMixture phase_shift_stft_mixture(const std::vector<StftTensor>& sources,
                                     const std::vector<double>& theta_deg,
                                     const ArrayGeometry& geom, double noise_db,
                                     std::uint64_t seed) {
  geom.validate();
  require(!sources.empty() && sources.size() == theta_deg.size(),
          "need one angle per source");
  const StftTensor& ref = sources[0];
  StftMixture out;
  out.mixture = ref;
  out.mixture.bins.assign(ref.num_bins(), cmat::Zero(geom.d, ref.frames()));
  for (std::size_t p = 0; p < sources.size(); ++p) {
    const StftTensor& s = sources[p];
    require(s.d() == 1 && s.num_bins() == ref.num_bins() && s.frames() == ref.frames(),
            "sources must be single-channel STFTs of equal shape");
    StftTensor img = out.mixture;
    for (int k = 0; k < s.num_bins(); ++k) {
      const cvec a = steering_broadband(geom, theta_deg[p], k, s.sample_rate, s.fft_len).a;
      img.bins[k] = a * s.bins[k];
      out.mixture.bins[k] += img.bins[k];
    }
    out.images.push_back(std::move(img));
  }
  if (std::isfinite(noise_db)) {
    std::mt19937_64 rng(seed);
    // White time-domain noise of this variance has E|X_k|^2 = var * sum(win^2)
    // = var * fft_len / 2 per bin; split evenly over real and imaginary parts.
    const double var = std::pow(10.0, noise_db / 10.0) * ref.fft_len / 4.0;
    std::normal_distribution<double> gauss(0.0, std::sqrt(var));
    for (cmat& b : out.mixture.bins)
      for (Eigen::Index i = 0; i < b.size(); ++i) b(i) += cplx(gauss(rng), gauss(rng));
  }
  return out;
}

}  // namespace blindcapon
