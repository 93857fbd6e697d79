#include "blindcapon/stft.hpp"

#include <cmath>

#include <unsupported/Eigen/FFT>

namespace blindcapon {

void StftParams::validate() const {
  require(fft_len >= 2 && fft_len % 2 == 0, "fft_len must be even and >= 2");
  require(hop >= 1 && hop < fft_len, "hop must lie in [1, fft_len)");
}

rvec sqrt_hann(int len) {
  require(len >= 1, "window length must be positive");
  rvec w(len);
  for (int i = 0; i < len; ++i) w[i] = std::sin(kPi * i / len);  // sqrt of periodic Hann
  return w;
}

namespace {

struct Framing {
  int pad;
  int padded_len;
  int frames;
};

Framing framing(int signal_len, const StftParams& p) {
  Framing f;
  f.pad = p.fft_len - p.hop;
  const int needed = signal_len + 2 * f.pad;
  f.frames = (needed - p.fft_len + p.hop - 1) / p.hop + 1;
  f.padded_len = (f.frames - 1) * p.hop + p.fft_len;
  return f;
}

}  // namespace

StftTensor stft(const rmat& signal, double sample_rate, const StftParams& params) {
  params.validate();
  require(signal.rows() >= 1, "signal needs at least one channel");
  require(signal.cols() >= params.fft_len, "signal shorter than fft_len");
  require(sample_rate > 0.0, "sample_rate must be positive");

  const int d = static_cast<int>(signal.rows());
  const int len = static_cast<int>(signal.cols());
  const int nfft = params.fft_len;
  const int k = nfft / 2 + 1;
  const Framing f = framing(len, params);

  StftTensor out;
  out.sample_rate = sample_rate;
  out.fft_len = nfft;
  out.hop = params.hop;
  out.signal_len = len;
  out.bins.assign(k, cmat::Zero(d, f.frames));

  const rvec win = sqrt_hann(nfft);
  Eigen::FFT<double> fft;
  std::vector<double> frame(nfft);
  std::vector<cplx> spec;
  for (int ch = 0; ch < d; ++ch) {
    for (int t = 0; t < f.frames; ++t) {
      const int start = t * params.hop - f.pad;
      for (int i = 0; i < nfft; ++i) {
        const int n = start + i;
        frame[i] = (n >= 0 && n < len) ? signal(ch, n) * win[i] : 0.0;
      }
      fft.fwd(spec, frame);
      for (int b = 0; b < k; ++b) out.bins[b](ch, t) = spec[b];
    }
  }
  return out;
}

rmat istft(const StftTensor& x) {
  StftParams p{x.fft_len, x.hop};
  p.validate();
  require(x.num_bins() == x.fft_len / 2 + 1, "bin count does not match fft_len");
  const int d = x.d();
  const int nfft = x.fft_len;
  const int len = x.signal_len;
  const Framing f = framing(len, p);
  require(x.frames() == f.frames, "frame count does not match signal_len");

  const rvec win = sqrt_hann(nfft);
  rvec norm = rvec::Zero(f.padded_len);
  for (int t = 0; t < f.frames; ++t)
    norm.segment(t * x.hop, nfft) += win.cwiseAbs2();

  rmat out = rmat::Zero(d, len);
  Eigen::FFT<double> fft;
  std::vector<cplx> spec(nfft);
  std::vector<double> frame;
  for (int ch = 0; ch < d; ++ch) {
    rvec acc = rvec::Zero(f.padded_len);
    for (int t = 0; t < f.frames; ++t) {
      for (int b = 0; b <= nfft / 2; ++b) spec[b] = x.bins[b](ch, t);
      for (int b = nfft / 2 + 1; b < nfft; ++b) spec[b] = std::conj(spec[nfft - b]);
      fft.inv(frame, spec);
      for (int i = 0; i < nfft; ++i) acc[t * x.hop + i] += frame[i] * win[i];
    }
    for (int n = 0; n < len; ++n) out(ch, n) = acc[n + f.pad] / norm[n + f.pad];
  }
  return out;
}

}  // namespace blindcapon
