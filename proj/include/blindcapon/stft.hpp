#pragma once

#include <vector>

#include "blindcapon/core.hpp"

namespace blindcapon {

struct StftParams {
  int fft_len = 1024;
  int hop = 128;

  void validate() const;
};

/// Multichannel STFT stored bin-major: bins[k] is d x frames.
struct StftTensor {
  std::vector<cmat> bins;  // fft_len / 2 + 1 entries
  double sample_rate = 0.0;
  int fft_len = 0;
  int hop = 0;
  int signal_len = 0;  // length of the time signal it came from

  int num_bins() const { return static_cast<int>(bins.size()); }
  int d() const { return bins.empty() ? 0 : static_cast<int>(bins[0].rows()); }
  int frames() const { return bins.empty() ? 0 : static_cast<int>(bins[0].cols()); }
};

/// Periodic square-root Hann window of the given length.
rvec sqrt_hann(int len);

/// Analysis with a square-root Hann window. The signal (d x L, L >= fft_len)
/// is zero padded by fft_len - hop on both sides so that every sample is
/// covered by the same number of frames.
StftTensor stft(const rmat& signal, double sample_rate, const StftParams& params = {});

/// Weighted overlap-add inverse; returns d x signal_len.
rmat istft(const StftTensor& x);

}  // namespace blindcapon
