#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "blindcapon/capon_ive.hpp"

namespace blindcapon {

struct FixtureSpec {
  double sample_rate = 16000.0;
  double duration_s = 5.0;
  std::vector<double> theta_deg{63.43, 90.0};
  ArrayGeometry geom;
  std::uint64_t seed = 20240601;
  // White sensor noise power relative to a unit-RMS source (dB); NaN
  // disables it. Without a noise floor the per-bin covariances are rank
  // deficient and MPDR away from the sources returns STFT leakage residue.
  double noise_db = -30.0;
};

struct Fixture {
  rmat mixture;              // d x L
  std::vector<rmat> images;  // per source, d x L; mixture = sum of images (+ noise)
  rmat dry;                  // sources x L, unit RMS
};

/// Speech-shaped noise: spectrally tilted Gaussian noise under a random
/// syllable-rate on/off envelope, unit RMS.
rvec speech_shaped_noise(int len, double sample_rate, std::uint64_t seed);

/// Anechoic plane-wave mixture: microphone j receives source p advanced by
/// j * spacing * cos(theta_p) / c, applied as an exact phase shift on the
/// full-length DFT of the source (circular fractional delay).
Fixture make_anechoic_fixture(const FixtureSpec& spec);

struct StftMixture {
  StftTensor mixture;
  std::vector<StftTensor> images;
};

/// Exact per-bin phase-shift mixing of single-channel source STFTs,
/// X_k = sum_p a_k(theta_p) S_{p,k} + noise, with no trip through the time
/// domain (so the steering model holds without window mismatch).
StftMixture phase_shift_stft_mixture(const std::vector<StftTensor>& sources,
                                     const std::vector<double>& theta_deg,
                                     const ArrayGeometry& geom, double noise_db,
                                     std::uint64_t seed);

}  // namespace blindcapon
