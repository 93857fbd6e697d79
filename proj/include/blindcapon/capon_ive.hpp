#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "blindcapon/capon_ice.hpp"
#include "blindcapon/stft.hpp"

namespace blindcapon {

/// Uniform linear array; microphone j sits at x = j * spacing_m.
struct ArrayGeometry {
  double spacing_m = 0.05;
  double c = 343.0;  // m/s
  int d = 5;

  void validate() const;
};

// theta is measured from the array axis (degrees, 0 points from mic 0
// towards mic d-1, 90 is broadside). The free parameter of the broadband
// model is mu = cos(theta); the inter-sensor delay is tau = spacing * mu / c.
double theta_to_mu(double theta_deg);
double mu_to_theta(double mu);  // clamps mu to [-1, 1]

/// Angular frequency of bin k in rad/s.
double bin_omega(int k, double fs, int fft_len);

struct BroadbandSteering {
  cvec a;
  double lambda = 0.0;   // per-bin phase omega_k * tau
  bool aliased = false;  // |lambda| > pi: spatial aliasing in this bin
};

/// a_k(theta) = exp(i omega_k tau(theta) v_j), v = [0, ..., d-1].
BroadbandSteering steering_broadband(const ArrayGeometry& geom, double theta_deg,
                                     int k, double fs, int fft_len);

/// Bins used by the joint model.
struct BinSelection {
  double min_freq_hz = 100.0;
  bool exclude_dc = true;
  bool exclude_nyquist = true;
  std::vector<int> exclude;  // extra bins to drop
};

enum BinFlag : unsigned {
  kBinExcluded = 1u,  // dropped by the selection policy
  kBinSingular = 2u,  // covariance could not be factorized even after loading
  kBinAliased = 4u,   // spatial aliasing at the final angle
};

/// Joint-parameter IVE contrast over the active bins of an STFT tensor.
///
/// The joint score is phi_k(u) = conj(u_k) / (1 + sum_l |u_l|^2), with
/// u_k = s_k / sigma_k, and the contrast is
///   (1/K) [E log f(u) + sum_k background_k],  log f(u) = -log(1 + sum |u_k|^2),
/// so that its mu-derivative is the bin average of the narrowband slopes
/// times d lambda_k / d mu.
class IveObjective {
 public:
  IveObjective(const StftTensor& x, ArrayGeometry geom, const BinSelection& sel = {});

  struct State {
    double mu = 0.0;
    std::vector<cvec> a, w;     // per active bin
    std::vector<cvec> s;        // per active bin, length frames
    std::vector<SoiStatistics> stats;
    rvec radius;                // sum_k |u_k(n)|^2 per frame
  };

  const std::vector<int>& active_bins() const { return active_; }
  const std::vector<unsigned>& flags() const { return flags_; }
  int num_bins() const { return static_cast<int>(flags_.size()); }
  const ArrayGeometry& geometry() const { return geom_; }
  // d lambda_k / d mu for active bin index i.
  double lambda_rate(std::size_t i) const { return beta_[i]; }

  State state(double mu) const;
  double contrast(double mu) const;

  /// Contrast with every bin's score term scaled by 1 / nu_k and evaluated
  /// against the other bins frozen at `at`. Its mu-slope at at.mu is
  /// exactly first_derivative(at), which makes it the finite-difference
  /// oracle for the joint model (the joint log-density alone cannot carry a
  /// separate normalizer per bin).
  double partial_contrast(double mu, const State& at) const;

  /// Bin average of the narrowband slopes, each times d lambda_k / d mu.
  double first_derivative(const State& st) const;
  double second_derivative_approx(const State& st) const;

  /// Narrowband slope d C_k / d lambda_k for active bin index i.
  double bin_first_derivative(const State& st, std::size_t i) const;

 private:
  cvec bin_gradient(const State& st, std::size_t i) const;

  ArrayGeometry geom_;
  int frames_ = 0;
  std::vector<int> active_;
  std::vector<unsigned> flags_;
  std::vector<cmat> x_;          // per active bin
  std::vector<Covariance> cov_;  // per active bin
  std::vector<double> beta_;     // omega_k * spacing / c
};

struct IveConfig {
  double theta_ini_deg = 90.0;
  // lambda_ini is ignored; step_cap is in units of mu = cos(theta).
  CaponConfig newton{0.0, 100, 1e-6, 0.1, 1.0};
  BinSelection bins;
};

struct BeamformerOutput {
  std::vector<cvec> weights;  // one per bin (all bins), zero where singular
  StftTensor output;          // single-channel extracted STFT
  std::vector<unsigned> flags;
};

/// Per-bin MPDR towards theta for every bin of x.
BeamformerOutput mpdr_beamform(const StftTensor& x, const ArrayGeometry& geom,
                               double theta_deg, const BinSelection& sel = {});

struct IveResult {
  double theta_hat_deg = 0.0;
  double mu_hat = 0.0;
  bool mu_out_of_range = false;  // |mu| > 1, theta is clamped
  int iterations = 0;
  bool converged = false;
  int fallback_steps = 0;
  std::vector<double> theta_trace;
  std::vector<double> contrast_trace;
  BeamformerOutput beam;
};

/// Newton iteration on mu shared by all frequency bins.
IveResult run_ive(const StftTensor& x, const ArrayGeometry& geom, const IveConfig& cfg = {});

struct SrpConfig {
  BinSelection bins;
  int max_evals = 200;
  double initial_step_deg = 2.0;
  double tol_deg = 1e-4;
  // Peak normalized SRP below this counts as "no spatial structure".
  double min_coherence = 0.05;
};

struct SrpResult {
  double theta_deg = 0.0;
  double coherence = 0.0;  // normalized steered response at theta_deg, in [-1, 1]
  int evaluations = 0;
  bool converged = false;  // simplex shrank below tol_deg
  bool stalled = false;    // no spatial coherence; theta_ini returned unchanged
};

/// Normalized SRP-PHAT response at theta (1 for a perfectly coherent source).
class SrpPhat {
 public:
  SrpPhat(const StftTensor& x, ArrayGeometry geom, const BinSelection& sel = {});
  double operator()(double theta_deg) const;

 private:
  ArrayGeometry geom_;
  std::vector<double> omega_;
  std::vector<cmat> cross_;  // per bin, frame-averaged PHAT cross-spectra
};

/// Local maximum of the SRP-PHAT response by Nelder-Mead from theta_ini.
SrpResult srp_phat(const StftTensor& x, const ArrayGeometry& geom, double theta_ini_deg,
                   const SrpConfig& cfg = {});

struct SirReport {
  int target = 0;
  double sir_in_db = 0.0;
  double sir_out_db = 0.0;
  double improvement_db() const { return sir_out_db - sir_in_db; }
};

/// SIR from per-source multichannel images (STFTs of each source's
/// contribution at the microphones). Input SIR is measured on ref_channel.
SirReport sir_from_images(const std::vector<StftTensor>& images,
                          const std::vector<cvec>& weights, int target,
                          int ref_channel = 0);

/// SIR of a single-channel STFT y by per-bin least-squares projection on
/// single-channel references (channel 0 of each tensor).
double projection_sir_db(const StftTensor& y, const std::vector<StftTensor>& refs,
                         int target, int channel = 0);

}  // namespace blindcapon
