#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "blindcapon/baselines.hpp"
#include "blindcapon/capon_ice.hpp"

namespace blindcapon {

enum class SourceLaw { Laplacean, Gaussian };

std::string_view to_string(SourceLaw law);
SourceLaw parse_source_law(std::string_view name);

/// n i.i.d. zero-mean unit-variance complex samples. Laplacean samples are
/// (L1 + i L2) / sqrt(2) with L1, L2 unit-variance real Laplace.
cvec draw_sources(SourceLaw law, int n, std::mt19937_64& rng);

/// Analytic kappa_bar of the unit-variance law (2 for Laplacean, 1 for Gaussian).
double analytic_kappa_bar(SourceLaw law);

struct MixtureSpec {
  int d = 5;
  int n = 500;
  double lambda_star = 0.0;
  double lambda_competitor = 0.25;
  double isir_db = 0.0;
  SourceLaw source_law = SourceLaw::Laplacean;
  // Law of sources 2..d; defaults to source_law.
  std::optional<SourceLaw> interferer_law;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Mixture {
  SnapshotMatrix x;
  cmat mixing;          // d x d, columns 0 and 1 are a(lambda*) and a(lambda_competitor)
  rvec source_powers;   // power of each source, SOI first
  cmat sources;         // d x N scaled sources, x = mixing * sources
};

/// Mixture with the SOI first; source powers make the SOI-to-total-
/// interference power ratio on every channel equal to isir_db.
Mixture generate_mixture(const MixtureSpec& spec);

inline constexpr double kSirCapDb = 150.0;

/// Output SIR in dB of s = w^H x, clamped to +/-150 dB.
double output_sir(const cvec& w, const cmat& mixing, const rvec& source_powers,
                  int soi_index = 0);

enum class Method { Ini, CaponIce, FastIca, MusicMpdr, EspritMpdr };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

struct GridPoint {
  double lambda_star = 0.0;
  double isir_db = 0.0;
};

struct SweepSpec {
  int d = 5;
  int n = 500;
  std::vector<GridPoint> grid;
  std::vector<Method> methods;
  int trials = 200;
  std::uint64_t master_seed = 1;
  double init_radius = 0.1;
  double lambda_competitor = 0.25;
  SourceLaw source_law = SourceLaw::Laplacean;
  int doa_sources = 2;  // structured sources: SOI and competitor
  CaponConfig capon;    // lambda_ini is overwritten per trial
  FastIcaConfig fastica;
  int threads = 1;
};

/// Seed shared by every method of one (grid point, trial) pair.
std::uint64_t trial_seed(std::uint64_t master, int grid_index, int trial);

struct TrialRecord {
  int grid_index = 0;
  int trial = 0;
  MixtureSpec spec;
  Method method = Method::CaponIce;
  double lambda_ini = 0.0;
  std::optional<double> lambda_hat;
  double sir_out_db = -kSirCapDb;
  bool success = false;  // sir_out_db > 3 dB
  int iterations = 0;
  double runtime_s = 0.0;
  std::string error;  // empty unless the method raised
};

inline constexpr double kSuccessThresholdDb = 3.0;

/// Runs every (grid point, trial, method). Failures are recorded, never
/// thrown. Output is sorted by (grid_index, trial, method order in spec).
std::vector<TrialRecord> run_sweep(const SweepSpec& spec);

struct Aggregate {
  int grid_index = 0;
  GridPoint point;
  Method method = Method::CaponIce;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  // Over successful trials only; NaN when there are none.
  double mean_sir_db = 0.0;
  double sir_stderr_db = 0.0;
  double mean_isr = 0.0;
  double isr_stderr = 0.0;
};

std::vector<Aggregate> aggregate(const std::vector<TrialRecord>& records);

/// Formats with 9 significant digits.
std::string format_number(double value);

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records);

}  // namespace blindcapon
