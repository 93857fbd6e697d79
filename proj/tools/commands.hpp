#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace blindcapon::cli {

struct SimulateOptions {
  int d = 5;
  int n = 500;
  int trials = 200;
  std::string lambda_grid = "-1:1:21";
  std::vector<double> isir_db{0.0};
  std::string methods = "caponice,fastica";
  std::uint64_t seed = 1;
  std::string out;
  int threads = 1;
  double init_radius = 0.1;
  double lambda_competitor = 0.25;
  std::string source_law = "laplacean";
  int max_iters = 100;
  double tol_w = 1e-6;
  double step_cap = 0.5;
  double damping = 1.0;
  int kappa_samples = 1000000;
};

struct BoundsOptions {
  std::optional<double> kappa_bar;
  std::string estimate_kappa;  // source law name, empty when kappa_bar is given
  int samples = 1000000;
  std::uint64_t seed = 1;
  int d = 5;
  int n = 500;
  std::string out;
};

struct ExtractOptions {
  std::string in;
  double spacing_m = 0.05;
  double c = 343.0;
  double theta_ini = 90.0;
  int fft = 1024;
  int hop = 128;
  std::string method = "ive";
  std::vector<std::string> refs;
  std::string target = "auto";
  double min_freq = 100.0;
  int max_iters = 100;
  double tol_w = 1e-6;
  double step_cap = 0.1;
  std::string out;
  std::string output_name = "extracted.wav";
};

struct FixtureOptions {
  std::string out;
  std::uint64_t seed = 20240601;
  double duration = 5.0;
  double fs = 16000.0;
  std::vector<double> thetas{63.43, 90.0};
  double spacing_m = 0.05;
  int d = 5;
  std::string noise_db = "-30";  // "none" disables sensor noise
};

// Each returns the process exit code; argv is recorded in the manifest.
int run_simulate(const SimulateOptions& o, const std::vector<std::string>& argv);
int run_bounds(const BoundsOptions& o, const std::vector<std::string>& argv);
int run_extract(const ExtractOptions& o, const std::vector<std::string>& argv);
int run_make_fixture(const FixtureOptions& o, const std::vector<std::string>& argv);

}  // namespace blindcapon::cli
