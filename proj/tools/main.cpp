#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "blindcapon/error.hpp"
#include "blindcapon/version.hpp"
#include "commands.hpp"

using namespace blindcapon::cli;

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Blind Capon beamforming: Monte Carlo studies, bounds and speaker extraction"};
  app.set_version_flag("--version", blindcapon::kVersion);
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "Monte Carlo sweep over the SOI phase parameter");
  s->add_option("--d", sim.d, "Number of sensors")->capture_default_str();
  s->add_option("--n", sim.n, "Samples per trial")->capture_default_str();
  s->add_option("--trials", sim.trials, "Trials per grid point")->capture_default_str();
  s->add_option("--lambda-grid", sim.lambda_grid, "start:stop:steps")->capture_default_str();
  s->add_option("--isir-db", sim.isir_db, "Input SIR values in dB (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  s->add_option("--methods", sim.methods, "ini,caponice,fastica,musicmpdr,espritmpdr")
      ->capture_default_str();
  s->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  s->add_option("--out", sim.out, "Output directory");
  s->add_option("--threads", sim.threads, "Worker threads (1 is the determinism reference)")
      ->capture_default_str();
  s->add_option("--init-radius", sim.init_radius, "lambda_ini = lambda* + U(-r, r)")
      ->capture_default_str();
  s->add_option("--lambda-competitor", sim.lambda_competitor)->capture_default_str();
  s->add_option("--source-law", sim.source_law, "laplacean or gaussian")->capture_default_str();
  s->add_option("--max-iters", sim.max_iters)->capture_default_str();
  s->add_option("--tol-w", sim.tol_w)->capture_default_str();
  s->add_option("--step-cap", sim.step_cap)->capture_default_str();
  s->add_option("--damping", sim.damping)->capture_default_str();
  s->add_option("--kappa-samples", sim.kappa_samples, "Samples for the empirical kappa_bar")
      ->capture_default_str();

  BoundsOptions bnd;
  auto* b = app.add_subcommand("bounds", "Cramer-Rao induced ISR bounds");
  auto* kb = b->add_option("--kappa-bar", bnd.kappa_bar, "Non-Gaussianity kappa_bar >= 1");
  b->add_option("--estimate-kappa", bnd.estimate_kappa, "Estimate kappa_bar for a source law")
      ->excludes(kb);
  b->add_option("--samples", bnd.samples)->capture_default_str();
  b->add_option("--seed", bnd.seed)->capture_default_str();
  b->add_option("--d", bnd.d)->capture_default_str();
  b->add_option("--n", bnd.n)->capture_default_str();
  b->add_option("--out", bnd.out, "Output directory");

  ExtractOptions ext;
  auto* e = app.add_subcommand("extract", "Extract one speaker from a multichannel WAV");
  e->add_option("--in", ext.in, "Multichannel mixture WAV")->required();
  e->add_option("--spacing-m", ext.spacing_m)->capture_default_str();
  e->add_option("--c", ext.c, "Speed of sound (m/s)")->capture_default_str();
  e->add_option("--theta-ini", ext.theta_ini, "Initial angle in degrees")->capture_default_str();
  e->add_option("--fft", ext.fft)->capture_default_str();
  e->add_option("--hop", ext.hop)->capture_default_str();
  e->add_option("--method", ext.method, "ive or srpphat+mpdr")->capture_default_str();
  e->add_option("--refs", ext.refs, "Reference WAVs, one per source")->delimiter(',');
  e->add_option("--target", ext.target, "Reference index of the target, or auto")
      ->capture_default_str();
  e->add_option("--min-freq", ext.min_freq, "Bins below this (Hz) are excluded")
      ->capture_default_str();
  e->add_option("--max-iters", ext.max_iters)->capture_default_str();
  e->add_option("--tol-w", ext.tol_w)->capture_default_str();
  e->add_option("--step-cap", ext.step_cap, "Max step in cos(theta)")->capture_default_str();
  e->add_option("--out", ext.out, "Output directory");
  e->add_option("--output-name", ext.output_name)->capture_default_str();

  FixtureOptions fx;
  auto* f = app.add_subcommand("make-fixture", "Synthesize the anechoic test mixture");
  f->add_option("--out", fx.out, "Output directory");
  f->add_option("--seed", fx.seed)->capture_default_str();
  f->add_option("--duration", fx.duration, "Seconds")->capture_default_str();
  f->add_option("--fs", fx.fs, "Sample rate (Hz)")->capture_default_str();
  f->add_option("--thetas", fx.thetas, "Source angles in degrees")
      ->delimiter(',')
      ->capture_default_str();
  f->add_option("--spacing-m", fx.spacing_m)->capture_default_str();
  f->add_option("--d", fx.d)->capture_default_str();
  f->add_option("--noise-db", fx.noise_db, "Sensor noise in dB, or none")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (s->parsed()) return run_simulate(sim, args);
    if (b->parsed()) return run_bounds(bnd, args);
    if (e->parsed()) return run_extract(ext, args);
    if (f->parsed()) return run_make_fixture(fx, args);
  } catch (const blindcapon::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
  return 1;
}
