#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "blindcapon/bounds.hpp"
#include "blindcapon/capon_ive.hpp"
#include "blindcapon/fixture.hpp"
#include "blindcapon/monte_carlo.hpp"
#include "blindcapon/wav.hpp"
#include "report.hpp"

namespace fs = std::filesystem;

namespace blindcapon::cli {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

// "a:b:steps" -> steps points from a to b inclusive.
std::vector<double> parse_grid(const std::string& spec) {
  const auto parts = split(spec, ':');
  require(parts.size() == 3, "grid must look like start:stop:steps");
  const double a = std::stod(parts[0]);
  const double b = std::stod(parts[1]);
  const int steps = std::stoi(parts[2]);
  require(steps >= 1, "grid needs at least one step");
  std::vector<double> g;
  for (int i = 0; i < steps; ++i) g.push_back(steps == 1 ? a : a + (b - a) * i / (steps - 1));
  return g;
}

fs::path prepare_dir(const std::string& flag) {
  const fs::path dir = resolve_out_dir(flag);
  fs::create_directories(dir);
  return dir;
}

json crib_json(double kappa_bar, int d, int n) {
  const CribReport r = crib_report(kappa_bar, d, n);
  json j = {{"kappa_bar", num(kappa_bar)}, {"d", d}, {"n", n}, {"identifiable", r.identifiable}};
  if (r.identifiable) {
    j["crib_ice"] = num(*r.crib_ice);
    j["crib_capon"] = num(*r.crib_capon);
    j["crib_ice_db"] = num(*r.crib_ice_db);
    j["crib_capon_db"] = num(*r.crib_capon_db);
  }
  return j;
}

KappaEstimate estimate_kappa(SourceLaw law, int samples, std::uint64_t seed) {
  require(samples >= 2, "need at least two samples");
  std::mt19937_64 rng(seed);
  const cvec s = draw_sources(law, samples, rng);
  return empirical_kappa_bar(s, law == SourceLaw::Laplacean ? laplace_score(1.0)
                                                            : gaussian_score(1.0));
}

StftTensor load_stft(const std::string& path, const StftParams& p, double* fs_out = nullptr) {
  const WavData w = read_wav(path);
  if (fs_out) *fs_out = w.sample_rate;
  return stft(w.samples, w.sample_rate, p);
}

json flag_lists(const std::vector<unsigned>& flags) {
  json j = {{"excluded", json::array()}, {"singular", json::array()}, {"aliased", json::array()}};
  for (std::size_t k = 0; k < flags.size(); ++k) {
    if (flags[k] & kBinExcluded) j["excluded"].push_back(k);
    if (flags[k] & kBinSingular) j["singular"].push_back(k);
    if (flags[k] & kBinAliased) j["aliased"].push_back(k);
  }
  return j;
}

}  // namespace

int run_simulate(const SimulateOptions& o, const std::vector<std::string>& argv) {
  SweepSpec spec;
  spec.d = o.d;
  spec.n = o.n;
  spec.trials = o.trials;
  spec.master_seed = o.seed;
  spec.threads = o.threads;
  spec.init_radius = o.init_radius;
  spec.lambda_competitor = o.lambda_competitor;
  spec.source_law = parse_source_law(o.source_law);
  spec.capon.max_iters = o.max_iters;
  spec.capon.tol_w = o.tol_w;
  spec.capon.step_cap = o.step_cap;
  spec.capon.damping = o.damping;
  require(o.d >= 3, "the competitor construction needs d >= 3");
  require(o.n >= o.d, "need n >= d");
  require(o.trials >= 1, "trials must be >= 1");
  require(o.init_radius >= 0.0, "init radius must be non-negative");
  require(!o.isir_db.empty(), "need at least one iSIR value");
  for (const auto& name : split(o.methods, ',')) spec.methods.push_back(parse_method(name));
  for (double isir : o.isir_db)
    for (double l : parse_grid(o.lambda_grid)) spec.grid.push_back({l, isir});

  RunManifest manifest("simulate", argv);
  manifest.set_seed(o.seed);
  manifest.flags() = {{"d", o.d}, {"n", o.n}, {"trials", o.trials},
                      {"lambda_grid", o.lambda_grid}, {"isir_db", o.isir_db},
                      {"methods", o.methods}, {"seed", o.seed}, {"threads", o.threads},
                      {"init_radius", o.init_radius},
                      {"lambda_competitor", o.lambda_competitor},
                      {"source_law", o.source_law}, {"max_iters", o.max_iters},
                      {"tol_w", o.tol_w}, {"step_cap", o.step_cap}, {"damping", o.damping},
                      {"kappa_samples", o.kappa_samples}};

  const std::vector<TrialRecord> records = run_sweep(spec);
  const fs::path dir = prepare_dir(o.out);

  const fs::path csv = dir / "trials.csv";
  {
    std::ofstream f(csv);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + csv.string());
    write_trials_csv(f, records);
  }
  manifest.add_output(csv);

  const double kappa = analytic_kappa_bar(spec.source_law);
  const KappaEstimate est = estimate_kappa(spec.source_law, o.kappa_samples, o.seed);
  json summary;
  summary["d"] = o.d;
  summary["n"] = o.n;
  summary["trials"] = o.trials;
  summary["master_seed"] = o.seed;
  summary["source_law"] = std::string(to_string(spec.source_law));
  summary["kappa_bar"] = {{"analytic", num(kappa)},
                          {"empirical", num(est.value)},
                          {"stderr", num(est.stderr_)},
                          {"samples", o.kappa_samples}};
  summary["bounds"] = crib_json(kappa, o.d, o.n);
  json points = json::array();
  for (const Aggregate& a : aggregate(records)) {
    int errors = 0;
    for (const TrialRecord& r : records)
      if (r.grid_index == a.grid_index && r.method == a.method && !r.error.empty()) ++errors;
    points.push_back({{"grid_index", a.grid_index},
                      {"lambda_star", num(a.point.lambda_star)},
                      {"isir_db", num(a.point.isir_db)},
                      {"method", std::string(to_string(a.method))},
                      {"trials", a.trials},
                      {"successes", a.successes},
                      {"success_rate", num(a.success_rate)},
                      {"mean_sir_db", num(a.mean_sir_db)},
                      {"sir_stderr_db", num(a.sir_stderr_db)},
                      {"mean_isr", num(a.mean_isr)},
                      {"isr_stderr", num(a.isr_stderr)},
                      {"errors", errors}});
  }
  summary["points"] = std::move(points);
  const fs::path sj = dir / "summary.json";
  write_json(sj, summary);
  manifest.add_output(sj);
  manifest.write(dir);
  std::cout << "wrote " << records.size() << " trial records to " << csv.string() << '\n';
  return 0;
}

int run_bounds(const BoundsOptions& o, const std::vector<std::string>& argv) {
  require(o.kappa_bar.has_value() != !o.estimate_kappa.empty(),
          "give exactly one of --kappa-bar or --estimate-kappa");
  RunManifest manifest("bounds", argv);
  manifest.flags() = {{"d", o.d}, {"n", o.n}};
  json out;
  double kappa = 0.0;
  if (o.kappa_bar) {
    kappa = *o.kappa_bar;
    manifest.flags()["kappa_bar"] = kappa;
  } else {
    const SourceLaw law = parse_source_law(o.estimate_kappa);
    const KappaEstimate est = estimate_kappa(law, o.samples, o.seed);
    kappa = std::max(est.value, 1.0);  // sampling noise can dip a Gaussian below 1
    manifest.flags()["estimate_kappa"] = o.estimate_kappa;
    manifest.flags()["samples"] = o.samples;
    manifest.flags()["seed"] = o.seed;
    manifest.set_seed(o.seed);
    out["kappa_estimate"] = {{"law", o.estimate_kappa},
                             {"value", num(est.value)},
                             {"stderr", num(est.stderr_)},
                             {"samples", o.samples}};
  }
  const json bounds = crib_json(kappa, o.d, o.n);
  out.update(bounds);
  std::cout << out.dump(2) << '\n';

  const fs::path dir = prepare_dir(o.out);
  const fs::path path = dir / "bounds.json";
  write_json(path, out);
  manifest.add_output(path);
  manifest.write(dir);
  return 0;
}

int run_extract(const ExtractOptions& o, const std::vector<std::string>& argv) {
  require(!o.in.empty(), "--in is required");
  require(o.method == "ive" || o.method == "srpphat+mpdr",
          "--method must be ive or srpphat+mpdr");
  const StftParams params{o.fft, o.hop};
  params.validate();
  double fs_in = 0.0;
  const StftTensor x = load_stft(o.in, params, &fs_in);
  ArrayGeometry geom{o.spacing_m, o.c, x.d()};
  geom.validate();

  RunManifest manifest("extract", argv);
  manifest.flags() = {{"in", o.in}, {"spacing_m", o.spacing_m}, {"c", o.c},
                      {"theta_ini", o.theta_ini}, {"fft", o.fft}, {"hop", o.hop},
                      {"method", o.method}, {"refs", o.refs}, {"target", o.target},
                      {"min_freq", o.min_freq}, {"max_iters", o.max_iters},
                      {"tol_w", o.tol_w}, {"step_cap", o.step_cap}};

  BinSelection bins;
  bins.min_freq_hz = o.min_freq;
  json report;
  report["method"] = o.method;
  report["theta_ini_deg"] = num(o.theta_ini);
  report["sample_rate"] = num(fs_in);
  report["channels"] = x.d();
  BeamformerOutput beam;
  if (o.method == "ive") {
    IveConfig cfg;
    cfg.theta_ini_deg = o.theta_ini;
    cfg.bins = bins;
    cfg.newton.max_iters = o.max_iters;
    cfg.newton.tol_w = o.tol_w;
    cfg.newton.step_cap = o.step_cap;
    IveResult r = run_ive(x, geom, cfg);
    report["theta_hat_deg"] = num(r.theta_hat_deg);
    report["mu_hat"] = num(r.mu_hat);
    report["mu_out_of_range"] = r.mu_out_of_range;
    report["iterations"] = r.iterations;
    report["converged"] = r.converged;
    report["fallback_steps"] = r.fallback_steps;
    beam = std::move(r.beam);
  } else {
    SrpConfig cfg;
    cfg.bins = bins;
    const SrpResult r = srp_phat(x, geom, o.theta_ini, cfg);
    report["theta_hat_deg"] = num(r.theta_deg);
    report["coherence"] = num(r.coherence);
    report["evaluations"] = r.evaluations;
    report["converged"] = r.converged;
    report["stalled"] = r.stalled;
    beam = mpdr_beamform(x, geom, r.theta_deg, bins);
  }
  report["per_bin_flags"] = flag_lists(beam.flags);

  if (!o.refs.empty()) {
    require(o.refs.size() >= 2, "--refs needs at least two files");
    std::vector<StftTensor> refs;
    bool images = true;
    for (const auto& path : o.refs) {
      double fs_ref = 0.0;
      refs.push_back(load_stft(path, params, &fs_ref));
      require(fs_ref == fs_in, "reference sample rate differs from the mixture");
      require(refs.back().frames() == x.frames(), "reference length differs from the mixture");
      images = images && refs.back().d() == x.d();
    }
    const int nref = static_cast<int>(refs.size());
    std::vector<SirReport> reps;
    for (int t = 0; t < nref; ++t) {
      if (images) {
        reps.push_back(sir_from_images(refs, beam.weights, t));
      } else {
        SirReport r;
        r.target = t;
        r.sir_in_db = projection_sir_db(x, refs, t, 0);
        r.sir_out_db = projection_sir_db(beam.output, refs, t, 0);
        reps.push_back(r);
      }
    }
    int target = 0;
    if (o.target == "auto") {
      for (int t = 1; t < nref; ++t)
        if (reps[t].sir_out_db > reps[target].sir_out_db) target = t;
    } else {
      target = std::stoi(o.target);
      require(target >= 0 && target < nref, "--target out of range");
    }
    report["sir_method"] = images ? "images" : "projection";
    report["target"] = target;
    report["sir_in_db"] = num(reps[target].sir_in_db);
    report["sir_out_db"] = num(reps[target].sir_out_db);
    report["sir_improvement_db"] = num(reps[target].improvement_db());
  }

  const fs::path dir = prepare_dir(o.out);
  const fs::path wav = dir / o.output_name;
  write_wav(wav.string(), istft(beam.output), fs_in, WavEncoding::Float32);
  manifest.add_output(wav);
  const fs::path rj = dir / "report.json";
  write_json(rj, report);
  manifest.add_output(rj);
  manifest.write(dir);
  std::cout << report.dump(2) << '\n';
  return 0;
}

int run_make_fixture(const FixtureOptions& o, const std::vector<std::string>& argv) {
  FixtureSpec spec;
  spec.sample_rate = o.fs;
  spec.duration_s = o.duration;
  spec.theta_deg = o.thetas;
  spec.geom = ArrayGeometry{o.spacing_m, 343.0, o.d};
  spec.seed = o.seed;
  spec.noise_db = o.noise_db == "none" ? std::nan("") : std::stod(o.noise_db);
  const Fixture fx = make_anechoic_fixture(spec);

  RunManifest manifest("make-fixture", argv);
  manifest.set_seed(o.seed);
  manifest.flags() = {{"seed", o.seed}, {"duration", o.duration}, {"fs", o.fs},
                      {"thetas", o.thetas}, {"spacing_m", o.spacing_m}, {"d", o.d},
                      {"noise_db", o.noise_db}};

  const fs::path dir = prepare_dir(o.out);
  json truth;
  truth["theta_deg"] = o.thetas;
  truth["sample_rate"] = num(o.fs);
  truth["spacing_m"] = num(o.spacing_m);
  truth["c"] = num(spec.geom.c);
  truth["d"] = o.d;
  truth["seed"] = o.seed;
  truth["noise_db"] = o.noise_db;
  const fs::path mix = dir / "mix.wav";
  write_wav(mix.string(), fx.mixture, o.fs);
  manifest.add_output(mix);
  truth["mixture"] = mix.filename().string();
  truth["images"] = json::array();
  for (std::size_t p = 0; p < fx.images.size(); ++p) {
    const fs::path img = dir / ("image_" + std::to_string(p) + ".wav");
    write_wav(img.string(), fx.images[p], o.fs);
    manifest.add_output(img);
    truth["images"].push_back(img.filename().string());
  }
  truth["dry"] = json::array();
  for (Eigen::Index p = 0; p < fx.dry.rows(); ++p) {
    const fs::path dry = dir / ("dry_" + std::to_string(p) + ".wav");
    write_wav(dry.string(), fx.dry.row(p), o.fs);
    manifest.add_output(dry);
    truth["dry"].push_back(dry.filename().string());
  }
  const fs::path tj = dir / "fixture.json";
  write_json(tj, truth);
  manifest.add_output(tj);
  manifest.write(dir);
  std::cout << "wrote fixture to " << dir.string() << '\n';
  return 0;
}

}  // namespace blindcapon::cli
