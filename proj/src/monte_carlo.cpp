#include "blindcapon/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <thread>

namespace blindcapon {

std::string_view to_string(SourceLaw law) {
  return law == SourceLaw::Laplacean ? "laplacean" : "gaussian";
}

SourceLaw parse_source_law(std::string_view name) {
  if (name == "laplacean" || name == "laplace") return SourceLaw::Laplacean;
  if (name == "gaussian") return SourceLaw::Gaussian;
  throw Error(ErrorCode::InvalidArgument, "unknown source law: " + std::string(name));
}

cvec draw_sources(SourceLaw law, int n, std::mt19937_64& rng) {
  require(n >= 1, "need at least one sample");
  cvec s(n);
  if (law == SourceLaw::Gaussian) {
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    for (int i = 0; i < n; ++i) s[i] = cplx(g(rng), g(rng));
    return s;
  }
  // Real Laplace with scale 1/2 (variance 1/2) by inverse CDF.
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  auto laplace = [&] {
    const double p = u(rng);
    const double sgn = (p > 0.0) - (p < 0.0);
    return -0.5 * sgn * std::log1p(-2.0 * std::abs(p));
  };
  for (int i = 0; i < n; ++i) {
    const double re = laplace();
    s[i] = cplx(re, laplace());
  }
  return s;
}

double analytic_kappa_bar(SourceLaw law) {
  return law == SourceLaw::Laplacean ? 2.0 : 1.0;
}

void MixtureSpec::validate() const {
  require(d >= 3, "mixture needs d >= 3 for the competitor construction");
  require(n >= 1, "mixture needs N >= 1");
  require(std::isfinite(isir_db), "isir_db must be finite");
  require(std::isfinite(lambda_star) && std::isfinite(lambda_competitor),
          "steering parameters must be finite");
}

Mixture generate_mixture(const MixtureSpec& spec) {
  spec.validate();
  const int d = spec.d;
  std::mt19937_64 rng(spec.seed);
  const SteeringModel ula = SteeringModel::ula(d);

  cmat mixing(d, d);
  mixing.col(0) = steering(ula, spec.lambda_star);
  mixing.col(1) = steering(ula, spec.lambda_competitor);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  for (int j = 2; j < d; ++j)
    for (int i = 0; i < d; ++i) mixing(i, j) = std::polar(1.0, phase(rng));

  // Every entry has unit modulus, so each channel sees the SOI with power
  // p0 and the interference with power sum_{j>0} p_j.
  rvec powers = rvec::Ones(d);
  powers[0] = (d - 1) * std::pow(10.0, spec.isir_db / 10.0);

  cmat sources(d, spec.n);
  const SourceLaw other = spec.interferer_law.value_or(spec.source_law);
  for (int j = 0; j < d; ++j) {
    const cvec u = draw_sources(j == 0 ? spec.source_law : other, spec.n, rng);
    sources.row(j) = u.transpose() * std::sqrt(powers[j]);
  }
  cmat x = mixing * sources;
  return Mixture{SnapshotMatrix(std::move(x)), std::move(mixing), std::move(powers),
                 std::move(sources)};
}

double output_sir(const cvec& w, const cmat& mixing, const rvec& source_powers,
                  int soi_index) {
  require(w.size() == mixing.rows(), "w and mixing dimensions differ");
  require(source_powers.size() == mixing.cols(), "one power per source required");
  require(soi_index >= 0 && soi_index < mixing.cols(), "soi_index out of range");
  double signal = 0.0, interference = 0.0;
  for (Eigen::Index j = 0; j < mixing.cols(); ++j) {
    const double p = std::norm(w.dot(mixing.col(j))) * source_powers[j];
    (j == soi_index ? signal : interference) += p;
  }
  if (!(interference > 0.0)) return signal > 0.0 ? kSirCapDb : -kSirCapDb;
  if (!(signal > 0.0)) return -kSirCapDb;
  return std::clamp(10.0 * std::log10(signal / interference), -kSirCapDb, kSirCapDb);
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Ini: return "ini";
    case Method::CaponIce: return "caponice";
    case Method::FastIca: return "fastica";
    case Method::MusicMpdr: return "musicmpdr";
    case Method::EspritMpdr: return "espritmpdr";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::Ini, Method::CaponIce, Method::FastIca, Method::MusicMpdr,
                   Method::EspritMpdr})
    if (to_string(m) == name) return m;
  throw Error(ErrorCode::InvalidArgument, "unknown method: " + std::string(name));
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

struct TrialJob {
  int grid_index;
  int trial;
};

void run_trial(const SweepSpec& spec, const TrialJob& job, TrialRecord* out) {
  const GridPoint& gp = spec.grid[job.grid_index];
  MixtureSpec ms;
  ms.d = spec.d;
  ms.n = spec.n;
  ms.lambda_star = gp.lambda_star;
  ms.lambda_competitor = spec.lambda_competitor;
  ms.isir_db = gp.isir_db;
  ms.source_law = spec.source_law;
  ms.seed = trial_seed(spec.master_seed, job.grid_index, job.trial);

  std::mt19937_64 init_rng(mix(ms.seed, 0x1217));
  std::uniform_real_distribution<double> offset(-spec.init_radius, spec.init_radius);
  const double lambda_ini = gp.lambda_star + offset(init_rng);

  const Mixture mixture = generate_mixture(ms);
  const SteeringModel ula = SteeringModel::ula(spec.d);
  const Nonlinearity phi = rational_nonlinearity();
  const cmat c_x = sample_covariance(mixture.x);

  for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
    TrialRecord& rec = out[mi];
    rec.grid_index = job.grid_index;
    rec.trial = job.trial;
    rec.spec = ms;
    rec.method = spec.methods[mi];
    rec.lambda_ini = lambda_ini;

    const auto t0 = std::chrono::steady_clock::now();
    try {
      cvec w;
      switch (rec.method) {
        case Method::Ini:
          w = mpdr_weights(c_x, steering(ula, lambda_ini)).w;
          rec.lambda_hat = lambda_ini;
          break;
        case Method::CaponIce: {
          CaponConfig cfg = spec.capon;
          cfg.lambda_ini = lambda_ini;
          const CaponResult r = run_capon_ice(mixture.x, ula, phi, cfg);
          w = r.state.w;
          rec.lambda_hat = r.state.lambda;
          rec.iterations = r.iterations;
          break;
        }
        case Method::FastIca: {
          const cvec w_ini = mpdr_weights(c_x, steering(ula, lambda_ini)).w;
          const FastIcaResult r = fastica_one_unit(mixture.x, phi, w_ini, spec.fastica);
          w = r.state.w;
          rec.iterations = r.iterations;
          if (!r.converged) rec.error = "NotConverged";
          break;
        }
        case Method::MusicMpdr:
        case Method::EspritMpdr: {
          const DoaEstimate est = rec.method == Method::MusicMpdr
                                      ? root_music(c_x, spec.doa_sources, lambda_ini)
                                      : tls_esprit(c_x, spec.doa_sources, lambda_ini);
          w = mpdr_weights(c_x, steering(ula, est.lambda_hat)).w;
          rec.lambda_hat = est.lambda_hat;
          break;
        }
      }
      rec.sir_out_db = output_sir(w, mixture.mixing, mixture.source_powers, 0);
    } catch (const Error& e) {
      rec.error = std::string(to_string(e.code()));
      rec.sir_out_db = -kSirCapDb;
    }
    rec.success = rec.sir_out_db > kSuccessThresholdDb;
    rec.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t master, int grid_index, int trial) {
  return mix(mix(master, static_cast<std::uint64_t>(grid_index)),
             static_cast<std::uint64_t>(trial));
}

std::vector<TrialRecord> run_sweep(const SweepSpec& spec) {
  require(!spec.grid.empty(), "sweep grid is empty");
  require(spec.trials >= 0, "trials must be non-negative");
  require(spec.threads >= 1, "threads must be >= 1");
  spec.capon.validate();
  const std::size_t nm = spec.methods.size();
  if (nm == 0 || spec.trials == 0) return {};

  std::vector<TrialJob> jobs;
  for (int g = 0; g < static_cast<int>(spec.grid.size()); ++g)
    for (int t = 0; t < spec.trials; ++t) jobs.push_back({g, t});

  // Slot (job, method) is fixed up front, so the output order does not
  // depend on which worker finishes first.
  std::vector<TrialRecord> records(jobs.size() * nm);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++)
      run_trial(spec, jobs[j], &records[j * nm]);
  };
  if (spec.threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < spec.threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return records;
}

std::vector<Aggregate> aggregate(const std::vector<TrialRecord>& records) {
  struct Acc {
    Aggregate agg;
    std::vector<double> sir, isr;
  };
  std::map<std::pair<int, int>, Acc> groups;
  for (const TrialRecord& r : records) {
    Acc& acc = groups[{r.grid_index, static_cast<int>(r.method)}];
    acc.agg.grid_index = r.grid_index;
    acc.agg.point = GridPoint{r.spec.lambda_star, r.spec.isir_db};
    acc.agg.method = r.method;
    ++acc.agg.trials;
    if (r.success) {
      acc.sir.push_back(r.sir_out_db);
      acc.isr.push_back(std::pow(10.0, -r.sir_out_db / 10.0));
    }
  }
  auto mean_se = [](const std::vector<double>& v) -> std::pair<double, double> {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (v.empty()) return {nan, nan};
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    if (v.size() < 2) return {m, nan};
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double var = ss / static_cast<double>(v.size() - 1);
    return {m, std::sqrt(var / static_cast<double>(v.size()))};
  };
  std::vector<Aggregate> out;
  for (auto& [key, acc] : groups) {
    Aggregate a = acc.agg;
    a.successes = static_cast<int>(acc.sir.size());
    a.success_rate = a.trials ? static_cast<double>(a.successes) / a.trials : 0.0;
    std::tie(a.mean_sir_db, a.sir_stderr_db) = mean_se(acc.sir);
    std::tie(a.mean_isr, a.isr_stderr) = mean_se(acc.isr);
    out.push_back(a);
  }
  return out;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
  os << "grid_param,method,trial,seed,lambda_star,isir_db,lambda_hat,sir_out_db,"
        "success,iterations,runtime_s\n";
  for (const TrialRecord& r : records) {
    os << r.grid_index << ',' << to_string(r.method) << ',' << r.trial << ','
       << r.spec.seed << ',' << format_number(r.spec.lambda_star) << ','
       << format_number(r.spec.isir_db) << ','
       << (r.lambda_hat ? format_number(*r.lambda_hat) : std::string()) << ','
       << format_number(r.sir_out_db) << ',' << (r.success ? 1 : 0) << ','
       << r.iterations << ',' << format_number(r.runtime_s) << '\n';
  }
}

}  // namespace blindcapon
