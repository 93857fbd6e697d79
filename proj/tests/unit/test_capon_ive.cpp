#include <algorithm>
#include <numeric>

#include "blindcapon/fixture.hpp"
#include "blindcapon/wav.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace blindcapon;

namespace {

const ArrayGeometry kGeom;
constexpr double kFs = 16000.0;

Fixture short_fixture(std::vector<double> thetas, double noise_db, double seconds = 2.0) {
  FixtureSpec spec;
  spec.theta_deg = std::move(thetas);
  spec.noise_db = noise_db;
  spec.duration_s = seconds;
  return make_anechoic_fixture(spec);
}

}  // namespace

TEST_CASE("angle parameterization") {
  CHECK(std::abs(theta_to_mu(90.0)) < 1e-15);
  CHECK(theta_to_mu(0.0) == doctest::Approx(1.0));
  CHECK(mu_to_theta(theta_to_mu(63.43)) == doctest::Approx(63.43).epsilon(1e-12));
  CHECK(mu_to_theta(1.5) == 0.0);
  CHECK(mu_to_theta(-3.0) == doctest::Approx(180.0));
  CHECK(bin_omega(64, kFs, 1024) == doctest::Approx(2.0 * kPi * 1000.0));
}

TEST_CASE("broadband steering") {
  for (int k : {0, 10, 300, 512}) {
    const auto s = steering_broadband(kGeom, 90.0, k, kFs, 1024);
    CHECK((s.a - cvec::Ones(5)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_FALSE(s.aliased);
  }
  // omega_k spacing / c = pi at 3430 Hz: bin 343 of a 1600-point FFT at 16 kHz
  const auto e = steering_broadband(kGeom, 0.0, 343, kFs, 1600);
  CHECK(std::abs(e.a[1] - cplx(-1.0, 0.0)) < 1e-12);
  CHECK(e.lambda == doctest::Approx(kPi));
  CHECK_FALSE(e.aliased);
  CHECK(steering_broadband(kGeom, 0.0, 400, kFs, 1600).aliased);
  CHECK_THROWS_AS(steering_broadband(kGeom, 0.0, 513, kFs, 1024), Error);
}

TEST_CASE("IVE slope matches finite differences of the joint contrast") {
  const auto fx = short_fixture({63.43, 90.0}, -20.0, 1.0);
  const IveObjective obj(stft(fx.mixture, kFs), kGeom);
  for (double th : {55.0, 63.0, 70.0, 88.0, 100.0}) {
    const double mu = theta_to_mu(th);
    const auto st = obj.state(mu);
    const double h = 1e-6;
    const double fd = (obj.partial_contrast(mu + h, st) - obj.partial_contrast(mu - h, st)) / (2 * h);
    const double an = obj.first_derivative(st);
    CHECK(std::abs(fd - an) <= 1e-4 * std::abs(an));
  }
}

TEST_CASE("joint derivative is an order-independent bin average") {
  const auto fx = short_fixture({63.43, 90.0}, -30.0, 1.0);
  const IveObjective obj(stft(fx.mixture, kFs), kGeom);
  const auto st = obj.state(theta_to_mu(70.0));
  const std::size_t k = obj.active_bins().size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(3);
  std::shuffle(order.begin(), order.end(), rng);
  double sum = 0.0;
  for (std::size_t i : order) sum += obj.lambda_rate(i) * obj.bin_first_derivative(st, i);
  CHECK(sum / double(k) == doctest::Approx(obj.first_derivative(st)).epsilon(1e-10));
}

TEST_CASE("bin selection flags") {
  const auto fx = short_fixture({63.43, 90.0}, -30.0, 1.0);
  const auto x = stft(fx.mixture, kFs);
  const IveObjective obj(x, kGeom);
  const auto& f = obj.flags();
  CHECK(f.size() == 513);
  for (int k = 0; k <= 6; ++k) CHECK((f[k] & kBinExcluded));
  CHECK_FALSE((f[7] & kBinExcluded));
  CHECK((f[512] & kBinExcluded));
  CHECK(obj.active_bins().size() == 513 - 8);

  BinSelection sel;
  sel.exclude = {100, 200};
  const IveObjective obj2(x, kGeom, sel);
  CHECK((obj2.flags()[100] & kBinExcluded));
  CHECK(obj2.active_bins().size() == 513 - 10);
}

TEST_CASE("run_ive on the two-source fixture") {
  const auto fx = short_fixture({63.43, 90.0}, -30.0);
  const auto x = stft(fx.mixture, kFs);
  std::vector<StftTensor> images;
  for (const auto& im : fx.images) images.push_back(stft(im, kFs));

  IveConfig cfg;
  cfg.theta_ini_deg = 68.43;
  const auto r = run_ive(x, kGeom, cfg);
  CHECK(r.converged);
  CHECK(std::abs(r.theta_hat_deg - 63.43) < 0.5);
  CHECK(sir_from_images(images, r.beam.weights, 0).improvement_db() > 10.0);

  // distortionless in every bin towards the estimate
  for (int k = 0; k < x.num_bins(); ++k) {
    if (r.beam.flags[k] & kBinSingular) continue;
    const cvec a = steering_broadband(kGeom, r.theta_hat_deg, k, kFs, x.fft_len).a;
    CHECK(std::abs(r.beam.weights[k].dot(a) - 1.0) < 1e-8);
  }
  // aliasing is flagged only above c / (2 spacing |cos theta|)
  const double f_alias = kGeom.c / (2.0 * kGeom.spacing_m * std::cos(r.theta_hat_deg * kPi / 180.0));
  for (int k = 1; k < 512; ++k)
    CHECK(bool(r.beam.flags[k] & kBinAliased) == (k * kFs / 1024.0 > f_alias));

  cfg.theta_ini_deg = 95.0;
  const auto r2 = run_ive(x, kGeom, cfg);
  CHECK(std::abs(r2.theta_hat_deg - 90.0) < 0.5);
  CHECK(sir_from_images(images, r2.beam.weights, 1).improvement_db() > 10.0);
}

TEST_CASE("single source without interference") {
  // Mixed per bin so that the steering model holds exactly. The output error
  // is the sensor noise passed by a sample-covariance MPDR whose training data
  // contain the source, so the oracle is the same beamformer at the true angle.
  const auto fx = short_fixture({63.43}, std::nan(""));
  const rmat dry = fx.dry.topRows(1);
  const auto m = phase_shift_stft_mixture({stft(dry, kFs)}, {63.43}, kGeom, -30.0, 11);
  IveConfig cfg;
  cfg.theta_ini_deg = 68.43;
  const auto r = run_ive(m.mixture, kGeom, cfg);
  CHECK(std::abs(r.theta_hat_deg - 63.43) < 0.1);

  auto err = [&](const BeamformerOutput& b) {
    double num = 0.0, den = 0.0;
    for (int k = 0; k < m.mixture.num_bins(); ++k) {
      if (b.flags[k] & (kBinExcluded | kBinSingular)) continue;
      num += (b.output.bins[k].row(0) - m.images[0].bins[k].row(0)).squaredNorm();
      den += m.images[0].bins[k].row(0).squaredNorm();
    }
    return std::sqrt(num / den);
  };
  const double oracle = err(mpdr_beamform(m.mixture, kGeom, 63.43));
  CHECK(oracle < 0.2);
  CHECK(err(r.beam) < 1.1 * oracle);
}

TEST_CASE("run_ive rejects bad input") {
  const auto fx = short_fixture({63.43, 90.0}, -30.0, 1.0);
  const auto x = stft(fx.mixture, kFs);
  ArrayGeometry g4 = kGeom;
  g4.d = 4;
  CHECK_THROWS_AS(run_ive(x, g4), Error);
  IveConfig cfg;
  cfg.newton.max_iters = 0;
  CHECK_THROWS_AS(run_ive(x, kGeom, cfg), Error);
}

TEST_CASE("SRP-PHAT") {
  SUBCASE("single anechoic source") {
    const auto fx = short_fixture({63.43}, -30.0);
    const auto r = srp_phat(stft(fx.mixture, kFs), kGeom, 68.43);
    CHECK(std::abs(r.theta_deg - 63.43) < 0.5);
    CHECK_FALSE(r.stalled);
    CHECK(r.coherence > 0.5);
  }
  SUBCASE("white uncorrelated channels stall") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    rmat x(5, 16000);
    for (auto& v : x.reshaped()) v = g(rng);
    const auto r = srp_phat(stft(x, kFs), kGeom, 75.0);
    CHECK(r.stalled);
    CHECK(r.theta_deg == 75.0);
  }
  SUBCASE("two sources, both local maxima reachable") {
    const auto fx = short_fixture({63.43, 90.0}, -30.0);
    const auto x = stft(fx.mixture, kFs);
    CHECK(std::abs(srp_phat(x, kGeom, 68.43).theta_deg - 63.43) < 1.0);
    CHECK(std::abs(srp_phat(x, kGeom, 95.0).theta_deg - 90.0) < 1.0);
  }
}

TEST_CASE("SIR scoring") {
  const auto fx = short_fixture({63.43, 90.0}, std::nan(""), 1.0);
  std::vector<StftTensor> images;
  for (const auto& im : fx.images) images.push_back(stft(im, kFs));
  // reference-channel selector: output SIR equals input SIR
  std::vector<cvec> sel(images[0].num_bins(), cvec::Unit(5, 0));
  const auto rep = sir_from_images(images, sel, 0);
  CHECK(std::abs(rep.improvement_db()) < 1e-9);

  // projection on mono references of the mixture channel gives the same input SIR
  std::vector<StftTensor> refs;
  for (const auto& im : fx.images) {
    rmat ch0 = im.topRows(1);
    refs.push_back(stft(ch0, kFs));
  }
  rmat mix0 = fx.mixture.topRows(1);
  CHECK(projection_sir_db(stft(mix0, kFs), refs, 0) == doctest::Approx(rep.sir_in_db).epsilon(1e-6));
}

TEST_CASE("shipped fixture matches its generator") {
  const auto mix = read_wav(std::string(BLINDCAPON_ASSETS) + "/mix.wav");
  CHECK(mix.sample_rate == kFs);
  CHECK(mix.samples.rows() == 5);
  const Fixture fx = make_anechoic_fixture({});
  CHECK((mix.samples - fx.mixture).cwiseAbs().maxCoeff() < 1e-6);
}
