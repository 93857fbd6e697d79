#include "blindcapon/capon_ice.hpp"
#include "blindcapon/monte_carlo.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace blindcapon;

namespace {

CaponObjective laplace_instance(int d, int n, double lambda_star, std::uint64_t seed,
                                double isir_db = 0.0) {
  MixtureSpec spec;
  spec.d = d;
  spec.n = n;
  spec.lambda_star = lambda_star;
  spec.isir_db = isir_db;
  spec.seed = seed;
  return CaponObjective(generate_mixture(spec).x, SteeringModel::ula(d), rational_nonlinearity());
}

}  // namespace

TEST_CASE("first derivative matches the finite-difference slope of the contrast") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const auto obj = laplace_instance(5, 2000, u(rng), 100 + t);
    const double l = u(rng);
    const auto st = obj.state(l);
    const double h = 1e-5;
    const double fd = (obj.contrast(l + h, st.stats.nu) - obj.contrast(l - h, st.stats.nu)) / (2 * h);
    const double an = obj.first_derivative(st);
    CHECK(std::abs(fd - an) <= 1e-5 * std::abs(an));
    CHECK(obj.first_derivative_via_a(st) == doctest::Approx(an).epsilon(1e-9));
  }
}

TEST_CASE("grad_w matches Wirtinger finite differences of the unstructured contrast") {
  const auto obj = laplace_instance(4, 3000, 0.3, 7);
  const auto st = obj.state(0.1);
  const cvec g = obj.grad_w(st);
  const double nu = st.stats.nu;
  const double h = 1e-6;
  for (int j = 0; j < 4; ++j) {
    cvec e = cvec::Zero(4);
    e[j] = 1.0;
    const double dx = (obj.contrast_w(st.w + h * e, nu) - obj.contrast_w(st.w - h * e, nu)) / (2 * h);
    const cvec ie = cplx(0, 1) * e;
    const double dy = (obj.contrast_w(st.w + h * ie, nu) - obj.contrast_w(st.w - h * ie, nu)) / (2 * h);
    const cplx fd = 0.5 * cplx(dx, dy);
    CHECK(std::abs(fd - g[j]) <= 1e-5 * g.norm());
  }
}

TEST_CASE("linear score gives an identically zero gradient") {
  MixtureSpec spec;
  spec.seed = 3;
  const CaponObjective obj(generate_mixture(spec).x, SteeringModel::ula(5), linear_nonlinearity());
  const auto st = obj.state(0.4);
  CHECK(obj.grad_w(st).norm() < 1e-9);
  CHECK(std::abs(obj.first_derivative(st)) < 1e-9);
}

TEST_CASE("background terms equal the direct blocking-matrix evaluation") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int t = 0; t < 20; ++t) {
    const int d = 3 + t % 5;
    const cmat c = testutil::random_hpd(d, rng);
    const Covariance cov(c);
    const cvec a = testutil::random_cvec(d, rng);
    const double sigma2 = u(rng);
    cmat b = cmat::Zero(d - 1, d);
    for (int j = 1; j < d; ++j) {
      b(j - 1, 0) = a[j];
      b(j - 1, j) = -a[0];
    }
    const cmat cz = b * cov.matrix() * b.adjoint();
    const Eigen::LDLT<cmat> ldlt(cz);
    const double log_det = ldlt.vectorD().real().array().log().sum();
    const double trace = (ldlt.solve(cz)).trace().real();
    const double direct = -std::log(sigma2) - trace - log_det + (d - 2) * std::log(std::norm(a[0]));
    CHECK(background_terms(cov, a, sigma2) == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("gradient is small at the true parameter for large N") {
  const auto obj = laplace_instance(5, 100000, 0.6, 17);
  CHECK(obj.grad_w(obj.state(0.6)).norm() < 0.02);
}

TEST_CASE("second derivative approximation") {
  SUBCASE("closed form, d = 2, C = I") {
    const cmat x = std::sqrt(2.0) * cmat::Identity(2, 2);
    const CaponObjective obj(SnapshotMatrix(x), SteeringModel::ula(2), rational_nonlinearity());
    const double l = 0.7;
    const auto st = obj.state(l);
    CHECK(st.stats.sigma2 == doctest::Approx(0.5).epsilon(1e-9));
    const double c1 = c_constants(st.stats).c1;
    CHECK(obj.second_derivative_approx(st) ==
          doctest::Approx(2.0 * c1 * 0.5 * 0.25).epsilon(1e-8));
  }
  SUBCASE("co-located sensors give zero") {
    std::mt19937_64 rng(2);
    const cmat x = testutil::random_cmat(3, 200, rng);
    const CaponObjective obj(SnapshotMatrix(x), SteeringModel(rvec::Zero(3)), rational_nonlinearity());
    CHECK(obj.second_derivative_approx(obj.state(0.3)) == 0.0);
  }
  SUBCASE("negative near the truth on Laplacean data") {
    const auto obj = laplace_instance(5, 50000, -0.4, 5);
    const auto st = obj.state(-0.4);
    CHECK(c_constants(st.stats).c1 < 0.0);
    CHECK(obj.second_derivative_approx(st) < 0.0);
  }
}

TEST_CASE("contrast grid oracle and periodicity") {
  MixtureSpec spec;
  spec.d = 3;  // the competitor needs d >= 3; the grid is over the SOI only
  spec.n = 10000;
  spec.lambda_star = -0.6;
  spec.seed = 41;
  const auto mix = generate_mixture(spec);
  const CaponObjective obj(mix.x, SteeringModel::ula(3), rational_nonlinearity());
  double best = -1e300, arg = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double l = spec.lambda_star - 0.5 + i * 1e-3;
    const double c = obj.contrast(l);
    if (c > best) best = c, arg = l;
  }
  CHECK(std::abs(arg - spec.lambda_star) < 0.02);
  // slope at the grid maximum is bounded by the grid curvature times the spacing
  const auto st = obj.state(arg);
  CHECK(std::abs(obj.first_derivative(st)) <= std::abs(obj.second_derivative_approx(st)) * 2e-3 * 5);

  for (double l : {-2.0, 0.1, 1.3})
    CHECK(obj.contrast(l) == doctest::Approx(obj.contrast(l + 2.0 * kPi)).epsilon(1e-9));
}

TEST_CASE("d = 2 grid oracle") {
  // Two sensors: SOI plus one Laplacean interferer with a random phase column.
  std::mt19937_64 rng(77);
  const int n = 10000;
  const double ls = 0.9;
  const cvec s = draw_sources(SourceLaw::Laplacean, n, rng);
  const cvec y = draw_sources(SourceLaw::Laplacean, n, rng);
  cmat x(2, n);
  const cvec a = steering(SteeringModel::ula(2), ls);
  cvec b(2);
  b << std::polar(1.0, 2.1), std::polar(1.0, -0.4);
  x = a * s.transpose() + b * y.transpose();
  const CaponObjective obj(SnapshotMatrix(x), SteeringModel::ula(2), rational_nonlinearity());
  double best = -1e300, arg = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double l = ls - 0.5 + i * 1e-3;
    const double c = obj.contrast(l);
    if (c > best) best = c, arg = l;
  }
  // spread of the maximizer over seeds is about 0.02 at this N
  CHECK(std::abs(arg - ls) < 0.1);
}

TEST_CASE("newton step safeguards") {
  CaponConfig cfg;
  CHECK(newton_step(0.0, -3.0, cfg).delta == 0.0);
  CHECK(newton_step(1.0, -4.0, cfg).delta == doctest::Approx(0.25));
  CHECK(newton_step(10.0, -1.0, cfg).delta == doctest::Approx(cfg.step_cap));
  const auto fb = newton_step(-2.0, 1.0, cfg);
  CHECK(fb.fallback);
  CHECK(fb.delta == doctest::Approx(-0.1 * cfg.step_cap));
  cfg.damping = 0.5;
  CHECK(newton_step(1.0, -4.0, cfg).delta == doctest::Approx(0.125));
}

TEST_CASE("run_capon_ice") {
  const auto obj = laplace_instance(5, 500, 0.5, 123);
  SUBCASE("config validation") {
    CaponConfig cfg;
    cfg.max_iters = 0;
    CHECK_THROWS_AS(run_capon_ice(obj, cfg), Error);
    cfg.max_iters = 10;
    cfg.damping = 0.0;
    CHECK_THROWS_AS(run_capon_ice(obj, cfg), Error);
  }
  SUBCASE("distortionless after every iteration, bounded iterations") {
    CaponConfig cfg;
    cfg.lambda_ini = 0.55;
    const auto r = run_capon_ice(obj, cfg);
    CHECK(r.iterations <= cfg.max_iters);
    CHECK(r.converged);
    for (double e : r.distortionless_error) CHECK(e < 1e-10);
    CHECK(std::abs(r.state.w.dot(r.state.a) - 1.0) < 1e-10);
    CHECK(std::abs(r.state.lambda - 0.5) < 0.05);
  }
  SUBCASE("fixed point: a zero slope gives a zero step") {
    CaponConfig cfg;
    CHECK(newton_step(0.0, obj.second_derivative_approx(obj.state(0.5)), cfg).delta == 0.0);
  }
}

TEST_CASE("convergence from lambda* + 0.05 on the simulation protocol") {
  int ok = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    MixtureSpec spec;
    spec.lambda_star = -0.5;
    spec.seed = trial_seed(99, 0, t);
    const auto mix = generate_mixture(spec);
    CaponConfig cfg;
    cfg.lambda_ini = spec.lambda_star + 0.05;
    try {
      const auto r = run_capon_ice(mix.x, SteeringModel::ula(5), rational_nonlinearity(), cfg);
      if (output_sir(r.state.w, mix.mixing, mix.source_powers) > kSuccessThresholdDb) ++ok;
    } catch (const Error&) {
    }
  }
  CHECK(ok >= 0.95 * trials);
}
