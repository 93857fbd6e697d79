#include "blindcapon/bounds.hpp"
#include "blindcapon/monte_carlo.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace blindcapon;

TEST_CASE("closed-form bounds") {
  CHECK(crib_ice(2.0, 5, 500) == doctest::Approx(0.008).epsilon(1e-14));
  CHECK(to_db(crib_ice(2.0, 5, 500)) == doctest::Approx(-20.969).epsilon(1e-4));
  CHECK(crib_capon(2.0, 5, 500) == doctest::Approx(0.0045).epsilon(1e-14));
  CHECK(to_db(crib_capon(2.0, 5, 500)) == doctest::Approx(-23.468).epsilon(1e-4));
  CHECK(crib_capon(2.0, 2, 100) == doctest::Approx(0.0075).epsilon(1e-14));
  CHECK(std::isinf(crib_ice(1.0, 5, 500)));
  CHECK(std::isinf(crib_capon(1.0, 7, 10)));
  CHECK_THROWS_AS(crib_ice(0.99, 5, 500), Error);
  CHECK_THROWS_AS(crib_capon(0.5, 5, 500), Error);
  try {
    crib_capon(0.5, 5, 500);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DomainError);
  }
}

TEST_CASE("report marks the Gaussian case unidentifiable") {
  const auto r = crib_report(1.0, 5, 500);
  CHECK_FALSE(r.identifiable);
  CHECK_FALSE(r.crib_ice.has_value());
  CHECK_FALSE(r.crib_capon_db.has_value());
  const auto q = crib_report(2.0, 5, 500);
  CHECK(q.identifiable);
  CHECK(*q.crib_capon == doctest::Approx(0.0045));
}

TEST_CASE("structured bound is below the unstructured one, monotone, 1/N") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> k(1.0, 10.0);
  std::uniform_int_distribution<int> dd(2, 16);
  for (int t = 0; t < 10000; ++t) {
    double kb = k(rng);
    if (kb == 1.0) kb = 1.5;
    const int d = dd(rng);
    REQUIRE(crib_capon(kb, d, 100) < crib_ice(kb, d, 100));
  }
  for (double kb = 1.1; kb < 9.0; kb += 0.37) {
    CHECK(crib_capon(kb + 0.1, 5, 100) < crib_capon(kb, 5, 100));
    CHECK(crib_ice(kb + 0.1, 5, 100) < crib_ice(kb, 5, 100));
    CHECK(crib_capon(kb, 5, 300) == doctest::Approx(crib_capon(kb, 5, 100) / 3.0));
  }
}

TEST_CASE("fim example") {
  cmat cz(1, 1);
  cz << 1.0;
  rvec v(1);
  v << 1.0;
  const cmat f = fim(2.0, 1.0, cz, v);
  const cplx i(0, 1);
  cmat expect(3, 3);
  expect << 2.0, 0.0, -i, 0.0, 2.0, i, i, -i, 2.0;
  CHECK((f - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("fim trace is real and positive") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const int m = 1 + t % 6;
    const cmat cz = testutil::random_hpd(m, rng);
    const rvec v = rvec::Random(m);
    const cplx tr = fim(1.5 + t, 0.7, cz, v).trace();
    CHECK(std::abs(tr.imag()) < 1e-12);
    CHECK(tr.real() > 0.0);
  }
}

TEST_CASE("numeric FIM route reproduces the closed form and is invariant") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const int d = 2 + t % 9;
    const double kb = 1.05 + 8.0 * u(rng);
    const double sigma2 = 0.1 + 5.0 * u(rng);
    const cmat cz = testutil::random_hpd(d - 1, rng);
    const rvec v = rvec::Random(d - 1) * 3.0 + rvec::Constant(d - 1, 0.1);
    const double numeric = crib_from_fim(kb / sigma2, sigma2, cz, v, 250);
    CHECK(testutil::rel_err(numeric, crib_capon(kb, d, 250)) < 1e-8);
  }
}

TEST_CASE("FIM is singular for a Gaussian SOI") {
  cmat cz = cmat::Identity(2, 2);
  rvec v(2);
  v << 1.0, 2.0;
  CHECK_THROWS_AS(crib_from_fim(1.0, 1.0, cz, v, 100), Error);
}

TEST_CASE("empirical kappa bar") {
  SUBCASE("Gaussian equality case") {
    std::mt19937_64 rng(7);
    const cvec s = draw_sources(SourceLaw::Gaussian, 1000000, rng);
    CHECK(std::abs(empirical_kappa_bar(s, gaussian_score()).value - 1.0) < 0.01);
  }
  SUBCASE("Laplacean matches the analytic value") {
    std::mt19937_64 rng(8);
    const cvec s = draw_sources(SourceLaw::Laplacean, 1000000, rng);
    const auto k = empirical_kappa_bar(s, laplace_score());
    CHECK(k.value > 1.0);
    CHECK(std::abs(k.value - analytic_kappa_bar(SourceLaw::Laplacean)) < 3.0 * k.stderr_);
  }
  SUBCASE("scale invariance") {
    std::mt19937_64 rng(9);
    const cvec s = draw_sources(SourceLaw::Laplacean, 10000, rng);
    const auto a = empirical_kappa_bar(s, laplace_score(1.0));
    const auto b = empirical_kappa_bar(cvec(2.0 * s), laplace_score(2.0));
    CHECK(b.value == doctest::Approx(a.value).epsilon(1e-12));
  }
}
