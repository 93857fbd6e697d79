#pragma once

#include <random>

#include "blindcapon/core.hpp"

namespace testutil {

using namespace blindcapon;

inline cmat random_cmat(int rows, int cols, std::mt19937_64& rng, double var = 1.0) {
  std::normal_distribution<double> g(0.0, std::sqrt(var / 2.0));
  cmat m(rows, cols);
  for (auto& z : m.reshaped()) z = cplx(g(rng), g(rng));
  return m;
}

inline cvec random_cvec(int n, std::mt19937_64& rng) { return random_cmat(n, 1, rng).col(0); }

// Hermitian positive definite with a spread spectrum.
inline cmat random_hpd(int d, std::mt19937_64& rng) {
  const cmat b = random_cmat(d, d, rng);
  return b * b.adjoint() + 0.5 * cmat::Identity(d, d);
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace testutil
