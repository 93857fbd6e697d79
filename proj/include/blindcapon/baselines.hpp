#pragma once

#include <string_view>

#include "blindcapon/core.hpp"

namespace blindcapon {

enum class DoaMethod { RootMusic, TlsEsprit, SrpPhat };

std::string_view to_string(DoaMethod m);

struct DoaEstimate {
  double lambda_hat = 0.0;  // in (-pi, pi]
  DoaMethod method = DoaMethod::RootMusic;
  rvec candidates;   // all num_sources phase estimates
  rvec diagnostics;  // root moduli (MUSIC) or eigenvalue moduli (ESPRIT)
};

/// Root MUSIC for a ULA (v = [0, ..., d-1]). Of the num_sources roots
/// inside the unit circle closest to it, returns the one whose angle is
/// nearest to lambda_query.
DoaEstimate root_music(const cmat& c_x, int num_sources, double lambda_query = 0.0);

/// TLS ESPRIT between the two maximally overlapping (d-1)-element subarrays.
DoaEstimate tls_esprit(const cmat& c_x, int num_sources, double lambda_query = 0.0);

struct FastIcaConfig {
  int max_iters = 100;
  double tol = 1e-8;  // on 1 - |w_new^H w_old| in the whitened domain
};

struct FastIcaResult {
  ExtractionState state;  // a = C w / (w^H C w), lambda unused (NaN)
  int iterations = 0;
  bool converged = false;
};

/// One-unit complex FastICA with symmetric prewhitening. w_ini is a
/// separating vector in the sensor domain (s = w^H x).
FastIcaResult fastica_one_unit(const SnapshotMatrix& x, const Nonlinearity& phi,
                               const cvec& w_ini, const FastIcaConfig& cfg = {});

}  // namespace blindcapon
