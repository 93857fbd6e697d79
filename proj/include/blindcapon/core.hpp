#pragma once

#include <complex>
#include <functional>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "blindcapon/error.hpp"

namespace blindcapon {

using cplx = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using rvec = Eigen::VectorXd;
using rmat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

// Relative diagonal loading applied before every covariance solve:
// C + eps * trace(C) / d * I.
inline constexpr double kCovarianceLoading = 1e-10;

/// Phase-shift steering model a(lambda) = [exp(i * lambda * v_j)]_j.
///
/// The first weight is the phase reference and must be exactly zero.
class SteeringModel {
 public:
  explicit SteeringModel(rvec weights);

  /// Uniform linear array, v = [0, 1, ..., d-1].
  static SteeringModel ula(int d);

  int d() const { return static_cast<int>(v_.size()); }
  const rvec& weights() const { return v_; }

  /// True when all weights are integers, which makes a(lambda) 2*pi periodic.
  bool integer_weights() const { return integer_; }

  /// True for v = [0, 1, ..., d-1].
  bool is_ula() const;

 private:
  rvec v_;
  bool integer_ = false;
};

cvec steering(const SteeringModel& model, double lambda);

/// d x N complex observations.
class SnapshotMatrix {
 public:
  explicit SnapshotMatrix(cmat data);

  int d() const { return static_cast<int>(data_.rows()); }
  int n() const { return static_cast<int>(data_.cols()); }
  const cmat& data() const { return data_; }

 private:
  cmat data_;
};

cmat sample_covariance(const cmat& x);
inline cmat sample_covariance(const SnapshotMatrix& x) {
  return sample_covariance(x.data());
}

/// Diagonally loaded Hermitian covariance with a cached Cholesky factor.
/// All "C_x^{-1} y" products in the library go through solve(); nothing
/// forms an explicit inverse.
class Covariance {
 public:
  explicit Covariance(const cmat& c, double loading = kCovarianceLoading);

  int d() const { return static_cast<int>(c_.rows()); }
  const cmat& matrix() const { return c_; }
  // Unloaded (symmetrized) input, i.e. the covariance of the data itself.
  const cmat& sample() const { return raw_; }
  cvec solve(const cvec& y) const { return llt_.solve(y); }
  cmat solve(const cmat& y) const { return llt_.solve(y); }
  double log_det() const;

 private:
  cmat raw_;
  cmat c_;
  Eigen::LLT<cmat> llt_;
};

struct MpdrWeights {
  cvec w;
  double sigma2 = 0.0;
};

/// w = C^{-1} a / (a^H C^{-1} a), sigma2 = 1 / (a^H C^{-1} a).
MpdrWeights mpdr_weights(const Covariance& cov, const cvec& a);
MpdrWeights mpdr_weights(const cmat& c_x, const cvec& a);

/// Score surrogate phi and its Wirtinger derivatives. log_density is the
/// model log-pdf whose negative d/ds equals phi; it is only needed to
/// evaluate contrast values.
struct Nonlinearity {
  std::string name;
  std::function<cplx(cplx)> phi;
  std::function<cplx(cplx)> dphi_ds;
  std::function<cplx(cplx)> dphi_dsconj;
  std::function<double(cplx)> log_density;
};

/// phi(s) = conj(s) / (1 + |s|^2), log f(s) = -log(1 + |s|^2).
Nonlinearity rational_nonlinearity();

/// phi(s) = conj(s): the circular Gaussian score, for which nu = 1 exactly.
Nonlinearity linear_nonlinearity();

struct SoiStatistics {
  double sigma2 = 0.0;
  double nu = 0.0;
  double nu_imag = 0.0;  // discarded imaginary part of the nu sample mean
  cplx rho;
  double xi = 0.0;
  cplx eta;
};

SoiStatistics soi_statistics(const cvec& s, const Nonlinearity& phi);

struct CConstants {
  double c1 = 0.0;
  cplx c2;
  cplx c3;
};

CConstants c_constants(const SoiStatistics& stats);

/// Current iterate of a single-source extraction.
struct ExtractionState {
  double lambda = 0.0;
  cvec a;
  cvec w;
  cvec s;
  SoiStatistics stats;
};

/// Builds the state at lambda: a = steering(lambda), w = MPDR(a), s = w^H x.
ExtractionState make_state(const SnapshotMatrix& x, const Covariance& cov,
                           const SteeringModel& model, double lambda,
                           const Nonlinearity& phi);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double lambda);

}  // namespace blindcapon
