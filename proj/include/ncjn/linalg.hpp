#pragma once

// Dense Hermitian spectral calculus over a finite tracial matrix algebra.

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <limits>
#include <vector>

namespace ncjn {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace tol {
inline constexpr double kHermitian = 1e-12;      // relative, before symmetrizing
inline constexpr double kReconstruction = 1e-10;
inline constexpr double kJacobiOffDiagonal = 1e-13;
inline constexpr int kJacobiSweeps = 100;
inline constexpr double kProjection = 1e-9;
inline constexpr double kBoundary = 1e-9;         // scaled by max(1, ||A||)
inline constexpr double kLatticeRank = 1e-6;
}  // namespace tol

/// Positive functional tau(a) = sum_i w_i a_ii. Weights must be constant on
/// the blocks of whatever algebra it is used with for tau(ab) = tau(ba).
class TracialState {
 public:
  explicit TracialState(RealVector weights);

  /// Uniform weights 1/dim, total mass 1.
  static TracialState normalized(int dim);
  /// Uniform weights mass/dim.
  static TracialState uniform(int dim, double total_mass);

  int dim() const { return static_cast<int>(weights_.size()); }
  double total_mass() const { return total_mass_; }
  const RealVector& weights() const { return weights_; }
  bool is_uniform() const { return uniform_; }

  Complex operator()(const Operator& a) const;
  double real(const Operator& a) const { return (*this)(a).real(); }
  /// tau(a^* b)
  Complex inner(const Operator& a, const Operator& b) const;
  /// tau(V z V^*) for an isometry V : C^r -> C^dim and z acting on C^r.
  double corner_trace(const Operator& isometry, const Operator& z) const;
  /// tau-mass of the unit vector v, i.e. tau(v v^*).
  double vector_mass(const Eigen::Ref<const Eigen::VectorXcd>& v) const;

 private:
  RealVector weights_;
  double total_mass_ = 0.0;
  bool uniform_ = false;
};

struct SpectralDecomposition {
  RealVector eigenvalues;  // ascending
  Operator eigenvectors;   // orthonormal columns

  int dim() const { return static_cast<int>(eigenvalues.size()); }
  double max_abs() const;
};

class Projection {
 public:
  Projection() = default;
  /// Validates p = p^* = p^2 to tol::kProjection in operator norm.
  explicit Projection(Operator p);

  static Projection unchecked(Operator p);
  /// V V^* for a matrix with orthonormal columns.
  static Projection from_isometry(const Operator& v);
  static Projection zero(int dim);
  static Projection identity(int dim);

  const Operator& op() const { return p_; }
  int dim() const { return static_cast<int>(p_.rows()); }
  int rank() const;
  double trace(const TracialState& tau) const { return tau.real(p_); }
  /// Orthonormal basis of the range.
  Operator range_isometry() const;
  Projection complement() const;

 private:
  Operator p_;
};

struct Interval {
  enum class Kind { kAtLeast, kAbove, kBelow };  // [a,inf), (a,inf), (-inf,a)
  Kind kind;
  double endpoint;

  static Interval at_least(double a) { return {Kind::kAtLeast, a}; }
  static Interval above(double a) { return {Kind::kAbove, a}; }
  static Interval below(double a) { return {Kind::kBelow, a}; }

  /// Closed endpoints absorb eigenvalues within btol, open endpoints repel.
  bool contains(double value, double btol) const;
};

double boundary_tolerance(double operator_norm);

SpectralDecomposition eig_hermitian(const Operator& a);

Operator apply_function(const SpectralDecomposition& sd, const std::function<double(double)>& f);
Operator apply_function(const Operator& a, const std::function<double(double)>& f);

Projection spectral_projection(const SpectralDecomposition& sd, Interval interval, double btol);
Projection spectral_projection(const Operator& a, Interval interval);

/// Singular values (descending) with the tau-mass carried by each singular vector.
struct SingularSpectrum {
  std::vector<double> values;
  std::vector<double> weights;

  double total_mass() const;
};

SingularSpectrum singular_spectrum(const Operator& a, const TracialState& tau);

/// (tau(|a|^p))^{1/p}; p = kInfinity gives the largest singular value.
/// 0 < p < 1 is allowed and yields the quasi-norm.
double schatten_norm(const Operator& a, double p, const TracialState& tau);
double schatten_norm(const SingularSpectrum& s, double p);

/// lambda_t(a) = tau(1_{(t,inf)}(|a|)).
double distribution_lambda(const Operator& a, double t, const TracialState& tau);
double distribution_lambda(const SingularSpectrum& s, double t);

/// mu_t(a) = inf{ s > 0 : lambda_s(a) <= t }.
double singular_mu(const Operator& a, double t, const TracialState& tau);
double singular_mu(const SingularSpectrum& s, double t);

struct MeetJoin {
  Projection meet;
  Projection join;
};

MeetJoin proj_meet_join(const Projection& p, const Projection& q);

// --- Small operator utilities ----------------------------------------------

bool is_diagonal(const Operator& a);
bool is_finite(const Operator& a);
/// max |a - a^*| relative to max(1, max|a|).
double hermitian_defect(const Operator& a);
Operator hermitian_part(const Operator& a);
/// Product with diagonal fast paths.
Operator mul(const Operator& a, const Operator& b);
/// a^* a
Operator abs_square(const Operator& a);
/// V^* a V; exploits V whose columns are standard basis vectors.
Operator compress(const Operator& a, const Operator& v);
/// V z V^*
Operator expand(const Operator& z, const Operator& v);
/// Largest |eigenvalue| of a Hermitian operator.
double hermitian_norm(const Operator& a);
/// Largest singular value.
double operator_norm(const Operator& a);
/// Square root of a positive semidefinite operator (negative rounding clipped).
Operator sqrt_psd(const Operator& a);

}  // namespace ncjn
