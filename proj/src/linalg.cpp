#include "ncjn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "ncjn/errors.hpp"

namespace ncjn {

namespace {

double max_abs_entry(const Operator& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

// Indices i_j such that column j of v is the standard basis vector e_{i_j}.
std::optional<std::vector<int>> selection_indices(const Operator& v) {
  std::vector<int> idx(static_cast<size_t>(v.cols()), -1);
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const Complex c = v(i, j);
      if (c == Complex(0.0, 0.0)) continue;
      if (c != Complex(1.0, 0.0) || idx[size_t(j)] != -1) return std::nullopt;
      idx[size_t(j)] = static_cast<int>(i);
    }
    if (idx[size_t(j)] == -1) return std::nullopt;
  }
  return idx;
}

double off_diagonal_norm(const Operator& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

// One complex Jacobi rotation annihilating a(p,q); accumulates into v.
void jacobi_rotate(Operator& a, Operator& v, Eigen::Index p, Eigen::Index q) {
  const Complex z = a(p, q);
  const double r = std::abs(z);
  const Complex phase = std::conj(z) / r;  // e^{-i phi}
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double theta = (aqq - app) / (2.0 * r);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;

  // J restricted to (p,q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
  const Complex jpp = c, jpq = s, jqp = -s * phase, jqq = c * phase;
  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex akp = a(k, p), akq = a(k, q);
    a(k, p) = akp * jpp + akq * jqp;
    a(k, q) = akp * jpq + akq * jqq;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex apk = a(p, k), aqk = a(q, k);
    a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
    a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = app - t * r;
  a(q, q) = aqq + t * r;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex vkp = v(k, p), vkq = v(k, q);
    v(k, p) = vkp * jpp + vkq * jqp;
    v(k, q) = vkp * jpq + vkq * jqq;
  }
}

}  // namespace

// --- TracialState -----------------------------------------------------------

TracialState::TracialState(RealVector weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw InvalidInput("tracial state needs a positive dimension");
  for (Eigen::Index i = 0; i < weights_.size(); ++i)
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
      throw InvalidInput("tracial weights must be positive and finite");
  total_mass_ = weights_.sum();
  uniform_ = (weights_.array() == weights_[0]).all();
}

TracialState TracialState::normalized(int dim) { return uniform(dim, 1.0); }

TracialState TracialState::uniform(int dim, double total_mass) {
  if (dim <= 0) throw InvalidInput("tracial state needs a positive dimension");
  return TracialState(RealVector::Constant(dim, total_mass / dim));
}

Complex TracialState::operator()(const Operator& a) const {
  if (a.rows() != dim() || a.cols() != dim()) throw InvalidInput("trace: dimension mismatch");
  Complex s = 0.0;
  for (int i = 0; i < dim(); ++i) s += weights_[i] * a(i, i);
  return s;
}

Complex TracialState::inner(const Operator& a, const Operator& b) const {
  if (a.rows() != dim() || b.rows() != dim() || a.cols() != dim() || b.cols() != dim())
    throw InvalidInput("inner product: dimension mismatch");
  Complex s = 0.0;
  for (int k = 0; k < dim(); ++k) s += weights_[k] * a.col(k).dot(b.col(k));
  return s;
}

double TracialState::corner_trace(const Operator& isometry, const Operator& z) const {
  if (uniform_) return weights_[0] * z.trace().real();
  const Operator vz = isometry * z;
  double s = 0.0;
  for (int k = 0; k < dim(); ++k)
    s += weights_[k] * (vz.row(k) * isometry.row(k).adjoint())(0, 0).real();
  return s;
}

double TracialState::vector_mass(const Eigen::Ref<const Eigen::VectorXcd>& v) const {
  if (uniform_) return weights_[0] * v.squaredNorm();
  double s = 0.0;
  for (int k = 0; k < dim(); ++k) s += weights_[k] * std::norm(v[k]);
  return s;
}

// --- Projection -------------------------------------------------------------

Projection::Projection(Operator p) : p_(std::move(p)) {
  if (p_.rows() != p_.cols()) throw InvalidInput("projection must be square");
  if (!is_finite(p_)) throw InvalidInput("projection has non-finite entries");
  const Operator skew = p_ - p_.adjoint();
  if (skew.norm() > tol::kProjection && operator_norm(skew) > tol::kProjection)
    throw InvalidInput("projection is not self-adjoint");
  const Operator idem = p_ * p_ - p_;
  if (idem.norm() > tol::kProjection && operator_norm(idem) > tol::kProjection)
    throw InvalidInput("projection is not idempotent");
}

Projection Projection::unchecked(Operator p) {
  Projection out;
  out.p_ = std::move(p);
  return out;
}

Projection Projection::from_isometry(const Operator& v) {
  if (auto idx = selection_indices(v)) {
    Operator p = Operator::Zero(v.rows(), v.rows());
    for (int i : *idx) p(i, i) = 1.0;
    return unchecked(std::move(p));
  }
  return unchecked(v * v.adjoint());
}

Projection Projection::zero(int dim) { return unchecked(Operator::Zero(dim, dim)); }
Projection Projection::identity(int dim) { return unchecked(Operator::Identity(dim, dim)); }

int Projection::rank() const { return static_cast<int>(std::lround(p_.trace().real())); }

Operator Projection::range_isometry() const {
  const int d = dim();
  if (is_diagonal(p_)) {
    std::vector<int> idx;
    for (int i = 0; i < d; ++i)
      if (p_(i, i).real() > 0.5) idx.push_back(i);
    Operator v = Operator::Zero(d, static_cast<Eigen::Index>(idx.size()));
    for (size_t j = 0; j < idx.size(); ++j) v(idx[j], static_cast<Eigen::Index>(j)) = 1.0;
    return v;
  }
  const SpectralDecomposition sd = eig_hermitian(p_);
  std::vector<int> keep;
  for (int j = 0; j < d; ++j)
    if (sd.eigenvalues[j] > 0.5) keep.push_back(j);
  Operator v(d, static_cast<Eigen::Index>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) v.col(static_cast<Eigen::Index>(j)) = sd.eigenvectors.col(keep[j]);
  return v;
}

Projection Projection::complement() const {
  return unchecked(Operator::Identity(dim(), dim()) - p_);
}

// --- Intervals --------------------------------------------------------------

bool Interval::contains(double value, double btol) const {
  switch (kind) {
    case Kind::kAtLeast: return value >= endpoint - btol;
    case Kind::kAbove: return value > endpoint + btol;
    case Kind::kBelow: return value < endpoint - btol;
  }
  return false;
}

double boundary_tolerance(double operator_norm) {
  return tol::kBoundary * std::max(1.0, operator_norm);
}

double SpectralDecomposition::max_abs() const {
  return eigenvalues.size() == 0 ? 0.0 : eigenvalues.cwiseAbs().maxCoeff();
}

// --- Eigensolver ------------------------------------------------------------

SpectralDecomposition eig_hermitian(const Operator& input) {
  if (input.rows() != input.cols()) throw InvalidInput("eig_hermitian: matrix must be square");
  if (!is_finite(input)) throw InvalidInput("eig_hermitian: non-finite entries");
  const Eigen::Index n = input.rows();
  if (is_diagonal(input)) {
    const double scale = std::max(1.0, max_abs_entry(input));
    for (Eigen::Index i = 0; i < n; ++i)
      if (2.0 * std::abs(input(i, i).imag()) > tol::kHermitian * scale)
        throw InvalidInput("eig_hermitian: matrix is not Hermitian");
    std::vector<Eigen::Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return input(i, i).real() < input(j, j).real(); });
    SpectralDecomposition sd;
    sd.eigenvalues.resize(n);
    sd.eigenvectors = Operator::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      sd.eigenvalues[j] = input(order[size_t(j)], order[size_t(j)]).real();
      sd.eigenvectors(order[size_t(j)], j) = 1.0;
    }
    return sd;
  }
  if (hermitian_defect(input) > tol::kHermitian) throw InvalidInput("eig_hermitian: matrix is not Hermitian");

  Operator a = hermitian_part(input);
  Operator v = Operator::Identity(n, n);
  const double frob = a.norm();
  const double target = tol::kJacobiOffDiagonal * frob;
  const double negligible = 1e-18 * frob;

  bool converged = false;
  for (int sweep = 0; sweep <= tol::kJacobiSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) {
      converged = true;
      break;
    }
    if (sweep == tol::kJacobiSweeps) break;
    for (Eigen::Index p = 0; p < n - 1; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q)
        if (std::abs(a(p, q)) > negligible) jacobi_rotate(a, v, p, q);
  }
  if (!converged) throw NumericalFailure("eig_hermitian: Jacobi iteration did not converge");

  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() < a(j, j).real(); });
  SpectralDecomposition sd;
  sd.eigenvalues.resize(n);
  sd.eigenvectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    sd.eigenvalues[j] = a(order[size_t(j)], order[size_t(j)]).real();
    sd.eigenvectors.col(j) = v.col(order[size_t(j)]);
  }
  return sd;
}

// --- Functional calculus ----------------------------------------------------

Operator apply_function(const SpectralDecomposition& sd, const std::function<double(double)>& f) {
  const int n = sd.dim();
  RealVector values(n);
  for (int j = 0; j < n; ++j) {
    values[j] = f(sd.eigenvalues[j]);
    if (!std::isfinite(values[j])) {
      std::ostringstream os;
      os << "apply_function: function undefined at eigenvalue " << sd.eigenvalues[j];
      throw InvalidInput(os.str());
    }
  }
  if (auto idx = selection_indices(sd.eigenvectors)) {
    Operator out = Operator::Zero(n, n);
    for (int j = 0; j < n; ++j) out((*idx)[size_t(j)], (*idx)[size_t(j)]) = values[j];
    return out;
  }
  const Operator scaled = sd.eigenvectors * values.cast<Complex>().asDiagonal();
  return hermitian_part(scaled * sd.eigenvectors.adjoint());
}

Operator apply_function(const Operator& a, const std::function<double(double)>& f) {
  return apply_function(eig_hermitian(a), f);
}

Projection spectral_projection(const SpectralDecomposition& sd, Interval interval, double btol) {
  const int n = sd.dim();
  std::vector<int> keep;
  for (int j = 0; j < n; ++j)
    if (interval.contains(sd.eigenvalues[j], btol)) keep.push_back(j);
  Operator w(n, static_cast<Eigen::Index>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) w.col(static_cast<Eigen::Index>(j)) = sd.eigenvectors.col(keep[j]);
  return Projection::from_isometry(w);
}

Projection spectral_projection(const Operator& a, Interval interval) {
  const SpectralDecomposition sd = eig_hermitian(a);
  return spectral_projection(sd, interval, boundary_tolerance(sd.max_abs()));
}

// --- Singular spectra -------------------------------------------------------

double SingularSpectrum::total_mass() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

SingularSpectrum singular_spectrum(const Operator& a, const TracialState& tau) {
  if (a.rows() != tau.dim() || a.cols() != tau.dim()) throw InvalidInput("singular_spectrum: dimension mismatch");
  const bool herm = hermitian_defect(a) <= tol::kHermitian;
  const SpectralDecomposition sd = eig_hermitian(herm ? a : abs_square(a));
  const int n = sd.dim();
  std::vector<std::pair<double, double>> pairs(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double lam = sd.eigenvalues[j];
    const double s = herm ? std::abs(lam) : std::sqrt(std::max(0.0, lam));
    pairs[size_t(j)] = {s, tau.vector_mass(sd.eigenvectors.col(j))};
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](auto& x, auto& y) { return x.first > y.first; });
  SingularSpectrum out;
  out.values.reserve(size_t(n));
  out.weights.reserve(size_t(n));
  for (auto& [s, w] : pairs) {
    out.values.push_back(s);
    out.weights.push_back(w);
  }
  return out;
}

double schatten_norm(const SingularSpectrum& s, double p) {
  if (!(p > 0.0)) throw InvalidInput("schatten_norm: p must be positive");
  if (std::isinf(p)) return s.values.empty() ? 0.0 : s.values.front();
  double acc = 0.0;
  for (size_t j = 0; j < s.values.size(); ++j)
    if (s.values[j] > 0.0) acc += s.weights[j] * std::pow(s.values[j], p);
  return std::pow(acc, 1.0 / p);
}

double schatten_norm(const Operator& a, double p, const TracialState& tau) {
  if (!(p > 0.0)) throw InvalidInput("schatten_norm: p must be positive");
  return schatten_norm(singular_spectrum(a, tau), p);
}

double distribution_lambda(const SingularSpectrum& s, double t) {
  if (t < 0.0) throw InvalidInput("distribution_lambda: t must be nonnegative");
  double mass = 0.0;
  for (size_t j = 0; j < s.values.size() && s.values[j] > t; ++j) mass += s.weights[j];
  return mass;
}

double distribution_lambda(const Operator& a, double t, const TracialState& tau) {
  return distribution_lambda(singular_spectrum(a, tau), t);
}

double singular_mu(const SingularSpectrum& s, double t) {
  if (!(t >= 0.0)) throw InvalidInput("singular_mu: t must be nonnegative");
  double cumulative = 0.0;
  for (size_t j = 0; j < s.values.size(); ++j) {
    cumulative += s.weights[j];
    if (t < cumulative) return s.values[j];
  }
  return 0.0;
}

double singular_mu(const Operator& a, double t, const TracialState& tau) {
  return singular_mu(singular_spectrum(a, tau), t);
}

// --- Projection lattice -----------------------------------------------------

MeetJoin proj_meet_join(const Projection& p, const Projection& q) {
  if (p.dim() != q.dim()) throw InvalidInput("proj_meet_join: dimension mismatch");
  const int d = p.dim();
  const Operator id = Operator::Identity(d, d);

  const SpectralDecomposition gap = eig_hermitian(hermitian_part(2.0 * id - p.op() - q.op()));
  std::vector<int> meet_cols;
  for (int j = 0; j < d; ++j)
    if (gap.eigenvalues[j] <= tol::kLatticeRank) meet_cols.push_back(j);
  Operator wm(d, static_cast<Eigen::Index>(meet_cols.size()));
  for (size_t j = 0; j < meet_cols.size(); ++j) wm.col(Eigen::Index(j)) = gap.eigenvectors.col(meet_cols[j]);

  const SpectralDecomposition sum = eig_hermitian(hermitian_part(p.op() + q.op()));
  std::vector<int> join_cols;
  for (int j = 0; j < d; ++j)
    if (sum.eigenvalues[j] > tol::kLatticeRank) join_cols.push_back(j);
  Operator wj(d, static_cast<Eigen::Index>(join_cols.size()));
  for (size_t j = 0; j < join_cols.size(); ++j) wj.col(Eigen::Index(j)) = sum.eigenvectors.col(join_cols[j]);

  return {Projection::from_isometry(wm), Projection::from_isometry(wj)};
}

// --- Utilities --------------------------------------------------------------

bool is_diagonal(const Operator& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j && a(i, j) != Complex(0.0, 0.0)) return false;
  return true;
}

bool is_finite(const Operator& a) { return a.allFinite(); }

double hermitian_defect(const Operator& a) {
  if (a.rows() != a.cols()) return kInfinity;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i <= j; ++i) worst = std::max(worst, std::abs(a(i, j) - std::conj(a(j, i))));
  return worst / std::max(1.0, max_abs_entry(a));
}

Operator hermitian_part(const Operator& a) {
  if (a.rows() == a.cols() && is_diagonal(a)) {
    Operator out = Operator::Zero(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, i) = a(i, i).real();
    return out;
  }
  Operator out = 0.5 * a;
  out += out.adjoint().eval();
  return out;
}

Operator mul(const Operator& a, const Operator& b) {
  if (a.cols() != b.rows()) throw InvalidInput("mul: dimension mismatch");
  const bool da = a.rows() == a.cols() && is_diagonal(a);
  const bool db = b.rows() == b.cols() && is_diagonal(b);
  if (da && db) {
    Operator out = Operator::Zero(a.rows(), b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, i) = a(i, i) * b(i, i);
    return out;
  }
  if (da) return a.diagonal().asDiagonal() * b;
  if (db) return a * b.diagonal().asDiagonal();
  return a * b;
}

Operator abs_square(const Operator& a) {
  if (a.rows() == a.cols() && is_diagonal(a)) {
    Operator out = Operator::Zero(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, i) = std::norm(a(i, i));
    return out;
  }
  return hermitian_part(a.adjoint() * a);
}

Operator compress(const Operator& a, const Operator& v) {
  if (a.rows() != v.rows() || a.cols() != v.rows()) throw InvalidInput("compress: dimension mismatch");
  if (auto idx = selection_indices(v)) {
    const Eigen::Index r = v.cols();
    Operator out(r, r);
    for (Eigen::Index j = 0; j < r; ++j)
      for (Eigen::Index i = 0; i < r; ++i) out(i, j) = a((*idx)[size_t(i)], (*idx)[size_t(j)]);
    return out;
  }
  return v.adjoint() * a * v;
}

Operator expand(const Operator& z, const Operator& v) {
  if (z.rows() != v.cols() || z.cols() != v.cols()) throw InvalidInput("expand: dimension mismatch");
  if (auto idx = selection_indices(v)) {
    Operator out = Operator::Zero(v.rows(), v.rows());
    for (Eigen::Index j = 0; j < z.cols(); ++j)
      for (Eigen::Index i = 0; i < z.rows(); ++i) out((*idx)[size_t(i)], (*idx)[size_t(j)]) = z(i, j);
    return out;
  }
  return v * z * v.adjoint();
}

double hermitian_norm(const Operator& a) {
  if (a.size() == 0) return 0.0;
  return eig_hermitian(a).max_abs();
}

double operator_norm(const Operator& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == a.cols() && hermitian_defect(a) <= tol::kHermitian) return hermitian_norm(a);
  return std::sqrt(std::max(0.0, eig_hermitian(hermitian_part(a.adjoint() * a)).eigenvalues.maxCoeff()));
}

Operator sqrt_psd(const Operator& a) {
  return apply_function(a, [](double x) { return std::sqrt(std::max(0.0, x)); });
}

}  // namespace ncjn
