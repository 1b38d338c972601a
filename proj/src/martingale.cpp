#include "ncjn/martingale.hpp"

#include <cmath>

#include "ncjn/errors.hpp"

namespace ncjn {

Martingale::Martingale(FiltrationPtr filtration, const Operator& x) : filtration_(std::move(filtration)) {
  if (!filtration_) throw InvalidInput("martingale: null filtration");
  const int d = filtration_->dim();
  if (x.rows() != d || x.cols() != d) throw InvalidInput("martingale: dimension mismatch");
  if (!is_finite(x)) throw InvalidInput("martingale: non-finite entries");

  const int K = filtration_->levels();
  Operator top = filtration_->expect(K, x);
  changed_ = (top - x).cwiseAbs().maxCoeff() > tol::kIngestion;

  seq_.resize(size_t(K) + 1);
  seq_[0] = Operator::Zero(d, d);
  seq_[size_t(K)] = std::move(top);
  for (int n = 1; n < K; ++n) seq_[size_t(n)] = filtration_->expect(n, seq_[size_t(K)]);
  diff_.reserve(size_t(K));
  for (int k = 1; k <= K; ++k) diff_.push_back(seq_[size_t(k)] - seq_[size_t(k) - 1]);
}

const Operator& Martingale::at(int n) const {
  if (n < 0 || n > levels()) throw InvalidInput("martingale: level out of range");
  return seq_[size_t(n)];
}

const Operator& Martingale::difference(int k) const {
  if (k < 1 || k > levels()) throw InvalidInput("martingale: difference index out of range");
  return diff_[size_t(k) - 1];
}

Martingale Martingale::adjoint() const { return Martingale(filtration_, final().adjoint()); }

Martingale Martingale::scaled(Complex c) const { return Martingale(filtration_, c * final()); }

Martingale martingale_from_final(const Operator& x, FiltrationPtr filtration) {
  return Martingale(std::move(filtration), x);
}

namespace {

void check_start(const Martingale& m, int start) {
  if (start < 1 || start > m.levels() + 1) throw InvalidInput("square function: start level out of range");
}

}  // namespace

Operator square_Sc2(const Martingale& m, int start) {
  check_start(m, start);
  Operator s = Operator::Zero(m.dim(), m.dim());
  for (int k = start; k <= m.levels(); ++k) s += abs_square(m.difference(k));
  return hermitian_part(s);
}

Operator square_function_Sc(const Martingale& m, int start) { return sqrt_psd(square_Sc2(m, start)); }

Operator conditioned_square_sc2(const Martingale& m, int start) {
  check_start(m, start);
  Operator s = Operator::Zero(m.dim(), m.dim());
  for (int k = start; k <= m.levels(); ++k)
    s += m.filtration().expect(std::max(k - 1, 1), abs_square(m.difference(k)));
  return hermitian_part(s);
}

Operator conditioned_square_sc(const Martingale& m, int start) {
  return sqrt_psd(conditioned_square_sc2(m, start));
}

double hardy_norm(const Martingale& m, double p, HardyKind kind) {
  if (!(p > 0.0) || !std::isfinite(p)) throw InvalidInput("hardy_norm: p must be positive and finite");
  const bool row = kind == HardyKind::kConditionedRow || kind == HardyKind::kRow;
  const bool conditioned = kind == HardyKind::kConditionedColumn || kind == HardyKind::kConditionedRow;
  const Martingale use = row ? m.adjoint() : m;
  const Operator sq2 = conditioned ? conditioned_square_sc2(use, 1) : square_Sc2(use, 1);
  // Eigenvalues of the square at roundoff level are zeros; their square roots
  // would enter small-p norms at the 1e-8 level.
  // Rebuilding the root and decomposing again would put the noise back, so
  // the spectrum is read off this one decomposition.
  const SpectralDecomposition sd = eig_hermitian(sq2);
  const double cutoff = tol::kSquareRoundoff * std::max(1e-300, sd.eigenvalues.cwiseAbs().maxCoeff());
  SingularSpectrum spec;
  for (int j = sd.dim() - 1; j >= 0; --j) {
    const double x = sd.eigenvalues[j];
    spec.values.push_back(x <= cutoff ? 0.0 : std::sqrt(x));
    spec.weights.push_back(use.trace().vector_mass(sd.eigenvectors.col(j)));
  }
  return schatten_norm(spec, p);
}

}  // namespace ncjn
