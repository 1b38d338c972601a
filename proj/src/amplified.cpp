#include "ncjn/amplified.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ncjn/errors.hpp"

namespace ncjn {

std::string to_string(Variant v) { return v == Variant::kBmo ? "bmo" : "conditioned"; }

Variant variant_from_string(const std::string& s) {
  if (s == "bmo") return Variant::kBmo;
  if (s == "conditioned") return Variant::kConditioned;
  throw InvalidInput("unknown variant '" + s + "'");
}

// --- BlockOperator ----------------------------------------------------------

namespace {

void same_shape(const BlockOperator& a, const BlockOperator& b) {
  if (a.blocks() != b.blocks() || a.block_dim() != b.block_dim())
    throw InvalidInput("block operators: shape mismatch");
}

}  // namespace

BlockOperator BlockOperator::adjoint() const {
  BlockOperator out = *this;
  for (auto& b : out.blocks_) b.adjointInPlace();
  return out;
}

BlockOperator BlockOperator::operator+(const BlockOperator& o) const {
  same_shape(*this, o);
  BlockOperator out = *this;
  for (int w = 0; w < blocks(); ++w) out[w] += o[w];
  return out;
}

BlockOperator BlockOperator::operator-(const BlockOperator& o) const {
  same_shape(*this, o);
  BlockOperator out = *this;
  for (int w = 0; w < blocks(); ++w) out[w] -= o[w];
  return out;
}

BlockOperator BlockOperator::operator*(const BlockOperator& o) const {
  same_shape(*this, o);
  BlockOperator out = *this;
  for (int w = 0; w < blocks(); ++w) out[w] = (*this)[w] * o[w];
  return out;
}

BlockOperator BlockOperator::operator*(double c) const {
  BlockOperator out = *this;
  for (auto& b : out.blocks_) b *= c;
  return out;
}

double BlockOperator::max_abs() const {
  double m = 0.0;
  for (const auto& b : blocks_)
    if (b.size() > 0) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

double BlockOperator::hermitian_norm() const {
  double m = 0.0;
  for (const auto& b : blocks_) m = std::max(m, ncjn::hermitian_norm(hermitian_part(b)));
  return m;
}

// --- AmplifiedSystem --------------------------------------------------------

AmplifiedSystem AmplifiedSystem::build(const Martingale& m, int n, int N, const Projection& P, double beta,
                                       Variant variant) {
  const int K = m.levels();
  const int top = variant == Variant::kConditioned ? K - 1 : K;
  if (n < 1 || N < n || N > top) {
    std::ostringstream os;
    os << "build_amplified: need 1 <= n <= N <= " << top << ", got n=" << n << " N=" << N;
    throw InvalidInput(os.str());
  }
  if (N - n > tol::kMaxAmplifiedSpan) throw BudgetExceeded("build_amplified: N - n exceeds the budget");
  if (!(beta >= 0.0)) throw InvalidInput("build_amplified: beta must be nonnegative");
  if (P.dim() != m.dim()) throw InvalidInput("build_amplified: projection dimension mismatch");
  const Operator& p = P.op();
  if ((p * p - p).cwiseAbs().maxCoeff() > tol::kProjection || hermitian_defect(p) > tol::kProjection)
    throw InvalidInput("build_amplified: P is not a projection");
  if (m.filtration().level(n).membership_residual(p) > tol::kMembership)
    throw InvalidInput("build_amplified: P is not in A_n");

  AmplifiedSystem sys;
  sys.filtration_ = m.filtration_ptr();
  sys.n_ = n;
  sys.N_ = N;
  sys.beta_ = beta;
  sys.variant_ = variant;
  sys.v_ = P.range_isometry();
  const int r = sys.corner_rank();
  if (r < 1) throw InvalidInput("build_amplified: P must be nonzero");
  if (r > tol::kMaxCornerRank) throw BudgetExceeded("build_amplified: rank(P) exceeds the budget");
  if (sys.total_dim() > tol::kMaxAmplifiedDim) throw BudgetExceeded("build_amplified: amplified dimension exceeds the budget");

  const TracialState& tau = m.trace();
  sys.corner_mass_ = P.trace(tau);
  sys.corner_unit_ = tau.weights()[0];
  const double scale = std::pow(sys.corner_mass_, beta);

  for (int k = n; k <= N; ++k) {
    const Operator sq = variant == Variant::kBmo ? abs_square(m.difference(k))
                                                 : m.filtration().expect(k, abs_square(m.difference(k + 1)));
    sys.coeff_.push_back(sqrt_psd(hermitian_part(compress(sq, sys.v_))) / scale);
  }

  BlockOperator acc = sys.zero();
  for (int k = n; k <= N; ++k) {
    const int l = k + 1 - n;  // local index of label k + 2
    const Operator& d = sys.coeff_[size_t(k - n)];
    for (int w = 0; w < sys.blocks(); ++w) {
      const double s = (w >> (k - n)) & 1 ? -1.0 : 1.0;
      acc[w].block(0, l * r, r, r) += s * d;
      acc[w].block(l * r, 0, r, r) += s * d;
    }
    sys.y_.push_back(acc);
  }
  return sys;
}

int AmplifiedSystem::local(int label) const {
  if (label < n_ + 1 || label > N_ + 2) throw InvalidInput("amplified: matrix-unit label out of range");
  return label - (n_ + 1);
}

const Operator& AmplifiedSystem::coefficient(int k) const {
  if (k < n_ || k > N_) throw InvalidInput("amplified: coefficient index out of range");
  return coeff_[size_t(k - n_)];
}

const BlockOperator& AmplifiedSystem::y(int m) const {
  if (m < n_ || m > N_) throw InvalidInput("amplified: level out of range");
  return y_[size_t(m - n_)];
}

BlockOperator AmplifiedSystem::zero() const { return BlockOperator(blocks(), block_dim()); }

BlockOperator AmplifiedSystem::identity() const {
  BlockOperator out = zero();
  for (int w = 0; w < blocks(); ++w) out[w].setIdentity();
  return out;
}

BlockOperator AmplifiedSystem::diagonal_unit(int label, const Operator& z) const {
  const int r = corner_rank();
  if (z.rows() != r || z.cols() != r) throw InvalidInput("amplified: corner operator dimension mismatch");
  const int l = local(label);
  BlockOperator out = zero();
  for (int w = 0; w < blocks(); ++w) out[w].block(l * r, l * r, r, r) = z;
  return out;
}

double AmplifiedSystem::nu(const BlockOperator& a) const {
  double s = 0.0;
  for (int w = 0; w < a.blocks(); ++w) s += a[w].trace().real();
  return s * corner_unit_ / double(blocks());
}

BlockOperator AmplifiedSystem::expect(int m, const BlockOperator& a) const {
  if (m < n_ || m > N_) throw InvalidInput("amplified: level out of range");
  const int keep = m - n_ + 1;  // eps_n..eps_m survive
  const int groups = 1 << keep;
  const int r = corner_rank();
  const int M = matrix_size();
  const Subalgebra& level = filtration_->level(m);

  std::vector<Operator> avg(size_t(groups), Operator::Zero(block_dim(), block_dim()));
  std::vector<int> count(size_t(groups), 0);
  for (int w = 0; w < blocks(); ++w) {
    avg[size_t(w & (groups - 1))] += a[w];
    ++count[size_t(w & (groups - 1))];
  }
  for (int g = 0; g < groups; ++g) {
    avg[size_t(g)] /= double(count[size_t(g)]);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        const Operator z = avg[size_t(g)].block(i * r, j * r, r, r);
        avg[size_t(g)].block(i * r, j * r, r, r) = compress(level.expect(expand(z, v_)), v_);
      }
  }
  BlockOperator out = zero();
  for (int w = 0; w < blocks(); ++w) out[w] = avg[size_t(w & (groups - 1))];
  return out;
}

// --- Cuculescu --------------------------------------------------------------

const BlockOperator& CuculescuSequence::at(int m) const {
  if (m < n_ - 1 || m > N()) throw InvalidInput("cuculescu: level out of range");
  return r_[size_t(m - (n_ - 1))];
}

CuculescuSequence cuculescu(const AmplifiedSystem& sys, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("cuculescu: lambda must be nonnegative");
  CuculescuSequence seq;
  seq.lambda_ = lambda;
  seq.n_ = sys.n();
  seq.r_.push_back(sys.identity());

  const int blocks = sys.blocks();
  const int dim = sys.block_dim();
  std::vector<Operator> range(size_t(blocks), Operator::Identity(dim, dim));
  for (int m = sys.n(); m <= sys.N(); ++m) {
    const BlockOperator& y = sys.y(m);
    std::vector<SpectralDecomposition> sds;
    double scale = 0.0;
    for (int w = 0; w < blocks; ++w) {
      const Operator& u = range[size_t(w)];
      sds.push_back(eig_hermitian(hermitian_part(u.adjoint() * y[w] * u)));
      scale = std::max(scale, sds.back().max_abs());
    }
    const double btol = boundary_tolerance(scale);
    const Interval below = Interval::below(lambda);
    BlockOperator r = sys.zero();
    for (int w = 0; w < blocks; ++w) {
      const SpectralDecomposition& sd = sds[size_t(w)];
      std::vector<int> keep;
      for (int j = 0; j < sd.dim(); ++j)
        if (below.contains(sd.eigenvalues[j], btol)) keep.push_back(j);
      Operator sel(sd.dim(), Eigen::Index(keep.size()));
      for (size_t j = 0; j < keep.size(); ++j) sel.col(Eigen::Index(j)) = sd.eigenvectors.col(keep[j]);
      range[size_t(w)] = range[size_t(w)] * sel;
      r[w] = range[size_t(w)] * range[size_t(w)].adjoint();
    }
    seq.r_.push_back(std::move(r));
  }
  return seq;
}

CuculescuStructure verify_cuculescu(const AmplifiedSystem& sys, const CuculescuSequence& seq) {
  CuculescuStructure out;
  for (int m = sys.n(); m <= sys.N(); ++m) out.scale = std::max(out.scale, sys.y(m).hermitian_norm());
  const double lambda = seq.lambda();
  for (int m = sys.n(); m <= sys.N(); ++m) {
    const BlockOperator& r = seq.at(m);
    const BlockOperator& prev = seq.at(m - 1);
    const BlockOperator& y = sys.y(m);
    out.membership = std::max(out.membership, (sys.expect(m, r) - r).max_abs());
    const BlockOperator c = prev * y * prev;
    out.commutation = std::max(out.commutation, (r * c - c * r).max_abs());
    out.nesting = std::max(out.nesting, (r * prev - r).max_abs());
    const BlockOperator ryr = r * y * r;
    for (int w = 0; w < r.blocks(); ++w) {
      const Operator gap = hermitian_part(lambda * r[w] - ryr[w]);
      const double lo = eig_hermitian(gap).eigenvalues.minCoeff();
      out.domination = std::max(out.domination, -lo);
    }
  }
  const double limit = tol::kStructure * out.scale;
  out.pass = out.membership <= limit && out.commutation <= limit && out.domination <= limit && out.nesting <= limit;
  return out;
}

}  // namespace ncjn
