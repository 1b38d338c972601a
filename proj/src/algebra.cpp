#include "ncjn/algebra.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include "ncjn/errors.hpp"

namespace ncjn {

namespace {

using Kind = SubalgebraDescriptor::Kind;

double l2_norm(const TracialState& tau, const Operator& y) {
  return std::sqrt(std::max(0.0, tau.inner(y, y).real()));
}

std::vector<Operator> gram_schmidt(const TracialState& tau, const std::vector<Operator>& span) {
  std::vector<Operator> out;
  for (const Operator& v : span) {
    if (v.rows() != tau.dim() || v.cols() != tau.dim()) throw InvalidInput("spanning set: dimension mismatch");
    const double original = l2_norm(tau, v);
    if (original == 0.0) continue;
    Operator w = v;
    for (int pass = 0; pass < 2; ++pass)
      for (const Operator& b : out) w -= tau.inner(b, w) * b;
    const double n = l2_norm(tau, w);
    if (n <= 1e-10 * original) continue;
    out.push_back(w / n);
  }
  return out;
}

Operator kron_identity(const Operator& b, int m) {
  const Eigen::Index a = b.rows(), c = b.cols();
  Operator out = Operator::Zero(a * m, c * m);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < a; ++i) {
      const Complex v = b(i, j);
      if (v == Complex(0.0, 0.0)) continue;
      for (int k = 0; k < m; ++k) out(i * m + k, j * m + k) = v;
    }
  return out;
}

std::optional<std::vector<int>> selected_rows(const Operator& u) {
  std::vector<int> idx;
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    int hit = -1;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const Complex c = u(i, j);
      if (c == Complex(0.0, 0.0)) continue;
      if (c != Complex(1.0, 0.0) || hit != -1) return std::nullopt;
      hit = static_cast<int>(i);
    }
    if (hit == -1) return std::nullopt;
    idx.push_back(hit);
  }
  return idx;
}

}  // namespace

std::string to_string(FiltrationKind kind) {
  return kind == FiltrationKind::kTensor ? "tensor" : "dyadic";
}

FiltrationKind filtration_kind_from_string(const std::string& s) {
  if (s == "tensor") return FiltrationKind::kTensor;
  if (s == "dyadic") return FiltrationKind::kDyadic;
  throw InvalidInput("unknown filtration kind '" + s + "'");
}

// --- Subalgebra -------------------------------------------------------------

Subalgebra::Subalgebra(TracialState tau, SubalgebraDescriptor desc, std::vector<Operator> basis)
    : tau_(std::move(tau)), desc_(desc), basis_(std::move(basis)) {}

Subalgebra Subalgebra::tensor_level(int level, int levels) {
  if (levels < 1 || level < 0 || level > levels) throw InvalidInput("tensor_level: level out of range");
  const Kind k = level == 0 ? Kind::kScalars : Kind::kTensor;
  return Subalgebra(TracialState::normalized(1 << levels), {k, level, levels}, {});
}

Subalgebra Subalgebra::dyadic_level(int level, int levels) {
  if (levels < 1 || level < 0 || level > levels) throw InvalidInput("dyadic_level: level out of range");
  const Kind k = level == 0 ? Kind::kScalars : Kind::kDyadic;
  return Subalgebra(TracialState::normalized(1 << levels), {k, level, levels}, {});
}

Subalgebra Subalgebra::from_basis(TracialState tau, std::vector<Operator> basis) {
  for (const Operator& b : basis)
    if (b.rows() != tau.dim() || b.cols() != tau.dim()) throw InvalidInput("from_basis: dimension mismatch");
  return Subalgebra(std::move(tau), {Kind::kCustom, 0, 0}, std::move(basis));
}

Subalgebra Subalgebra::from_spanning_set(TracialState tau, const std::vector<Operator>& span) {
  std::vector<Operator> basis = gram_schmidt(tau, span);
  return Subalgebra(std::move(tau), {Kind::kCustom, 0, 0}, std::move(basis));
}

bool Subalgebra::is_commutative() const {
  switch (desc_.kind) {
    case Kind::kScalars:
    case Kind::kDyadic: return true;
    case Kind::kTensor: return false;
    case Kind::kCustom: break;
  }
  for (size_t i = 0; i < basis_.size(); ++i)
    for (size_t j = i + 1; j < basis_.size(); ++j)
      if ((basis_[i] * basis_[j] - basis_[j] * basis_[i]).norm() > tol::kClosure) return false;
  return true;
}

int Subalgebra::block() const { return 1 << (desc_.levels - desc_.level); }

void Subalgebra::require_structured(const char* what) const {
  if (!is_structured()) throw InvalidInput(std::string(what) + " requires a structured subalgebra");
}

std::vector<Operator> Subalgebra::basis() const {
  if (!is_structured()) return basis_;
  const int a = representative_dim();
  const int m = block();
  std::vector<Operator> span;
  if (desc_.kind == Kind::kTensor) {
    span.reserve(size_t(a) * size_t(a));
    for (int i = 0; i < a; ++i)
      for (int j = 0; j < a; ++j) {
        Operator e = Operator::Zero(a, a);
        e(i, j) = 1.0;
        span.push_back(kron_identity(e, m));
      }
  } else {
    for (int i = 0; i < a; ++i) {
      Operator e = Operator::Zero(a, a);
      e(i, i) = 1.0;
      span.push_back(kron_identity(e, m));
    }
  }
  return gram_schmidt(tau_, span);
}

int Subalgebra::dimension() const {
  switch (desc_.kind) {
    case Kind::kScalars: return 1;
    case Kind::kTensor: return representative_dim() * representative_dim();
    case Kind::kDyadic: return representative_dim();
    case Kind::kCustom: break;
  }
  return static_cast<int>(basis_.size());
}

Operator Subalgebra::expect(const Operator& x) const {
  const int d = ambient_dim();
  if (x.rows() != d || x.cols() != d) throw InvalidInput("conditional expectation: dimension mismatch");
  if (!is_structured()) return expect_via_basis(x);

  const int a = representative_dim();
  const int m = block();
  Operator out = Operator::Zero(d, d);
  if (desc_.kind == Kind::kTensor) {
    for (int i2 = 0; i2 < a; ++i2)
      for (int i1 = 0; i1 < a; ++i1) {
        Complex s = 0.0;
        for (int c = 0; c < m; ++c) s += x(i1 * m + c, i2 * m + c);
        s /= double(m);
        for (int c = 0; c < m; ++c) out(i1 * m + c, i2 * m + c) = s;
      }
  } else {
    // Scalars and dyadic levels: average the diagonal over each block.
    for (int i = 0; i < a; ++i) {
      Complex s = 0.0;
      for (int c = 0; c < m; ++c) s += x(i * m + c, i * m + c);
      s /= double(m);
      for (int c = 0; c < m; ++c) out(i * m + c, i * m + c) = s;
    }
  }
  return out;
}

Operator Subalgebra::expect_via_basis(const Operator& x) const {
  const int d = ambient_dim();
  if (x.rows() != d || x.cols() != d) throw InvalidInput("conditional expectation: dimension mismatch");
  Operator out = Operator::Zero(d, d);
  for (const Operator& b : (is_structured() ? basis() : basis_)) out += tau_.inner(b, x) * b;
  return out;
}

double Subalgebra::membership_residual(const Operator& x) const { return (expect(x) - x).norm(); }

int Subalgebra::representative_dim() const {
  require_structured("representative_dim");
  return 1 << desc_.level;
}

double Subalgebra::unit_weight() const {
  require_structured("unit_weight");
  return tau_.total_mass() / double(representative_dim());
}

Operator Subalgebra::to_representative(const Operator& x) const {
  require_structured("to_representative");
  const int a = representative_dim();
  const int m = block();
  Operator b = Operator::Zero(a, a);
  if (desc_.kind == Kind::kTensor) {
    for (int i2 = 0; i2 < a; ++i2)
      for (int i1 = 0; i1 < a; ++i1) {
        Complex s = 0.0;
        for (int c = 0; c < m; ++c) s += x(i1 * m + c, i2 * m + c);
        b(i1, i2) = s / double(m);
      }
  } else {
    for (int i = 0; i < a; ++i) {
      Complex s = 0.0;
      for (int c = 0; c < m; ++c) s += x(i * m + c, i * m + c);
      b(i, i) = s / double(m);
    }
  }
  return b;
}

Operator Subalgebra::from_representative(const Operator& b) const {
  require_structured("from_representative");
  const int a = representative_dim();
  if (b.rows() != a || b.cols() != a) throw InvalidInput("from_representative: dimension mismatch");
  if (desc_.kind == Kind::kTensor) return kron_identity(b, block());
  Operator diag = Operator::Zero(a, a);
  diag.diagonal() = b.diagonal();
  return kron_identity(diag, block());
}

Operator Subalgebra::lift_isometry(const Operator& u) const {
  require_structured("lift_isometry");
  if (u.rows() != representative_dim()) throw InvalidInput("lift_isometry: dimension mismatch");
  if (desc_.kind != Kind::kTensor && !selected_rows(u))
    throw InvalidInput("lift_isometry: commutative levels only admit coordinate projections");
  return kron_identity(u, block());
}

Projection Subalgebra::lift_projection(const Operator& rep_isometry) const {
  return Projection::from_isometry(lift_isometry(rep_isometry));
}

Operator conditional_expectation(const Subalgebra& algebra, const Operator& x) { return algebra.expect(x); }

ValidationReport validate_subalgebra(const Subalgebra& algebra) {
  ValidationReport rep;
  const TracialState& tau = algebra.trace();
  const std::vector<Operator> basis = algebra.basis();
  const int d = algebra.ambient_dim();
  const double n = double(basis.size());
  if (n * n * double(d) * d * d > 4e10) throw BudgetExceeded("validate_subalgebra: subalgebra too large to validate");

  for (size_t i = 0; i < basis.size(); ++i)
    for (size_t j = 0; j < basis.size(); ++j) {
      const Complex g = tau.inner(basis[i], basis[j]);
      rep.gram_residual = std::max(rep.gram_residual, std::abs(g - (i == j ? 1.0 : 0.0)));
    }

  auto project = [&](const Operator& x) {
    Operator out = Operator::Zero(d, d);
    for (const Operator& b : basis) out += tau.inner(b, x) * b;
    return out;
  };
  const Operator id = Operator::Identity(d, d);
  rep.identity_residual = l2_norm(tau, project(id) - id);
  for (const Operator& b : basis) {
    const Operator bs = b.adjoint();
    rep.adjoint_residual = std::max(rep.adjoint_residual, l2_norm(tau, project(bs) - bs));
  }
  for (const Operator& b1 : basis)
    for (const Operator& b2 : basis) {
      const Operator prod = b1 * b2;
      rep.product_residual = std::max(rep.product_residual, l2_norm(tau, project(prod) - prod));
    }

  if (rep.gram_residual > tol::kBasisGram) rep.failures.push_back("basis not orthonormal");
  if (rep.identity_residual > tol::kIdentityInSpan) rep.failures.push_back("identity not in span");
  if (rep.adjoint_residual > tol::kClosure) rep.failures.push_back("not closed under adjoint");
  if (rep.product_residual > tol::kClosure) rep.failures.push_back("not closed under multiplication");
  rep.pass = rep.failures.empty();
  return rep;
}

// --- Filtration -------------------------------------------------------------

Filtration::Filtration(FiltrationKind kind, int levels)
    : kind_(kind), levels_(levels), tau_(TracialState::normalized(1)) {
  const int cap = kind == FiltrationKind::kTensor ? tol::kMaxTensorLevels : tol::kMaxDyadicLevels;
  if (levels < 1) throw InvalidInput("filtration needs at least one level");
  if (levels > cap) {
    std::ostringstream os;
    os << to_string(kind) << " filtration: " << levels << " levels exceeds the budget of " << cap;
    throw BudgetExceeded(os.str());
  }
  tau_ = TracialState::normalized(1 << levels);
  for (int n = 0; n <= levels; ++n)
    algebras_.push_back(kind == FiltrationKind::kTensor ? Subalgebra::tensor_level(n, levels)
                                                         : Subalgebra::dyadic_level(n, levels));
}

const Subalgebra& Filtration::level(int n) const {
  if (n < 0 || n > levels_) throw InvalidInput("filtration level out of range");
  return algebras_[size_t(n)];
}

FiltrationPtr make_tensor_filtration(int levels) {
  return std::make_shared<const Filtration>(FiltrationKind::kTensor, levels);
}

FiltrationPtr make_dyadic_filtration(int levels) {
  return std::make_shared<const Filtration>(FiltrationKind::kDyadic, levels);
}

FiltrationPtr make_filtration(FiltrationKind kind, int levels) {
  return std::make_shared<const Filtration>(kind, levels);
}

}  // namespace ncjn
