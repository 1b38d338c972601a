#pragma once

// Unital *-subalgebras of a tracial matrix algebra, their trace-preserving
// conditional expectations, and the two filtration models used throughout:
//
//   tensor  - M_2^{(x)K} with A_n = M_2^{(x)n} (x) 1, E_n = id (x) normalized
//             partial trace over the last K-n factors;
//   dyadic  - diagonal 2^K x 2^K matrices with A_n the functions constant on
//             dyadic blocks of length 2^{K-n}, E_n = block averaging.
//
// Level 0 of either model is the scalars. Structured levels also expose a
// "representative" space: A_n is *-isomorphic to a (possibly diagonal)
// algebra acting on C^{2^n}, with every minimal projection carrying the same
// trace. Projection suprema over A_n are computed there.

#include <memory>
#include <string>
#include <vector>

#include "ncjn/linalg.hpp"

namespace ncjn {

enum class FiltrationKind { kTensor, kDyadic };

std::string to_string(FiltrationKind kind);
FiltrationKind filtration_kind_from_string(const std::string& s);

namespace tol {
inline constexpr double kBasisGram = 1e-10;
inline constexpr double kIdentityInSpan = 1e-10;
inline constexpr double kClosure = 1e-9;
inline constexpr double kMembership = 1e-9;
inline constexpr int kMaxTensorLevels = 7;
inline constexpr int kMaxDyadicLevels = 12;
}  // namespace tol

struct SubalgebraDescriptor {
  enum class Kind { kScalars, kTensor, kDyadic, kCustom };
  Kind kind = Kind::kCustom;
  int level = 0;   // n
  int levels = 0;  // K of the ambient filtration
};

class Subalgebra {
 public:
  /// Structured level n of a K-level model (n = 0 gives the scalars).
  static Subalgebra tensor_level(int level, int levels);
  static Subalgebra dyadic_level(int level, int levels);
  /// Arbitrary basis taken as-is (the caller vouches for orthonormality;
  /// validate_subalgebra checks it).
  static Subalgebra from_basis(TracialState tau, std::vector<Operator> basis);
  /// Orthonormalizes the spanning set by Gram-Schmidt in the given order.
  static Subalgebra from_spanning_set(TracialState tau, const std::vector<Operator>& span);

  int ambient_dim() const { return tau_.dim(); }
  const TracialState& trace() const { return tau_; }
  const SubalgebraDescriptor& descriptor() const { return desc_; }
  bool is_structured() const { return desc_.kind != SubalgebraDescriptor::Kind::kCustom; }
  bool is_commutative() const;

  /// Orthonormal basis under <a,b> = tau(a^* b). Generated on demand for
  /// structured levels.
  std::vector<Operator> basis() const;
  /// Vector-space dimension.
  int dimension() const;

  /// L2(tau)-orthogonal projection onto the subalgebra.
  Operator expect(const Operator& x) const;
  /// Same map evaluated from the basis, sum_i tau(b_i^* x) b_i.
  Operator expect_via_basis(const Operator& x) const;
  /// ||E(x) - x|| in Frobenius norm.
  double membership_residual(const Operator& x) const;

  // Representative space (structured levels only).
  int representative_dim() const;
  /// tau of a minimal projection of the subalgebra.
  double unit_weight() const;
  /// For x in the subalgebra, the element b of the representative algebra
  /// with x = lift(b).
  Operator to_representative(const Operator& x) const;
  Operator from_representative(const Operator& b) const;
  /// For an isometry u : C^r -> C^{2^n}, an isometry onto the range of the
  /// lifted projection lift(u u^*).
  Operator lift_isometry(const Operator& u) const;
  Projection lift_projection(const Operator& rep_isometry) const;

 private:
  Subalgebra(TracialState tau, SubalgebraDescriptor desc, std::vector<Operator> basis);
  int block() const;  // 2^{K-n}
  void require_structured(const char* what) const;

  TracialState tau_;
  SubalgebraDescriptor desc_;
  std::vector<Operator> basis_;  // custom subalgebras only
};

Operator conditional_expectation(const Subalgebra& algebra, const Operator& x);

struct ValidationReport {
  bool pass = true;
  double gram_residual = 0.0;
  double identity_residual = 0.0;
  double adjoint_residual = 0.0;
  double product_residual = 0.0;
  std::vector<std::string> failures;
};

ValidationReport validate_subalgebra(const Subalgebra& algebra);

class Filtration {
 public:
  Filtration(FiltrationKind kind, int levels);

  FiltrationKind kind() const { return kind_; }
  int levels() const { return levels_; }
  int dim() const { return tau_.dim(); }
  const TracialState& trace() const { return tau_; }
  bool is_commutative() const { return kind_ == FiltrationKind::kDyadic; }

  /// A_n for n in [0, K]; A_0 is the scalars and A_K the ambient algebra.
  const Subalgebra& level(int n) const;
  Operator expect(int n, const Operator& x) const { return level(n).expect(x); }

 private:
  FiltrationKind kind_;
  int levels_;
  TracialState tau_;
  std::vector<Subalgebra> algebras_;
};

using FiltrationPtr = std::shared_ptr<const Filtration>;

FiltrationPtr make_tensor_filtration(int levels);
FiltrationPtr make_dyadic_filtration(int levels);
FiltrationPtr make_filtration(FiltrationKind kind, int levels);

}  // namespace ncjn
