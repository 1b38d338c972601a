#pragma once

// The amplified algebra M_{N+2-n} (x) L_inf({+-1}^{N+1-n}) (x) P A P used to
// linearize the square function, and the Cuculescu projections of the
// amplified martingale y.
//
// Everything in the amplified algebra that we touch is diagonal in the
// Rademacher factor, so operators are stored as one block per sign pattern.
// Inside a block the matrix-unit index is outer and the corner index inner:
// entry ((i, a), (j, b)) sits at (i r + a, j r + b), with local matrix index
// i = label - (n + 1) for labels n+1..N+2.

#include <vector>

#include "ncjn/martingale.hpp"

namespace ncjn {

enum class Variant { kBmo, kConditioned };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

namespace tol {
inline constexpr int kMaxAmplifiedDim = 4096;
inline constexpr int kMaxAmplifiedSpan = 4;  // N - n
inline constexpr int kMaxCornerRank = 8;
inline constexpr double kStructure = 1e-9;
}  // namespace tol

class BlockOperator {
 public:
  BlockOperator() = default;
  BlockOperator(int blocks, int block_dim) : blocks_(size_t(blocks), Operator::Zero(block_dim, block_dim)) {}

  int blocks() const { return static_cast<int>(blocks_.size()); }
  int block_dim() const { return blocks_.empty() ? 0 : static_cast<int>(blocks_.front().rows()); }
  Operator& operator[](int w) { return blocks_[size_t(w)]; }
  const Operator& operator[](int w) const { return blocks_[size_t(w)]; }

  BlockOperator adjoint() const;
  BlockOperator operator+(const BlockOperator& o) const;
  BlockOperator operator-(const BlockOperator& o) const;
  BlockOperator operator*(const BlockOperator& o) const;
  BlockOperator operator*(double c) const;
  /// Largest entry modulus over all blocks.
  double max_abs() const;
  /// Largest |eigenvalue| over all blocks (Hermitian input).
  double hermitian_norm() const;

 private:
  std::vector<Operator> blocks_;
};

class AmplifiedSystem {
 public:
  /// Requires n <= N <= K (N <= K - 1 for the conditioned variant) and P a
  /// nonzero projection of A_n.
  static AmplifiedSystem build(const Martingale& m, int n, int N, const Projection& P, double beta, Variant variant);

  int n() const { return n_; }
  int N() const { return N_; }
  double beta() const { return beta_; }
  Variant variant() const { return variant_; }
  /// Size of the matrix-unit factor, N + 2 - n.
  int matrix_size() const { return N_ + 2 - n_; }
  /// Number of Rademacher variables eps_n..eps_N.
  int sign_bits() const { return N_ + 1 - n_; }
  int corner_rank() const { return static_cast<int>(v_.cols()); }
  int block_dim() const { return matrix_size() * corner_rank(); }
  int blocks() const { return 1 << sign_bits(); }
  int total_dim() const { return blocks() * block_dim(); }
  double corner_mass() const { return corner_mass_; }
  const Filtration& filtration() const { return *filtration_; }

  /// Isometry onto range(P) in the ambient space.
  const Operator& corner_isometry() const { return v_; }
  /// The corner coefficient of eps_k, already divided by tau(P)^beta.
  const Operator& coefficient(int k) const;

  /// y_m for m in [n, N].
  const BlockOperator& y(int m) const;
  BlockOperator identity() const;
  BlockOperator zero() const;
  /// e_{label,label} (x) 1 (x) z for z acting on the corner coordinates.
  BlockOperator diagonal_unit(int label, const Operator& z) const;

  /// nu = matrix trace (x) average over signs (x) tau on the corner.
  double nu(const BlockOperator& a) const;
  /// Conditional expectation onto the amplified level m in [n, N].
  BlockOperator expect(int m, const BlockOperator& a) const;

 private:
  AmplifiedSystem() = default;
  int local(int label) const;

  FiltrationPtr filtration_;
  int n_ = 1, N_ = 1;
  double beta_ = 0.0;
  Variant variant_ = Variant::kBmo;
  Operator v_;
  double corner_mass_ = 0.0;
  double corner_unit_ = 0.0;  // tau-weight of one corner basis vector
  std::vector<Operator> coeff_;  // k = n..N
  std::vector<BlockOperator> y_;  // m = n..N
};

// --- Cuculescu projections --------------------------------------------------

struct CuculescuStructure {
  double membership = 0.0;   // max ||E_m(R_m) - R_m||
  double commutation = 0.0;  // max ||[R_m, R_{m-1} y_m R_{m-1}]||
  double domination = 0.0;   // max violation of R_m y_m R_m <= lambda R_m
  double nesting = 0.0;      // max ||R_m R_{m-1} - R_m||
  double scale = 1.0;        // max(1, max ||y_m||); residuals are compared to kStructure * scale
  bool pass = true;
};

class CuculescuSequence {
 public:
  double lambda() const { return lambda_; }
  int n() const { return n_; }
  int N() const { return n_ + int(r_.size()) - 2; }
  /// R_m for m in [n-1, N]; R_{n-1} is the identity.
  const BlockOperator& at(int m) const;

 private:
  friend CuculescuSequence cuculescu(const AmplifiedSystem& sys, double lambda);
  double lambda_ = 0.0;
  int n_ = 1;
  std::vector<BlockOperator> r_;
};

CuculescuSequence cuculescu(const AmplifiedSystem& sys, double lambda);

CuculescuStructure verify_cuculescu(const AmplifiedSystem& sys, const CuculescuSequence& seq);

}  // namespace ncjn
