#pragma once

// Martingales x_n = E_n(x) over a filtration, their differences, and the
// column, row and conditioned square functions.
//
// Conventions: levels run 1..K, x_0 = 0 and E_0 = E_1, so dx_1 = E_1(x).

#include <vector>

#include "ncjn/algebra.hpp"

namespace ncjn {

namespace tol {
inline constexpr double kIngestion = 1e-12;
/// Eigenvalues of a square function below this fraction of the largest are zero.
inline constexpr double kSquareRoundoff = 1e-13;
}  // namespace tol

class Martingale {
 public:
  /// Forces x into A_K by applying E_K; ingestion_changed() reports whether
  /// that moved x by more than tol::kIngestion (max-entry norm).
  Martingale(FiltrationPtr filtration, const Operator& x);

  const Filtration& filtration() const { return *filtration_; }
  const FiltrationPtr& filtration_ptr() const { return filtration_; }
  int levels() const { return filtration_->levels(); }
  int dim() const { return filtration_->dim(); }
  const TracialState& trace() const { return filtration_->trace(); }

  const Operator& final() const { return seq_.back(); }
  /// x_n for n in [0, K].
  const Operator& at(int n) const;
  /// dx_k for k in [1, K].
  const Operator& difference(int k) const;
  bool ingestion_changed() const { return changed_; }

  Martingale adjoint() const;
  Martingale scaled(Complex c) const;

 private:
  FiltrationPtr filtration_;
  std::vector<Operator> seq_;   // x_0 .. x_K
  std::vector<Operator> diff_;  // dx_1 .. dx_K stored at [0, K)
  bool changed_ = false;
};

Martingale martingale_from_final(const Operator& x, FiltrationPtr filtration);

/// S_c^2(x - x_{start-1}) = sum_{k=start}^K |dx_k|^2; start in [1, K+1].
Operator square_Sc2(const Martingale& m, int start);
Operator square_function_Sc(const Martingale& m, int start);

/// sum_{k=start}^K E_{k-1}|dx_k|^2 with E_0 = E_1; start in [1, K+1].
/// s_c^2(x - x_n) is conditioned_square_sc2(m, n + 1).
Operator conditioned_square_sc2(const Martingale& m, int start);
Operator conditioned_square_sc(const Martingale& m, int start);

enum class HardyKind { kConditionedColumn, kConditionedRow, kColumn, kRow };  // h_c, h_r, H_c, H_r

/// Schatten p-norm of the chosen square function of the whole martingale.
double hardy_norm(const Martingale& m, double p, HardyKind kind);

}  // namespace ncjn
