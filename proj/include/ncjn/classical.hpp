#pragma once

// Plain-array dyadic martingales on 2^K equally likely points. Shares no
// code with the matrix path so the two can be compared.

#include <vector>

#include "ncjn/check.hpp"
#include "ncjn/martingale.hpp"

namespace ncjn {

class DyadicMartingale {
 public:
  /// values.size() must be 2^K with 1 <= K <= 20.
  explicit DyadicMartingale(std::vector<double> values);

  int depth() const { return depth_; }
  int size() const { return static_cast<int>(values_.size()); }
  const std::vector<double>& values() const { return values_; }

  /// f_n sampled pointwise, n in [0, K]; f_0 = 0.
  const std::vector<double>& level(int n) const;
  /// df_k for k in [1, K]; df_1 = f_1.
  std::vector<double> difference(int k) const;

 private:
  int depth_ = 0;
  std::vector<double> values_;
  std::vector<std::vector<double>> levels_;
};

/// Union of level-n atoms; atom j covers points [j 2^{K-n}, (j+1) 2^{K-n}).
struct DyadicEvent {
  int level = 1;
  std::vector<int> atoms;
};

/// Pointwise (sum_{k >= start} df_k^2)^{1/2}.
std::vector<double> classical_square_function(const DyadicMartingale& f, int start);
/// Pointwise sum_{k >= start} E_{max(k-1,1)}(df_k^2).
std::vector<double> classical_conditioned_square2(const DyadicMartingale& f, int start);

/// sup_n max over level-n atoms of the mean of S^2(f - f_{n-1}), square-rooted.
double classical_bmo_norm(const DyadicMartingale& f);
/// conditioned = false: L_beta; true: Lambda_beta (tails f - f_n with s, max'd with sup |f_1|).
double classical_lipschitz_norm(const DyadicMartingale& f, double beta, bool conditioned);
double classical_moment_norm(const DyadicMartingale& f, double beta, double p, bool conditioned);

double classical_probability(const DyadicMartingale& f, const DyadicEvent& e);
/// P({w in E : Q(w) / P(E)^beta >= lambda}) with Q = S(f - f_{n-1}), or
/// s(f - f_n) when conditioned; n is the event's level.
double classical_tail(const DyadicMartingale& f, const DyadicEvent& e, double beta, double lambda, bool conditioned);

/// P(E, S >= lambda + mu) <= (||f||_BMO / mu) P(E, S >= lambda).
Check verify_classical_step(const DyadicMartingale& f, const DyadicEvent& e, double lambda, double mu);
/// For f of unit BMO norm: P(E, S >= lambda) <= e^2 e^{-lambda/e} P(E).
Check verify_classical_tail(const DyadicMartingale& f, const DyadicEvent& e, double lambda);
/// Both links of the iteration: the measured tail is below the product of
/// the step bounds at lambda = (k-1)e, ..., e, which is below e^2 e^{-lambda/e} P(E).
std::vector<Check> verify_classical_chain(const DyadicMartingale& f, const DyadicEvent& e, double lambda);

Martingale embed_to_matrix(const DyadicMartingale& f, const FiltrationPtr& filtration);
/// Diagonal projection onto the event's points.
Projection event_projection(const DyadicMartingale& f, const DyadicEvent& e);

}  // namespace ncjn
