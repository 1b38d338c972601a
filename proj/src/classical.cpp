#include "ncjn/classical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ncjn/errors.hpp"

namespace ncjn {

namespace {

constexpr double kE = 2.718281828459045235360287;
constexpr double kClassicalSlack = 1e-12;

std::vector<double> block_means(const std::vector<double>& v, int block) {
  std::vector<double> out(v.size());
  for (size_t start = 0; start < v.size(); start += size_t(block)) {
    double s = 0.0;
    for (int c = 0; c < block; ++c) s += v[start + size_t(c)];
    s /= block;
    for (int c = 0; c < block; ++c) out[start + size_t(c)] = s;
  }
  return out;
}

std::vector<double> expect_level(const DyadicMartingale& f, int n, const std::vector<double>& v) {
  return block_means(v, 1 << (f.depth() - std::max(n, 0)));
}

// Q^2 at level n: S^2(f - f_{n-1}) or s^2(f - f_n).
std::vector<double> tail_square(const DyadicMartingale& f, int n, bool conditioned) {
  if (!conditioned) {
    std::vector<double> s = classical_square_function(f, n);
    for (double& x : s) x *= x;
    return s;
  }
  return classical_conditioned_square2(f, n + 1);
}

// max over r of (sum of the r largest atom values) / (r w)^{exponent}.
double best_prefix(std::vector<double> v, double w, double exponent) {
  std::sort(v.begin(), v.end(), std::greater<double>());
  double sum = 0.0, best = 0.0;
  for (size_t r = 1; r <= v.size(); ++r) {
    sum += std::max(0.0, v[r - 1]);
    best = std::max(best, sum / std::pow(double(r) * w, exponent));
  }
  return best;
}

// Per-atom tau-masses w * mean(values) at level n.
std::vector<double> atom_masses(const DyadicMartingale& f, int n, const std::vector<double>& values) {
  const int block = 1 << (f.depth() - n);
  const double w = 1.0 / double(1 << n);
  std::vector<double> out;
  for (size_t start = 0; start < values.size(); start += size_t(block)) {
    double s = 0.0;
    for (int c = 0; c < block; ++c) s += values[start + size_t(c)];
    out.push_back(w * s / block);
  }
  return out;
}

std::vector<bool> event_mask(const DyadicMartingale& f, const DyadicEvent& e) {
  if (e.level < 1 || e.level > f.depth()) throw InvalidInput("dyadic event: level out of range");
  const int block = 1 << (f.depth() - e.level);
  std::vector<bool> mask(size_t(f.size()), false);
  for (int a : e.atoms) {
    if (a < 0 || a >= (1 << e.level)) throw InvalidInput("dyadic event: atom out of range");
    for (int c = 0; c < block; ++c) mask[size_t(a * block + c)] = true;
  }
  return mask;
}

double count_at_least(const DyadicMartingale& f, const DyadicEvent& e, const std::vector<double>& q, double lambda) {
  const std::vector<bool> mask = event_mask(f, e);
  int hits = 0;
  for (size_t i = 0; i < q.size(); ++i)
    if (mask[i] && q[i] >= lambda) ++hits;
  return double(hits) / f.size();
}

}  // namespace

DyadicMartingale::DyadicMartingale(std::vector<double> values) : values_(std::move(values)) {
  const size_t n = values_.size();
  if (n < 2 || (n & (n - 1)) != 0) throw InvalidInput("dyadic martingale: length must be a power of two >= 2");
  while ((size_t(1) << depth_) < n) ++depth_;
  if (depth_ > 20) throw BudgetExceeded("dyadic martingale: depth above 20");
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidInput("dyadic martingale: non-finite value");
  levels_.push_back(std::vector<double>(n, 0.0));
  for (int k = 1; k <= depth_; ++k) levels_.push_back(block_means(values_, 1 << (depth_ - k)));
}

const std::vector<double>& DyadicMartingale::level(int n) const {
  if (n < 0 || n > depth_) throw InvalidInput("dyadic martingale: level out of range");
  return levels_[size_t(n)];
}

std::vector<double> DyadicMartingale::difference(int k) const {
  if (k < 1 || k > depth_) throw InvalidInput("dyadic martingale: difference index out of range");
  std::vector<double> out(values_.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = levels_[size_t(k)][i] - levels_[size_t(k) - 1][i];
  return out;
}

std::vector<double> classical_square_function(const DyadicMartingale& f, int start) {
  if (start < 1 || start > f.depth() + 1) throw InvalidInput("classical square function: start out of range");
  std::vector<double> s(size_t(f.size()), 0.0);
  for (int k = start; k <= f.depth(); ++k) {
    const std::vector<double> d = f.difference(k);
    for (size_t i = 0; i < s.size(); ++i) s[i] += d[i] * d[i];
  }
  for (double& x : s) x = std::sqrt(x);
  return s;
}

std::vector<double> classical_conditioned_square2(const DyadicMartingale& f, int start) {
  if (start < 1 || start > f.depth() + 1) throw InvalidInput("classical square function: start out of range");
  std::vector<double> s(size_t(f.size()), 0.0);
  for (int k = start; k <= f.depth(); ++k) {
    std::vector<double> d = f.difference(k);
    for (double& x : d) x *= x;
    const std::vector<double> c = expect_level(f, std::max(k - 1, 1), d);
    for (size_t i = 0; i < s.size(); ++i) s[i] += c[i];
  }
  return s;
}

double classical_bmo_norm(const DyadicMartingale& f) {
  double best = 0.0;
  for (int n = 1; n <= f.depth(); ++n) {
    const std::vector<double> m = expect_level(f, n, tail_square(f, n, false));
    best = std::max(best, *std::max_element(m.begin(), m.end()));
  }
  return std::sqrt(best);
}

double classical_lipschitz_norm(const DyadicMartingale& f, double beta, bool conditioned) {
  return classical_moment_norm(f, beta, 2.0, conditioned);
}

double classical_moment_norm(const DyadicMartingale& f, double beta, double p, bool conditioned) {
  if (!(p > 0.0) || !(beta >= 0.0)) throw InvalidInput("classical moment norm: need p > 0, beta >= 0");
  double best = 0.0;
  const int last = conditioned ? std::max(1, f.depth() - 1) : f.depth();
  for (int n = 1; n <= last; ++n) {
    std::vector<double> q = tail_square(f, n, conditioned);
    for (double& x : q) x = std::pow(std::max(0.0, x), p / 2.0);
    const double w = 1.0 / double(1 << n);
    best = std::max(best, std::pow(best_prefix(atom_masses(f, n, q), w, 1.0 + p * beta), 1.0 / p));
  }
  if (conditioned) {
    const std::vector<double>& f1 = f.level(1);
    for (double v : f1) best = std::max(best, std::abs(v));
  }
  return best;
}

double classical_probability(const DyadicMartingale& f, const DyadicEvent& e) {
  const std::vector<bool> mask = event_mask(f, e);
  return double(std::count(mask.begin(), mask.end(), true)) / f.size();
}

double classical_tail(const DyadicMartingale& f, const DyadicEvent& e, double beta, double lambda, bool conditioned) {
  std::vector<double> q = tail_square(f, e.level, conditioned);
  const double scale = std::pow(classical_probability(f, e), beta);
  for (double& x : q) x = std::sqrt(std::max(0.0, x)) / scale;
  return count_at_least(f, e, q, lambda);
}

Check verify_classical_step(const DyadicMartingale& f, const DyadicEvent& e, double lambda, double mu) {
  if (!(lambda >= 0.0) || !(mu > 0.0)) throw InvalidInput("classical step: need lambda >= 0 and mu > 0");
  const std::vector<double> s = classical_square_function(f, e.level);
  const double lhs = count_at_least(f, e, s, lambda + mu);
  const double rhs = classical_bmo_norm(f) / mu * count_at_least(f, e, s, lambda);
  Check c = inequality("classical.step", lhs, rhs, 0.0, kClassicalSlack);
  c.n = e.level;
  c.lambda = lambda;
  return c;
}

Check verify_classical_tail(const DyadicMartingale& f, const DyadicEvent& e, double lambda) {
  if (!(lambda >= 0.0)) throw InvalidInput("classical tail: lambda must be nonnegative");
  const std::vector<double> s = classical_square_function(f, e.level);
  const double lhs = count_at_least(f, e, s, lambda);
  const double rhs = kE * kE * std::exp(-lambda / kE) * classical_probability(f, e);
  Check c = inequality("classical.tail", lhs, rhs, 0.0, kClassicalSlack);
  c.n = e.level;
  c.lambda = lambda;
  return c;
}

std::vector<Check> verify_classical_chain(const DyadicMartingale& f, const DyadicEvent& e, double lambda) {
  if (!(lambda >= 0.0)) throw InvalidInput("classical chain: lambda must be nonnegative");
  const std::vector<double> s = classical_square_function(f, e.level);
  const double pe = classical_probability(f, e);
  const double norm = classical_bmo_norm(f);
  const int k = int(std::floor(lambda / kE));

  // Walk j = 1..k multiplying the step factor ||f||/e, starting from the bound P(E).
  double iterated = pe;
  for (int j = 2; j <= k; ++j) iterated *= norm / kE;
  const double measured = count_at_least(f, e, s, lambda);
  std::vector<Check> out;
  out.push_back(inequality("classical.chain-iterated", measured, iterated, 0.0, kClassicalSlack));
  out.push_back(inequality("classical.chain-closed-form", iterated, kE * kE * std::exp(-lambda / kE) * pe, 0.0,
                           kClassicalSlack));
  for (auto& c : out) {
    c.n = e.level;
    c.lambda = lambda;
  }
  return out;
}

Martingale embed_to_matrix(const DyadicMartingale& f, const FiltrationPtr& filtration) {
  if (!filtration || filtration->kind() != FiltrationKind::kDyadic || filtration->levels() != f.depth())
    throw InvalidInput("embed_to_matrix: depth does not match a dyadic filtration");
  Operator x = Operator::Zero(f.size(), f.size());
  for (int i = 0; i < f.size(); ++i) x(i, i) = f.values()[size_t(i)];
  return Martingale(filtration, x);
}

Projection event_projection(const DyadicMartingale& f, const DyadicEvent& e) {
  const std::vector<bool> mask = event_mask(f, e);
  Operator p = Operator::Zero(f.size(), f.size());
  for (int i = 0; i < f.size(); ++i)
    if (mask[size_t(i)]) p(i, i) = 1.0;
  return Projection::unchecked(std::move(p));
}

}  // namespace ncjn
