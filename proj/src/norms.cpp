#include "ncjn/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "ncjn/errors.hpp"
#include "ncjn/random.hpp"

namespace ncjn {

std::string to_string(NormMode mode) { return mode == NormMode::kExact ? "exact" : "lower_bound"; }

std::string to_string(NormMethod method) {
  switch (method) {
    case NormMethod::kKyFan: return "kyfan";
    case NormMethod::kEnumeration: return "enumeration";
    case NormMethod::kSearch: return "search";
  }
  return "?";
}

std::string to_string(NormFamily family) { return family == NormFamily::kL ? "L" : "Lambda"; }

Operator tail_square(const Martingale& m, int n, NormFamily family) {
  if (n < 1 || n > m.levels()) throw InvalidInput("tail_square: level out of range");
  return family == NormFamily::kL ? square_Sc2(m, n) : conditioned_square_sc2(m, n + 1);
}

int first_level(NormFamily) { return 1; }

int last_level(const Martingale& m, NormFamily family) {
  // x - x_K vanishes, so the Lambda supremum stops one level early.
  return family == NormFamily::kL ? m.levels() : std::max(1, m.levels() - 1);
}

namespace {

// Compressed eigenvalues of Q^2 at or below this are roundoff zeros; for
// p < 2 their powers would otherwise dominate small objectives.
double roundoff_cutoff(const Operator& q2) {
  return tol::kSquareRoundoff * q2.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

double moment_objective(const Operator& q2, const Projection& e, double beta, double p, const TracialState& tau) {
  const double te = e.trace(tau);
  if (te <= 0.0) return 0.0;
  const Operator w = e.range_isometry();
  const SpectralDecomposition sd = eig_hermitian(compress(q2, w));
  const double cutoff = roundoff_cutoff(q2);
  const Operator f = apply_function(sd, [p, cutoff](double mu) { return mu <= cutoff ? 0.0 : std::pow(mu, p / 2.0); });
  const double num = tau.corner_trace(w, f);
  return std::pow(std::max(0.0, num), 1.0 / p) / std::pow(te, beta + 1.0 / p);
}

namespace {

Operator top_columns(const SpectralDecomposition& sd, int r) {
  const int a = sd.dim();
  Operator u(a, r);
  for (int j = 0; j < r; ++j) u.col(j) = sd.eigenvectors.col(a - 1 - j);
  return u;
}

// Best r and value of (w * sum of top-r eigenvalues)^{1/p'} scaled as in the
// Ky Fan reductions: maximize S_r / (r w)^{exponent}.
std::pair<int, double> best_prefix(const SpectralDecomposition& sd, double w, double exponent) {
  const int a = sd.dim();
  double sum = 0.0, best = -kInfinity;
  int best_r = 1;
  for (int r = 1; r <= a; ++r) {
    sum += std::max(0.0, sd.eigenvalues[a - r]);
    const double v = w * sum / std::pow(r * w, exponent);
    if (v > best) {
      best = v;
      best_r = r;
    }
  }
  return {best_r, std::max(0.0, best)};
}

// Fast evaluation of moment_objective for e = lift(u u^*) on a structured level
// with uniform ambient trace.
class Evaluator {
 public:
  Evaluator(const Subalgebra& level, const Operator& q2, double beta, double p)
      : level_(level), q2_(q2), beta_(beta), p_(p), w_(level.unit_weight()),
        unit_(level.trace().weights()[0]), cutoff_(roundoff_cutoff(q2)) {}

  // Candidate scoring needs eigenvalues only; Eigen's tridiagonal QR is much
  // cheaper here than Jacobi with vectors. exact() re-scores with Jacobi.
  double operator()(const Operator& u) const {
    const Operator lifted = level_.lift_isometry(u);
    const Operator c = hermitian_part(compress(q2_, lifted));
    const Eigen::SelfAdjointEigenSolver<Operator> es(c, Eigen::EigenvaluesOnly);
    return score(es.eigenvalues(), u.cols());
  }

  double exact(const Operator& u) const {
    const SpectralDecomposition sd = eig_hermitian(compress(q2_, level_.lift_isometry(u)));
    return score(sd.eigenvalues, u.cols());
  }

 private:
  double score(const RealVector& ev, Eigen::Index rank) const {
    double num = 0.0;
    for (Eigen::Index j = 0; j < ev.size(); ++j)
      if (ev[j] > cutoff_) num += std::pow(ev[j], p_ / 2.0);
    num *= unit_;
    const double te = double(rank) * w_;
    return std::pow(num, 1.0 / p_) / std::pow(te, beta_ + 1.0 / p_);
  }

  const Subalgebra& level_;
  const Operator& q2_;
  double beta_, p_, w_, unit_, cutoff_;
};

Operator selection(int a, const std::vector<int>& idx) {
  Operator u = Operator::Zero(a, Eigen::Index(idx.size()));
  for (size_t j = 0; j < idx.size(); ++j) u(idx[j], Eigen::Index(j)) = 1.0;
  return u;
}

SearchResult finish(const Subalgebra& level, double value, Operator u) {
  SearchResult out;
  out.value = value;
  out.witness = level.lift_projection(u);
  out.rep_isometry = std::move(u);
  return out;
}

void check_level(const Subalgebra& level, const Operator& op) {
  if (!level.is_structured()) throw InvalidInput("norm evaluation requires a structured filtration level");
  if (op.rows() != level.ambient_dim() || op.cols() != level.ambient_dim())
    throw InvalidInput("norm evaluation: dimension mismatch");
  if (!level.trace().is_uniform()) throw InvalidInput("norm evaluation requires a uniform trace");
}

}  // namespace

SearchResult ky_fan_sup(const Subalgebra& level, const Operator& b, double beta) {
  check_level(level, b);
  if (beta < 0.0) throw InvalidInput("beta must be nonnegative");
  const SpectralDecomposition sd = eig_hermitian(hermitian_part(level.to_representative(b)));
  const auto [r, best] = best_prefix(sd, level.unit_weight(), 1.0 + 2.0 * beta);
  return finish(level, std::sqrt(best), top_columns(sd, r));
}

SearchResult projection_sup_search(const Subalgebra& level, const Operator& q2, double beta, double p,
                                   const SearchOptions& options) {
  check_level(level, q2);
  if (!(p > 0.0)) throw InvalidInput("projection_sup_search: p must be positive");
  const int a = level.representative_dim();
  const int n = level.descriptor().level;
  const Evaluator eval(level, q2, beta, p);
  const bool commutative = level.is_commutative();

  double best = -kInfinity;
  Operator best_u;
  auto consider = [&](Operator u) {
    const double v = eval(u);
    if (v > best) {
      best = v;
      best_u = std::move(u);
    }
  };

  // Spectral candidates: top eigenprojections of E_n(Q^2) and E_n(Q^p).
  const Operator qp = apply_function(q2, [p](double t) { return std::pow(std::max(0.0, t), p / 2.0); });
  for (const Operator* src : {&q2, &qp}) {
    const SpectralDecomposition sd = eig_hermitian(hermitian_part(level.to_representative(*src)));
    for (int r = 1; r <= a; ++r) consider(top_columns(sd, r));
  }

  const int half_budget = std::max(1, options.max_evaluations / 2);
  const int per_rank = std::min(options.random_per_rank, std::max(2, half_budget / a));
  const int sweeps = std::min(options.polish_iterations, std::max(1, half_budget / std::max(1, 4 * options.polish_pairs)));
  for (int r = 1; r <= a; ++r) {
    Rng rng = Rng::derive(options.seed, {std::uint64_t(n), std::uint64_t(r)});
    for (int i = 0; i < per_rank; ++i) {
      if (commutative) {
        std::vector<int> idx(static_cast<size_t>(a));
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng.engine());
        idx.resize(size_t(r));
        consider(selection(a, idx));
      } else {
        consider(haar_isometry(a, r, rng));
      }
    }
  }

  // Coordinate-descent polishing of the best candidate.
  Rng rng = Rng::derive(options.seed, {std::uint64_t(n), 0x706f6c697368ULL});
  double delta = 0.5;
  for (int it = 0; it < sweeps && a > 1; ++it) {
    bool improved = false;
    for (int s = 0; s < options.polish_pairs; ++s) {
      const int i = rng.uniform_int(0, a - 1);
      int j = rng.uniform_int(0, a - 2);
      if (j >= i) ++j;
      if (commutative) {
        // Swap an atom in the witness for one outside it.
        std::vector<int> idx;
        for (Eigen::Index c = 0; c < best_u.cols(); ++c) {
          Eigen::Index row;
          best_u.col(c).cwiseAbs().maxCoeff(&row);
          idx.push_back(int(row));
        }
        auto in = std::find(idx.begin(), idx.end(), i);
        if (in == idx.end() || std::find(idx.begin(), idx.end(), j) != idx.end()) continue;
        *in = j;
        const double before = best;
        consider(selection(a, idx));
        improved = improved || best > before;
        continue;
      }
      for (double angle : {delta, -delta})
        for (double phase : {0.0, M_PI / 2.0}) {
          const double c = std::cos(angle), sn = std::sin(angle);
          const Complex e = std::polar(1.0, phase);
          Operator u = best_u;
          u.row(i) = c * best_u.row(i) - sn * e * best_u.row(j);
          u.row(j) = sn * std::conj(e) * best_u.row(i) + c * best_u.row(j);
          const double before = best;
          consider(std::move(u));
          improved = improved || best > before;
        }
    }
    if (!improved) delta *= 0.5;
  }
  return finish(level, std::max(0.0, eval.exact(best_u)), best_u);
}

namespace {

NormReport from_search(const SearchResult& s, int level, const TracialState& tau, NormMethod method) {
  NormReport r;
  r.value = s.value;
  r.method = method;
  r.mode = method == NormMethod::kSearch ? NormMode::kLowerBound : NormMode::kExact;
  r.witness_level = level;
  r.witness = s.witness;
  r.witness_trace = s.witness.trace(tau);
  return r;
}

// ||E_1 x||_inf with the top eigenprojection of |E_1 x|^2 in A_1 as witness.
NormReport first_level_term(const Martingale& m) {
  const Subalgebra& a1 = m.filtration().level(1);
  const Operator e1 = m.at(1);
  SearchResult s = ky_fan_sup(a1, abs_square(e1), 0.0);
  NormReport r = from_search(s, 0, m.trace(), NormMethod::kKyFan);
  r.value = operator_norm(e1);
  return r;
}

void take_max(NormReport& acc, const NormReport& cand, bool& first) {
  const bool lower = (!first && acc.mode == NormMode::kLowerBound) || cand.mode == NormMode::kLowerBound;
  const bool search = (!first && acc.method == NormMethod::kSearch) || cand.method == NormMethod::kSearch;
  if (first || cand.value > acc.value) acc = cand;
  if (lower) acc.mode = NormMode::kLowerBound;
  if (search) acc.method = NormMethod::kSearch;
  first = false;
}

// Exact sup over atom subsets of (sum_{i in S} v_i) / (|S| w)^{exponent}.
std::pair<std::vector<int>, double> enumerate_subsets(const std::vector<double>& v, double w, double exponent) {
  const int a = int(v.size());
  const std::uint32_t total = std::uint32_t(1) << a;
  double sum = 0.0, best = -kInfinity;
  int count = 0;
  std::uint32_t mask = 0, best_mask = 1;
  std::vector<double> scale(size_t(a) + 1, 0.0);
  for (int r = 1; r <= a; ++r) scale[size_t(r)] = std::pow(r * w, exponent);
  for (std::uint32_t g = 1; g < total; ++g) {
    const int bit = __builtin_ctz(g);
    mask ^= std::uint32_t(1) << bit;
    if (mask & (std::uint32_t(1) << bit)) {
      sum += v[size_t(bit)];
      ++count;
    } else {
      sum -= v[size_t(bit)];
      --count;
    }
    if (count == 0) continue;
    const double val = std::max(0.0, sum) / scale[size_t(count)];
    if (val > best) {
      best = val;
      best_mask = mask;
    }
  }
  // Recompute the winner's sum without incremental rounding.
  std::vector<int> idx;
  double exact = 0.0;
  for (int i = 0; i < a; ++i)
    if (best_mask & (std::uint32_t(1) << i)) {
      idx.push_back(i);
      exact += v[size_t(i)];
    }
  return {idx, std::max(0.0, exact) / scale[idx.size()]};
}

// Visits tail squares from the top level down, adding one term per level,
// then folds the per-level results in ascending order so ties keep the
// lowest level.
template <typename Visit>
NormReport sweep_levels(const Martingale& m, NormFamily family, NormReport acc, bool first, Visit&& visit) {
  const int lo = first_level(family), hi = last_level(m, family), K = m.levels();
  std::vector<NormReport> per_level(static_cast<size_t>(hi - lo + 1));
  Operator q2 = Operator::Zero(m.dim(), m.dim());
  for (int n = hi; n >= lo; --n) {
    if (family == NormFamily::kL) {
      q2 += abs_square(m.difference(n));
    } else if (n + 1 <= K) {
      q2 += m.filtration().expect(n, abs_square(m.difference(n + 1)));
    }
    per_level[size_t(n - lo)] = visit(n, hermitian_part(q2));
  }
  for (const NormReport& r : per_level) take_max(acc, r, first);
  return acc;
}

}  // namespace

NormReport bmo_column_norm(const Martingale& m) { return lipschitz_norm(m, 0.0, NormFamily::kL); }

NormReport bmo_conditioned_norm(const Martingale& m) { return lipschitz_norm(m, 0.0, NormFamily::kLambda); }

NormReport lipschitz_norm(const Martingale& m, double beta, NormFamily family) {
  if (!(beta >= 0.0)) throw InvalidInput("beta must be nonnegative");
  NormReport acc;
  bool first = true;
  if (family == NormFamily::kLambda) take_max(acc, first_level_term(m), first);
  return sweep_levels(m, family, acc, first, [&](int n, const Operator& q2) {
    const Subalgebra& level = m.filtration().level(n);
    return from_search(ky_fan_sup(level, level.expect(q2), beta), n, m.trace(), NormMethod::kKyFan);
  });
}

NormReport moment_norm(const Martingale& m, double beta, double p, NormFamily family, const SearchOptions& options) {
  if (!(beta >= 0.0)) throw InvalidInput("beta must be nonnegative");
  if (!(p > 0.0) || !std::isfinite(p)) throw InvalidInput("moment_norm: p must be positive and finite");
  if (p == 2.0) return lipschitz_norm(m, beta, family);

  NormReport acc;
  bool first = true;
  if (family == NormFamily::kLambda) take_max(acc, first_level_term(m), first);
  return sweep_levels(m, family, acc, first, [&](int n, const Operator& q2) {
    const Subalgebra& level = m.filtration().level(n);
    if (!m.filtration().is_commutative())
      return from_search(projection_sup_search(level, q2, beta, p, options), n, m.trace(), NormMethod::kSearch);
    // Diagonal case: (e Q^2 e)^{p/2} = e Q^p, so the objective only sees the
    // atom means of Q^p.
    const Operator qp = apply_function(q2, [p](double t) { return std::pow(std::max(0.0, t), p / 2.0); });
    const Operator rep = level.to_representative(qp);
    const int a = level.representative_dim();
    const double w = level.unit_weight();
    const double exponent = 1.0 + p * beta;
    std::vector<double> v(static_cast<size_t>(a));
    for (int i = 0; i < a; ++i) v[size_t(i)] = w * rep(i, i).real();
    std::vector<int> idx;
    double best;
    NormMethod method;
    if (a <= options.enumeration_atoms) {
      std::tie(idx, best) = enumerate_subsets(v, w, exponent);
      method = NormMethod::kEnumeration;
    } else {
      std::vector<int> order(static_cast<size_t>(a));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return v[size_t(i)] > v[size_t(j)]; });
      double sum = 0.0;
      best = -kInfinity;
      int best_r = 1;
      for (int r = 1; r <= a; ++r) {
        sum += std::max(0.0, v[size_t(order[size_t(r) - 1])]);
        const double val = sum / std::pow(r * w, exponent);
        if (val > best) {
          best = val;
          best_r = r;
        }
      }
      idx.assign(order.begin(), order.begin() + best_r);
      method = NormMethod::kKyFan;
    }
    SearchResult s = finish(level, std::pow(std::max(0.0, best), 1.0 / p), selection(a, idx));
    return from_search(s, n, m.trace(), method);
  });
}

}  // namespace ncjn
