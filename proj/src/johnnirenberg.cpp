#include "ncjn/johnnirenberg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ncjn/errors.hpp"

namespace ncjn {

namespace {

constexpr double kE = 2.718281828459045235360287;

// (1 - e^{-2})^{-1} e^2
double base_constant() { return kE * kE / (1.0 - std::exp(-2.0)); }

double l2_norm(const TracialState& tau, const Operator& a) {
  return std::sqrt(std::max(0.0, tau.inner(a, a).real()));
}

void require_level_projection(const Martingale& m, int n, const Projection& P) {
  if (n < 1 || n > m.levels()) throw InvalidInput("level n out of range");
  if (P.dim() != m.dim()) throw InvalidInput("projection dimension mismatch");
  if (m.filtration().level(n).membership_residual(P.op()) > tol::kMembership)
    throw InvalidInput("P is not in A_n");
}

}  // namespace

double tail_constant() { return 2.0 * base_constant(); }

double exponential_constant(double a, double norm) {
  if (norm <= 0.0) return 1.0;
  const double c = 1.0 / (kE * norm);
  if (!(a > 0.0) || !(a < c)) throw InvalidInput("exponential constant: need 0 < a < 1/(e norm)");
  return 1.0 + 2.0 * a * base_constant() / (c - a);
}

double moment_constant(double p) {
  if (!(p > 0.0)) throw InvalidInput("moment constant: p must be positive");
  return kE * std::exp((std::log(2.0 * p * base_constant()) + std::lgamma(p)) / p);
}

NormFamily family_of(Variant v) { return v == Variant::kBmo ? NormFamily::kL : NormFamily::kLambda; }

NormReport base_norm(const Martingale& m, double beta, Variant variant) {
  return lipschitz_norm(m, beta, family_of(variant));
}

Operator variant_tail_square(const Martingale& m, int n, Variant variant) {
  return tail_square(m, n, family_of(variant));
}

RealVector corner_spectrum(const Martingale& m, int n, const Projection& P, double beta, Variant variant) {
  require_level_projection(m, n, P);
  const Operator v = P.range_isometry();
  const double scale = std::pow(P.trace(m.trace()), beta);
  const SpectralDecomposition sd = eig_hermitian(hermitian_part(compress(variant_tail_square(m, n, variant), v)));
  RealVector out(sd.dim());
  for (int j = 0; j < sd.dim(); ++j) out[j] = std::sqrt(std::max(0.0, sd.eigenvalues[j])) / scale;
  return out;
}

TailReport verify_distribution_bound(const Martingale& m, int n, const Projection& P, double beta,
                                     const std::vector<double>& lambdas, Variant variant, double norm) {
  TailReport rep;
  rep.norm = norm < 0.0 ? base_norm(m, beta, variant).value : norm;
  const RealVector s = corner_spectrum(m, n, P, beta, variant);
  const double top = s.size() ? s.maxCoeff() : 0.0;
  if (rep.norm <= 0.0 && top > 0.0)
    throw Inconsistency("distribution bound: zero norm with a nonzero martingale tail");
  const double unit = m.trace().weights()[0];
  const double tp = P.trace(m.trace());
  const double btol = boundary_tolerance(top);
  const double c0 = tail_constant();
  double worst = -1.0;
  for (size_t i = 0; i < lambdas.size(); ++i) {
    const double lam = lambdas[i];
    if (!(lam >= 0.0)) throw InvalidInput("distribution bound: lambda must be nonnegative");
    double count = 0.0;
    for (Eigen::Index j = 0; j < s.size(); ++j)
      if (s[j] >= lam - btol) count += 1.0;
    const double measured = unit * count;
    double bound;
    if (rep.norm > 0.0)
      bound = c0 * std::exp(-lam / (kE * rep.norm)) * tp;
    else
      bound = lam <= 0.0 ? c0 * tp : 0.0;
    const double ratio = bound > 0.0 ? measured / bound : (measured > 0.0 ? kInfinity : 0.0);
    rep.lambdas.push_back(lam);
    rep.measured.push_back(measured);
    rep.bound.push_back(bound);
    rep.ratio.push_back(ratio);
    if (!(measured <= bound * (1.0 + tol::kInequalitySlack))) rep.pass = false;
    if (ratio > worst) {
      worst = ratio;
      rep.worst = int(i);
    }
  }
  return rep;
}

ExponentialReport verify_exponential_integrability(const Martingale& m, int n, const Projection& P, double beta,
                                                   double a, Variant variant, double norm) {
  ExponentialReport rep;
  rep.a = a;
  rep.norm = norm < 0.0 ? base_norm(m, beta, variant).value : norm;
  if (!(a > 0.0)) throw InvalidInput("exponential check: a must be positive");
  if (rep.norm > 0.0 && !(a < 1.0 / (kE * rep.norm)))
    throw InvalidInput("exponential check: a must be below 1/(e norm)");
  const RealVector s = corner_spectrum(m, n, P, beta, variant);
  if (rep.norm <= 0.0 && s.size() && s.maxCoeff() > 0.0)
    throw Inconsistency("exponential check: zero norm with a nonzero martingale tail");
  const double unit = m.trace().weights()[0];
  double acc = 0.0;
  for (Eigen::Index j = 0; j < s.size(); ++j) acc += std::exp(a * s[j]);
  rep.lhs = unit * acc / P.trace(m.trace());
  rep.bound = exponential_constant(a, rep.norm);
  rep.pass = rep.lhs <= rep.bound * (1.0 + tol::kInequalitySlack);
  return rep;
}

std::vector<Check> verify_moment_equivalence(const Martingale& m, double beta, double p, Variant variant,
                                             const SearchOptions& options) {
  const NormFamily family = family_of(variant);
  const double lip = lipschitz_norm(m, beta, family).value;
  const NormReport mom = moment_norm(m, beta, p, family, options);
  const bool exact = mom.mode == NormMode::kExact;
  std::vector<Check> out;
  auto tag = [&](Check c) {
    c.beta = beta;
    c.p = p;
    c.note = "mode=" + to_string(mom.mode) + " method=" + to_string(mom.method) + (c.note.empty() ? "" : " " + c.note);
    out.push_back(std::move(c));
  };
  if (p >= 2.0) {
    // A lower estimate of the moment norm never invalidates an upper bound.
    tag(inequality("moment.upper-constant", mom.value, moment_constant(p) * lip, tol::kInequalitySlack));
    if (exact)
      tag(inequality("moment.lower-unit", lip, mom.value, tol::kInequalitySlack));
    else
      tag(skipped("moment.lower-unit", "unsound direction"));
  } else {
    tag(inequality("moment.upper-unit", mom.value, lip, tol::kInequalitySlack));
    const double q = 4.0;
    // The p = 2q norm is only needed when the p norm itself is exact.
    const NormReport high = exact ? moment_norm(m, beta, 2.0 * q, family, options) : NormReport{};
    if (exact && high.mode == NormMode::kExact) {
      const double theta = (1.0 - 1.0 / q) / (2.0 / p - 1.0 / q);
      const double rhs = std::pow(mom.value, theta) * std::pow(high.value, 1.0 - theta);
      Check c = inequality("moment.lower-interpolation", lip, rhs, tol::kInequalitySlack);
      std::ostringstream os;
      os << "theta=" << theta;
      c.note = os.str();
      tag(std::move(c));
    } else {
      tag(skipped("moment.lower-interpolation", "unsound direction"));
    }
  }
  return out;
}

// --- Amplified checks -------------------------------------------------------

std::vector<Check> verify_amplified_structure(const Martingale& m, const AmplifiedSystem& sys) {
  std::vector<Check> out;
  const double nu_i = sys.nu(sys.identity());
  const double expected = sys.matrix_size() * sys.corner_mass();
  out.push_back(residual("amplified.trace", std::abs(nu_i - expected), 1e-12 * std::max(1.0, expected)));

  double scale = 1.0, adj = 0.0, mart = 0.0;
  for (int k = sys.n(); k <= sys.N(); ++k) scale = std::max(scale, sys.y(k).max_abs());
  for (int k = sys.n(); k <= sys.N(); ++k) {
    adj = std::max(adj, (sys.y(k) - sys.y(k).adjoint()).max_abs());
    for (int j = sys.n(); j <= k; ++j) mart = std::max(mart, (sys.expect(j, sys.y(k)) - sys.y(j)).max_abs());
  }
  out.push_back(residual("amplified.self-adjoint", adj, tol::kStructure * scale));
  out.push_back(residual("amplified.martingale", mart, tol::kStructure * scale));

  // Slot (n+1, n+1) of y_N^2 against the directly assembled square.
  const Operator& v = sys.corner_isometry();
  Operator sq = Operator::Zero(m.dim(), m.dim());
  for (int k = sys.n(); k <= sys.N(); ++k)
    sq += sys.variant() == Variant::kBmo ? abs_square(m.difference(k))
                                         : m.filtration().expect(k, abs_square(m.difference(k + 1)));
  const Operator target = compress(sq, v) / std::pow(sys.corner_mass(), 2.0 * sys.beta());
  const BlockOperator y2 = sys.y(sys.N()) * sys.y(sys.N());
  const int r = sys.corner_rank();
  double slot = 0.0;
  for (int w = 0; w < y2.blocks(); ++w)
    slot = std::max(slot, (y2[w].block(0, 0, r, r) - target).cwiseAbs().maxCoeff());
  out.push_back(residual("amplified.square-slot", slot, tol::kStructure * std::max(1.0, target.cwiseAbs().maxCoeff())));
  for (auto& c : out) {
    c.n = sys.n();
    c.beta = sys.beta();
  }
  return out;
}

std::vector<Check> verify_cuculescu_structure(const AmplifiedSystem& sys, double lambda) {
  const CuculescuSequence seq = cuculescu(sys, lambda);
  const CuculescuStructure s = verify_cuculescu(sys, seq);
  const double limit = tol::kStructure * s.scale;
  std::vector<Check> out = {
      residual("cuculescu.membership", s.membership, limit),
      residual("cuculescu.commutation", s.commutation, limit),
      residual("cuculescu.domination", s.domination, limit),
      residual("cuculescu.nesting", s.nesting, limit),
  };
  for (auto& c : out) {
    c.n = sys.n();
    c.beta = sys.beta();
    c.lambda = lambda;
  }
  return out;
}

Check verify_lambda_monotonicity(const AmplifiedSystem& sys, const std::vector<double>& lambdas) {
  std::vector<double> grid = lambdas;
  std::sort(grid.begin(), grid.end());
  const BlockOperator id = sys.identity();
  double prev = kInfinity, worst = 0.0, worst_lambda = grid.empty() ? 0.0 : grid.front();
  for (double lam : grid) {
    const double v = sys.nu(id - cuculescu(sys, lam).at(sys.N()));
    if (v - prev > worst) {
      worst = v - prev;
      worst_lambda = lam;
    }
    prev = v;
  }
  Check c = residual("cuculescu.lambda-monotone", worst, tol::kStructure * sys.nu(id));
  c.n = sys.n();
  c.beta = sys.beta();
  c.lambda = worst_lambda;
  return c;
}

std::vector<Check> verify_proof_chain(const AmplifiedSystem& sys, double lambda, double mu, double norm,
                                      const ProofChainOptions& options) {
  const std::vector<std::string> ids = {"chain.two-level", "chain.intermediate", "chain.proposition",
                                        "chain.orthogonal-slot"};
  std::vector<Check> out;
  auto finish = [&](std::vector<Check> cs) {
    for (auto& c : cs) {
      c.n = sys.n();
      c.beta = sys.beta();
      c.lambda = lambda;
    }
    return cs;
  };
  if (sys.N() <= sys.n()) {
    for (const auto& id : ids) out.push_back(skipped(id, "needs N > n"));
    if (options.literal_slot) out.push_back(skipped("chain.orthogonal-slot-literal", "needs N > n"));
    return finish(out);
  }
  if (!(lambda > 0.0) || !(mu > 0.0)) throw InvalidInput("proof chain: lambda and mu must be positive");

  const int n = sys.n(), N = sys.N(), r = sys.corner_rank();
  const BlockOperator id = sys.identity();
  const CuculescuSequence seq = cuculescu(sys, lambda);
  const CuculescuSequence seq_up = cuculescu(sys, lambda + mu);
  const BlockOperator gap = id - seq.at(N);
  const BlockOperator shifted = sys.y(N) - id * lambda;
  const BlockOperator shifted2 = shifted * shifted;

  const double lhs = sys.nu(id - seq_up.at(N));
  const double second_moment = sys.nu(gap * shifted2);
  const Operator pc = Operator::Identity(r, r);
  const BlockOperator slots = sys.diagonal_unit(n + 1, pc) + sys.diagonal_unit(n + 3, pc);
  const double slot_mass = sys.nu(gap * slots);
  const double norm2 = norm * norm;

  // Roundoff in Ī - R is multiplied by the integrands; scale the absolute slack with them.
  const double mass = tol::kMassRoundoff * sys.nu(id);
  const double sh = shifted.hermitian_norm() * shifted.hermitian_norm();
  out.push_back(inequality("chain.two-level", lhs, 2.0 / (mu * mu) * second_moment, tol::kInequalitySlack,
                           mass * std::max(1.0, 2.0 / (mu * mu) * sh)));
  out.push_back(inequality("chain.intermediate", second_moment, 2.0 * norm2 * slot_mass, tol::kInequalitySlack,
                           mass * std::max({1.0, sh, 2.0 * norm2})));
  out.push_back(inequality("chain.proposition", lhs, 4.0 / (mu * mu) * norm2 * slot_mass, tol::kInequalitySlack,
                           mass * std::max(1.0, 4.0 / (mu * mu) * norm2)));

  std::vector<Operator> zs = {pc};
  Rng rng = Rng::derive(options.seed, {std::uint64_t(n), std::uint64_t(N), std::uint64_t(r)});
  for (int i = 0; i < options.random_slot_operators; ++i) zs.push_back(random_psd(r, rng));

  // The slot e_{k+3,k+3} lies beyond every index touched by y_m when k >= m,
  // so it is a fixed vector of both y_m and R_m.
  const double limit = tol::kSlotResidual * sys.nu(id);
  double corrected = 0.0, literal = 0.0;
  for (int m = n; m <= N; ++m)
    for (int k = n; k <= N - 1; ++k)
      for (const Operator& z : zs) {
        const BlockOperator unit = sys.diagonal_unit(k + 3, z);
        literal = std::max(literal, std::abs(sys.nu(seq.at(m) * unit)));
        if (m <= k) corrected = std::max(corrected, std::abs(sys.nu((id - seq.at(m)) * unit)));
      }
  Check slot = residual("chain.orthogonal-slot", corrected, limit);
  slot.note = "complement form, n <= m <= k <= N-1";
  out.push_back(slot);
  if (options.literal_slot) {
    Check lit = residual("chain.orthogonal-slot-literal", literal, limit);
    lit.note = "nu(R_m (e_{k+3,k+3} (x) 1 (x) z)), n <= m <= N, n <= k <= N-1";
    out.push_back(lit);
  }
  return finish(out);
}

// --- Atoms ------------------------------------------------------------------

namespace {

Projection random_level_projection(const Subalgebra& level, Rng& rng) {
  const int a = level.representative_dim();
  const int rank = rng.uniform_int(1, a);
  if (level.is_commutative()) {
    std::vector<int> idx(static_cast<size_t>(a));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng.engine());
    Operator u = Operator::Zero(a, rank);
    for (int j = 0; j < rank; ++j) u(idx[size_t(j)], j) = 1.0;
    return level.lift_projection(u);
  }
  return level.lift_projection(haar_isometry(a, rank, rng));
}

}  // namespace

Atom generate_atom(const FiltrationPtr& filtration, int level, double p, double q, Rng& rng) {
  if (level < 1 || level >= filtration->levels()) throw InvalidInput("generate_atom: level must be in [1, K-1]");
  if (!(p > 0.0 && p <= 1.0) || !(q > 1.0)) throw InvalidInput("generate_atom: need 0 < p <= 1 < q");
  const int d = filtration->dim();
  const Subalgebra& alg = filtration->level(level);
  Atom atom;
  atom.level = level;
  atom.e = random_level_projection(alg, rng);
  const Operator y = filtration->is_commutative() ? random_real_diagonal(d, rng) : random_operator(d, rng);
  const Operator a0 = (y - alg.expect(y)) * atom.e.op();
  const double hq = hardy_norm(Martingale(filtration, a0), q, HardyKind::kConditionedColumn);
  const double te = atom.e.trace(filtration->trace());
  atom.a = hq > 0.0 ? Operator(a0 * (std::pow(te, 1.0 / q - 1.0 / p) / hq)) : Operator::Zero(d, d);
  return atom;
}

AtomReport atom_check(const Atom& atom, double p, double q, const FiltrationPtr& filtration) {
  if (!(p > 0.0 && p <= 1.0) || !(q > 1.0)) throw InvalidInput("atom_check: need 0 < p <= 1 < q");
  const int d = filtration->dim();
  if (atom.a.rows() != d || atom.a.cols() != d || atom.e.dim() != d) throw InvalidInput("atom_check: dimension mismatch");
  const TracialState& tau = filtration->trace();
  AtomReport rep;
  rep.mean_residual = filtration->expect(atom.level, atom.a).cwiseAbs().maxCoeff();
  rep.support_residual = l2_norm(tau, atom.a * atom.e.complement().op());
  const Martingale mart(filtration, atom.a);
  rep.hq_norm = hardy_norm(mart, q, HardyKind::kConditionedColumn);
  const double te = atom.e.trace(tau);
  rep.hq_bound = te > 0.0 ? std::pow(te, 1.0 / q - 1.0 / p) : 0.0;

  if (filtration->level(atom.level).membership_residual(atom.e.op()) > tol::kMembership)
    rep.reason = "e is not in A_n";
  else if (rep.mean_residual > tol::kAtomCondition)
    rep.reason = "E_n(a) != 0";
  else if (rep.support_residual > tol::kAtomCondition)
    rep.reason = "a (1 - e) != 0";
  else if (rep.hq_norm > rep.hq_bound * (1.0 + tol::kAtomCondition) + tol::kAtomCondition)
    rep.reason = "h_q norm above tau(e)^{1/q - 1/p}";
  rep.is_atom = rep.reason.empty();
  if (!rep.is_atom) {
    rep.bound = skipped("atom.hardy-bound", "not an atom: " + rep.reason);
  } else {
    rep.hp_norm = hardy_norm(mart, p, HardyKind::kConditionedColumn);
    rep.bound = inequality("atom.hardy-bound", rep.hp_norm, 1.0, tol::kInequalitySlack);
  }
  rep.bound.n = atom.level;
  rep.bound.p = p;
  return rep;
}

}  // namespace ncjn
