#pragma once

// Verifiers for the John-Nirenberg inequalities: distribution, exponential
// and moment forms in the base algebra, the amplified proof chain, and the
// (p,q)-atom bound.

#include <vector>

#include "ncjn/amplified.hpp"
#include "ncjn/check.hpp"
#include "ncjn/norms.hpp"
#include "ncjn/random.hpp"

namespace ncjn {

namespace tol {
inline constexpr double kInequalitySlack = 1e-8;
inline constexpr double kSlotResidual = 1e-9;  // relative to nu(I)
inline constexpr double kAtomCondition = 1e-9;
/// Absolute slack of the chain inequalities, relative to nu(I): traces of
/// projections carry summation roundoff even when the exact value is 0.
inline constexpr double kMassRoundoff = 1e-12;
}  // namespace tol

/// 2 (1 - e^{-2})^{-1} e^2.
double tail_constant();
/// K_a = 1 + 2a (1 - e^{-2})^{-1} e^2 / (1/(e norm) - a).
double exponential_constant(double a, double norm);
/// B(p) = e (2p (1 - e^{-2})^{-1} e^2)^{1/p} Gamma(p)^{1/p}.
double moment_constant(double p);

NormFamily family_of(Variant v);
/// The exact norm entering the bounds: L_beta for bmo, Lambda_beta for conditioned.
NormReport base_norm(const Martingale& m, double beta, Variant variant);

/// Q^2 of the variant at level n: S_c^2(x - x_{n-1}) or s_c^2(x - x_n).
Operator variant_tail_square(const Martingale& m, int n, Variant variant);
/// Eigenvalues of (P Q^2 P)^{1/2} / tau(P)^beta on range(P).
RealVector corner_spectrum(const Martingale& m, int n, const Projection& P, double beta, Variant variant);

struct TailReport {
  double norm = 0.0;
  std::vector<double> lambdas;
  std::vector<double> measured;
  std::vector<double> bound;
  std::vector<double> ratio;
  bool pass = true;
  /// Index of the largest ratio.
  int worst = 0;
};

/// norm < 0 means "compute base_norm".
TailReport verify_distribution_bound(const Martingale& m, int n, const Projection& P, double beta,
                                     const std::vector<double>& lambdas, Variant variant, double norm = -1.0);

struct ExponentialReport {
  double a = 0.0;
  double norm = 0.0;
  double lhs = 0.0;
  double bound = 0.0;
  bool pass = true;
};

ExponentialReport verify_exponential_integrability(const Martingale& m, int n, const Projection& P, double beta,
                                                   double a, Variant variant, double norm = -1.0);

/// Checks ids moment.upper-constant (p >= 2), moment.upper-unit (p < 2),
/// moment.lower-unit (p >= 2) and moment.lower-interpolation (p < 2).
std::vector<Check> verify_moment_equivalence(const Martingale& m, double beta, double p, Variant variant,
                                             const SearchOptions& options = {});

/// Amplified-system checks: trace bookkeeping, the martingale property of y,
/// the square identity in the (n+1, n+1) slot.
std::vector<Check> verify_amplified_structure(const Martingale& m, const AmplifiedSystem& sys);

/// Cuculescu bullets and nesting for one lambda.
std::vector<Check> verify_cuculescu_structure(const AmplifiedSystem& sys, double lambda);

/// nu(I - R_N^lambda) along the grid; pass iff non-increasing to kStructure * nu(I).
Check verify_lambda_monotonicity(const AmplifiedSystem& sys, const std::vector<double>& lambdas);

struct ProofChainOptions {
  /// Also evaluate the slot identity in its literal form nu(R_m (e (x) 1 (x) z)) = 0.
  bool literal_slot = true;
  int random_slot_operators = 2;
  std::uint64_t seed = 0;
};

/// chain.two-level, chain.intermediate, chain.proposition, chain.orthogonal-slot
/// and optionally chain.orthogonal-slot-literal. Needs N > n and lambda, mu > 0.
std::vector<Check> verify_proof_chain(const AmplifiedSystem& sys, double lambda, double mu, double norm,
                                      const ProofChainOptions& options = {});

// --- Atoms ------------------------------------------------------------------

struct Atom {
  Operator a;
  int level = 1;
  Projection e;
};

/// a = (y - E_n y) e for random y and a random projection e in A_n, scaled so
/// that ||a||_{h_q^c} = tau(e)^{1/q - 1/p}.
Atom generate_atom(const FiltrationPtr& filtration, int level, double p, double q, Rng& rng);

struct AtomReport {
  bool is_atom = false;
  double mean_residual = 0.0;     // ||E_n(a)||
  double support_residual = 0.0;  // ||a (1 - e)||_2
  double hq_norm = 0.0;
  double hq_bound = 0.0;
  double hp_norm = 0.0;
  Check bound;  // atom.hardy-bound
  std::string reason;
};

AtomReport atom_check(const Atom& atom, double p, double q, const FiltrationPtr& filtration);

}  // namespace ncjn
