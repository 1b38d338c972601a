#pragma once

// BMO and Lipschitz-type norms of martingales. Every norm is a supremum over
// levels n and projections e in A_n; NormReport records how that supremum
// was evaluated and which projection attains the reported value.

#include <cstdint>
#include <string>

#include "ncjn/martingale.hpp"

namespace ncjn {

enum class NormMode { kExact, kLowerBound };
enum class NormMethod { kKyFan, kEnumeration, kSearch };
/// L: tails x - x_{n-1} with S_c.  Lambda: tails x - x_n with s_c, max'd
/// with ||E_1 x||_inf.
enum class NormFamily { kL, kLambda };

std::string to_string(NormMode mode);
std::string to_string(NormMethod method);
std::string to_string(NormFamily family);

struct NormReport {
  double value = 0.0;
  NormMode mode = NormMode::kExact;
  NormMethod method = NormMethod::kKyFan;
  /// Level of the witness; 0 marks the ||E_1 x||_inf term of the Lambda family.
  int witness_level = 1;
  Projection witness;
  double witness_trace = 0.0;
};

struct SearchOptions {
  std::uint64_t seed = 0;
  int random_per_rank = 200;
  int polish_iterations = 20;
  int polish_pairs = 48;
  /// Exhaustive subset enumeration is used when a commutative level has at
  /// most this many atoms (2^16 subsets).
  int enumeration_atoms = 16;
  /// Cap on objective evaluations per level; large levels get fewer random
  /// candidates per rank and fewer polishing sweeps.
  int max_evaluations = 4096;
};

struct SearchResult {
  double value = 0.0;
  Operator rep_isometry;  // witness in the representative space
  Projection witness;
};

/// Tail square Q^2 at level n: S_c^2(x - x_{n-1}) for L, s_c^2(x - x_n) for Lambda.
Operator tail_square(const Martingale& m, int n, NormFamily family);

/// Levels over which the family's supremum runs.
int first_level(NormFamily family);
int last_level(const Martingale& m, NormFamily family);

/// tau((e Q^2 e)^{p/2})^{1/p} / tau(e)^{beta + 1/p}, evaluated directly.
double moment_objective(const Operator& q2, const Projection& e, double beta, double p, const TracialState& tau);

/// Exact sup over projections e in the level of tau(e B e) / tau(e)^{1+2 beta}
/// for B in the level, by the Ky Fan principle. Returns the square root.
SearchResult ky_fan_sup(const Subalgebra& level, const Operator& b, double beta);

/// Lower bound for sup_e moment_objective over projections of the level.
SearchResult projection_sup_search(const Subalgebra& level, const Operator& q2, double beta, double p,
                                   const SearchOptions& options);

NormReport bmo_column_norm(const Martingale& m);
/// max(||E_1 x||_inf, sup_n ||E_n |x - x_n|^2||^{1/2}).
NormReport bmo_conditioned_norm(const Martingale& m);
NormReport lipschitz_norm(const Martingale& m, double beta, NormFamily family);
NormReport moment_norm(const Martingale& m, double beta, double p, NormFamily family,
                       const SearchOptions& options = {});

}  // namespace ncjn
