#pragma once

// Seeded random generators for operators, projections, and corpora.

#include <cstdint>
#include <initializer_list>
#include <random>

#include "ncjn/linalg.hpp"

namespace ncjn {

/// Deterministic stream; derived streams are keyed by (seed, tags...) so a
/// result never depends on the order in which streams are created.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  /// Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  bool coin(double p_true = 0.5) { return uniform() < p_true; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

/// Entries i.i.d. standard complex Gaussian.
Operator random_operator(int dim, Rng& rng);
Operator random_hermitian(int dim, Rng& rng);
Operator random_psd(int dim, Rng& rng);
/// Real diagonal operator with standard Gaussian entries.
Operator random_real_diagonal(int dim, Rng& rng);
/// dim x rank matrix with Haar-distributed orthonormal columns.
Operator haar_isometry(int dim, int rank, Rng& rng);
Projection random_projection(int dim, int rank, Rng& rng);

}  // namespace ncjn
