#include "ncjn/random.hpp"

#include "ncjn/errors.hpp"

namespace ncjn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t t : tags) h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

Rng Rng::derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  return Rng(mix_seed(seed, tags));
}

Operator random_operator(int dim, Rng& rng) {
  Operator a(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) a(i, j) = Complex(rng.normal(), rng.normal()) * M_SQRT1_2;
  return a;
}

Operator random_hermitian(int dim, Rng& rng) { return hermitian_part(random_operator(dim, rng)); }

Operator random_psd(int dim, Rng& rng) {
  const Operator g = random_operator(dim, rng);
  return hermitian_part(g.adjoint() * g) / double(dim);
}

Operator random_real_diagonal(int dim, Rng& rng) {
  Operator a = Operator::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) a(i, i) = rng.normal();
  return a;
}

Operator haar_isometry(int dim, int rank, Rng& rng) {
  if (rank < 0 || rank > dim) throw InvalidInput("haar_isometry: rank out of range");
  Operator g(dim, rank);
  for (int j = 0; j < rank; ++j)
    for (int i = 0; i < dim; ++i) g(i, j) = Complex(rng.normal(), rng.normal());
  Eigen::HouseholderQR<Operator> qr(g);
  Operator q = qr.householderQ() * Operator::Identity(dim, rank);
  // Fix the phase ambiguity of QR so the distribution is exactly Haar.
  const Operator r = qr.matrixQR().topRows(rank).triangularView<Eigen::Upper>();
  for (int j = 0; j < rank; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

Projection random_projection(int dim, int rank, Rng& rng) {
  return Projection::from_isometry(haar_isometry(dim, rank, rng));
}

}  // namespace ncjn
