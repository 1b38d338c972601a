#include <gtest/gtest.h>

#include <cmath>

#include "ncjn/errors.hpp"
#include "ncjn/johnnirenberg.hpp"

using namespace ncjn;

namespace {

const double kE = std::exp(1.0);

Martingale random_martingale(FiltrationKind kind, int k, Rng& rng) {
  const FiltrationPtr f = make_filtration(kind, k);
  return Martingale(f, kind == FiltrationKind::kDyadic ? random_real_diagonal(f->dim(), rng)
                                                        : random_operator(f->dim(), rng));
}

Projection random_level_projection(const Filtration& f, int n, Rng& rng) {
  const Subalgebra& level = f.level(n);
  const int a = level.representative_dim();
  const int r = rng.uniform_int(1, a);
  if (f.is_commutative()) return level.lift_projection(Operator::Identity(a, r));
  return level.lift_projection(haar_isometry(a, r, rng));
}

}  // namespace

TEST(Constants, TailConstant) {
  EXPECT_NEAR(tail_constant(), 2.0 * kE * kE / (1.0 - std::exp(-2.0)), 1e-12);
  EXPECT_NEAR(tail_constant(), 17.0911, 1e-4);
}

TEST(Constants, MomentConstantAtTwo) {
  const double inner = 4.0 * kE * kE / (1.0 - std::exp(-2.0));
  EXPECT_NEAR(inner, 34.18, 5e-3);
  EXPECT_NEAR(moment_constant(2.0), kE * std::sqrt(inner), 1e-12);
  // Gamma(3) = 2 enters at p = 3.
  EXPECT_NEAR(moment_constant(3.0), kE * std::cbrt(6.0 * kE * kE / (1.0 - std::exp(-2.0)) * 2.0), 1e-10);
}

TEST(Constants, ExponentialConstantLimits) {
  EXPECT_NEAR(exponential_constant(1e-12, 1.0), 1.0, 1e-9);
  const double c = 1.0 / kE;
  EXPECT_NEAR(exponential_constant(0.5 * c, 1.0), 1.0 + 2.0 * 0.5 * c * kE * kE / (1.0 - std::exp(-2.0)) / (0.5 * c),
              1e-12);
  EXPECT_THROW(exponential_constant(c, 1.0), InvalidInput);
  EXPECT_THROW(exponential_constant(-0.1, 1.0), InvalidInput);
}

TEST(DistributionBound, LambdaZeroIsTrivial) {
  Rng rng(1);
  const Martingale m = random_martingale(FiltrationKind::kTensor, 3, rng);
  const Projection P = random_level_projection(m.filtration(), 2, rng);
  const TailReport r = verify_distribution_bound(m, 2, P, 0.25, {0.0}, Variant::kBmo);
  EXPECT_LE(r.measured[0], P.trace(m.trace()) + 1e-15);
  EXPECT_TRUE(r.pass);
}

TEST(DistributionBound, VacuousAboveZeroForConstantTail) {
  Rng rng(2);
  const FiltrationPtr f = make_tensor_filtration(3);
  const Martingale m(f, Operator::Zero(8, 8));
  const TailReport r = verify_distribution_bound(m, 2, Projection::identity(8), 0.0, {0.0, 0.5, 3.0}, Variant::kBmo);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.measured[1], 0.0);
  EXPECT_EQ(r.measured[2], 0.0);
}

TEST(DistributionBound, ZeroNormWithNonzeroTailIsInconsistent) {
  Rng rng(3);
  const Martingale m = random_martingale(FiltrationKind::kTensor, 2, rng);
  EXPECT_THROW(verify_distribution_bound(m, 1, Projection::identity(4), 0.0, {1.0}, Variant::kBmo, 0.0),
               Inconsistency);
}

TEST(DistributionBound, RejectsProjectionOutsideLevel) {
  Rng rng(4);
  const Martingale m = random_martingale(FiltrationKind::kTensor, 3, rng);
  EXPECT_THROW(verify_distribution_bound(m, 1, random_projection(8, 2, rng), 0.0, {1.0}, Variant::kBmo),
               InvalidInput);
}

TEST(DistributionBound, SeededCorpusPasses) {
  Rng rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const FiltrationKind kind = trial % 2 ? FiltrationKind::kDyadic : FiltrationKind::kTensor;
    const int k = kind == FiltrationKind::kDyadic ? 5 : 3;
    const Martingale m = random_martingale(kind, k, rng);
    const Variant v = trial % 4 < 2 ? Variant::kBmo : Variant::kConditioned;
    const int n = 1 + trial % k;
    const double beta = 0.25 * (trial % 3);
    const Projection P = random_level_projection(m.filtration(), n, rng);
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(0.25 * i);
    const TailReport r = verify_distribution_bound(m, n, P, beta, grid, v);
    EXPECT_TRUE(r.pass) << "trial " << trial;
  }
}

TEST(ExponentialBound, ConstantTailGivesOne) {
  Rng rng(6);
  const FiltrationPtr f = make_tensor_filtration(3);
  const Martingale m(f, f->expect(1, random_operator(8, rng)));
  // x = x_2 at n = 3 for the bmo variant.
  const ExponentialReport r = verify_exponential_integrability(m, 3, Projection::identity(8), 0.0, 0.01,
                                                               Variant::kBmo);
  EXPECT_NEAR(r.lhs, 1.0, 1e-12);
  EXPECT_TRUE(r.pass);
}

TEST(ExponentialBound, SmallAApproachesOne) {
  Rng rng(7);
  const Martingale m = random_martingale(FiltrationKind::kTensor, 3, rng);
  const double norm = base_norm(m, 0.0, Variant::kBmo).value;
  const ExponentialReport r =
      verify_exponential_integrability(m, 1, Projection::identity(8), 0.0, 1e-9 / norm, Variant::kBmo);
  EXPECT_NEAR(r.lhs, 1.0, 1e-6);
  EXPECT_NEAR(r.bound, 1.0, 1e-6);
  EXPECT_THROW(verify_exponential_integrability(m, 1, Projection::identity(8), 0.0, 1.0 / (kE * norm), Variant::kBmo),
               InvalidInput);
}

TEST(ExponentialBound, HalfCriticalAPasses) {
  Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const FiltrationKind kind = trial % 2 ? FiltrationKind::kDyadic : FiltrationKind::kTensor;
    const Martingale m = random_martingale(kind, 3, rng);
    const Variant v = trial % 4 < 2 ? Variant::kBmo : Variant::kConditioned;
    const int n = 1 + trial % 3;
    const double norm = base_norm(m, 0.25, v).value;
    const Projection P = random_level_projection(m.filtration(), n, rng);
    EXPECT_TRUE(verify_exponential_integrability(m, n, P, 0.25, 1.0 / (2.0 * kE * norm), v).pass);
  }
}

TEST(MomentEquivalence, PEqualsTwoIsEquality) {
  Rng rng(9);
  const Martingale m = random_martingale(FiltrationKind::kTensor, 3, rng);
  for (Variant v : {Variant::kBmo, Variant::kConditioned}) {
    const std::vector<Check> cs = verify_moment_equivalence(m, 0.25, 2.0, v);
    ASSERT_EQ(cs.size(), 2u);
    for (const Check& c : cs) EXPECT_TRUE(c.passed()) << c.id;
    EXPECT_NEAR(cs[1].lhs, cs[1].rhs, 1e-9 * cs[1].rhs);
  }
}

TEST(MomentEquivalence, DyadicDirectionsPass) {
  Rng rng(10);
  for (int trial = 0; trial < 4; ++trial) {
    const Martingale m = random_martingale(FiltrationKind::kDyadic, 4, rng);
    for (Variant v : {Variant::kBmo, Variant::kConditioned})
      for (double p : {0.5, 1.0, 3.0, 4.0, 6.0})
        for (const Check& c : verify_moment_equivalence(m, 0.25, p, v)) {
          EXPECT_EQ(c.status, Status::kPass) << c.id << " p=" << p;
        }
  }
}

TEST(MomentEquivalence, SearchPathSkipsUnsoundDirections) {
  Rng rng(11);
  const Martingale m = random_martingale(FiltrationKind::kTensor, 2, rng);
  for (const Check& c : verify_moment_equivalence(m, 0.0, 4.0, Variant::kBmo)) {
    if (c.id == "moment.lower-unit") EXPECT_EQ(c.status, Status::kSkipped);
    if (c.id == "moment.upper-constant") EXPECT_TRUE(c.passed());
  }
  for (const Check& c : verify_moment_equivalence(m, 0.0, 1.0, Variant::kBmo))
    if (c.id == "moment.lower-interpolation") EXPECT_EQ(c.status, Status::kSkipped);
}

TEST(Atoms, ZeroIsAnAtom) {
  const FiltrationPtr f = make_dyadic_filtration(3);
  Atom atom{Operator::Zero(8, 8), 1, Projection::identity(8)};
  const AtomReport r = atom_check(atom, 1.0, 2.0, f);
  EXPECT_TRUE(r.is_atom);
  EXPECT_TRUE(r.bound.passed());
  EXPECT_EQ(r.hp_norm, 0.0);
}

TEST(Atoms, NonAtomIsSkipped) {
  Rng rng(12);
  const FiltrationPtr f = make_dyadic_filtration(3);
  Atom atom{random_real_diagonal(8, rng), 1, Projection::identity(8)};
  const AtomReport r = atom_check(atom, 1.0, 2.0, f);
  EXPECT_FALSE(r.is_atom);
  EXPECT_EQ(r.bound.status, Status::kSkipped);
}

TEST(Atoms, SaturatedAtomsSatisfyHardyBound) {
  Rng rng(13);
  const FiltrationPtr f = make_dyadic_filtration(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Atom atom = generate_atom(f, 1 + trial % 3, 1.0, 2.0, rng);
    const AtomReport r = atom_check(atom, 1.0, 2.0, f);
    ASSERT_TRUE(r.is_atom) << r.reason;
    EXPECT_NEAR(r.hq_norm, r.hq_bound, 1e-9 * r.hq_bound);
    EXPECT_TRUE(r.bound.passed()) << r.hp_norm;
  }
}

TEST(Atoms, TensorAtoms) {
  Rng rng(14);
  const FiltrationPtr f = make_tensor_filtration(3);
  for (int trial = 0; trial < 20; ++trial) {
    const double p = trial % 2 ? 0.5 : 1.0, q = trial % 3 ? 2.0 : 4.0;
    const AtomReport r = atom_check(generate_atom(f, 1 + trial % 2, p, q, rng), p, q, f);
    ASSERT_TRUE(r.is_atom) << r.reason;
    EXPECT_TRUE(r.bound.passed()) << r.hp_norm;
  }
}
