#include <gtest/gtest.h>

#include <algorithm>

#include "ncjn/algebra.hpp"
#include "ncjn/errors.hpp"
#include "ncjn/random.hpp"

using namespace ncjn;

namespace {

double max_abs(const Operator& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

Operator kron(const Operator& a, const Operator& b) {
  Operator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Operator block_means(const Operator& x, int block) {
  Operator out = Operator::Zero(x.rows(), x.cols());
  for (Eigen::Index s = 0; s < x.rows(); s += block) {
    Complex sum = 0.0;
    for (int i = 0; i < block; ++i) sum += x(s + i, s + i);
    for (int i = 0; i < block; ++i) out(s + i, s + i) = sum / double(block);
  }
  return out;
}

Operator random_in(const Filtration& f, int n, Rng& rng) {
  return f.expect(n, f.is_commutative() ? random_real_diagonal(f.dim(), rng) : random_operator(f.dim(), rng));
}

}  // namespace

TEST(TensorFiltration, PartialTraceExample) {
  Rng rng(1);
  const FiltrationPtr f = make_tensor_filtration(2);
  const Operator a = random_operator(2, rng), b = random_operator(2, rng);
  const Operator e1 = f->expect(1, kron(a, b));
  EXPECT_LE(max_abs(e1 - kron(a, Operator::Identity(2, 2)) * (b.trace() / 2.0)), 1e-12);
}

TEST(TensorFiltration, TopLevelIsIdentityAndUnital) {
  Rng rng(2);
  for (int k = 1; k <= 4; ++k) {
    const FiltrationPtr f = make_tensor_filtration(k);
    const Operator x = random_operator(f->dim(), rng);
    EXPECT_LE(max_abs(f->expect(k, x) - x), 1e-12);
    const Operator id = Operator::Identity(f->dim(), f->dim());
    EXPECT_LE(max_abs(f->expect(1, id) - id), 1e-12);
  }
}

TEST(TensorFiltration, MatchesPartialTraceFormula) {
  Rng rng(3);
  const int k = 4;
  const FiltrationPtr f = make_tensor_filtration(k);
  for (int trial = 0; trial < 10; ++trial) {
    const Operator x = random_operator(f->dim(), rng);
    for (int n = 0; n <= k; ++n) {
      // Normalized partial trace over the last k - n qubits.
      const int inner = 1 << (k - n), outer = 1 << n;
      Operator red = Operator::Zero(outer, outer);
      for (int i = 0; i < outer; ++i)
        for (int j = 0; j < outer; ++j) red(i, j) = x.block(i * inner, j * inner, inner, inner).trace() / double(inner);
      EXPECT_LE(max_abs(f->expect(n, x) - kron(red, Operator::Identity(inner, inner))), 1e-10);
    }
  }
}

TEST(TensorFiltration, RejectsOutOfBudget) {
  EXPECT_THROW(make_tensor_filtration(0), InvalidInput);
  EXPECT_THROW(make_tensor_filtration(tol::kMaxTensorLevels + 1), BudgetExceeded);
  EXPECT_THROW(make_dyadic_filtration(tol::kMaxDyadicLevels + 1), BudgetExceeded);
}

TEST(DyadicFiltration, ScalarLevelAverages) {
  const FiltrationPtr f = make_dyadic_filtration(1);
  Operator x = Operator::Zero(2, 2);
  x(0, 0) = 5.0;
  x(1, 1) = -1.0;
  EXPECT_LE(max_abs(f->expect(0, x) - 2.0 * Operator::Identity(2, 2)), 1e-15);
}

TEST(DyadicFiltration, LeftHalfIndicatorIsFixed) {
  const FiltrationPtr f = make_dyadic_filtration(5);
  Operator ind = Operator::Zero(32, 32);
  for (int i = 0; i < 16; ++i) ind(i, i) = 1.0;
  for (int n = 1; n <= 5; ++n) EXPECT_LE(max_abs(f->expect(n, ind) - ind), 1e-15);
}

TEST(DyadicFiltration, BlockMeansExact) {
  Rng rng(4);
  const int k = 6;
  const FiltrationPtr f = make_dyadic_filtration(k);
  for (int trial = 0; trial < 10; ++trial) {
    const Operator x = random_real_diagonal(f->dim(), rng);
    for (int n = 0; n <= k; ++n) EXPECT_LE(max_abs(f->expect(n, x) - block_means(x, 1 << (k - n))), 1e-12);
  }
}

TEST(ConditionalExpectation, ScalarsExample) {
  const Subalgebra scalars = Subalgebra::from_spanning_set(TracialState::normalized(2), {Operator::Identity(2, 2)});
  Operator x = Operator::Zero(2, 2);
  x(0, 0) = 1.0;
  x(1, 1) = 3.0;
  EXPECT_LE(max_abs(conditional_expectation(scalars, x) - 2.0 * Operator::Identity(2, 2)), 1e-14);
}

TEST(ConditionalExpectation, RejectsDimensionMismatch) {
  const FiltrationPtr f = make_tensor_filtration(2);
  EXPECT_THROW(f->expect(1, Operator::Identity(2, 2)), InvalidInput);
}

TEST(ConditionalExpectation, StructuredMatchesBasisFormula) {
  Rng rng(5);
  for (FiltrationKind kind : {FiltrationKind::kTensor, FiltrationKind::kDyadic}) {
    const FiltrationPtr f = make_filtration(kind, 3);
    for (int n = 0; n <= 3; ++n) {
      const Operator x = kind == FiltrationKind::kDyadic ? random_real_diagonal(8, rng) : random_operator(8, rng);
      const Subalgebra& a = f->level(n);
      EXPECT_LE(max_abs(a.expect(x) - a.expect_via_basis(x)), 1e-10);
    }
  }
}

class FiltrationProperties : public ::testing::TestWithParam<FiltrationKind> {};

TEST_P(FiltrationProperties, ConstructorsValidate) {
  const FiltrationPtr f = make_filtration(GetParam(), 3);
  for (int n = 0; n <= 3; ++n) {
    const ValidationReport rep = validate_subalgebra(f->level(n));
    EXPECT_TRUE(rep.pass) << "level " << n;
  }
}

TEST_P(FiltrationProperties, NestingAndTowerLaw) {
  Rng rng(6);
  const int k = 4;
  const FiltrationPtr f = make_filtration(GetParam(), k);
  for (int m = 0; m <= k; ++m)
    for (const Operator& b : f->level(m).basis())
      for (int n = m; n <= k; ++n) EXPECT_LE(max_abs(f->expect(n, b) - b), 1e-9);
  for (int probe = 0; probe < 20; ++probe) {
    const Operator x = random_in(*f, k, rng);
    for (int m = 0; m <= k; ++m)
      for (int n = 0; n <= k; ++n)
        EXPECT_LE(max_abs(f->expect(m, f->expect(n, x)) - f->expect(std::min(m, n), x)), 1e-9);
  }
}

TEST_P(FiltrationProperties, IdempotentTracePositiveAdjoint) {
  Rng rng(7);
  const FiltrationPtr f = make_filtration(GetParam(), 3);
  const TracialState& tau = f->trace();
  for (int probe = 0; probe < 20; ++probe) {
    const Operator x = random_in(*f, 3, rng);
    Operator pos = x.adjoint() * x;
    for (int n = 0; n <= 3; ++n) {
      const Operator ex = f->expect(n, x);
      EXPECT_LE(max_abs(f->expect(n, ex) - ex), 1e-9);
      EXPECT_LE(std::abs(tau(ex) - tau(x)), 1e-9);
      EXPECT_LE(max_abs(f->expect(n, Operator(x.adjoint())) - ex.adjoint()), 1e-9);
      EXPECT_GE(eig_hermitian(f->expect(n, pos)).eigenvalues[0], -1e-9 * std::max(1.0, max_abs(pos)));
    }
  }
}

TEST_P(FiltrationProperties, ModuleProperty) {
  Rng rng(8);
  const FiltrationPtr f = make_filtration(GetParam(), 3);
  for (int probe = 0; probe < 20; ++probe) {
    const int n = probe % 4;
    const Operator x = random_in(*f, 3, rng);
    const Operator a = random_in(*f, n, rng), b = random_in(*f, n, rng);
    EXPECT_LE(max_abs(f->expect(n, a * x * b) - a * f->expect(n, x) * b), 1e-9 * std::max(1.0, max_abs(a * x * b)));
  }
}

TEST_P(FiltrationProperties, ContractionInSchattenNorms) {
  Rng rng(9);
  const FiltrationPtr f = make_filtration(GetParam(), 3);
  for (int probe = 0; probe < 50; ++probe) {
    const Operator x = random_in(*f, 3, rng);
    for (int n = 0; n <= 3; ++n)
      for (double p : {1.0, 2.0, kInfinity}) {
        const double base = schatten_norm(x, p, f->trace());
        EXPECT_LE(schatten_norm(f->expect(n, x), p, f->trace()), base * (1.0 + 1e-8) + 1e-12);
      }
  }
}

INSTANTIATE_TEST_SUITE_P(Models, FiltrationProperties,
                         ::testing::Values(FiltrationKind::kTensor, FiltrationKind::kDyadic),
                         [](const auto& info) { return to_string(info.param); });

TEST(ValidateSubalgebra, IdentityRemoved) {
  Operator b = Operator::Zero(2, 2);
  b(0, 0) = std::sqrt(2.0);
  const ValidationReport rep = validate_subalgebra(Subalgebra::from_basis(TracialState::normalized(2), {b}));
  EXPECT_FALSE(rep.pass);
  EXPECT_NE(std::find(rep.failures.begin(), rep.failures.end(), "identity not in span"), rep.failures.end());
}

TEST(ValidateSubalgebra, PerturbedBasisFails) {
  Rng rng(10);
  const FiltrationPtr f = make_tensor_filtration(2);
  std::vector<Operator> basis = f->level(1).basis();
  for (Operator& b : basis) b += 1e-3 * random_operator(4, rng);
  const ValidationReport rep = validate_subalgebra(Subalgebra::from_basis(f->trace(), basis));
  EXPECT_FALSE(rep.pass);
  EXPECT_TRUE(rep.gram_residual > tol::kBasisGram || rep.product_residual > tol::kClosure);
}
