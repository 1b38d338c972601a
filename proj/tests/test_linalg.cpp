#include <gtest/gtest.h>

#include <cmath>

#include "ncjn/errors.hpp"
#include "ncjn/linalg.hpp"
#include "ncjn/random.hpp"

using namespace ncjn;

namespace {

Operator diag(std::initializer_list<double> v) {
  Operator a = Operator::Zero(Eigen::Index(v.size()), Eigen::Index(v.size()));
  Eigen::Index i = 0;
  for (double x : v) a(i, i) = x, ++i;
  return a;
}

double max_abs(const Operator& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(EigHermitian, DiagonalInput) {
  const SpectralDecomposition sd = eig_hermitian(diag({3, 1}));
  EXPECT_DOUBLE_EQ(sd.eigenvalues[0], 1.0);
  EXPECT_DOUBLE_EQ(sd.eigenvalues[1], 3.0);
  EXPECT_NEAR(std::abs(sd.eigenvectors(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(sd.eigenvectors(0, 1)), 1.0, 1e-15);
}

TEST(EigHermitian, Identity) {
  const SpectralDecomposition sd = eig_hermitian(Operator::Identity(4, 4));
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(sd.eigenvalues[i], 1.0);
}

TEST(EigHermitian, ReconstructsRandomHermitian) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 15;
    const Operator a = random_hermitian(d, rng);
    const SpectralDecomposition sd = eig_hermitian(a);
    const Operator& v = sd.eigenvectors;
    const Operator rec = v * sd.eigenvalues.cast<Complex>().asDiagonal() * v.adjoint();
    EXPECT_LE(max_abs(rec - a), 1e-10 * std::max(1.0, max_abs(a)));
    EXPECT_LE(max_abs(v.adjoint() * v - Operator::Identity(d, d)), 1e-10);
    for (int j = 1; j < d; ++j) EXPECT_LE(sd.eigenvalues[j - 1], sd.eigenvalues[j]);
  }
}

TEST(EigHermitian, RejectsNonFinite) {
  Operator a = Operator::Identity(2, 2);
  a(0, 1) = std::nan("");
  EXPECT_THROW(eig_hermitian(a), InvalidInput);
}

TEST(ApplyFunction, ExpOfDiagonal) {
  const Operator r = apply_function(diag({0, 1}), [](double x) { return std::exp(x); });
  EXPECT_NEAR(r(0, 0).real(), 1.0, 1e-14);
  EXPECT_NEAR(r(1, 1).real(), std::exp(1.0), 1e-14);
  EXPECT_NEAR(std::abs(r(0, 1)), 0.0, 1e-14);
}

TEST(ApplyFunction, IdentityFunctionAndSquareRoot) {
  Rng rng(11);
  const Operator a = random_hermitian(6, rng);
  EXPECT_LE(max_abs(apply_function(a, [](double x) { return x; }) - a), 1e-12 * std::max(1.0, max_abs(a)));
  const Operator p = random_psd(6, rng);
  const Operator root = sqrt_psd(p);
  EXPECT_LE(max_abs(root * root - p), 1e-9 * std::max(1.0, max_abs(p)));
  EXPECT_GE(eig_hermitian(root).eigenvalues[0], -1e-12);
}

TEST(ApplyFunction, HomomorphismOnPolynomials) {
  Rng rng(12);
  auto f = [](double x) { return 1.0 + x * x; };
  auto g = [](double x) { return x - 2.0 * x * x * x; };
  for (int trial = 0; trial < 100; ++trial) {
    const Operator a = random_hermitian(2 + trial % 6, rng);
    const SpectralDecomposition sd = eig_hermitian(a);
    const Operator fg = apply_function(sd, [&](double x) { return f(x) * g(x); });
    const Operator prod = apply_function(sd, f) * apply_function(sd, g);
    EXPECT_LE(max_abs(fg - prod), 1e-9 * std::max(1.0, max_abs(fg)));
    const Operator fa = apply_function(sd, f);
    EXPECT_LE(max_abs(fa * a - a * fa), 1e-9 * std::max(1.0, max_abs(fa) * max_abs(a)));
  }
}

TEST(SpectralProjection, ClosedInterval) {
  const Projection p = spectral_projection(diag({3, 1}), Interval::at_least(2.0));
  EXPECT_LE(max_abs(p.op() - diag({1, 0})), 1e-14);
}

TEST(SpectralProjection, KernelConvention) {
  const Operator zero = Operator::Zero(3, 3);
  EXPECT_EQ(spectral_projection(zero, Interval::below(0.5)).rank(), 3);
  EXPECT_EQ(spectral_projection(zero, Interval::below(0.0)).rank(), 0);
}

TEST(SpectralProjection, Completeness) {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Operator a = random_hermitian(5, rng);
    const SpectralDecomposition sd = eig_hermitian(a);
    const double lam = 0.5 * (sd.eigenvalues[1] + sd.eigenvalues[2]);
    const Projection up = spectral_projection(a, Interval::at_least(lam));
    const Projection down = spectral_projection(a, Interval::below(lam));
    EXPECT_LE(max_abs(up.op() + down.op() - Operator::Identity(5, 5)), 1e-9);
  }
}

TEST(SchattenNorm, DiagonalExamples) {
  const TracialState tau = TracialState::normalized(2);
  const Operator a = diag({3, 4});
  EXPECT_NEAR(schatten_norm(a, 2.0, tau), std::sqrt(12.5), 1e-12);
  EXPECT_NEAR(schatten_norm(a, kInfinity, tau), 4.0, 1e-12);
  EXPECT_NEAR(schatten_norm(a, 1.0, tau), 3.5, 1e-12);
}

TEST(SchattenNorm, LayerCakeIdentity) {
  // ||a||_p^p = int_0^inf p s^{p-1} lambda_s(a) ds, integrated exactly over the steps.
  Rng rng(14);
  const TracialState tau = TracialState::normalized(6);
  for (int trial = 0; trial < 30; ++trial) {
    const Operator a = random_operator(6, rng);
    const SingularSpectrum s = singular_spectrum(a, tau);
    for (double p : {0.5, 1.0, 2.0, 3.0}) {
      double integral = 0.0, prev = 0.0;
      std::vector<double> breaks = s.values;
      std::sort(breaks.begin(), breaks.end());
      for (double b : breaks) {
        const double mid = 0.5 * (prev + b);
        integral += (std::pow(b, p) - std::pow(prev, p)) * distribution_lambda(s, mid);
        prev = b;
      }
      const double direct = std::pow(schatten_norm(s, p), p);
      EXPECT_NEAR(integral, direct, 1e-8 * direct);
    }
  }
}

TEST(DistributionLambda, Examples) {
  const TracialState tau = TracialState::normalized(2);
  EXPECT_NEAR(distribution_lambda(diag({3, 1}), 2.0, tau), 0.5, 1e-15);
  EXPECT_EQ(distribution_lambda(diag({3, 1}), 3.0, tau), 0.0);
  EXPECT_EQ(distribution_lambda(diag({3, 1}), 7.0, tau), 0.0);
}

TEST(DistributionLambda, MatchesSortedCount) {
  Rng rng(15);
  const TracialState tau = TracialState::normalized(8);
  const Operator a = random_operator(8, rng);
  const SingularSpectrum s = singular_spectrum(a, tau);
  for (int i = 0; i <= 40; ++i) {
    const double t = 0.1 * i;
    double count = 0.0;
    for (size_t j = 0; j < s.values.size(); ++j)
      if (s.values[j] > t) count += s.weights[j];
    EXPECT_NEAR(distribution_lambda(a, t, tau), count, 1e-15);
  }
}

TEST(SingularMu, Examples) {
  const TracialState tau = TracialState::normalized(2);
  const Operator a = diag({3, 1});
  EXPECT_NEAR(singular_mu(a, 0.25, tau), 3.0, 1e-12);
  EXPECT_NEAR(singular_mu(a, 0.5, tau), 1.0, 1e-12);
  EXPECT_NEAR(singular_mu(a, 0.75, tau), 1.0, 1e-12);
  EXPECT_NEAR(singular_mu(a, 1.0, tau), 0.0, 1e-12);
  EXPECT_NEAR(singular_mu(Operator::Identity(3, 3) * Complex(0.0, -2.5), 0.6, TracialState::normalized(3)), 2.5,
              1e-12);
}

TEST(SingularMu, MonotoneAndInverseOfLambda) {
  Rng rng(16);
  const TracialState tau = TracialState::normalized(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Operator a = random_operator(5, rng);
    const SingularSpectrum s = singular_spectrum(a, tau);
    double prev = kInfinity;
    for (int i = 1; i < 50; ++i) {
      const double t = 0.0201 * i;
      const double mu = singular_mu(s, t);
      EXPECT_LE(mu, prev + 1e-15);
      prev = mu;
      // mu_t > s iff lambda_s > t, probed away from breakpoints.
      for (double level : {0.3, 1.1, 2.7}) EXPECT_EQ(mu > level, distribution_lambda(s, level) > t);
    }
  }
}

TEST(MeetJoin, Examples) {
  const Projection p(diag({1, 0})), q(diag({0, 1}));
  MeetJoin mj = proj_meet_join(p, q);
  EXPECT_EQ(mj.meet.rank(), 0);
  EXPECT_LE(max_abs(mj.join.op() - Operator::Identity(2, 2)), 1e-12);

  mj = proj_meet_join(p, p);
  EXPECT_LE(max_abs(mj.meet.op() - p.op()), 1e-12);
  EXPECT_LE(max_abs(mj.join.op() - p.op()), 1e-12);

  Operator v(2, 1);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  mj = proj_meet_join(p, Projection::from_isometry(v));
  EXPECT_EQ(mj.meet.rank(), 0);
  EXPECT_LE(max_abs(mj.join.op() - Operator::Identity(2, 2)), 1e-9);
}

TEST(MeetJoin, TraceEquivalence) {
  Rng rng(17);
  const TracialState tau = TracialState::normalized(6);
  for (int trial = 0; trial < 100; ++trial) {
    const Projection p = random_projection(6, 1 + trial % 5, rng);
    // Share part of the range half of the time so meets are nontrivial.
    Projection q = random_projection(6, 1 + (trial / 5) % 5, rng);
    if (trial % 2 == 0) q = proj_meet_join(q, p).join;
    const MeetJoin mj = proj_meet_join(p, q);
    EXPECT_NEAR((p.op() - mj.meet.op()).trace().real() / 6.0, (mj.join.op() - q.op()).trace().real() / 6.0, 1e-9);
    EXPECT_NEAR(tau.real(p.op()) - tau.real(mj.meet.op()), tau.real(mj.join.op()) - tau.real(q.op()), 1e-9);
  }
}

TEST(Projection, ValidatesInput) {
  EXPECT_THROW(Projection(diag({1, 0.5})), InvalidInput);
  EXPECT_NO_THROW(Projection(diag({1, 0})));
}
