#include "lie_mcmc/ou.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace lie_mcmc {
namespace {

using M3 = Eigen::Matrix3d;
using V3 = Eigen::Vector3d;

constexpr double kMeanFactorUnitH01 = 0.95122942450071401;  // exp(-0.05)
constexpr double kSigmaUnitH01 = 0.095162581964040432;      // 1 - exp(-0.1)

M3 random_spd(std::uint64_t seed) {
  Rng rng(seed);
  M3 a;
  for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = rng.normal();
  return a * a.transpose() + 0.2 * M3::Identity();
}

// Sigma_h from the series of exp, with no eigendecomposition.
M3 covariance_oracle(const M3& d, double beta, double h) {
  return (M3::Identity() - oracle::expm_series(-beta * h * d, 60)) / beta;
}

TEST(SymExpm, KnownCases) {
  EXPECT_LT((sym_expm(M3::Zero()) - M3::Identity()).cwiseAbs().maxCoeff(), 1e-15);
  const M3 diag = V3(0.5, -1.0, 2.0).asDiagonal();
  EXPECT_LT((sym_expm(diag) - V3(std::exp(0.5), std::exp(-1.0), std::exp(2.0)).asDiagonal().toDenseMatrix())
                .cwiseAbs()
                .maxCoeff(),
            1e-13);
  const M3 s = random_spd(1) * 0.3;
  EXPECT_LT((sym_expm(s) - oracle::expm_series(s, 60)).cwiseAbs().maxCoeff(), 1e-12);
  M3 ns = M3::Identity();
  ns(0, 1) = 1.0;
  EXPECT_THROW(sym_expm(ns), NotSymmetric);
}

TEST(OUTransition, UnitDiffusionClosedForm) {
  const auto t = ou_transition<SO3>(M3::Identity(), 1.0, 0.1);
  EXPECT_LT((t.mean_factor - kMeanFactorUnitH01 * M3::Identity()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((t.covariance - kSigmaUnitH01 * M3::Identity()).cwiseAbs().maxCoeff(), 1e-16);
  EXPECT_LT((t.factor * t.factor.transpose() - t.covariance).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(OUTransition, MatchesSeriesOracle) {
  for (std::uint64_t seed : {2, 3, 4}) {
    const M3 d = random_spd(seed);
    for (double beta : {0.5, 1.0, 3.0}) {
      for (double h : {0.01, 0.1, 0.7}) {
        const auto t = ou_transition<SO3>(d, beta, h);
        EXPECT_LT((t.covariance - covariance_oracle(d, beta, h)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((t.mean_factor - oracle::expm_series(-0.5 * beta * h * d, 60)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((t.factor * t.factor.transpose() - t.covariance).cwiseAbs().maxCoeff(), 1e-13);
      }
    }
  }
}

TEST(OUTransition, LimitsInH) {
  const M3 d = random_spd(5);
  const double beta = 2.0;
  const auto big = ou_transition<SO3>(d, beta, 1e3);
  EXPECT_LT((big.covariance - M3::Identity() / beta).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(big.mean_factor.cwiseAbs().maxCoeff(), 1e-12);

  const double h = 1e-6;
  const auto small = ou_transition<SO3>(d, 1.0, h);
  EXPECT_LT((small.covariance / h - d).norm() / d.norm(), 1e-4);

  const auto inf = ou_transition<SO3>(d, beta, kInfiniteTime);
  EXPECT_EQ(inf.mean_factor, M3::Zero());
  EXPECT_EQ(inf.covariance, M3::Identity() / beta);

  EXPECT_TRUE(ou_transition<SO3>(d, beta, 0.0).is_identity());
  EXPECT_THROW(ou_transition<SO3>(d, 0.0, 0.1), std::invalid_argument);
  EXPECT_THROW(ou_transition<SO3>(d, 1.0, -0.1), std::invalid_argument);
}

TEST(OUTransition, SemigroupIdentity) {
  // Sigma_{h1+h2} = A_{h2} Sigma_{h1} A_{h2}^T + Sigma_{h2},  A_{h1+h2} = A_{h1} A_{h2}
  for (std::uint64_t seed : {6, 7, 8}) {
    const M3 d = random_spd(seed);
    const double beta = 1.3;
    for (auto [h1, h2] : {std::pair{0.1, 0.2}, std::pair{0.01, 1.0}, std::pair{0.5, 0.5}}) {
      const auto t1 = ou_transition<SO3>(d, beta, h1);
      const auto t2 = ou_transition<SO3>(d, beta, h2);
      const auto t12 = ou_transition<SO3>(d, beta, h1 + h2);
      const M3 composed = t2.mean_factor * t1.covariance * t2.mean_factor.transpose() + t2.covariance;
      EXPECT_LT((composed - t12.covariance).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT((t1.mean_factor * t2.mean_factor - t12.mean_factor).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(OUTransition, StationaryCovarianceIsPreserved) {
  // A (I / beta) A^T + Sigma_h = I / beta
  const M3 d = random_spd(9);
  for (double beta : {0.5, 2.0}) {
    const auto t = ou_transition<SO3>(d, beta, 0.3);
    const M3 out = t.mean_factor * t.mean_factor.transpose() / beta + t.covariance;
    EXPECT_LT((out - M3::Identity() / beta).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(OUTransition, CovarianceMonotoneInH) {
  const M3 d = random_spd(10);
  M3 prev = M3::Zero();
  for (double h : {0.01, 0.05, 0.1, 0.5, 1.0, 5.0}) {
    const M3 s = ou_transition<SO3>(d, 1.0, h).covariance;
    Eigen::SelfAdjointEigenSolver<M3> eig(s - prev);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0) << h;
    prev = s;
  }
}

TEST(OUTransition, DegenerateDiffusion) {
  const M3 d = V3(1.0, 0.5, 0.0).asDiagonal();
  EXPECT_THROW(ou_transition<SO3>(d, 1.0, 0.1), SingularDiffusion);
  const auto t = ou_transition<SO3>(d, 1.0, 0.1, DiffusionCheck::allow_degenerate);
  EXPECT_NEAR(t.mean_factor(2, 2), 1.0, 1e-15);
  EXPECT_NEAR(t.covariance(2, 2), 0.0, 1e-15);
  EXPECT_NEAR(t.covariance(0, 0), -std::expm1(-0.1), 1e-16);
  const auto zero = ou_transition<SO3>(M3::Zero(), 1.0, 0.1, DiffusionCheck::allow_degenerate);
  EXPECT_EQ(zero.mean_factor, M3::Identity());
  EXPECT_EQ(zero.factor, M3::Zero());
}

TEST(SampleOU, ZeroTimeReturnsInputExactly) {
  Rng rng(11);
  const RotationGenerator v0(V3(0.3, -1.7, 2.2));
  const auto t = ou_transition<SO3>(random_spd(11), 1.0, 0.0);
  EXPECT_EQ(sample_ou<SO3>(v0, t, rng), v0);
}

TEST(SampleOU, MomentsMatchTransition) {
  const M3 d = random_spd(12);
  const double beta = 1.5, h = 0.4;
  const auto t = ou_transition<SO3>(d, beta, h);
  const RotationGenerator v0(V3(1.0, -2.0, 0.5));
  const V3 mean_expected = oracle::expm_series(-0.5 * beta * h * d, 60) * v0.coords();
  const M3 cov_expected = covariance_oracle(d, beta, h);

  Rng rng(13);
  const int n = 100000;
  V3 sum = V3::Zero();
  M3 sq = M3::Zero();
  for (int k = 0; k < n; ++k) {
    const V3 x = sample_ou<SO3>(v0, t, rng).coords();
    sum += x;
    sq += x * x.transpose();
  }
  const V3 mean = sum / n;
  const M3 cov = sq / n - mean * mean.transpose();
  for (int i = 0; i < 3; ++i) {
    const double se = std::sqrt(cov_expected(i, i) / n);
    EXPECT_LT(std::abs(mean[i] - mean_expected[i]), 3.0 * se) << i;
  }
  EXPECT_LT((cov - cov_expected).norm() / cov_expected.norm(), 0.05);
}

TEST(SampleOU, LagOneCorrelation) {
  // D = lambda I: corr(v0_i, v_i) = exp(-beta lambda h / 2) under stationarity.
  const double lambda = 0.8, beta = 1.0, h = 0.5;
  const auto t = ou_transition<SO3>(lambda * M3::Identity(), beta, h);
  Rng rng(14);
  const int n = 100000;
  double sxy = 0, sxx = 0, syy = 0;
  for (int k = 0; k < n; ++k) {
    const RotationGenerator v0(V3(rng.normal(), rng.normal(), rng.normal()));
    const V3 v1 = sample_ou<SO3>(v0, t, rng).coords();
    sxy += v0.coords()[0] * v1[0];
    sxx += v0.coords()[0] * v0.coords()[0];
    syy += v1[0] * v1[0];
  }
  EXPECT_NEAR(sxy / std::sqrt(sxx * syy), std::exp(-0.5 * beta * lambda * h), 0.01);
  EXPECT_NEAR(syy / n, 1.0 / beta, 0.02);
}

TEST(SymExpm, DiagonalAndInverse) {
  const M3 e = sym_expm(V3(1.0, 2.0, 3.0).asDiagonal().toDenseMatrix());
  EXPECT_LT((e - V3(std::exp(1.0), std::exp(2.0), std::exp(3.0)).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(),
            1e-12);
  for (std::uint64_t seed : {20, 21, 22}) {
    M3 a = random_spd(seed) - 2.0 * M3::Identity();
    EXPECT_LT((sym_expm(a) * sym_expm(-a) - M3::Identity()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(SampleOU, IteratesConvergeToIsotropicLaw) {
  // Stationary covariance is I / beta whatever D is.
  const M3 d = random_spd(23);
  const double beta = 2.0;
  const auto t = ou_transition<SO3>(d, beta, 0.3);
  Rng rng(24);
  RotationGenerator v(V3(5.0, -5.0, 5.0));
  for (int k = 0; k < 1000; ++k) v = sample_ou<SO3>(v, t, rng);
  M3 sq = M3::Zero();
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    v = sample_ou<SO3>(v, t, rng);
    sq += v.coords() * v.coords().transpose();
  }
  const M3 target = M3::Identity() / beta;
  EXPECT_LT((sq / n - target).norm() / target.norm(), 0.05);
}

TEST(SampleOU, CorrelationAlongEigendirectionsOfD) {
  // At a fixed g, the refresh contracts eigendirection k of D(g) by
  // exp(-beta lambda_k h / 2).
  Rng grng(25);
  const M3 d = diffusion_matrix<SO3>(TraceNoise(1.0), haar_sample<SO3>(grng));
  Eigen::SelfAdjointEigenSolver<M3> eig(d);
  const double beta = 1.0, h = 0.5;
  const auto t = ou_transition<SO3>(d, beta, h);
  Rng rng(26);
  const int n = 100000;
  V3 sxy = V3::Zero(), sxx = V3::Zero(), syy = V3::Zero();
  for (int k = 0; k < n; ++k) {
    const RotationGenerator v0(V3(rng.normal(), rng.normal(), rng.normal()));
    const V3 a = eig.eigenvectors().transpose() * v0.coords();
    const V3 b = eig.eigenvectors().transpose() * sample_ou<SO3>(v0, t, rng).coords();
    sxy += a.cwiseProduct(b);
    sxx += a.cwiseProduct(a);
    syy += b.cwiseProduct(b);
  }
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(sxy[k] / std::sqrt(sxx[k] * syy[k]), std::exp(-0.5 * beta * eig.eigenvalues()[k] * h), 0.01) << k;
  }
}

}  // namespace
}  // namespace lie_mcmc
