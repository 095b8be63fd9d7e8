#pragma once

#include "lie_mcmc/group.hpp"
#include "lie_mcmc/model.hpp"
#include "lie_mcmc/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lie_mcmc {

class NotSymmetric : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CholeskyFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kSymmetryTolerance = 1e-10;
// Eigenvalues of Sigma_h below this fraction of the largest are floored.
inline constexpr double kCovarianceFloor = 1e-14;

// Whether ou_transition insists on an invertible D. The closed form is exact
// for any positive semi-definite D: directions in the kernel of D are left
// untouched, which preserves N(0, I / beta) there as well.
enum class DiffusionCheck { require_invertible, allow_degenerate };

inline constexpr double kInfiniteTime = std::numeric_limits<double>::infinity();

// exp(A) for symmetric A via A = Q diag(l) Q^T.
template <class Derived>
typename Derived::PlainObject sym_expm(const Eigen::MatrixBase<Derived>& a) {
  using M = typename Derived::PlainObject;
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
    throw NotSymmetric("sym_expm: matrix is not symmetric");
  }
  const M sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<M> eig(sym);
  return eig.eigenvectors() * eig.eigenvalues().array().exp().matrix().asDiagonal() *
         eig.eigenvectors().transpose();
}

// Exact transition of dv = -(beta/2) D v dt + sigma dW over time h, at frozen g:
// v_h ~ N(mean_factor v_0, covariance).
template <MatrixLieGroup G>
struct OUTransition {
  using Matrix = DiffusionMatrix<G>;

  double h = 0.0;
  Matrix mean_factor = Matrix::Identity();
  Matrix covariance = Matrix::Zero();
  // factor * factor^T = covariance
  Matrix factor = Matrix::Zero();

  bool is_identity() const { return h == 0.0; }
};

// h = 0 gives the identity kernel and h = kInfiniteTime a full refresh
// N(0, I / beta); D is not consulted in either case.
template <MatrixLieGroup G>
OUTransition<G> ou_transition(const DiffusionMatrix<G>& d, double beta, double h,
                              DiffusionCheck check = DiffusionCheck::require_invertible) {
  using M = DiffusionMatrix<G>;
  if (!(beta > 0.0)) throw std::invalid_argument("ou_transition: beta must be positive");
  if (!(h >= 0.0)) throw std::invalid_argument("ou_transition: h must be non-negative");

  OUTransition<G> t;
  t.h = h;
  if (h == 0.0) return t;
  if (std::isinf(h)) {
    t.mean_factor = M::Zero();
    t.covariance = M::Identity() / beta;
    t.factor = M::Identity() / std::sqrt(beta);
    return t;
  }

  if (check == DiffusionCheck::require_invertible) require_invertible<G>(d);
  Eigen::SelfAdjointEigenSolver<M> eig(0.5 * (d + d.transpose()));
  const M& q = eig.eigenvectors();
  const auto lambda = eig.eigenvalues().cwiseMax(0.0).eval();

  // Sigma_h eigenvalues (1 - exp(-beta lambda h)) / beta, via expm1 so the
  // small-h regime keeps full relative precision.
  auto sigma = (-(-beta * h * lambda.array()).unaryExpr([](double x) { return std::expm1(x); }) / beta)
                   .matrix()
                   .eval();
  t.mean_factor = q * (-0.5 * beta * h * lambda.array()).exp().matrix().asDiagonal() * q.transpose();
  t.covariance = q * sigma.asDiagonal() * q.transpose();

  const double top = sigma.maxCoeff();
  if (!std::isfinite(top) || top < 0.0) throw CholeskyFailure("ou_transition: covariance is not finite");
  if (top == 0.0) {
    if (check == DiffusionCheck::require_invertible) throw CholeskyFailure("ou_transition: covariance is zero");
    return t;  // D = 0: the refresh is the identity
  }
  sigma = sigma.cwiseMax(kCovarianceFloor * top);
  t.factor = q * sigma.cwiseSqrt().asDiagonal();
  return t;
}

template <MatrixLieGroup G>
AlgebraElement<G> sample_ou(const AlgebraElement<G>& v0, const OUTransition<G>& t, Rng& rng) {
  if (t.is_identity()) return v0;
  typename G::Coords z;
  for (int i = 0; i < G::dim; ++i) z[i] = rng.normal();
  return AlgebraElement<G>(t.mean_factor * v0.coords() + t.factor * z);
}

}  // namespace lie_mcmc
