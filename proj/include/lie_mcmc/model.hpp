#pragma once

#include "lie_mcmc/group.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lie_mcmc {

// Raised when D(g) = sigma sigma^T fails the invertibility test.
class SingularDiffusion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// D is declared singular when lambda_min / lambda_max falls below this.
inline constexpr double kDiffusionConditionThreshold = 1e-10;

// A potential exposes its value and its matrix of partials dV/dx_ab.
template <class P, class G>
concept PotentialOn = requires(const P& p, const GroupElement<G>& g) {
  { p.value(g) } -> std::convertible_to<double>;
  { p.gradient(g) } -> std::convertible_to<typename G::Matrix>;
};

// A set of position-only noise Hamiltonians U_i, i < count.
template <class N, class G>
concept NoiseOn = requires(const N& n, const GroupElement<G>& g, int i) {
  { N::count } -> std::convertible_to<int>;
  { n.value(i, g) } -> std::convertible_to<double>;
  { n.gradient(i, g) } -> std::convertible_to<typename G::Matrix>;
};

// V(g) = exp(alpha Tr g)
struct ExpTracePotential {
  double alpha = 1.0;

  double value(const Rotation& g) const { return std::exp(alpha * g.trace()); }

  // dV/dx = alpha exp(alpha Tr g) I
  SO3::Matrix gradient(const Rotation& g) const {
    return alpha * value(g) * SO3::Matrix::Identity();
  }

  // Smallest value of V over SO(3); Tr g ranges over [-1, 3].
  double minimum() const { return std::min(std::exp(-alpha), std::exp(3.0 * alpha)); }
};

// U_i(g) = epsilon Tr(exp(-xi_i) g), one per basis direction.
class TraceNoise {
 public:
  static constexpr int count = SO3::dim;

  explicit TraceNoise(double epsilon = 1.0) : epsilon_(epsilon) {
    for (int i = 0; i < count; ++i) shifts_[i] = SO3::exp(-SO3::Coords::Unit(i));
  }

  double epsilon() const { return epsilon_; }
  const SO3::Matrix& shift(int i) const { return shifts_[i]; }

  double value(int i, const Rotation& g) const { return epsilon_ * (shifts_[i] * g.matrix()).trace(); }

  // dU_i/dx_ab = epsilon exp(-xi_i)_ba
  SO3::Matrix gradient(int i, const Rotation&) const { return epsilon_ * shifts_[i].transpose(); }

 private:
  double epsilon_;
  std::array<SO3::Matrix, count> shifts_;
};

static_assert(PotentialOn<ExpTracePotential, SO3>);
static_assert(NoiseOn<TraceNoise, SO3>);

template <MatrixLieGroup G, PotentialOn<G> Potential, NoiseOn<G> Noise>
struct Model {
  using group = G;
  Potential potential;
  Noise noise;
};

using SO3Model = Model<SO3, ExpTracePotential, TraceNoise>;

inline SO3Model make_so3_model(double alpha, double epsilon) {
  return SO3Model{ExpTracePotential{alpha}, TraceNoise(epsilon)};
}

// Pairing of a Euclidean matrix gradient with the left-invariant direction
// xi_i at g: Tr(grad^T g xi_i).
template <MatrixLieGroup G>
typename G::Coords directional_pairing(const typename G::Matrix& grad, const GroupElement<G>& g) {
  static const auto xis = G::basis();
  const typename G::Matrix a = grad.transpose() * g.matrix();
  typename G::Coords out;
  for (int i = 0; i < G::dim; ++i) out[i] = (a * xis[i]).trace();
  return out;
}

// F_i(g) = Tr(dV^T g xi_i), the derivative of V along s -> g exp(s xi_i).
template <MatrixLieGroup G, PotentialOn<G> P>
AlgebraElement<G> force(const P& potential, const GroupElement<G>& g) {
  return AlgebraElement<G>(directional_pairing<G>(potential.gradient(g), g));
}

template <MatrixLieGroup G, NoiseOn<G> N>
using SigmaMatrix = Eigen::Matrix<double, G::dim, N::count>;

// sigma_ji(g) = -Tr(grad U_i^T g xi_j)
template <MatrixLieGroup G, NoiseOn<G> N>
SigmaMatrix<G, N> noise_sigma(const N& noise, const GroupElement<G>& g) {
  SigmaMatrix<G, N> sigma;
  for (int i = 0; i < N::count; ++i) sigma.col(i) = -directional_pairing<G>(noise.gradient(i, g), g);
  return sigma;
}

template <MatrixLieGroup G>
using DiffusionMatrix = Eigen::Matrix<double, G::dim, G::dim>;

// D = sigma sigma^T without the invertibility check.
template <MatrixLieGroup G, NoiseOn<G> N>
DiffusionMatrix<G> diffusion_matrix_unchecked(const N& noise, const GroupElement<G>& g) {
  const auto sigma = noise_sigma<G>(noise, g);
  DiffusionMatrix<G> d = sigma * sigma.transpose();
  return 0.5 * (d + d.transpose());
}

template <MatrixLieGroup G>
void require_invertible(const DiffusionMatrix<G>& d) {
  Eigen::SelfAdjointEigenSolver<DiffusionMatrix<G>> eig(d, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || lo / hi < kDiffusionConditionThreshold) {
    throw SingularDiffusion("diffusion matrix is singular (lambda_min=" + std::to_string(lo) +
                            ", lambda_max=" + std::to_string(hi) + ")");
  }
}

template <MatrixLieGroup G, NoiseOn<G> N>
DiffusionMatrix<G> diffusion_matrix(const N& noise, const GroupElement<G>& g) {
  DiffusionMatrix<G> d = diffusion_matrix_unchecked<G>(noise, g);
  require_invertible<G>(d);
  return d;
}

}  // namespace lie_mcmc
