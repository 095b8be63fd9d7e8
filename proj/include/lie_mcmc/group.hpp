#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <concepts>
#include <random>

namespace lie_mcmc {

// A matrix Lie group of dimension `dim` embedded in (matrix_size x matrix_size)
// real matrices, with an algebra basis that is orthonormal under the trace
// inner product Tr(a^T b).
template <class G>
concept MatrixLieGroup = requires(const typename G::Matrix& m,
                                  const typename G::Coords& c,
                                  std::mt19937_64& rng) {
  { G::dim } -> std::convertible_to<int>;
  { G::basis() } -> std::convertible_to<std::array<typename G::Matrix, G::dim>>;
  { G::exp(c) } -> std::convertible_to<typename G::Matrix>;
  { G::project(m) } -> std::convertible_to<typename G::Matrix>;
  { G::haar_sample(rng) } -> std::convertible_to<typename G::Matrix>;
};

// Tolerance on ||g^T g - I||_inf beyond which products are re-projected.
inline constexpr double kOrthonormalDrift = 1e-9;

template <class G>
class GroupElement {
 public:
  using Matrix = typename G::Matrix;

  GroupElement() : m_(Matrix::Identity()) {}
  explicit GroupElement(const Matrix& m) : m_(m) {}

  static GroupElement identity() { return GroupElement(); }

  const Matrix& matrix() const { return m_; }
  double trace() const { return m_.trace(); }

  GroupElement inverse() const { return GroupElement(m_.transpose()); }

  // ||m^T m - I||_inf
  double orthonormality_error() const {
    return (m_.transpose() * m_ - Matrix::Identity()).cwiseAbs().maxCoeff();
  }

  bool operator==(const GroupElement&) const = default;

 private:
  Matrix m_;
};

template <class G>
class AlgebraElement {
 public:
  using Coords = typename G::Coords;
  using Matrix = typename G::Matrix;

  AlgebraElement() : c_(Coords::Zero()) {}
  explicit AlgebraElement(const Coords& c) : c_(c) {}

  static AlgebraElement zero() { return AlgebraElement(); }

  // Coordinates of an algebra matrix: c_i = Tr(xi_i^T m).
  static AlgebraElement from_matrix(const Matrix& m) {
    static const auto xis = G::basis();
    Coords c;
    for (int i = 0; i < G::dim; ++i) c[i] = (xis[i].transpose() * m).trace();
    return AlgebraElement(c);
  }

  const Coords& coords() const { return c_; }

  // v^i xi_i
  Matrix matrix() const {
    static const auto xis = G::basis();
    Matrix m = Matrix::Zero();
    for (int i = 0; i < G::dim; ++i) m += c_[i] * xis[i];
    return m;
  }

  AlgebraElement operator-() const { return AlgebraElement(-c_); }
  AlgebraElement operator+(const AlgebraElement& o) const { return AlgebraElement(c_ + o.c_); }
  AlgebraElement operator-(const AlgebraElement& o) const { return AlgebraElement(c_ - o.c_); }
  friend AlgebraElement operator*(double s, const AlgebraElement& v) { return AlgebraElement(s * v.c_); }

  bool operator==(const AlgebraElement&) const = default;

 private:
  Coords c_;
};

// ---------------------------------------------------------------------------
// SO(3)

struct SO3 {
  static constexpr int dim = 3;
  static constexpr int matrix_size = 3;
  using Matrix = Eigen::Matrix3d;
  using Coords = Eigen::Vector3d;

  // hat(a) x = a cross x
  static Matrix hat(const Eigen::Vector3d& a) {
    Matrix m;
    m << 0.0, -a.z(), a.y(),
         a.z(), 0.0, -a.x(),
         -a.y(), a.x(), 0.0;
    return m;
  }

  static Eigen::Vector3d vee(const Matrix& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

  // xi_i = hat(e_i) / sqrt(2), so that Tr(xi_i^T xi_j) = delta_ij.
  static std::array<Matrix, dim> basis() {
    const double s = 1.0 / std::sqrt(2.0);
    return {hat(s * Eigen::Vector3d::UnitX()),
            hat(s * Eigen::Vector3d::UnitY()),
            hat(s * Eigen::Vector3d::UnitZ())};
  }

  // Coordinates in the orthonormal basis <-> rotation vector.
  static Eigen::Vector3d rotation_vector(const Coords& c) { return c / std::sqrt(2.0); }
  static Coords from_rotation_vector(const Eigen::Vector3d& w) { return std::sqrt(2.0) * w; }

  // Rodrigues.
  static Matrix exp(const Coords& c) {
    const Eigen::Vector3d w = rotation_vector(c);
    const double theta2 = w.squaredNorm();
    const double theta = std::sqrt(theta2);
    const Matrix k = hat(w);
    double a, b;
    if (theta < 1e-4) {
      a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
      b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
    } else {
      a = std::sin(theta) / theta;
      b = (1.0 - std::cos(theta)) / theta2;
    }
    return Matrix::Identity() + a * k + b * k * k;
  }

  // Nearest rotation (polar factor).
  static Matrix project(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix u = svd.matrixU();
    const Matrix& v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
    return u * v.transpose();
  }

  // Uniform unit quaternion (Shoemake) mapped to a rotation matrix.
  template <class Rng>
  static Matrix haar_sample(Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u1 = unif(rng), u2 = unif(rng), u3 = unif(rng);
    const double r1 = std::sqrt(1.0 - u1), r2 = std::sqrt(u1);
    const double two_pi = 2.0 * M_PI;
    Eigen::Quaterniond q(r2 * std::cos(two_pi * u3), r1 * std::sin(two_pi * u2),
                         r1 * std::cos(two_pi * u2), r2 * std::sin(two_pi * u3));
    return q.toRotationMatrix();
  }
};

static_assert(MatrixLieGroup<SO3>);

// ---------------------------------------------------------------------------
// Free functions over any MatrixLieGroup.

template <MatrixLieGroup G>
std::array<typename G::Matrix, G::dim> basis() {
  return G::basis();
}

template <MatrixLieGroup G>
GroupElement<G> exp_algebra(const AlgebraElement<G>& v) {
  return GroupElement<G>(G::exp(v.coords()));
}

// Matrix product, projected back onto the group once roundoff drift exceeds
// kOrthonormalDrift.
template <MatrixLieGroup G>
GroupElement<G> compose(const GroupElement<G>& a, const GroupElement<G>& b) {
  GroupElement<G> g(a.matrix() * b.matrix());
  if (g.orthonormality_error() > kOrthonormalDrift) return GroupElement<G>(G::project(g.matrix()));
  return g;
}

// 1/2 Tr(v^T v), which is 1/2 |coords|^2 in the orthonormal basis.
template <MatrixLieGroup G>
double kinetic_energy(const AlgebraElement<G>& v) {
  return 0.5 * v.coords().squaredNorm();
}

template <MatrixLieGroup G, class Rng>
GroupElement<G> haar_sample(Rng& rng) {
  return GroupElement<G>(G::haar_sample(rng));
}

using Rotation = GroupElement<SO3>;
using RotationGenerator = AlgebraElement<SO3>;

}  // namespace lie_mcmc
