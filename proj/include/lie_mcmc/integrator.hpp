#pragma once

#include "lie_mcmc/group.hpp"
#include "lie_mcmc/model.hpp"

#include <stdexcept>

namespace lie_mcmc {

template <MatrixLieGroup G>
struct PhaseState {
  GroupElement<G> g;
  AlgebraElement<G> v;

  PhaseState flipped() const { return {g, -v}; }
  bool operator==(const PhaseState&) const = default;
};

struct LeapfrogParams {
  double step_size = 0.1;
  int n_steps = 5;

  void validate() const {
    if (!(step_size > 0.0)) throw std::invalid_argument("leapfrog step_size must be positive");
    if (n_steps < 1) throw std::invalid_argument("leapfrog n_steps must be at least 1");
  }
};

// H(g, v) = V(g) + T(v)
template <class M>
double hamiltonian(const M& model, const PhaseState<typename M::group>& s) {
  return model.potential.value(s.g) + kinetic_energy(s.v);
}

// Half kick, geodesic drift g <- g exp(delta v), half kick.
template <class M>
PhaseState<typename M::group> leapfrog_step(const M& model, const PhaseState<typename M::group>& s,
                                            double delta) {
  using G = typename M::group;
  const AlgebraElement<G> half = s.v - (0.5 * delta) * force(model.potential, s.g);
  const GroupElement<G> g = compose(s.g, exp_algebra(delta * half));
  const AlgebraElement<G> v = half - (0.5 * delta) * force(model.potential, g);
  return {g, v};
}

template <class M>
PhaseState<typename M::group> leapfrog_trajectory(const M& model, PhaseState<typename M::group> s,
                                                  const LeapfrogParams& p) {
  for (int k = 0; k < p.n_steps; ++k) s = leapfrog_step(model, s, p.step_size);
  return s;
}

}  // namespace lie_mcmc
