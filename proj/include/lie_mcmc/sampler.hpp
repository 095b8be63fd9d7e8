#pragma once

#include "lie_mcmc/group.hpp"
#include "lie_mcmc/integrator.hpp"
#include "lie_mcmc/model.hpp"
#include "lie_mcmc/ou.hpp"
#include "lie_mcmc/random.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lie_mcmc {

struct ChainConfig {
  double beta = 1.0;
  // OU refresh time; 0 disables the refresh, kInfiniteTime is an exact
  // N(0, I/beta) redraw (HMC).
  double h = 0.5;
  LeapfrogParams leapfrog{};
  double alpha = 1.0;
  double epsilon = 1.0;
  int n_samples = 5000;
  std::uint64_t seed = 1;
  // Use D evaluated at the group identity for every step instead of D(g).
  bool freeze_diffusion = false;
  // Abort with SingularDiffusion when D(g) is ill-conditioned instead of
  // using the exact degenerate-D refresh.
  bool strict_diffusion = false;
  // Multiplies beta * dH in the acceptance test. Anything but 1 breaks
  // invariance; exists for negative-control tests.
  double mh_energy_scale = 1.0;

  void validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive and finite");
    if (!(h >= 0.0)) throw std::invalid_argument("h must be non-negative (or inf)");
    leapfrog.validate();
    if (!std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite");
    if (!std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be finite");
    if (n_samples < 1) throw std::invalid_argument("n_samples must be at least 1");
  }
};

template <MatrixLieGroup G>
struct StepRecord {
  PhaseState<G> state;
  double hamiltonian = 0.0;
  bool accepted = false;
  double proposal_hamiltonian = 0.0;
  // Momentum after the OU refresh, before the leapfrog proposal.
  AlgebraElement<G> refreshed;
};

template <MatrixLieGroup G>
struct Trace {
  ChainConfig config;
  PhaseState<G> initial;
  std::vector<StepRecord<G>> records;

  double acceptance_rate() const {
    if (records.empty()) return 0.0;
    std::size_t n = 0;
    for (const auto& r : records) n += r.accepted ? 1 : 0;
    return static_cast<double>(n) / static_cast<double>(records.size());
  }
};

// One OU-refresh / leapfrog / Metropolis-Hastings step. On rejection the
// chain keeps g and reverses the refreshed momentum.
template <class M>
StepRecord<typename M::group> mcmc_step(const M& model, const PhaseState<typename M::group>& s,
                                        const ChainConfig& cfg, Rng& rng) {
  using G = typename M::group;

  AlgebraElement<G> refreshed = s.v;
  if (cfg.h > 0.0) {
    DiffusionMatrix<G> d;
    if (std::isinf(cfg.h)) {
      d.setIdentity();  // unused
    } else {
      d = diffusion_matrix_unchecked<G>(model.noise, cfg.freeze_diffusion ? GroupElement<G>::identity() : s.g);
    }
    const auto check = cfg.strict_diffusion ? DiffusionCheck::require_invertible : DiffusionCheck::allow_degenerate;
    refreshed = sample_ou<G>(s.v, ou_transition<G>(d, cfg.beta, cfg.h, check), rng);
  }

  const PhaseState<G> start{s.g, refreshed};
  const PhaseState<G> proposal = leapfrog_trajectory(model, start, cfg.leapfrog);
  const double h0 = hamiltonian(model, start);
  const double h1 = hamiltonian(model, proposal);

  const double log_u = std::log(rng.uniform());
  const bool accept = std::isfinite(h1) && log_u < -cfg.mh_energy_scale * cfg.beta * (h1 - h0);

  StepRecord<G> rec;
  rec.refreshed = refreshed;
  rec.proposal_hamiltonian = h1;
  rec.accepted = accept;
  rec.state = accept ? proposal : start.flipped();
  rec.hamiltonian = accept ? h1 : h0;
  return rec;
}

enum class InitKind { identity, haar };

// g_0 from `init`, v_0 ~ N(0, I / beta); all randomness from cfg.seed.
template <class M>
PhaseState<typename M::group> initial_state(const ChainConfig& cfg, InitKind init, Rng& rng) {
  using G = typename M::group;
  PhaseState<G> s;
  if (init == InitKind::haar) s.g = haar_sample<G>(rng);
  typename G::Coords c;
  for (int i = 0; i < G::dim; ++i) c[i] = rng.normal() / std::sqrt(cfg.beta);
  s.v = AlgebraElement<G>(c);
  return s;
}

template <class M>
Trace<typename M::group> run_chain(const M& model, const ChainConfig& cfg,
                                   const PhaseState<typename M::group>& init, Rng& rng) {
  cfg.validate();
  Trace<typename M::group> trace;
  trace.config = cfg;
  trace.initial = init;
  trace.records.reserve(static_cast<std::size_t>(cfg.n_samples));
  auto s = init;
  for (int k = 0; k < cfg.n_samples; ++k) {
    trace.records.push_back(mcmc_step(model, s, cfg, rng));
    s = trace.records.back().state;
  }
  return trace;
}

inline Trace<SO3> run_chain(const ChainConfig& cfg, InitKind init = InitKind::identity) {
  cfg.validate();
  const SO3Model model = make_so3_model(cfg.alpha, cfg.epsilon);
  Rng rng(cfg.seed);
  const auto start = initial_state<SO3Model>(cfg, init, rng);
  return run_chain(model, cfg, start, rng);
}

}  // namespace lie_mcmc
