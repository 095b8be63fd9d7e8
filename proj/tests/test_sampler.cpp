#include "checks.hpp"
#include "lie_mcmc/diagnostics.hpp"

#include <gtest/gtest.h>

#include <array>

namespace lie_mcmc {
namespace {

TEST(ChainConfig, Validation) {
  ChainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.beta = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.h = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.leapfrog.n_steps = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.n_samples = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Sampler, FreeMotionAlwaysAccepts) {
  // With alpha = 0 the energy is exactly conserved by the integrator.
  ChainConfig c;
  c.alpha = 0.0;
  c.n_samples = 500;
  EXPECT_EQ(run_chain(c).acceptance_rate(), 1.0);
}

TEST(Sampler, Deterministic) {
  ChainConfig c;
  c.n_samples = 300;
  c.seed = 77;
  const auto a = run_chain(c, InitKind::haar);
  const auto b = run_chain(c, InitKind::haar);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    EXPECT_EQ(a.records[k].state, b.records[k].state);
    EXPECT_EQ(a.records[k].hamiltonian, b.records[k].hamiltonian);
  }
  c.seed = 78;
  EXPECT_FALSE(run_chain(c, InitKind::haar).records.back().state == a.records.back().state);
}

TEST(Sampler, RejectionKeepsPositionAndFlipsMomentum) {
  ChainConfig c;
  c.leapfrog = {1.0, 5};  // large steps, many rejections
  c.n_samples = 2000;
  c.seed = 5;
  const auto trace = run_chain(c);
  auto prev = trace.initial;
  int rejected = 0;
  for (const auto& r : trace.records) {
    if (!r.accepted) {
      ++rejected;
      EXPECT_EQ(r.state.g, prev.g);
      EXPECT_EQ(r.state.v, -r.refreshed);
    }
    prev = r.state;
  }
  EXPECT_GT(rejected, 50);
}

TEST(Sampler, ZeroRefreshTimeKeepsMomentum) {
  ChainConfig c;
  c.h = 0.0;
  c.n_samples = 50;
  const auto trace = run_chain(c);
  auto prev = trace.initial;
  for (const auto& r : trace.records) {
    EXPECT_EQ(r.refreshed, prev.v);
    prev = r.state;
  }
}

TEST(Sampler, HmcRefreshIsIndependentOfIncomingMomentum) {
  EXPECT_LT(std::abs(checks::hmc_refresh_correlation(10000, 41)), 0.02);
}

TEST(Sampler, PartialRefreshIsCorrelated) {
  // Small h retains most of the incoming momentum.
  ChainConfig c;
  c.h = 0.01;
  c.n_samples = 2000;
  const auto trace = run_chain(c);
  double sxy = 0, sxx = 0;
  auto prev = trace.initial.v;
  for (const auto& r : trace.records) {
    sxy += prev.coords().dot(r.refreshed.coords());
    sxx += prev.coords().squaredNorm();
    prev = r.state.v;
  }
  EXPECT_GT(sxy / sxx, 0.95);
}

TEST(Sampler, StrictDiffusionRejectsSingularNoise) {
  ChainConfig c;
  c.epsilon = 0.0;
  c.strict_diffusion = true;
  c.n_samples = 5;
  EXPECT_THROW(run_chain(c), SingularDiffusion);
  c.strict_diffusion = false;
  const auto trace = run_chain(c);
  auto prev = trace.initial.v;
  for (const auto& r : trace.records) {
    EXPECT_EQ(r.refreshed, prev);  // D = 0 leaves v alone
    prev = r.state.v;
  }
}

TEST(Sampler, MomentumHasStationaryVariance) {
  ChainConfig c;
  c.n_samples = 20000;
  c.beta = 2.0;
  const auto trace = run_chain(c);
  double s = 0;
  for (const auto& r : trace.records) s += r.state.v.coords().squaredNorm();
  EXPECT_NEAR(s / c.n_samples, 3.0 / c.beta, 0.1);
}

// Each full step (refresh, proposal, accept, flip on reject) leaves the
// target invariant; starting exact draws, one step must keep the law of
// Tr g. Checked on a 3-bin histogram of 20000 independent one-step moves.
TEST(Sampler, OneStepPreservesExactDraws) {
  for (double h : {0.5, kInfiniteTime}) {
    Rng orng(51);
    const auto start = rejection_oracle(1.0, 1.0, 20000, orng);
    const SO3Model model = make_so3_model(1.0, 1.0);
    ChainConfig c;
    c.h = h;
    c.leapfrog = {0.5, 5};
    Rng rng(52);
    std::array<int, 3> before{}, after{};
    auto bin = [](double tr) { return tr < -0.8 ? 0 : (tr < -0.4 ? 1 : 2); };
    double acc = 0;
    for (const auto& g : start) {
      const PhaseState<SO3> s{g, RotationGenerator(Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()))};
      const auto r = mcmc_step(model, s, c, rng);
      acc += r.accepted;
      before[bin(g.trace())]++;
      after[bin(r.state.g.trace())]++;
    }
    EXPECT_LT(acc / start.size(), 0.99);  // the step actually moves and sometimes rejects
    for (int b = 0; b < 3; ++b) {
      const double p = before[b] / 20000.0;
      // paired counts: the difference has variance below 2 n p (1 - p)
      EXPECT_LT(std::abs(after[b] - before[b]), 4.0 * std::sqrt(2.0 * 20000 * p * (1 - p))) << "h=" << h << " bin " << b;
    }
  }
}

TEST(Sampler, BrokenAcceptanceIsDetected) {
  // Scaling the energy difference biases the chain toward low V; the mean
  // trace moves well outside its Monte Carlo error.
  ChainConfig c;
  c.leapfrog = {1.0, 5};
  c.n_samples = 20000;
  c.mh_energy_scale = 3.0;
  const auto bad = run_chain(c);
  c.mh_energy_scale = 1.0;
  const auto good = run_chain(c);
  auto mean_tr = [](const Trace<SO3>& t) {
    double s = 0;
    for (std::size_t k = 1000; k < t.records.size(); ++k) s += t.records[k].state.g.trace();
    return s / (t.records.size() - 1000);
  };
  EXPECT_NEAR(mean_tr(good), oracle::kTargetMeanTrace, 0.03);
  EXPECT_LT(mean_tr(bad), oracle::kTargetMeanTrace - 0.05);
}

TEST(Sampler, RecordsMatchTheirProposals) {
  ChainConfig c;
  c.leapfrog = {0.8, 5};
  c.n_samples = 500;
  const SO3Model model = make_so3_model(c.alpha, c.epsilon);
  const auto trace = run_chain(c);
  ASSERT_EQ(trace.records.size(), 500u);
  auto prev = trace.initial;
  for (const auto& r : trace.records) {
    const PhaseState<SO3> start{prev.g, r.refreshed};
    const auto proposal = leapfrog_trajectory(model, start, c.leapfrog);
    EXPECT_EQ(r.proposal_hamiltonian, hamiltonian(model, proposal));
    if (r.accepted) {
      EXPECT_EQ(r.state, proposal);
      EXPECT_EQ(r.hamiltonian, r.proposal_hamiltonian);
    } else {
      EXPECT_EQ(r.state, start.flipped());
      EXPECT_EQ(r.hamiltonian, hamiltonian(model, start));
    }
    prev = r.state;
  }
}

TEST(Sampler, HmcTwoBinFluxBalance) {
  // Position marginal of the h = inf chain is reversible: from exact draws,
  // one step moves as many samples low -> high as high -> low.
  Rng orng(53);
  const auto start = rejection_oracle(1.0, 1.0, 40000, orng);
  const SO3Model model = make_so3_model(1.0, 1.0);
  ChainConfig c;
  c.h = kInfiniteTime;
  c.leapfrog = {0.3, 5};
  Rng rng(54);
  const double cut = oracle::kTargetMeanTrace;
  int up = 0, down = 0;
  for (const auto& g : start) {
    const auto r = mcmc_step(model, {g, RotationGenerator::zero()}, c, rng);
    const bool a = g.trace() < cut, b = r.state.g.trace() < cut;
    up += (a && !b);
    down += (!a && b);
  }
  EXPECT_GT(up + down, 1000);
  EXPECT_LT(std::abs(up - down), 4.0 * std::sqrt(double(up + down)));
}

TEST(Sampler, PinnedAcceptanceAtReferenceSettings) {
  // alpha = beta = epsilon = 1, h = 0.5, 5 steps of 0.1, seed 20190101.
  ChainConfig c;
  c.seed = 20190101;
  const auto trace = run_chain(c);
  std::size_t accepted = 0;
  for (const auto& r : trace.records) accepted += r.accepted;
  EXPECT_GT(accepted, 0u);
  EXPECT_EQ(accepted, 4996u);
}

}  // namespace
}  // namespace lie_mcmc
