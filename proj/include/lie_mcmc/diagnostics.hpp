#pragma once

#include "lie_mcmc/group.hpp"
#include "lie_mcmc/model.hpp"
#include "lie_mcmc/random.hpp"
#include "lie_mcmc/sampler.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace lie_mcmc {

using Feature = Eigen::Vector3d;

// Kernel sums above this many points are computed on a uniform subsample.
inline constexpr std::size_t kMmdSubsampleCap = 2000;
inline constexpr std::uint64_t kMmdSubsampleSeed = 0x5eed'd1a9ULL;

// Diagonal (g11, g22, g33).
inline Feature features(const Rotation& g) { return g.matrix().diagonal(); }

inline std::vector<Feature> features(const Trace<SO3>& trace, std::size_t burn_in = 0) {
  std::vector<Feature> out;
  if (burn_in >= trace.records.size()) return out;
  out.reserve(trace.records.size() - burn_in);
  for (std::size_t t = burn_in; t < trace.records.size(); ++t) out.push_back(features(trace.records[t].state.g));
  return out;
}

// exp(-|x - y|^2 / (2 bandwidth^2))
inline double gaussian_kernel(const Feature& x, const Feature& y, double bandwidth) {
  return std::exp(-(x - y).squaredNorm() / (2.0 * bandwidth * bandwidth));
}

namespace detail {

inline double mean_kernel(std::span<const Feature> a, std::span<const Feature> b, double bandwidth) {
  double s = 0.0;
  for (const auto& x : a)
    for (const auto& y : b) s += gaussian_kernel(x, y, bandwidth);
  return s / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

inline std::vector<Feature> subsample(std::span<const Feature> xs, std::size_t cap, std::uint64_t seed) {
  if (xs.size() <= cap) return {xs.begin(), xs.end()};
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  // Partial Fisher-Yates; keeps the first `cap` positions.
  for (std::size_t i = 0; i < cap; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  std::vector<Feature> out;
  out.reserve(cap);
  for (auto i : idx) out.push_back(xs[i]);
  return out;
}

}  // namespace detail

// Biased (V-statistic) MMD, square root reported. Sets larger than `cap` are
// subsampled without replacement using a fixed seed.
inline double mmd(std::span<const Feature> x, std::span<const Feature> y, double bandwidth,
                  std::size_t cap = kMmdSubsampleCap) {
  if (x.empty() || y.empty()) throw std::invalid_argument("mmd: sample sets must be non-empty");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("mmd: bandwidth must be positive");
  const auto xs = detail::subsample(x, cap, kMmdSubsampleSeed);
  const auto ys = detail::subsample(y, cap, kMmdSubsampleSeed ^ 1);
  const double m2 = detail::mean_kernel(xs, xs, bandwidth) - 2.0 * detail::mean_kernel(xs, ys, bandwidth) +
                    detail::mean_kernel(ys, ys, bandwidth);
  return std::sqrt(std::max(m2, 0.0));
}

struct MMDCurve {
  std::vector<std::size_t> checkpoints;
  std::vector<double> values;
};

// MMD between the first N_k points and the whole sequence for every
// checkpoint N_k. Exact (no subsampling): one pass over the n(n-1)/2 kernel
// pairs yields every prefix sum, so the full-length value is exactly the
// set-against-itself estimate.
inline MMDCurve mmd_curve(std::span<const Feature> xs, std::span<const std::size_t> checkpoints, double bandwidth) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("mmd_curve: bandwidth must be positive");
  const std::size_t n = xs.size();
  for (std::size_t c : checkpoints) {
    if (c < 1 || c > n) throw std::invalid_argument("mmd_curve: checkpoint outside [1, trace length]");
  }
  // row[i] = sum_j k(x_i, x_j); lower[i] = sum_{j<i} k(x_i, x_j)
  std::vector<double> row(n, 1.0), lower(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double k = gaussian_kernel(xs[i], xs[j], bandwidth);
      lower[i] += k;
      row[i] += k;
      row[j] += k;
    }
  }
  // prefix_xx[N] = sum_{i,j<N} k, prefix_xy[N] = sum_{i<N} row[i]
  std::vector<double> prefix_xx(n + 1, 0.0), prefix_xy(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    prefix_xx[i + 1] = prefix_xx[i] + 1.0 + 2.0 * lower[i];
    prefix_xy[i + 1] = prefix_xy[i] + row[i];
  }
  const double dn = static_cast<double>(n);
  const double yy = prefix_xx[n] / (dn * dn);

  MMDCurve curve;
  curve.checkpoints.assign(checkpoints.begin(), checkpoints.end());
  for (std::size_t c : checkpoints) {
    const double dc = static_cast<double>(c);
    const double m2 = prefix_xx[c] / (dc * dc) - 2.0 * prefix_xy[c] / (dc * dn) + yy;
    curve.values.push_back(c == n ? 0.0 : std::sqrt(std::max(m2, 0.0)));
  }
  return curve;
}

inline MMDCurve mmd_curve(const Trace<SO3>& trace, std::span<const std::size_t> checkpoints, double bandwidth,
                          std::size_t burn_in = 0) {
  const auto xs = features(trace, burn_in);
  return mmd_curve(xs, checkpoints, bandwidth);
}

// Normalized empirical autocorrelation at lags 0..max_lag. A constant series
// is reported as perfectly correlated.
inline std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n <= max_lag) throw std::invalid_argument("autocorrelation: series shorter than max_lag + 1");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  double c0 = 0.0;
  for (double x : series) c0 += (x - mean) * (x - mean);
  std::vector<double> rho(max_lag + 1, 1.0);
  if (c0 == 0.0) return rho;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double ck = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) ck += (series[t] - mean) * (series[t + k] - mean);
    rho[k] = ck / c0;
  }
  return rho;
}

// Autocorrelation of each diagonal entry, averaged over the three entries.
inline std::vector<double> feature_autocorrelation(std::span<const Feature> xs, std::size_t max_lag) {
  std::vector<double> avg(max_lag + 1, 0.0);
  std::vector<double> component(xs.size());
  for (int c = 0; c < 3; ++c) {
    for (std::size_t t = 0; t < xs.size(); ++t) component[t] = xs[t][c];
    const auto rho = autocorrelation(component, max_lag);
    for (std::size_t k = 0; k <= max_lag; ++k) avg[k] += rho[k] / 3.0;
  }
  return avg;
}

// Integrated autocorrelation time 1 + 2 sum_k rho(k) with Sokal's automatic
// window: the smallest M with M >= window * tau(M).
inline double integrated_autocorrelation_time(std::span<const double> series, double window = 5.0) {
  const std::size_t n = series.size();
  if (n < 4) return 1.0;
  const std::size_t max_lag = n / 4;
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  double c0 = 0.0;
  for (double x : series) c0 += (x - mean) * (x - mean);
  if (c0 == 0.0) return static_cast<double>(n);
  double tau = 1.0;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double ck = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) ck += (series[t] - mean) * (series[t + k] - mean);
    tau += 2.0 * ck / c0;
    if (static_cast<double>(k) >= window * tau) break;
  }
  return std::max(tau, 1.0);
}

// x_t = g_t z
inline std::vector<Eigen::Vector3d> sphere_projection(const Trace<SO3>& trace,
                                                      const Eigen::Vector3d& z = Eigen::Vector3d::UnitZ()) {
  if (std::abs(z.norm() - 1.0) > 1e-12) throw std::invalid_argument("sphere_projection: z must be a unit vector");
  std::vector<Eigen::Vector3d> out;
  out.reserve(trace.records.size());
  for (const auto& r : trace.records) out.push_back(r.state.g.matrix() * z);
  return out;
}

// Exact i.i.d. draws from exp(-beta V(g)) dHaar: Haar proposals accepted
// with probability exp(-beta (V(g) - min V)).
template <class Rng_>
std::vector<Rotation> rejection_oracle(double alpha, double beta, std::size_t n, Rng_& rng) {
  if (beta < 0.0) throw std::invalid_argument("rejection_oracle: beta must be non-negative");
  const ExpTracePotential potential{alpha};
  const double v_min = potential.minimum();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Rotation> out;
  out.reserve(n);
  while (out.size() < n) {
    const Rotation g = haar_sample<SO3>(rng);
    const double accept = std::exp(-beta * (potential.value(g) - v_min));
    if (unif(rng) < accept) out.push_back(g);
  }
  return out;
}

struct KsResult {
  double statistic = 0.0;
  double critical_1pct = 0.0;
  bool passes() const { return statistic < critical_1pct; }
};

// Asymptotic 1% critical value c(0.01) sqrt((n + m) / (n m)).
inline double ks_critical_1pct(double n, double m) {
  return std::sqrt(-0.5 * std::log(0.005)) * std::sqrt((n + m) / (n * m));
}

// Two-sample Kolmogorov-Smirnov statistic for i.i.d. samples.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, ks_critical_1pct(na, nb)};
}

// IAT of a Markov chain output for CDF-level tests: the largest of the IATs
// of the series itself and of its indicator series at the three quartiles.
inline double distributional_iat(std::span<const double> series) {
  double tau = integrated_autocorrelation_time(series);
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> ind(series.size());
  for (double q : {0.25, 0.5, 0.75}) {
    const double cut = sorted[static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1))];
    for (std::size_t t = 0; t < series.size(); ++t) ind[t] = series[t] <= cut ? 1.0 : 0.0;
    tau = std::max(tau, integrated_autocorrelation_time(ind));
  }
  return tau;
}

struct ChainKsResult {
  double statistic = 0.0;
  double critical_iid = 0.0;  // treats the chain output as independent draws
  double critical = 0.0;      // uses the chain's effective sample size
  double iat = 1.0;
  double effective_size = 0.0;
  bool passes() const { return statistic < critical; }
};

// KS of correlated chain output against independent reference draws.
inline ChainKsResult ks_chain_vs_reference(std::span<const double> chain, std::span<const double> reference) {
  const KsResult raw = ks_two_sample({chain.begin(), chain.end()}, {reference.begin(), reference.end()});
  ChainKsResult r;
  r.statistic = raw.statistic;
  r.critical_iid = raw.critical_1pct;
  r.iat = distributional_iat(chain);
  r.effective_size = static_cast<double>(chain.size()) / r.iat;
  r.critical = ks_critical_1pct(r.effective_size, static_cast<double>(reference.size()));
  return r;
}

}  // namespace lie_mcmc
