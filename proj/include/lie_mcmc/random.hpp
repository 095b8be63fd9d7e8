#pragma once

#include <cstdint>
#include <random>

namespace lie_mcmc {

// 64-bit mixing function (SplitMix64 finalizer).
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream seed for chain `chain` of grid point `grid` under `master`.
// Independent of scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t grid, std::uint64_t chain) {
  return mix64(mix64(mix64(master) ^ grid) ^ (chain + 0x632be59bd9b4e019ULL));
}

// Per-chain random stream. Satisfies UniformRandomBitGenerator so it can be
// handed to <random> distributions directly.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace lie_mcmc
