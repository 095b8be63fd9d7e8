#pragma once

#include "lie_mcmc/config.hpp"
#include "lie_mcmc/diagnostics.hpp"
#include "lie_mcmc/sampler.hpp"
#include "lie_mcmc/trace_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace lie_mcmc {

struct ChainSummary {
  double h = 0.0;
  int chain = 0;
  std::uint64_t seed = 0;
  double acceptance_rate = 0.0;
  double mean_hamiltonian = 0.0;
  MMDCurve mmd;
  std::vector<double> autocorr;
};

struct ExperimentResult {
  std::vector<std::string> labels;             // per h
  std::vector<std::size_t> checkpoints;
  std::vector<std::vector<double>> mmd_mean;   // [h][checkpoint]
  std::vector<std::vector<double>> autocorr_mean;  // [h][lag]
  std::vector<double> acceptance_mean;         // [h]
  std::vector<ChainSummary> chains;            // ordered by (h index, chain)
};

inline ChainConfig chain_config_for(const ExperimentConfig& cfg, std::size_t h_index, int chain) {
  ChainConfig c = cfg.chain;
  c.h = cfg.h_grid.at(h_index);
  c.seed = derive_seed(cfg.chain.seed, h_index, static_cast<std::uint64_t>(chain));
  return c;
}

inline std::filesystem::path chain_path(const std::filesystem::path& out, double h, int chain, const char* ext) {
  return out / h_label(h) / ("chain_" + std::to_string(chain) + ext);
}

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  out << s;
  if (!out) throw std::runtime_error("write failed: " + p.string());
}

inline void write_columns(const std::filesystem::path& p, const std::string& index_name,
                          const std::vector<std::size_t>& index, const std::vector<std::string>& labels,
                          const std::vector<std::vector<double>>& cols) {
  std::string s = index_name;
  for (const auto& l : labels) s += "," + l;
  s += "\n";
  for (std::size_t r = 0; r < index.size(); ++r) {
    s += std::to_string(index[r]);
    for (const auto& c : cols) s += "," + format_double(c[r]);
    s += "\n";
  }
  write_text(p, s);
}

}  // namespace detail

inline void check_against_length(const ExperimentConfig& cfg) {
  const auto n = static_cast<std::size_t>(cfg.chain.n_samples);
  const std::size_t burn = cfg.diagnostics.burn_in;
  if (burn >= n) throw ConfigError("[diagnostics] burn_in must be smaller than n_samples");
  if (cfg.diagnostics.checkpoints.back() > n - burn) {
    throw ConfigError("[diagnostics] checkpoints exceed the post-burn-in trace length");
  }
  if (cfg.diagnostics.max_lag >= n - burn) throw ConfigError("[diagnostics] max_lag must be below the trace length");
  std::set<std::string> labels;
  for (double h : cfg.h_grid) {
    if (!labels.insert(h_label(h)).second) throw ConfigError("[experiment] duplicate h value in h_grid");
  }
}

// Runs every (h, chain) pair on `jobs` workers. Each pair writes its own
// trace CSV and JSON summary; aggregates and the manifest are written after
// all workers finish. Output bytes depend only on `cfg`.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs = 1) {
  cfg.check();
  check_against_length(cfg);
  namespace fs = std::filesystem;
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  for (double h : cfg.h_grid) fs::create_directories(out / h_label(h));

  const std::size_t n_h = cfg.h_grid.size();
  const auto n_tasks = n_h * static_cast<std::size_t>(cfg.n_chains);
  std::vector<ChainSummary> summaries(n_tasks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= n_tasks) return;
      try {
        const std::size_t hi = task / static_cast<std::size_t>(cfg.n_chains);
        const int k = static_cast<int>(task % static_cast<std::size_t>(cfg.n_chains));
        const ChainConfig cc = chain_config_for(cfg, hi, k);
        const Trace<SO3> trace = run_chain(cc, cfg.init);
        write_trace_csv(chain_path(out, cc.h, k, ".csv"), trace);

        ChainSummary s;
        s.h = cc.h;
        s.chain = k;
        s.seed = cc.seed;
        s.acceptance_rate = trace.acceptance_rate();
        for (const auto& r : trace.records) s.mean_hamiltonian += r.hamiltonian;
        s.mean_hamiltonian /= static_cast<double>(trace.records.size());
        const auto feats = features(trace, cfg.diagnostics.burn_in);
        s.mmd = mmd_curve(feats, cfg.diagnostics.checkpoints, cfg.diagnostics.bandwidth);
        s.autocorr = feature_autocorrelation(feats, cfg.diagnostics.max_lag);

        nlohmann::ordered_json j;
        j["h"] = format_double(cc.h);
        j["chain"] = k;
        j["seed"] = cc.seed;
        j["n_samples"] = cc.n_samples;
        j["acceptance_rate"] = s.acceptance_rate;
        j["mean_hamiltonian"] = s.mean_hamiltonian;
        j["mmd_checkpoints"] = s.mmd.checkpoints;
        j["mmd"] = s.mmd.values;
        j["autocorr"] = s.autocorr;
        detail::write_text(chain_path(out, cc.h, k, ".json"), j.dump(2) + "\n");
        summaries[task] = std::move(s);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_tasks);
        return;
      }
    }
  };

  const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(n_tasks)));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentResult res;
  res.checkpoints = cfg.diagnostics.checkpoints;
  const std::size_t n_lags = cfg.diagnostics.max_lag + 1;
  for (std::size_t hi = 0; hi < n_h; ++hi) {
    res.labels.push_back(h_label(cfg.h_grid[hi]));
    std::vector<double> m(res.checkpoints.size(), 0.0), a(n_lags, 0.0);
    double acc = 0.0;
    for (int k = 0; k < cfg.n_chains; ++k) {
      const auto& s = summaries[hi * static_cast<std::size_t>(cfg.n_chains) + static_cast<std::size_t>(k)];
      for (std::size_t c = 0; c < m.size(); ++c) m[c] += s.mmd.values[c];
      for (std::size_t l = 0; l < n_lags; ++l) a[l] += s.autocorr[l];
      acc += s.acceptance_rate;
    }
    const double nc = cfg.n_chains;
    for (auto& x : m) x /= nc;
    for (auto& x : a) x /= nc;
    res.mmd_mean.push_back(std::move(m));
    res.autocorr_mean.push_back(std::move(a));
    res.acceptance_mean.push_back(acc / nc);
  }
  res.chains = std::move(summaries);

  std::vector<std::size_t> lags(n_lags);
  for (std::size_t l = 0; l < n_lags; ++l) lags[l] = l;
  detail::write_columns(out / "mmd_curve.csv", "N", res.checkpoints, res.labels, res.mmd_mean);
  detail::write_columns(out / "autocorr.csv", "lag", lags, res.labels, res.autocorr_mean);

  nlohmann::ordered_json manifest;
  manifest["config_ini"] = to_ini(cfg);
  manifest["seed_rule"] = "derive_seed(master, h_index, chain): splitmix64(splitmix64(splitmix64(master) ^ h_index) ^ (chain + 0x632be59bd9b4e019))";
  nlohmann::ordered_json grid = nlohmann::ordered_json::array();
  for (std::size_t hi = 0; hi < n_h; ++hi) {
    nlohmann::ordered_json g;
    g["h"] = format_double(cfg.h_grid[hi]);
    g["label"] = res.labels[hi];
    std::vector<std::uint64_t> seeds;
    for (int k = 0; k < cfg.n_chains; ++k) seeds.push_back(chain_config_for(cfg, hi, k).seed);
    g["seeds"] = seeds;
    g["mean_acceptance_rate"] = res.acceptance_mean[hi];
    grid.push_back(g);
  }
  manifest["grid"] = grid;
  detail::write_text(out / "manifest.json", manifest.dump(2) + "\n");
  return res;
}

enum class ValidationStatus { pass, fail, inconclusive };

inline const char* to_string(ValidationStatus s) {
  switch (s) {
    case ValidationStatus::pass: return "pass";
    case ValidationStatus::fail: return "fail";
    case ValidationStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

struct StationarityReport {
  ValidationStatus status = ValidationStatus::inconclusive;
  ChainKsResult ks;
  double chain_mean_trace = 0.0;
  double oracle_mean_trace = 0.0;
  double acceptance_rate = 0.0;
  std::size_t chain_samples = 0;
  std::size_t oracle_samples = 0;
};

inline constexpr std::size_t kMinValidationSamples = 1000;

// Long chain at cfg.chain versus the rejection oracle, compared by a
// two-sample KS test on Tr(g) at the 1% level.
inline StationarityReport validate_stationarity(const ExperimentConfig& cfg) {
  cfg.check();
  ChainConfig cc = cfg.chain;
  cc.n_samples = cfg.validate.n_samples + cfg.validate.burn_in;
  const Trace<SO3> trace = run_chain(cc, cfg.init);

  std::vector<double> chain_tr;
  for (std::size_t t = static_cast<std::size_t>(cfg.validate.burn_in); t < trace.records.size(); ++t) {
    chain_tr.push_back(trace.records[t].state.g.trace());
  }
  Rng oracle_rng(cfg.validate.oracle_seed);
  const auto oracle = rejection_oracle(cc.alpha, cc.beta, static_cast<std::size_t>(cfg.validate.oracle_samples), oracle_rng);
  std::vector<double> oracle_tr;
  for (const auto& g : oracle) oracle_tr.push_back(g.trace());

  StationarityReport r;
  r.ks = ks_chain_vs_reference(chain_tr, oracle_tr);
  r.chain_samples = chain_tr.size();
  r.oracle_samples = oracle_tr.size();
  r.acceptance_rate = trace.acceptance_rate();
  for (double x : chain_tr) r.chain_mean_trace += x / static_cast<double>(chain_tr.size());
  for (double x : oracle_tr) r.oracle_mean_trace += x / static_cast<double>(oracle_tr.size());
  if (r.chain_samples < kMinValidationSamples || r.oracle_samples < kMinValidationSamples) {
    r.status = ValidationStatus::inconclusive;
  } else {
    r.status = r.ks.passes() ? ValidationStatus::pass : ValidationStatus::fail;
  }
  return r;
}

}  // namespace lie_mcmc
