#pragma once

#include "lie_mcmc/ou.hpp"
#include "lie_mcmc/sampler.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lie_mcmc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DiagnosticsConfig {
  std::vector<std::size_t> checkpoints{10, 25, 50, 100, 250, 500, 750, 1000, 1500, 2000, 2500, 3000, 3500, 4000, 4500, 5000};
  double bandwidth = 1.0;
  std::size_t max_lag = 50;
  std::size_t burn_in = 0;
};

struct ValidateConfig {
  int n_samples = 50000;
  int burn_in = 1000;
  int oracle_samples = 50000;
  std::uint64_t oracle_seed = 0x0a11ce;
};

struct ExperimentConfig {
  ChainConfig chain;
  InitKind init = InitKind::identity;
  std::vector<double> h_grid{0.01, 0.1, 1.0, kInfiniteTime};
  int n_chains = 20;
  std::filesystem::path output_dir = "out";
  DiagnosticsConfig diagnostics;
  ValidateConfig validate;

  void check() const {
    try {
      chain.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("[chain] ") + e.what());
    }
    if (h_grid.empty()) throw ConfigError("[experiment] h_grid must list at least one value");
    for (double h : h_grid) {
      if (!(h >= 0.0)) throw ConfigError("[experiment] h_grid values must be >= 0 or inf");
    }
    if (n_chains < 1) throw ConfigError("[experiment] n_chains must be at least 1");
    const auto& cp = diagnostics.checkpoints;
    if (cp.empty()) throw ConfigError("[diagnostics] checkpoints must not be empty");
    if (!std::is_sorted(cp.begin(), cp.end()) || std::adjacent_find(cp.begin(), cp.end()) != cp.end()) {
      throw ConfigError("[diagnostics] checkpoints must be strictly ascending");
    }
    if (cp.front() < 1) throw ConfigError("[diagnostics] checkpoints must be positive");
    if (!(diagnostics.bandwidth > 0.0)) throw ConfigError("[diagnostics] bandwidth must be positive");
    if (validate.n_samples < 1 || validate.burn_in < 0 || validate.oracle_samples < 1) {
      throw ConfigError("[validate] sample counts must be positive");
    }
  }
};

// "%.17g", with "inf" for the infinite refresh time.
inline std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Column label for a grid point: h_<value>, or "hmc" for h = inf.
inline std::string h_label(double h) {
  if (std::isinf(h)) return "hmc";
  char buf[32];
  std::snprintf(buf, sizeof buf, "h_%g", h);
  return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "inf" || s == "Inf" || s == "INF") return kInfiniteTime;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': not a number: '" + s + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos, 0);
    if (pos != s.size() || s.starts_with('-')) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': not a non-negative integer: '" + s + "'");
  }
}

inline int parse_int(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': not an integer: '" + s + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("'" + key + "': not a boolean: '" + s + "'");
}

template <class F>
auto parse_list(const std::string& key, const std::string& raw, F parse_one) {
  std::vector<decltype(parse_one(key, raw))> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_one(key, item));
  }
  return out;
}

}  // namespace detail

// INI-style text: [chain], [experiment], [diagnostics], [validate] sections
// of key = value lines. Unknown sections or keys are errors.
inline ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }

  using Setter = void (*)(ExperimentConfig&, const std::string&, const std::string&);
  static const std::map<std::string, std::map<std::string, Setter>> schema = {
      {"chain",
       {
           {"alpha", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.chain.alpha = detail::parse_double(k, v); }},
           {"beta", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.chain.beta = detail::parse_double(k, v); }},
           {"epsilon", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.chain.epsilon = detail::parse_double(k, v); }},
           {"h", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.chain.h = detail::parse_double(k, v); }},
           {"step_size", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.chain.leapfrog.step_size = detail::parse_double(k, v); }},
           {"n_steps", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.chain.leapfrog.n_steps = detail::parse_int(k, v); }},
           {"n_samples", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.chain.n_samples = detail::parse_int(k, v); }},
           {"seed", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.chain.seed = detail::parse_u64(k, v); }},
           {"freeze_diffusion", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.chain.freeze_diffusion = detail::parse_bool(k, v); }},
           {"strict_diffusion", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.chain.strict_diffusion = detail::parse_bool(k, v); }},
           {"mh_energy_scale", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.chain.mh_energy_scale = detail::parse_double(k, v); }},
           {"init", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              const std::string s = detail::trim(v);
              if (s == "identity") c.init = InitKind::identity;
              else if (s == "haar") c.init = InitKind::haar;
              else throw ConfigError("'" + k + "': expected identity or haar, got '" + s + "'");
            }},
       }},
      {"experiment",
       {
           {"h_grid", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.h_grid = detail::parse_list(k, v, detail::parse_double); }},
           {"n_chains", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.n_chains = detail::parse_int(k, v); }},
           {"output_dir", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output_dir = detail::trim(v); }},
       }},
      {"diagnostics",
       {
           {"checkpoints", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              c.diagnostics.checkpoints.clear();
              for (auto x : detail::parse_list(k, v, detail::parse_u64)) c.diagnostics.checkpoints.push_back(x);
            }},
           {"bandwidth", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.diagnostics.bandwidth = detail::parse_double(k, v); }},
           {"max_lag", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.diagnostics.max_lag = detail::parse_u64(k, v); }},
           {"burn_in", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.diagnostics.burn_in = detail::parse_u64(k, v); }},
       }},
      {"validate",
       {
           {"n_samples", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.validate.n_samples = detail::parse_int(k, v); }},
           {"burn_in", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.validate.burn_in = detail::parse_int(k, v); }},
           {"oracle_samples", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.validate.oracle_samples = detail::parse_int(k, v); }},
           {"oracle_seed", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.validate.oracle_seed = detail::parse_u64(k, v); }},
       }},
  };

  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    const auto sec = schema.find(section);
    if (sec == schema.end()) {
      if (!body.data().empty()) throw ConfigError("key '" + section + "' outside of any section");
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end()) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      setter->second(cfg, key, value.data());
    }
  }
  cfg.check();
  return cfg;
}

// Canonical text form; parse_config(to_ini(c)) reproduces c.
inline std::string to_ini(const ExperimentConfig& c) {
  auto join = [](const auto& xs, auto fmt) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + fmt(xs[i]);
    return s;
  };
  std::ostringstream o;
  o << "[chain]\n"
    << "alpha = " << format_double(c.chain.alpha) << "\n"
    << "beta = " << format_double(c.chain.beta) << "\n"
    << "epsilon = " << format_double(c.chain.epsilon) << "\n"
    << "h = " << format_double(c.chain.h) << "\n"
    << "step_size = " << format_double(c.chain.leapfrog.step_size) << "\n"
    << "n_steps = " << c.chain.leapfrog.n_steps << "\n"
    << "n_samples = " << c.chain.n_samples << "\n"
    << "seed = " << c.chain.seed << "\n"
    << "freeze_diffusion = " << (c.chain.freeze_diffusion ? "true" : "false") << "\n"
    << "strict_diffusion = " << (c.chain.strict_diffusion ? "true" : "false") << "\n"
    << "mh_energy_scale = " << format_double(c.chain.mh_energy_scale) << "\n"
    << "init = " << (c.init == InitKind::haar ? "haar" : "identity") << "\n\n"
    << "[experiment]\n"
    << "h_grid = " << join(c.h_grid, format_double) << "\n"
    << "n_chains = " << c.n_chains << "\n"
    << "output_dir = " << c.output_dir.string() << "\n\n"
    << "[diagnostics]\n"
    << "checkpoints = " << join(c.diagnostics.checkpoints, [](std::size_t x) { return std::to_string(x); }) << "\n"
    << "bandwidth = " << format_double(c.diagnostics.bandwidth) << "\n"
    << "max_lag = " << c.diagnostics.max_lag << "\n"
    << "burn_in = " << c.diagnostics.burn_in << "\n\n"
    << "[validate]\n"
    << "n_samples = " << c.validate.n_samples << "\n"
    << "burn_in = " << c.validate.burn_in << "\n"
    << "oracle_samples = " << c.validate.oracle_samples << "\n"
    << "oracle_seed = " << c.validate.oracle_seed << "\n";
  return o.str();
}

}  // namespace lie_mcmc
