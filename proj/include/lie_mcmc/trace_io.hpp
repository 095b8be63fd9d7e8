#pragma once

#include "lie_mcmc/config.hpp"
#include "lie_mcmc/diagnostics.hpp"
#include "lie_mcmc/sampler.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lie_mcmc {

inline constexpr const char* kTraceHeader = "step,g11,g12,g13,g21,g22,g23,g31,g32,g33,v1,v2,v3,H,accepted";

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One row per step (1-based), 17 significant digits.
inline void write_trace_csv(std::ostream& out, const Trace<SO3>& trace) {
  out << kTraceHeader << '\n';
  std::size_t step = 1;
  for (const auto& r : trace.records) {
    out << step++;
    const auto& g = r.state.g.matrix();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out << ',' << format_double(g(i, j));
    for (int i = 0; i < 3; ++i) out << ',' << format_double(r.state.v.coords()[i]);
    out << ',' << format_double(r.hamiltonian) << ',' << (r.accepted ? 1 : 0) << '\n';
  }
}

inline void write_trace_csv(const std::filesystem::path& path, const Trace<SO3>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_trace_csv(out, trace);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

struct TraceRow {
  std::size_t step = 0;
  PhaseState<SO3> state;
  double hamiltonian = 0.0;
  bool accepted = false;
};

inline std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw TraceFormatError("trace: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw TraceFormatError("trace: unexpected header '" + line + "'");
  std::vector<TraceRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 15) throw TraceFormatError("trace line " + std::to_string(lineno) + ": expected 15 columns");
    try {
      TraceRow r;
      r.step = std::stoull(cells[0]);
      SO3::Matrix g;
      for (int k = 0; k < 9; ++k) g(k / 3, k % 3) = std::stod(cells[1 + k]);
      r.state.g = Rotation(g);
      SO3::Coords v(std::stod(cells[10]), std::stod(cells[11]), std::stod(cells[12]));
      r.state.v = RotationGenerator(v);
      r.hamiltonian = std::stod(cells[13]);
      r.accepted = std::stoi(cells[14]) != 0;
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw TraceFormatError("trace line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

inline std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_trace_csv(in);
}

inline std::vector<Feature> features(const std::vector<TraceRow>& rows) {
  std::vector<Feature> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(features(r.state.g));
  return out;
}

}  // namespace lie_mcmc
