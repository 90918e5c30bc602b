#pragma once

// Deterministic CSV output: every float is rendered with 17 significant
// digits, so identical runs produce byte-identical files and values
// round-trip through text exactly.

#include <opsplit/core.hpp>

#include <complex>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace opsplit::harness {

inline std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void append_value_columns(double v, std::vector<std::string>& row) {
  row.push_back(g17(v));
}

inline void append_value_columns(const std::complex<double>& v,
                                 std::vector<std::string>& row) {
  row.push_back(g17(v.real()));
  row.push_back(g17(v.imag()));
}

inline void append_header_columns(const std::string& base, double,
                                  std::vector<std::string>& header) {
  header.push_back(base);
}

inline void append_header_columns(const std::string& base,
                                  const std::complex<double>&,
                                  std::vector<std::string>& header) {
  header.push_back(base + "_re");
  header.push_back(base + "_im");
}

inline void write_csv(const std::string& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);  // fixed newlines on any platform
  if (!out) throw UsageError("cannot open '" + path + "' for writing");
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  if (!out) throw UsageError("write to '" + path + "' failed");
}

// One trajectory row per macro time: t, then each state component (complex
// components expand to _re/_im column pairs).
template <class S>
void write_trajectory_csv(const std::string& path, const Trajectory<S>& traj) {
  std::vector<std::string> header{"t"};
  if (!traj.y.empty())
    for (std::size_t i = 0; i < traj.y.front().size(); ++i)
      append_header_columns("y" + std::to_string(i), S(0), header);
  std::vector<std::vector<std::string>> rows;
  rows.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::vector<std::string> row{g17(traj.t[k])};
    for (const S& v : traj.y[k]) append_value_columns(v, row);
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

}  // namespace opsplit::harness
