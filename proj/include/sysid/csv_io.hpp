#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sysid/system.hpp"

namespace sysid {

// 17 significant digits: enough for doubles to round-trip exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

inline double parse_double_field(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) {
      throw std::invalid_argument("trailing characters");
    }
    return v;
  } catch (...) {
    throw InvalidInputError("CSV: bad numeric field \"" + s + "\" in " + context);
  }
}

// Trajectory files: header t,x_0..x_{n-1},xhat_0..xhat_{n-1},u_0..u_{m-1}
// (plus w_*/eta_* when noise was captured and requested), one row per
// t = 0..T. Inputs and process noise are undefined at t = T and left empty.
inline void write_trajectory_csv(const Trajectory& traj, const std::string& path,
                                 bool emit_noise = false) {
  if (emit_noise && !traj.has_noise()) {
    throw InvalidInputError("write_trajectory_csv: noise not captured on this trajectory");
  }
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  out << "t";
  for (Eigen::Index i = 0; i < traj.n; ++i) out << ",x_" << i;
  for (Eigen::Index i = 0; i < traj.n; ++i) out << ",xhat_" << i;
  for (Eigen::Index i = 0; i < traj.m; ++i) out << ",u_" << i;
  if (emit_noise) {
    for (Eigen::Index i = 0; i < traj.n; ++i) out << ",w_" << i;
    for (Eigen::Index i = 0; i < traj.n; ++i) out << ",eta_" << i;
  }
  out << "\n";
  const long T = traj.T();
  for (long t = 0; t <= T; ++t) {
    const std::size_t ti = static_cast<std::size_t>(t);
    out << t;
    for (Eigen::Index i = 0; i < traj.n; ++i) {
      out << "," << format_double(traj.states[ti](i));
    }
    for (Eigen::Index i = 0; i < traj.n; ++i) {
      out << "," << format_double(traj.observations[ti](i));
    }
    for (Eigen::Index i = 0; i < traj.m; ++i) {
      out << ",";
      if (t < T) out << format_double(traj.inputs[ti](i));
    }
    if (emit_noise) {
      for (Eigen::Index i = 0; i < traj.n; ++i) {
        out << ",";
        if (t < T) out << format_double((*traj.process_noise)[ti](i));
      }
      for (Eigen::Index i = 0; i < traj.n; ++i) {
        out << "," << format_double((*traj.observation_noise)[ti](i));
      }
    }
    out << "\n";
  }
  if (!out) {
    throw IoError("write failure on " + path);
  }
}

inline Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw InvalidInputError("trajectory CSV: empty file " + path);
  }
  const std::vector<std::string> header = split_csv_line(line);
  Eigen::Index n = 0, m = 0;
  bool has_noise = false;
  if (header.empty() || header[0] != "t") {
    throw InvalidInputError("trajectory CSV: first column must be t");
  }
  for (const std::string& h : header) {
    if (h.rfind("x_", 0) == 0) ++n;
    if (h.rfind("u_", 0) == 0) ++m;
    if (h.rfind("w_", 0) == 0) has_noise = true;
  }
  if (n == 0) {
    throw InvalidInputError("trajectory CSV: no x_* columns in " + path);
  }
  const std::size_t expected = 1 + 2 * static_cast<std::size_t>(n) +
                               static_cast<std::size_t>(m) +
                               (has_noise ? 2 * static_cast<std::size_t>(n) : 0);
  if (header.size() != expected) {
    throw InvalidInputError("trajectory CSV: unexpected header layout in " + path);
  }

  Trajectory traj;
  traj.n = n;
  traj.m = m;
  if (has_noise) {
    traj.process_noise.emplace();
    traj.observation_noise.emplace();
  }
  long expected_t = 0;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != expected) {
      throw InvalidInputError("trajectory CSV: wrong field count at row " +
                              std::to_string(expected_t));
    }
    if (std::stol(f[0]) != expected_t) {
      throw InvalidInputError("trajectory CSV: non-contiguous t at row " +
                              std::to_string(expected_t));
    }
    ++expected_t;
    rows.push_back(std::move(f));
  }
  if (rows.size() < 2) {
    throw InvalidInputError("trajectory CSV: need at least two rows (T >= 1)");
  }
  const long T = static_cast<long>(rows.size()) - 1;
  for (long t = 0; t <= T; ++t) {
    const auto& f = rows[static_cast<std::size_t>(t)];
    std::size_t col = 1;
    Vector x(n), xh(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = parse_double_field(f[col++], path);
    for (Eigen::Index i = 0; i < n; ++i) xh(i) = parse_double_field(f[col++], path);
    traj.states.push_back(std::move(x));
    traj.observations.push_back(std::move(xh));
    if (m > 0) {
      if (t < T) {
        Vector u(m);
        for (Eigen::Index i = 0; i < m; ++i) u(i) = parse_double_field(f[col++], path);
        traj.inputs.push_back(std::move(u));
      } else {
        col += static_cast<std::size_t>(m);
      }
    }
    if (has_noise) {
      if (t < T) {
        Vector w(n);
        for (Eigen::Index i = 0; i < n; ++i) w(i) = parse_double_field(f[col++], path);
        traj.process_noise->push_back(std::move(w));
      } else {
        col += static_cast<std::size_t>(n);
      }
      Vector eta(n);
      for (Eigen::Index i = 0; i < n; ++i) eta(i) = parse_double_field(f[col++], path);
      traj.observation_noise->push_back(std::move(eta));
    }
  }
  return traj;
}

}  // namespace sysid
