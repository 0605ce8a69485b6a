#pragma once

// CSV field files, gnuplot scripts and JSON helpers. Floats are written with 17 significant
// digits so that files round-trip exactly and identical runs give identical bytes.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoep/connection.hpp"
#include "hoep/ep_residual.hpp"
#include "hoep/errors.hpp"
#include "hoep/solver.hpp"

namespace hoep::io {

using json = nlohmann::ordered_json;

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Non-finite values become null so that the JSON stays valid.
inline json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  return os;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os = open_out(path);
  os << text;
  if (!os) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline std::string coord_header(int n) {
  std::string h;
  for (int mu = 0; mu < n; ++mu) h += (mu ? ",x" : "x") + std::to_string(mu + 1);
  return h;
}

inline void put_coords(std::ostream& os, const Grid& g, int node) {
  const auto x = g.coords(node);
  for (int mu = 0; mu < g.dim(); ++mu) os << (mu ? "," : "") << num(x[mu]);
}

// Header x1..xn,v1..vm; rows in row-major node order.
inline void write_algebra_field(const std::filesystem::path& path, const AlgebraField& f) {
  std::ostringstream os;
  os << coord_header(f.grid.dim());
  for (int a = 0; a < f.m; ++a) os << ",v" << a + 1;
  os << "\n";
  for (int node = 0; node < f.grid.nodes(); ++node) {
    put_coords(os, f.grid, node);
    for (int a = 0; a < f.m; ++a) os << "," << num(f(node, a));
    os << "\n";
  }
  write_text(path, os.str());
}

// Reduced fields use the algebra-field layout with component mu*m + alpha.
inline void write_reduced_field(const std::filesystem::path& path, const ReducedField& s) { write_algebra_field(path, flatten(s)); }

// Header x1..xn,g11..gdd; matrix entries row-major.
inline void write_group_field(const std::filesystem::path& path, const GroupField& f) {
  std::ostringstream os;
  os << coord_header(f.grid.dim());
  for (int i = 0; i < f.d; ++i)
    for (int j = 0; j < f.d; ++j) os << ",g" << i + 1 << j + 1;
  os << "\n";
  for (int node = 0; node < f.grid.nodes(); ++node) {
    put_coords(os, f.grid, node);
    for (int i = 0; i < f.d; ++i)
      for (int j = 0; j < f.d; ++j) os << "," << num(f.g[node](i, j));
    os << "\n";
  }
  write_text(path, os.str());
}

// One row per (node, mu, alpha); mu and alpha are 1-based.
inline void write_current(const std::filesystem::path& path, const CurrentField& c) {
  std::ostringstream os;
  os << coord_header(c.grid.dim()) << ",mu,alpha,J\n";
  for (int node = 0; node < c.grid.nodes(); ++node)
    for (std::size_t mu = 0; mu < c.j.size(); ++mu)
      for (int a = 0; a < c.m; ++a) {
        put_coords(os, c.grid, node);
        os << "," << mu + 1 << "," << a + 1 << "," << num(c.j[mu](node, a)) << "\n";
      }
  write_text(path, os.str());
}

// One row per (node, axis pair); mu < nu, 1-based.
inline void write_curvature(const std::filesystem::path& path, const CurvatureField& c) {
  std::ostringstream os;
  os << coord_header(c.grid.dim()) << ",mu,nu";
  for (int a = 0; a < c.m; ++a) os << ",F" << a + 1;
  os << "\n";
  for (int node = 0; node < c.grid.nodes(); ++node)
    for (std::size_t p = 0; p < c.pairs.size(); ++p) {
      put_coords(os, c.grid, node);
      os << "," << c.pairs[p].first + 1 << "," << c.pairs[p].second + 1;
      for (int a = 0; a < c.m; ++a) os << "," << num(c.f[p](node, a));
      os << "\n";
    }
  write_text(path, os.str());
}

inline void write_trace(const std::filesystem::path& path, const std::vector<TraceRow>& trace) {
  std::ostringstream os;
  os << "iter,action,grad_norm,step\n";
  for (const auto& r : trace) os << r.iter << "," << num(r.action) << "," << num(r.grad_norm) << "," << num(r.step) << "\n";
  write_text(path, os.str());
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline Table read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  Table t;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      fail(ErrorCode::Parse, path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                                 " columns, found " + std::to_string(cells.size()));
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (end == c.c_str() || *end != '\0')
        fail(ErrorCode::Parse, path.string() + ":" + std::to_string(lineno) + ": '" + c + "' is not a number");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) fail(ErrorCode::Parse, path.string() + ": empty file");
  return t;
}

namespace detail {

// Rows must list every node in row-major order with matching coordinates.
inline void check_rows(const Table& t, const Grid& g, int values, const std::string& what) {
  const int n = g.dim();
  if (static_cast<int>(t.header.size()) != n + values)
    fail(ErrorCode::Parse, what + ": expected " + std::to_string(n + values) + " columns, found " + std::to_string(t.header.size()));
  if (static_cast<int>(t.rows.size()) != g.nodes())
    fail(ErrorCode::Parse, what + ": expected " + std::to_string(g.nodes()) + " rows, found " + std::to_string(t.rows.size()));
  for (int node = 0; node < g.nodes(); ++node) {
    const auto x = g.coords(node);
    for (int mu = 0; mu < n; ++mu)
      if (std::abs(t.rows[node][mu] - x[mu]) > 1e-9 * (1.0 + std::abs(x[mu])))
        fail(ErrorCode::Parse, what + ": row " + std::to_string(node + 1) + " has x" + std::to_string(mu + 1) + " = " +
                                   num(t.rows[node][mu]) + " but the grid node is at " + num(x[mu]));
  }
}

}  // namespace detail

inline AlgebraField read_algebra_field(const std::filesystem::path& path, const Grid& g, int m) {
  const Table t = read_csv(path);
  detail::check_rows(t, g, m, path.string());
  AlgebraField f(g, m);
  for (int node = 0; node < g.nodes(); ++node)
    for (int a = 0; a < m; ++a) f(node, a) = t.rows[node][g.dim() + a];
  return f;
}

inline GroupField read_group_field(const std::filesystem::path& path, const Grid& g, int d) {
  const Table t = read_csv(path);
  detail::check_rows(t, g, d * d, path.string());
  GroupField f(g, d);
  for (int node = 0; node < g.nodes(); ++node)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) f.g[node](i, j) = t.rows[node][g.dim() + i * d + j];
  return f;
}

// Gnuplot script for a CSV with columns x1..xn followed by value columns. 1D: one curve per
// value column. 2D and up: colour map over the first two axes. A filter column keeps only
// rows where that column equals filter_value.
inline std::string plot_script(const std::string& csv, int n, int first_value, int last_value, const std::string& title,
                               const std::string& filter_col = "", int filter_value = 0) {
  std::ostringstream os;
  os << "# gnuplot script for " << csv << "\n";
  os << "set datafile separator ','\n";
  os << "set key autotitle columnhead\n";
  os << "set title '" << title << "'\n";
  std::string where;
  if (!filter_col.empty()) where = filter_col + "==" + std::to_string(filter_value) + " ? ";
  if (n == 1) {
    os << "set xlabel 'x1'\n";
    os << "plot for [c=" << first_value << ":" << last_value << "] '" << csv << "' using 1:" << (where.empty() ? "c" : "(" + where + "column(c) : 1/0))")
       << " with linespoints\n";
  } else {
    os << "set xlabel 'x1'\nset ylabel 'x2'\n";
    os << "set view map\nset pm3d at b\n";
    os << "splot for [c=" << first_value << ":" << last_value << "] '" << csv << "' using 1:2:" << (where.empty() ? "c" : "(" + where + "column(c) : 1/0))")
       << " with points palette pointsize 0.5\n";
  }
  os << "pause mouse close\n";
  return os.str();
}

}  // namespace hoep::io
