#pragma once

// Run configuration: JSON schema, defaults, validation and the field sources it names.
// load_config returns the validated config together with its fully defaulted JSON echo.

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoep/connection.hpp"
#include "hoep/errors.hpp"
#include "hoep/io.hpp"
#include "hoep/lie_core.hpp"
#include "hoep/solver.hpp"

namespace hoep {

using json = nlohmann::ordered_json;

// A group field on the run grid: a CSV file or an analytic family.
struct FieldSource {
  std::string family;  // file | exp_poly | exp_product | constant | random_exp_poly
  std::string file;    // resolved against the config directory
  json params;
};

// A reduced field: reduce(group field input), a CSV file, or constant per axis.
struct SigmaSource {
  std::string family;  // reduce | file | constant
  std::string file;
  std::vector<std::vector<double>> value;  // constant: one m-vector per axis
};

enum class ResidualKind { Spline, Biinvariant, General };

struct RunConfig {
  json effective;  // full config with defaults, echoed into every manifest
  std::filesystem::path base_dir;

  LieAlgebra algebra;
  Grid grid;
  int k = 2;
  std::vector<double> kappa, tau;
  FieldSource boundary;
  FieldSource group_field;
  SigmaSource sigma;
  Vector base;  // algebra coordinates; base value exp(base)
  ResidualKind residual = ResidualKind::Spline;
  int flatness_jet_order = 0;
  double flatness_tolerance = -1.0;  // negative: mesh default
  SolverOptions solver;
  std::string out_dir = "out";
};

namespace detail {

[[noreturn]] inline void bad(const std::string& field, const std::string& what) {
  fail(ErrorCode::Validation, "field '" + field + "': " + what);
}

inline void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) {
      std::string list;
      for (const auto& k : allowed) list += (list.empty() ? "" : ", ") + k;
      bad(where.empty() ? it.key() : where + "." + it.key(), "unknown key (allowed: " + list + ")");
    }
}

inline double get_double(const json& j, const std::string& field) {
  if (!j.is_number()) bad(field, "expected a number");
  return j.get<double>();
}

inline int get_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) bad(field, "expected an integer");
  return j.get<int>();
}

inline std::vector<double> get_vec(const json& j, const std::string& field) {
  if (!j.is_array()) bad(field, "expected an array of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(get_double(j[i], field + "[" + std::to_string(i) + "]"));
  return v;
}

// Scalars broadcast to n entries.
inline std::vector<double> get_per_axis(const json& j, const std::string& field, int n) {
  if (j.is_number()) return std::vector<double>(n, j.get<double>());
  std::vector<double> v = get_vec(j, field);
  if (static_cast<int>(v.size()) != n) bad(field, "expected " + std::to_string(n) + " entries, one per base axis");
  return v;
}

inline Eigen::MatrixXd get_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) bad(field, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Eigen::MatrixXd mat(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::vector<double> row = get_vec(j[r], field + "[" + std::to_string(r) + "]");
    if (row.size() != cols) bad(field, "rows have different lengths");
    for (std::size_t c = 0; c < cols; ++c) mat(r, c) = row[c];
  }
  return mat;
}

inline Vector get_algebra_vector(const json& j, const std::string& field, int m) {
  const std::vector<double> v = get_vec(j, field);
  if (static_cast<int>(v.size()) != m) bad(field, "expected " + std::to_string(m) + " algebra coordinates");
  Vector out(m);
  for (int a = 0; a < m; ++a) out[a] = v[a];
  return out;
}

inline LieAlgebra parse_group(const json& g, const json& metric) {
  LieAlgebraSpec spec;
  if (g.is_string()) {
    spec = named_algebra_spec(g.get<std::string>());
  } else if (g.is_object()) {
    only_keys(g, "group", {"name", "basis", "structure_constants"});
    const std::string name = g.contains("name") && g["name"].is_string() ? g["name"].get<std::string>() : "inline";
    if (g.contains("basis")) {
      if (!g["basis"].is_array() || g["basis"].empty()) bad("group.basis", "expected a non-empty array of square matrices");
      std::vector<Eigen::MatrixXd> basis;
      for (std::size_t i = 0; i < g["basis"].size(); ++i) {
        const Eigen::MatrixXd b = get_matrix(g["basis"][i], "group.basis[" + std::to_string(i) + "]");
        if (b.rows() != b.cols() || b.rows() > kMaxDim) bad("group.basis", "matrices must be square and at most " + std::to_string(kMaxDim) + " wide");
        basis.push_back(b);
      }
      spec = spec_from_basis(name, std::move(basis));
    } else if (g.contains("structure_constants")) {
      const std::vector<double> c = get_vec(g["structure_constants"], "group.structure_constants");
      int m = 1;
      while (m * m * m < static_cast<int>(c.size())) ++m;
      if (m * m * m != static_cast<int>(c.size())) bad("group.structure_constants", "length must be a cube m^3");
      spec.name = name;
      spec.dim = m;
      spec.struct_consts = c;
    } else {
      bad("group", "inline groups need 'basis' or 'structure_constants'");
    }
  } else {
    bad("group", "expected a group key or an inline object");
  }
  if (!metric.is_null()) spec.metric = get_matrix(metric, "metric");
  return LieAlgebra::make(std::move(spec));
}

inline FieldSource parse_field_source(const json& j, const std::string& field, int n, int m) {
  if (!j.is_object()) bad(field, "expected an object");
  FieldSource s;
  if (!j.contains("family") || !j["family"].is_string()) bad(field + ".family", "expected a family name");
  s.family = j["family"].get<std::string>();
  s.params = j;
  if (s.family == "file") {
    only_keys(j, field, {"type", "family", "file"});
    if (!j.contains("file") || !j["file"].is_string()) bad(field + ".file", "expected a path");
    s.file = j["file"].get<std::string>();
  } else if (s.family == "exp_poly") {
    only_keys(j, field, {"type", "family", "terms"});
    if (!j.contains("terms") || !j["terms"].is_array()) bad(field + ".terms", "expected an array of {power, value}");
    for (std::size_t t = 0; t < j["terms"].size(); ++t) {
      const json& term = j["terms"][t];
      const std::string f = field + ".terms[" + std::to_string(t) + "]";
      if (!term.is_object() || !term.contains("power") || !term.contains("value")) bad(f, "expected {power, value}");
      only_keys(term, f, {"power", "value"});
      const std::vector<double> p = get_vec(term["power"], f + ".power");
      if (static_cast<int>(p.size()) != n) bad(f + ".power", "expected " + std::to_string(n) + " exponents");
      for (double e : p)
        if (e < 0 || e != std::floor(e)) bad(f + ".power", "exponents must be non-negative integers");
      get_algebra_vector(term["value"], f + ".value", m);
    }
  } else if (s.family == "exp_product") {
    only_keys(j, field, {"type", "family", "generators"});
    if (!j.contains("generators") || !j["generators"].is_array() || static_cast<int>(j["generators"].size()) != n)
      bad(field + ".generators", "expected one algebra vector per base axis");
    for (int mu = 0; mu < n; ++mu) get_algebra_vector(j["generators"][mu], field + ".generators[" + std::to_string(mu) + "]", m);
  } else if (s.family == "constant") {
    only_keys(j, field, {"type", "family", "value"});
    if (!j.contains("value")) bad(field + ".value", "missing");
    get_algebra_vector(j["value"], field + ".value", m);
  } else if (s.family == "random_exp_poly") {
    only_keys(j, field, {"type", "family", "seed", "degree", "max_norm"});
    s.params["seed"] = j.contains("seed") ? get_int(j["seed"], field + ".seed") : 1;
    s.params["degree"] = j.contains("degree") ? get_int(j["degree"], field + ".degree") : 3;
    s.params["max_norm"] = j.contains("max_norm") ? get_double(j["max_norm"], field + ".max_norm") : 0.5;
    if (s.params["degree"].get<int>() < 0) bad(field + ".degree", "must be >= 0");
    if (!(s.params["max_norm"].get<double>() >= 0)) bad(field + ".max_norm", "must be >= 0");
  } else {
    bad(field + ".family", "unknown family '" + s.family + "' (known: constant, exp_poly, exp_product, file, random_exp_poly)");
  }
  return s;
}

inline SolverOptions parse_solver(const json& j, json& echo) {
  SolverOptions o;
  if (!j.is_null()) {
    if (!j.is_object()) bad("solver", "expected an object");
    only_keys(j, "solver", {"max_iters", "grad_tol", "method", "step_rule", "step", "armijo", "backtrack", "min_step", "fd_eps",
                            "fd_points", "hessian_eps", "seed"});
    if (j.contains("max_iters")) o.max_iters = get_int(j["max_iters"], "solver.max_iters");
    if (j.contains("grad_tol")) o.grad_tol = get_double(j["grad_tol"], "solver.grad_tol");
    if (j.contains("method")) {
      const std::string mth = j["method"].is_string() ? j["method"].get<std::string>() : "";
      if (mth == "newton") o.method = SolverMethod::Newton;
      else if (mth == "gradient") o.method = SolverMethod::Gradient;
      else bad("solver.method", "expected 'newton' or 'gradient'");
    }
    if (j.contains("step_rule")) {
      const std::string r = j["step_rule"].is_string() ? j["step_rule"].get<std::string>() : "";
      if (r == "armijo") o.step_rule = StepRule::Armijo;
      else if (r == "fixed") o.step_rule = StepRule::Fixed;
      else bad("solver.step_rule", "expected 'armijo' or 'fixed'");
    }
    if (j.contains("step")) o.step = get_double(j["step"], "solver.step");
    if (j.contains("armijo")) o.armijo = get_double(j["armijo"], "solver.armijo");
    if (j.contains("backtrack")) o.backtrack = get_double(j["backtrack"], "solver.backtrack");
    if (j.contains("min_step")) o.min_step = get_double(j["min_step"], "solver.min_step");
    if (j.contains("fd_eps")) o.fd_eps = get_double(j["fd_eps"], "solver.fd_eps");
    if (j.contains("fd_points")) o.fd_points = get_int(j["fd_points"], "solver.fd_points");
    if (j.contains("hessian_eps")) o.hessian_eps = get_double(j["hessian_eps"], "solver.hessian_eps");
    if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned()) bad("solver.seed", "expected a non-negative integer");
      o.seed = j["seed"].get<std::uint64_t>();
    }
  }
  o.validate();
  echo = {{"max_iters", o.max_iters},
          {"grad_tol", o.grad_tol},
          {"method", o.method == SolverMethod::Newton ? "newton" : "gradient"},
          {"step_rule", o.step_rule == StepRule::Armijo ? "armijo" : "fixed"},
          {"step", o.step},
          {"armijo", o.armijo},
          {"backtrack", o.backtrack},
          {"min_step", o.min_step},
          {"fd_eps", o.fd_eps},
          {"fd_points", o.fd_points},
          {"hessian_eps", o.hessian_eps},
          {"seed", o.seed}};
  return o;
}

}  // namespace detail

// Validates `j` against the schema documented in the README; relative file paths resolve
// against base_dir.
inline RunConfig parse_config(const json& j, const std::filesystem::path& base_dir = ".") {
  using namespace detail;
  if (!j.is_object()) fail(ErrorCode::Parse, "config root must be a JSON object");
  only_keys(j, "", {"group", "metric", "grid", "order_k", "spline", "boundary", "input", "reconstruct", "residual", "flatness", "solver",
                    "output"});
  RunConfig c;
  c.base_dir = base_dir;
  json& e = c.effective;

  if (!j.contains("group")) bad("group", "missing");
  c.algebra = parse_group(j["group"], j.contains("metric") ? j["metric"] : json());
  const int m = c.algebra.dim();
  e["group"] = j["group"];
  {
    json mt = json::array();
    for (int r = 0; r < m; ++r) {
      json row = json::array();
      for (int col = 0; col < m; ++col) row.push_back(c.algebra.metric()(r, col));
      mt.push_back(row);
    }
    e["metric"] = mt;
  }

  if (!j.contains("grid") || !j["grid"].is_object()) bad("grid", "expected an object with size and extent");
  const json& g = j["grid"];
  only_keys(g, "grid", {"dims", "size", "extent"});
  if (!g.contains("size")) bad("grid.size", "missing");
  std::vector<int> size;
  if (g["size"].is_number_integer()) {
    size.push_back(g["size"].get<int>());
  } else {
    for (double s : get_vec(g["size"], "grid.size")) {
      if (s != std::floor(s)) bad("grid.size", "expected integers");
      size.push_back(static_cast<int>(s));
    }
  }
  const int n = g.contains("dims") ? get_int(g["dims"], "grid.dims") : static_cast<int>(size.size());
  if (n < 1 || n > kMaxBase) bad("grid.dims", "must lie in [1," + std::to_string(kMaxBase) + "]");
  if (size.size() == 1 && n > 1) size.assign(n, size[0]);
  if (static_cast<int>(size.size()) != n) bad("grid.size", "expected " + std::to_string(n) + " entries");
  std::vector<double> lo(n, 0.0), hi(n, 1.0);
  if (g.contains("extent")) {
    const json& ex = g["extent"];
    if (!ex.is_array()) bad("grid.extent", "expected [a, b] or one [a, b] per axis");
    if (ex.size() == 2 && ex[0].is_number()) {
      lo.assign(n, get_double(ex[0], "grid.extent[0]"));
      hi.assign(n, get_double(ex[1], "grid.extent[1]"));
    } else {
      if (static_cast<int>(ex.size()) != n) bad("grid.extent", "expected one [a, b] per axis");
      for (int mu = 0; mu < n; ++mu) {
        const std::vector<double> ab = get_vec(ex[mu], "grid.extent[" + std::to_string(mu) + "]");
        if (ab.size() != 2) bad("grid.extent", "each axis needs [a, b]");
        lo[mu] = ab[0];
        hi[mu] = ab[1];
      }
    }
  }
  c.grid = Grid(lo, hi, size);
  {
    json ext = json::array();
    for (int mu = 0; mu < n; ++mu) ext.push_back({lo[mu], hi[mu]});
    e["grid"] = {{"dims", n}, {"size", size}, {"extent", ext}};
  }

  c.k = j.contains("order_k") ? get_int(j["order_k"], "order_k") : 2;
  if (c.k < 1) bad("order_k", "must be >= 1");
  c.grid.require_resolution(c.k);
  e["order_k"] = c.k;

  const json sp = j.contains("spline") ? j["spline"] : json::object();
  if (!sp.is_object()) bad("spline", "expected an object");
  only_keys(sp, "spline", {"kappa", "tau"});
  c.kappa = sp.contains("kappa") ? get_per_axis(sp["kappa"], "spline.kappa", n) : std::vector<double>(n, 1.0);
  c.tau = sp.contains("tau") ? get_per_axis(sp["tau"], "spline.tau", n) : std::vector<double>(n, 0.0);
  e["spline"] = {{"kappa", c.kappa}, {"tau", c.tau}};

  if (j.contains("boundary")) {
    const json& b = j["boundary"];
    if (!b.is_object()) bad("boundary", "expected an object");
    if (b.contains("type") && b["type"] != "clamped") bad("boundary.type", "only 'clamped' is supported");
    c.boundary = parse_field_source(b, "boundary", n, m);
    e["boundary"] = c.boundary.params;
    e["boundary"]["type"] = "clamped";
  } else {
    c.boundary = {"constant", "", {{"family", "constant"}, {"value", std::vector<double>(m, 0.0)}}};
    e["boundary"] = {{"type", "clamped"}, {"family", "constant"}, {"value", std::vector<double>(m, 0.0)}};
  }

  const json in = j.contains("input") ? j["input"] : json::object();
  if (!in.is_object()) bad("input", "expected an object");
  only_keys(in, "input", {"group_field", "sigma"});
  if (in.contains("group_field")) {
    c.group_field = parse_field_source(in["group_field"], "input.group_field", n, m);
    e["input"]["group_field"] = c.group_field.params;
  } else {
    // Defaults to the boundary source; echoed in full so the manifest reparses.
    c.group_field = c.boundary;
    e["input"]["group_field"] = c.boundary.params;
  }
  if (in.contains("sigma")) {
    const json& s = in["sigma"];
    if (!s.is_object() || !s.contains("family") || !s["family"].is_string()) bad("input.sigma.family", "expected a family name");
    c.sigma.family = s["family"].get<std::string>();
    if (c.sigma.family == "reduce") {
      only_keys(s, "input.sigma", {"family"});
    } else if (c.sigma.family == "file") {
      only_keys(s, "input.sigma", {"family", "file"});
      if (!s.contains("file") || !s["file"].is_string()) bad("input.sigma.file", "expected a path");
      c.sigma.file = s["file"].get<std::string>();
    } else if (c.sigma.family == "constant") {
      only_keys(s, "input.sigma", {"family", "value"});
      if (!s.contains("value") || !s["value"].is_array() || static_cast<int>(s["value"].size()) != n)
        bad("input.sigma.value", "expected one algebra vector per base axis");
      for (int mu = 0; mu < n; ++mu) {
        const Vector v = get_algebra_vector(s["value"][mu], "input.sigma.value[" + std::to_string(mu) + "]", m);
        c.sigma.value.emplace_back(v.data(), v.data() + m);
      }
    } else {
      bad("input.sigma.family", "unknown family '" + c.sigma.family + "' (known: constant, file, reduce)");
    }
    e["input"]["sigma"] = s;
  } else {
    c.sigma.family = "reduce";
    e["input"]["sigma"] = {{"family", "reduce"}};
  }

  const json rc = j.contains("reconstruct") ? j["reconstruct"] : json::object();
  if (!rc.is_object()) bad("reconstruct", "expected an object");
  only_keys(rc, "reconstruct", {"base"});
  c.base = rc.contains("base") ? get_algebra_vector(rc["base"], "reconstruct.base", m) : Vector(Vector::Zero(m));
  e["reconstruct"] = {{"base", std::vector<double>(c.base.data(), c.base.data() + m)}};

  const json rs = j.contains("residual") ? j["residual"] : json::object();
  if (!rs.is_object()) bad("residual", "expected an object");
  only_keys(rs, "residual", {"kind"});
  const std::string kind = rs.contains("kind") && rs["kind"].is_string() ? rs["kind"].get<std::string>() : "spline";
  if (kind == "spline") c.residual = ResidualKind::Spline;
  else if (kind == "biinvariant") c.residual = ResidualKind::Biinvariant;
  else if (kind == "general") c.residual = ResidualKind::General;
  else bad("residual.kind", "expected 'spline', 'biinvariant' or 'general'");
  if (c.residual != ResidualKind::General && c.k != 2) bad("residual.kind", "closed-form residuals need order_k = 2");
  e["residual"] = {{"kind", kind}};

  const json fl = j.contains("flatness") ? j["flatness"] : json::object();
  if (!fl.is_object()) bad("flatness", "expected an object");
  only_keys(fl, "flatness", {"jet_order", "tolerance"});
  c.flatness_jet_order = fl.contains("jet_order") ? get_int(fl["jet_order"], "flatness.jet_order") : 0;
  if (c.flatness_jet_order < 0) bad("flatness.jet_order", "must be >= 0");
  c.flatness_tolerance = fl.contains("tolerance") ? get_double(fl["tolerance"], "flatness.tolerance") : -1.0;
  e["flatness"] = {{"jet_order", c.flatness_jet_order},
                   {"tolerance", c.flatness_tolerance < 0 ? json(flatness_tolerance(c.grid)) : json(c.flatness_tolerance)}};

  json solver_echo;
  c.solver = parse_solver(j.contains("solver") ? j["solver"] : json(), solver_echo);
  e["solver"] = solver_echo;

  const json out = j.contains("output") ? j["output"] : json::object();
  if (!out.is_object()) bad("output", "expected an object");
  only_keys(out, "output", {"dir"});
  if (out.contains("dir")) {
    if (!out["dir"].is_string()) bad("output.dir", "expected a path");
    c.out_dir = out["dir"].get<std::string>();
  }
  e["output"] = {{"dir", c.out_dir}};
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::Io, "cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(is, nullptr, true, true);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, path.string() + ": " + e.what());
  }
  return parse_config(j, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

// Group field on the run grid from a source.
inline GroupField make_group_field(const RunConfig& c, const FieldSource& s) {
  const LieAlgebra& alg = c.algebra;
  const Grid& g = c.grid;
  const int n = g.dim(), m = alg.dim();
  if (s.family == "file") {
    std::filesystem::path p = s.file;
    if (p.is_relative()) p = c.base_dir / p;
    return io::read_group_field(p, g, alg.matrix_dim());
  }
  if (s.family == "constant") {
    const GroupElement v = alg.exp(detail::get_algebra_vector(s.params["value"], "value", m));
    return sample_group(alg, g, [&](const double*) { return v; });
  }
  if (s.family == "exp_product") {
    std::vector<Vector> gen;
    for (int mu = 0; mu < n; ++mu) gen.push_back(detail::get_algebra_vector(s.params["generators"][mu], "generators", m));
    return sample_group(alg, g, [&](const double* x) {
      GroupElement r = alg.identity();
      for (int mu = 0; mu < n; ++mu) r = (r * alg.exp(Vector(x[mu] * gen[mu]))).eval();
      return r;
    });
  }
  // Polynomial exponent u(x) = sum_t value_t x^power_t.
  std::vector<std::pair<std::vector<int>, Vector>> terms;
  if (s.family == "exp_poly") {
    for (const auto& t : s.params["terms"]) {
      std::vector<int> p;
      for (const auto& e : t["power"]) p.push_back(static_cast<int>(e.get<double>()));
      terms.emplace_back(p, detail::get_algebra_vector(t["value"], "value", m));
    }
  } else if (s.family == "random_exp_poly") {
    // Each coefficient has norm at most max_norm; coordinates are scaled to [0, 1] per axis.
    std::mt19937_64 rng(s.params["seed"].get<std::uint64_t>());
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int degree = s.params["degree"].get<int>();
    const double cap = s.params["max_norm"].get<double>();
    const MultiIndexSet set(n, degree);
    for (int p = 0; p < set.size(); ++p) {
      Vector v(m);
      for (int a = 0; a < m; ++a) v[a] = u(rng);
      const double r = std::abs(u(rng));
      v *= cap * r / std::max(v.norm(), 1e-300);
      std::vector<int> pw(n);
      for (int mu = 0; mu < n; ++mu) pw[mu] = set[p][mu];
      terms.emplace_back(pw, v);
    }
  } else {
    fail(ErrorCode::Validation, "unknown field family '" + s.family + "'");
  }
  const bool unit = s.family == "random_exp_poly";
  return sample_group(alg, g, [&](const double* x) {
    Vector v = Vector::Zero(m);
    for (const auto& [p, val] : terms) {
      double w = 1.0;
      for (int mu = 0; mu < n; ++mu) {
        const double t = unit ? (x[mu] - g.lo(mu)) / (g.hi(mu) - g.lo(mu)) : x[mu];
        w *= std::pow(t, p[mu]);
      }
      v += w * val;
    }
    return alg.exp(v);
  });
}

inline ReducedField make_sigma(const RunConfig& c) {
  if (c.sigma.family == "reduce") return reduce(c.algebra, make_group_field(c, c.group_field));
  const int m = c.algebra.dim();
  if (c.sigma.family == "file") {
    std::filesystem::path p = c.sigma.file;
    if (p.is_relative()) p = c.base_dir / p;
    return unflatten(io::read_algebra_field(p, c.grid, c.grid.dim() * m), m);
  }
  ReducedField s(c.grid, m);
  for (int mu = 0; mu < c.grid.dim(); ++mu)
    for (int node = 0; node < c.grid.nodes(); ++node)
      for (int a = 0; a < m; ++a) s.s[mu](node, a) = c.sigma.value[mu][a];
  return s;
}

}  // namespace hoep
