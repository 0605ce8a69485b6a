#pragma once

// Subcommand pipelines behind the command-line tool. Each writes its artifacts into an output
// directory, returns a JSON report and an exit status: 0 success, 2 diagnostic failure.
// Errors other than diagnostic ones propagate as exceptions.

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "hoep/config.hpp"
#include "hoep/el_check.hpp"
#include "hoep/ep_residual.hpp"
#include "hoep/io.hpp"
#include "hoep/noether.hpp"
#include "hoep/parallel.hpp"
#include "hoep/reconstruction.hpp"
#include "hoep/solver.hpp"

namespace hoep {

inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"solve", "residual", "curvature", "reconstruct", "noether", "el-check"};
  return names;
}

// Failures of a numerical certificate, as opposed to bad input or I/O.
inline bool is_diagnostic(ErrorCode c) {
  return c == ErrorCode::NotFlat || c == ErrorCode::LineSearchStalled || c == ErrorCode::NotBiInvariant;
}

struct CommandResult {
  int exit_code = 0;
  json report;
  std::vector<std::string> artifacts;
};

namespace detail {

inline json coords_json(const Grid& g, int node) {
  json x = json::array();
  if (node < 0) return x;
  const auto c = g.coords(node);
  for (int mu = 0; mu < g.dim(); ++mu) x.push_back(c[mu]);
  return x;
}

inline json summary_json(const AlgebraField& f, int margin) {
  const DefectSummary s = summarize(f, margin);
  return {{"sup", io::jnum(s.sup)}, {"l2", io::jnum(s.l2)}, {"margin", s.margin}};
}

inline json flatness_json(const FlatnessReport& r, const Grid& g) {
  json out = {{"max_defect", io::jnum(r.max_defect)}, {"tolerance", io::jnum(r.tolerance)}, {"jet_order", r.jet_order}, {"pass", r.pass}};
  // A base of dimension one has no axis pair and hence no argmax.
  if (r.node < 0) return out;
  json jet = json::array();
  for (int mu = 0; mu < r.jet.n; ++mu) jet.push_back(r.jet[mu]);
  out["node"] = r.node;
  out["x"] = coords_json(g, r.node);
  out["mu"] = r.mu + 1;
  out["nu"] = r.nu + 1;
  out["alpha"] = r.alpha + 1;
  out["jet"] = jet;
  return out;
}

inline std::string coords_text(const Grid& g, int node) {
  std::string s = "(";
  const auto x = g.coords(node);
  for (int mu = 0; mu < g.dim(); ++mu) s += (mu ? ", " : "") + io::num(x[mu]);
  return s + ")";
}

inline std::string flatness_message(const FlatnessReport& r, const Grid& g) {
  return "curvature defect " + io::num(r.max_defect) + " exceeds tolerance " + io::num(r.tolerance) + " at x = " +
         coords_text(g, r.node) + " (axes " + std::to_string(r.mu + 1) + "," + std::to_string(r.nu + 1) + ", component " +
         std::to_string(r.alpha + 1) + ")";
}

class Artifacts {
 public:
  Artifacts(std::filesystem::path dir, CommandResult& res) : dir_(std::move(dir)), res_(res) {}
  std::filesystem::path operator()(const std::string& name) {
    res_.artifacts.push_back(name);
    return dir_ / name;
  }
  void plot(const std::string& name, const std::string& csv, int n, int first, int last, const std::string& title,
            const std::string& filter = "", int value = 0) {
    io::write_text((*this)(name), io::plot_script(csv, n, first, last, title, filter, value));
  }

 private:
  std::filesystem::path dir_;
  CommandResult& res_;
};

inline EpResidual residual_of(const RunConfig& c, const ReducedField& sigma) {
  switch (c.residual) {
    case ResidualKind::Spline: return spline_residual_k2(c.algebra, sigma, c.kappa, c.tau);
    case ResidualKind::Biinvariant: return spline_residual_biinvariant(c.algebra, sigma, c.kappa, c.tau);
    case ResidualKind::General: break;
  }
  return to_spline_convention(c.algebra, ep_general(c.algebra, spline_lagrangian(c.algebra, c.grid.dim(), c.k, c.kappa, c.tau), sigma));
}

// Group-node reach of the configured residual on reduce(s).
inline int residual_reach(const RunConfig& c) {
  return c.residual == ResidualKind::General ? noether_margin(c.k) : spline_residual_reach();
}

inline const char* residual_name(ResidualKind k) {
  switch (k) {
    case ResidualKind::Spline: return "spline";
    case ResidualKind::Biinvariant: return "biinvariant";
    case ResidualKind::General: return "general";
  }
  return "?";
}

}  // namespace detail

inline CommandResult run_solve(const RunConfig& c, const std::filesystem::path& out) {
  CommandResult res;
  detail::Artifacts art(out, res);
  const LieAlgebra& alg = c.algebra;
  const int n = c.grid.dim(), m = alg.dim();
  const BoundaryData bc = clamped_boundary(make_group_field(c, c.boundary), c.k);
  const auto l = spline_lagrangian(alg, n, c.k, c.kappa, c.tau);
  const SolveResult r = minimize(alg, l, initial_guess(alg, bc), bc, c.solver);
  const ReducedField sigma = reduce(alg, r.field);

  io::write_trace(art("trace.csv"), r.trace);
  io::write_group_field(art("group_field.csv"), r.field);
  io::write_reduced_field(art("sigma.csv"), sigma);
  art.plot("trace.gp", "trace.csv", 1, 2, 3, "action and gradient norm");
  art.plot("sigma.gp", "sigma.csv", n, n + 1, n + n * m, "reduced field");

  json rep;
  rep["converged"] = r.converged;
  rep["iterations"] = static_cast<int>(r.trace.size()) - 1;
  rep["action"] = io::jnum(r.action);
  rep["grad_norm"] = io::jnum(r.grad_norm);
  rep["grad_tol"] = c.solver.grad_tol;
  const EpResidual resid = detail::residual_of(c, sigma);
  io::write_algebra_field(art("residual.csv"), resid.field);
  art.plot("residual.gp", "residual.csv", n, n + 1, n + m, "Euler-Poincare residual");
  rep["residual"] = detail::summary_json(resid.field, solution_margin(c.k, detail::residual_reach(c)));
  rep["residual"]["kind"] = detail::residual_name(c.residual);
  const CurrentField cur = spatial_current(alg, l, r.field);
  const AlgebraField div = divergence_defect(cur);
  io::write_current(art("current.csv"), cur);
  io::write_algebra_field(art("noether_defect.csv"), div);
  art.plot("noether_defect.gp", "noether_defect.csv", n, n + 1, n + m, "divergence of the spatial current");
  rep["noether_defect"] = detail::summary_json(div, solution_margin(c.k, noether_margin(c.k)));
  const FlatnessReport fl = flatness_report(alg, sigma, std::max(0, c.k - 2), c.flatness_tolerance);
  rep["flatness"] = detail::flatness_json(fl, c.grid);
  rep["monotone_trace"] = true;
  for (std::size_t i = 1; i < r.trace.size(); ++i)
    if (r.trace[i].action > r.trace[i - 1].action) rep["monotone_trace"] = false;
  if (!r.converged) {
    rep["error"] = "NotConverged";
    rep["message"] = "gradient norm " + io::num(r.grad_norm) + " above grad_tol after " + std::to_string(c.solver.max_iters) + " iterations";
  }
  res.report = rep;
  res.exit_code = r.converged ? 0 : 2;
  return res;
}

inline CommandResult run_residual(const RunConfig& c, const std::filesystem::path& out) {
  CommandResult res;
  detail::Artifacts art(out, res);
  const int n = c.grid.dim(), m = c.algebra.dim();
  const ReducedField sigma = make_sigma(c);
  const EpResidual r = detail::residual_of(c, sigma);
  io::write_algebra_field(art("residual.csv"), r.field);
  art.plot("residual.gp", "residual.csv", n, n + 1, n + m, "Euler-Poincare residual");
  // Fields built by reduce carry its one-sided face rule, which costs one more node.
  const int extra = c.sigma.family == "reduce" ? 1 : 0;
  const int margin = (c.residual == ResidualKind::General ? ep_general_margin(c.k) : spline_residual_margin()) + extra;
  res.report = {{"kind", detail::residual_name(c.residual)}, {"sign_convention", "spline_normalized"}};
  res.report["summary"] = detail::summary_json(r.field, margin);
  // Solver output fixes k-1 boundary layers, so its jets are rough k nodes further in.
  res.report["summary_outside_clamped_layer"] = detail::summary_json(r.field, solution_margin(c.k, margin));
  return res;
}

inline CommandResult run_curvature(const RunConfig& c, const std::filesystem::path& out) {
  CommandResult res;
  detail::Artifacts art(out, res);
  const int n = c.grid.dim(), m = c.algebra.dim();
  const ReducedField sigma = make_sigma(c);
  const FlatnessReport r = flatness_report(c.algebra, sigma, c.flatness_jet_order, c.flatness_tolerance);
  if (n >= 2) {
    io::write_curvature(art("curvature.csv"), curvature(c.algebra, sigma));
    art.plot("curvature.gp", "curvature.csv", n, n + 3, n + 2 + m, "curvature, pairs with mu = 1", "$" + std::to_string(n + 1), 1);
  }
  res.report = detail::flatness_json(r, c.grid);
  if (!r.pass) {
    res.report["error"] = "NotFlat";
    res.report["message"] = detail::flatness_message(r, c.grid);
    res.exit_code = 2;
  }
  return res;
}

inline CommandResult run_reconstruct(const RunConfig& c, const std::filesystem::path& out) {
  CommandResult res;
  detail::Artifacts art(out, res);
  const LieAlgebra& alg = c.algebra;
  const ReducedField sigma = make_sigma(c);
  const FlatnessReport fl = flatness_report(alg, sigma, 0, c.flatness_tolerance);
  res.report["flatness"] = detail::flatness_json(fl, c.grid);
  if (c.grid.dim() >= 2) {
    const HolonomyReport h = holonomy_defect(alg, sigma);
    res.report["holonomy"] = {{"max_defect", io::jnum(h.max_defect)},
                              {"per_area", io::jnum(h.per_area)},
                              {"node", h.node},
                              {"x", detail::coords_json(c.grid, h.node)},
                              {"mu", h.mu + 1},
                              {"nu", h.nu + 1}};
  }
  if (!fl.pass) {
    res.report["error"] = "NotFlat";
    res.report["message"] = detail::flatness_message(fl, c.grid);
    res.exit_code = 2;
    return res;
  }
  const GroupField r = reconstruct(alg, sigma, alg.exp(c.base), SweepOrder::RowMajor, c.flatness_tolerance);
  io::write_group_field(art("group_field.csv"), r);
  const ReducedField back = reduce(alg, r);
  double dev = 0.0;
  for (int mu = 0; mu < sigma.n(); ++mu)
    for (std::size_t q = 0; q < sigma.s[mu].v.size(); ++q) dev = std::max(dev, std::abs(back.s[mu].v[q] - sigma.s[mu].v[q]));
  res.report["round_trip_sigma_sup"] = io::jnum(dev);
  return res;
}

inline CommandResult run_noether(const RunConfig& c, const std::filesystem::path& out) {
  CommandResult res;
  detail::Artifacts art(out, res);
  const LieAlgebra& alg = c.algebra;
  const int n = c.grid.dim(), m = alg.dim();
  const GroupField s = make_group_field(c, c.group_field);
  const auto l = spline_lagrangian(alg, n, c.k, c.kappa, c.tau);
  const ReducedField sigma = reduce(alg, s);
  const CurrentField body = noether_current(alg, l, sigma);
  const CurrentField spatial = spatial_current(alg, l, s);
  const AlgebraField div_body = divergence_defect(body);
  const AlgebraField div_spatial = divergence_defect(spatial);
  io::write_current(art("current.csv"), body);
  io::write_current(art("spatial_current.csv"), spatial);
  io::write_algebra_field(art("divergence.csv"), div_body);
  io::write_algebra_field(art("spatial_divergence.csv"), div_spatial);
  art.plot("current.gp", "current.csv", n, n + 3, n + 3, "body current, mu = 1", "$" + std::to_string(n + 1), 1);
  art.plot("spatial_divergence.gp", "spatial_divergence.csv", n, n + 1, n + m, "divergence of the spatial current");
  const int margin = noether_margin(c.k);
  res.report["body_divergence"] = detail::summary_json(div_body, margin);
  res.report["spatial_divergence"] = detail::summary_json(div_spatial, margin);
  const EpResidual ep = ep_general(alg, l, sigma);
  res.report["ep_residual"] = detail::summary_json(ep.field, margin);
  if (alg.is_abelian()) {
    double d = 0.0;
    for (std::size_t q = 0; q < div_body.v.size(); ++q) d = std::max(d, std::abs(div_body.v[q] - ep.field.v[q]));
    res.report["abelian_identity_sup"] = io::jnum(d);
  }
  return res;
}

inline CommandResult run_el_check(const RunConfig& c, const std::filesystem::path& out) {
  CommandResult res;
  detail::Artifacts art(out, res);
  const LieAlgebra& alg = c.algebra;
  const int n = c.grid.dim(), m = alg.dim();
  const GroupField s = make_group_field(c, c.group_field);
  const AlgebraField r = el_check(alg, spline_lagrangian(alg, n, c.k, c.kappa, c.tau), s);
  io::write_algebra_field(art("el_residual.csv"), r);
  art.plot("el_residual.gp", "el_residual.csv", n, n + 1, n + m, "unreduced Euler-Lagrange residual");
  res.report["summary"] = detail::summary_json(r, el_interior_margin(c.k));
  res.report["summary_outside_clamped_layer"] = detail::summary_json(r, solution_margin(c.k, el_interior_margin(c.k)));
  return res;
}

// Runs one subcommand and writes report.json and manifest.json into `out`. Diagnostic errors
// become exit code 2 with the message in the report; other errors propagate.
inline CommandResult run_command(const std::string& cmd, const RunConfig& c, const std::filesystem::path& out,
                                 const std::string& config_path = "") {
  std::filesystem::create_directories(out);
  const auto t0 = std::chrono::steady_clock::now();
  CommandResult res;
  std::string error;
  try {
    if (cmd == "solve") res = run_solve(c, out);
    else if (cmd == "residual") res = run_residual(c, out);
    else if (cmd == "curvature") res = run_curvature(c, out);
    else if (cmd == "reconstruct") res = run_reconstruct(c, out);
    else if (cmd == "noether") res = run_noether(c, out);
    else if (cmd == "el-check") res = run_el_check(c, out);
    else fail(ErrorCode::Validation, "unknown command '" + cmd + "'");
  } catch (const Error& e) {
    if (!is_diagnostic(e.code())) throw;
    res.exit_code = 2;
    res.report["error"] = std::string(to_string(e.code()));
    error = e.what();
  }
  if (!error.empty()) res.report["message"] = error;
  res.report["command"] = cmd;
  res.report["exit_code"] = res.exit_code;
  res.report["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  io::write_json(out / "report.json", res.report);
  res.artifacts.push_back("report.json");
  json manifest;
  manifest["tool"] = "hoep";
  manifest["version"] = kVersion;
  manifest["command"] = cmd;
  manifest["config_path"] = config_path;
  manifest["threads"] = thread_count();
  manifest["exit_code"] = res.exit_code;
  manifest["artifacts"] = res.artifacts;
  manifest["config"] = c.effective;
  io::write_json(out / "manifest.json", manifest);
  return res;
}

}  // namespace hoep
