#pragma once

// Rebuild a group field from a flat reduced field by integrating edge transports
// U_mu(x) = exp(h_mu (sigma_mu(x) + sigma_mu(x + h e_mu)) / 2), s(x + h e_mu) = U_mu(x) s(x).
// The result is s(x) = Phi(x) b for base value b, so s_b2^-1 s_b1 = b2^-1 b1 at every node.

#include <cmath>
#include <string>
#include <vector>

#include "hoep/connection.hpp"
#include "hoep/errors.hpp"
#include "hoep/lie_core.hpp"
#include "hoep/parallel.hpp"

namespace hoep {

// RowMajor reaches x along axis 0 first, then axis 1, and so on; ColumnMajor uses the reverse
// axis order. Both start at the first node.
enum class SweepOrder { RowMajor, ColumnMajor };

inline GroupElement edge_transport(const LieAlgebra& alg, const ReducedField& sigma, int node, int mu) {
  const Grid& g = sigma.grid;
  const int next = node + g.stride(mu);
  Vector mid(sigma.m);
  for (int a = 0; a < sigma.m; ++a) mid[a] = 0.5 * g.h(mu) * (sigma.s[mu](node, a) + sigma.s[mu](next, a));
  return alg.exp(mid);
}

// Sweep without the flatness precondition.
inline GroupField integrate_transports(const LieAlgebra& alg, const ReducedField& sigma, const GroupElement& base,
                                       SweepOrder order = SweepOrder::RowMajor) {
  const Grid& g = sigma.grid;
  if (sigma.m != alg.dim()) fail(ErrorCode::DimensionMismatch, "reduced field width differs from algebra dimension");
  if (base.rows() != alg.matrix_dim() || base.cols() != alg.matrix_dim())
    fail(ErrorCode::DimensionMismatch, "base value has the wrong matrix size");
  GroupField out(g, alg.matrix_dim());
  out.g[0] = base;
  // Nodes are visited in increasing index; every predecessor has a smaller index.
  for (int node = 1; node < g.nodes(); ++node) {
    const MultiIndex i = g.index_of(node);
    int mu = -1;
    if (order == SweepOrder::RowMajor) {
      for (int nu = g.dim() - 1; nu >= 0 && mu < 0; --nu)
        if (i[nu] > 0) mu = nu;
    } else {
      for (int nu = 0; nu < g.dim() && mu < 0; ++nu)
        if (i[nu] > 0) mu = nu;
    }
    const int prev = node - g.stride(mu);
    out.g[node] = edge_transport(alg, sigma, prev, mu) * out.g[prev];
  }
  return out;
}

// Throws NotFlat when the zeroth-order flatness report fails at `tolerance`
// (negative: mesh default).
inline GroupField reconstruct(const LieAlgebra& alg, const ReducedField& sigma, const GroupElement& base,
                              SweepOrder order = SweepOrder::RowMajor, double tolerance = -1.0) {
  const FlatnessReport rep = flatness_report(alg, sigma, 0, tolerance);
  if (!rep.pass) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "curvature defect %.6g exceeds tolerance %.6g at node %d (axes %d,%d)", rep.max_defect,
                  rep.tolerance, rep.node, rep.mu + 1, rep.nu + 1);
    fail(ErrorCode::NotFlat, buf);
  }
  return integrate_transports(alg, sigma, base, order);
}

struct HolonomyReport {
  double max_defect = 0.0;  // max over plaquettes of |log(loop)|
  double per_area = 0.0;    // max over plaquettes of |log(loop)| / (h_mu h_nu)
  int node = -1;            // lower corner of the worst plaquette
  int mu = -1, nu = -1;
};

// Loop around the plaquette at x spanned by (mu, nu):
// U_nu(x)^-1 U_mu(x + e_nu)^-1 U_nu(x + e_mu) U_mu(x), the identity when transports commute
// around the cell. Zero for n = 1.
inline HolonomyReport holonomy_defect(const LieAlgebra& alg, const ReducedField& sigma) {
  const Grid& g = sigma.grid;
  HolonomyReport rep;
  if (g.dim() < 2) return rep;
  for (auto [mu, nu] : axis_pairs(g.dim())) {
    std::vector<double> val(g.nodes(), -1.0);
    parallel_for(g.nodes(), [&](std::size_t q) {
      const int node = static_cast<int>(q);
      const MultiIndex i = g.index_of(node);
      if (i[mu] >= g.size(mu) - 1 || i[nu] >= g.size(nu) - 1) return;
      const GroupElement umu = edge_transport(alg, sigma, node, mu);
      const GroupElement unu = edge_transport(alg, sigma, node, nu);
      const GroupElement umu_up = edge_transport(alg, sigma, node + g.stride(nu), mu);
      const GroupElement unu_right = edge_transport(alg, sigma, node + g.stride(mu), nu);
      const GroupElement loop =
          unu.partialPivLu().inverse() * umu_up.partialPivLu().inverse() * unu_right * umu;
      val[q] = alg.log(loop).norm();
    }, 32);
    const double area = g.h(mu) * g.h(nu);
    for (int node = 0; node < g.nodes(); ++node) {
      if (val[node] < 0) continue;
      if (val[node] > rep.max_defect || rep.node < 0) {
        rep.max_defect = val[node];
        rep.node = node;
        rep.mu = mu;
        rep.nu = nu;
      }
      rep.per_area = std::max(rep.per_area, val[node] / area);
    }
  }
  return rep;
}

// Max over nodes of |log(a(x) b(x)^-1)|.
inline double log_distance(const LieAlgebra& alg, const GroupField& a, const GroupField& b) {
  if (!a.grid.same_as(b.grid)) fail(ErrorCode::DimensionMismatch, "group fields live on different grids");
  double d = 0.0;
  for (int node = 0; node < a.grid.nodes(); ++node)
    d = std::max(d, alg.log(a.g[node] * b.g[node].partialPivLu().inverse()).norm());
  return d;
}

}  // namespace hoep
