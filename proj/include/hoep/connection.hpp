#pragma once

// Group-valued fields, their right-trivialized derivative sigma_mu = (d_mu s) s^-1,
// and curvature of algebra-valued one-forms.
//
// With the matrix-commutator bracket a holonomic sigma satisfies
// d_mu s_nu - d_nu s_mu - [s_mu, s_nu] = 0, which fixes the sign used below.

#include <functional>
#include <string>
#include <vector>

#include "hoep/errors.hpp"
#include "hoep/grid.hpp"
#include "hoep/lie_core.hpp"
#include "hoep/parallel.hpp"

namespace hoep {

struct GroupField {
  Grid grid;
  int d = 0;
  std::vector<GroupElement> g;

  GroupField() = default;
  GroupField(Grid gr, int mdim) : grid(std::move(gr)), d(mdim), g(grid.nodes(), GroupElement::Identity(mdim, mdim)) {}
};

// n one-forms components, sigma[mu] is an m-component field.
struct ReducedField {
  Grid grid;
  int m = 0;
  std::vector<AlgebraField> s;

  ReducedField() = default;
  ReducedField(Grid gr, int mdim) : grid(std::move(gr)), m(mdim), s(grid.dim(), AlgebraField(grid, mdim)) {}
  int n() const { return grid.dim(); }
};

// Component c = mu*m + alpha.
inline AlgebraField flatten(const ReducedField& r) {
  AlgebraField out(r.grid, r.n() * r.m);
  for (int node = 0; node < r.grid.nodes(); ++node)
    for (int mu = 0; mu < r.n(); ++mu)
      for (int a = 0; a < r.m; ++a) out(node, mu * r.m + a) = r.s[mu](node, a);
  return out;
}

inline ReducedField unflatten(const AlgebraField& f, int m) {
  if (f.m % m != 0 || f.m / m != f.grid.dim()) fail(ErrorCode::DimensionMismatch, "field width is not n*m");
  ReducedField r(f.grid, m);
  for (int node = 0; node < f.grid.nodes(); ++node)
    for (int mu = 0; mu < r.n(); ++mu)
      for (int a = 0; a < m; ++a) r.s[mu](node, a) = f(node, mu * m + a);
  return r;
}

inline GroupField sample_group(const LieAlgebra& alg, const Grid& g, const std::function<GroupElement(const double*)>& fn) {
  GroupField out(g, alg.matrix_dim());
  for (int node = 0; node < g.nodes(); ++node) {
    const auto x = g.coords(node);
    out.g[node] = fn(x.data());
  }
  return out;
}

// sigma_mu at one node; `at(node)` supplies group values.
// Interior: average of the two one-sided logs. Faces: second-order one-sided.
template <class At>
Vector reduce_at(const LieAlgebra& alg, const Grid& grid, At&& at, int node, int mu) {
  const int i = grid.index_of(node)[mu];
  const int nmu = grid.size(mu);
  const int st = grid.stride(mu);
  const double h = grid.h(mu);
  const GroupElement& here = at(node);
  const GroupElement inv = here.partialPivLu().inverse();
  auto rel = [&](int other) { return alg.log(at(other) * inv); };
  if (i > 0 && i < nmu - 1) {
    const GroupElement& prev = at(node - st);
    const Vector fwd = rel(node + st);
    const Vector bwd = alg.log(here * prev.partialPivLu().inverse());
    return (fwd + bwd) / (2.0 * h);
  }
  if (nmu < 3) fail(ErrorCode::StencilTooWide, "reduce needs at least 3 nodes per axis");
  if (i == 0) return (4.0 * rel(node + st) - rel(node + 2 * st)) / (2.0 * h);
  return -(4.0 * rel(node - st) - rel(node - 2 * st)) / (2.0 * h);
}

inline ReducedField reduce(const LieAlgebra& alg, const GroupField& f) {
  if (f.d != alg.matrix_dim()) fail(ErrorCode::DimensionMismatch, "group field matrix size differs from algebra basis");
  ReducedField r(f.grid, alg.dim());
  auto at = [&](int q) -> const GroupElement& { return f.g[q]; };
  parallel_for(f.grid.nodes(), [&](std::size_t node) {
    for (int mu = 0; mu < f.grid.dim(); ++mu) {
      const Vector v = reduce_at(alg, f.grid, at, static_cast<int>(node), mu);
      for (int a = 0; a < alg.dim(); ++a) r.s[mu](static_cast<int>(node), a) = v[a];
    }
  }, 64);
  return r;
}

struct CurvatureField {
  Grid grid;
  int m = 0;
  std::vector<std::pair<int, int>> pairs;  // mu < nu
  std::vector<AlgebraField> f;
};

inline std::vector<std::pair<int, int>> axis_pairs(int n) {
  std::vector<std::pair<int, int>> p;
  for (int mu = 0; mu < n; ++mu)
    for (int nu = mu + 1; nu < n; ++nu) p.emplace_back(mu, nu);
  return p;
}

// F_{mu nu} = 1/2 (d_mu s_nu - d_nu s_mu - [s_mu, s_nu])
inline CurvatureField curvature(const LieAlgebra& alg, const ReducedField& sigma) {
  const Grid& g = sigma.grid;
  const Stencils st(g, 1);
  CurvatureField out{g, sigma.m, axis_pairs(g.dim()), {}};
  for (auto [mu, nu] : out.pairs) {
    const AlgebraField dmu = partial(sigma.s[nu], MultiIndex::unit(g.dim(), mu), st);
    const AlgebraField dnu = partial(sigma.s[mu], MultiIndex::unit(g.dim(), nu), st);
    AlgebraField f(g, sigma.m);
    std::vector<double> br(sigma.m);
    for (int node = 0; node < g.nodes(); ++node) {
      alg.bracket(sigma.s[mu].at(node), sigma.s[nu].at(node), br.data());
      for (int a = 0; a < sigma.m; ++a) f(node, a) = 0.5 * (dmu(node, a) - dnu(node, a) - br[a]);
    }
    out.f.push_back(std::move(f));
  }
  return out;
}

struct FlatnessReport {
  double max_defect = 0.0;
  int node = -1;
  int mu = -1, nu = -1, alpha = -1;
  MultiIndex jet;
  double tolerance = 0.0;
  bool pass = true;
  int jet_order = 0;
};

// Mesh tolerance 10*C*h_max^2.
inline double flatness_tolerance(const Grid& g, double constant = 1.0) { return 10.0 * constant * g.h_max() * g.h_max(); }

// Max |F_{mu nu, J}| over nodes, pairs, |J| <= jet_order, components, with
// F_J = 1/2 (D^{J+1_mu} s_nu - D^{J+1_nu} s_mu - sum_{I<=J} binom(J,I) [D^I s_mu, D^{J-I} s_nu]),
// each D a direct stencil so the defect is second order up to the faces.
inline FlatnessReport flatness_report(const LieAlgebra& alg, const ReducedField& sigma, int jet_order, double tolerance = -1.0) {
  const Grid& g = sigma.grid;
  const int n = g.dim();
  FlatnessReport rep;
  rep.jet_order = jet_order;
  rep.tolerance = tolerance < 0 ? flatness_tolerance(g) : tolerance;
  if (n < 2) return rep;
  const MultiIndexSet set(n, jet_order);
  const Stencils st(g, jet_order + 1);
  std::vector<std::vector<AlgebraField>> jets(n);
  for (int mu = 0; mu < n; ++mu)
    for (int p = 0; p < set.size(); ++p) jets[mu].push_back(partial(sigma.s[mu], set[p], st));
  std::vector<double> br(sigma.m);
  for (auto [mu, nu] : axis_pairs(n)) {
    for (int p = 0; p < set.size(); ++p) {
      const AlgebraField a = partial(sigma.s[nu], set[p].plus(mu), st);
      const AlgebraField b = partial(sigma.s[mu], set[p].plus(nu), st);
      for (int node = 0; node < g.nodes(); ++node) {
        std::vector<double> f(sigma.m);
        for (int al = 0; al < sigma.m; ++al) f[al] = a(node, al) - b(node, al);
        for (const auto& sp : set.splits(p)) {
          alg.bracket(jets[mu][sp.i].at(node), jets[nu][sp.rest].at(node), br.data());
          for (int al = 0; al < sigma.m; ++al) f[al] -= sp.weight * br[al];
        }
        for (int al = 0; al < sigma.m; ++al) {
          const double v = 0.5 * std::abs(f[al]);
          if (v > rep.max_defect || rep.node < 0) {
            rep.max_defect = v;
            rep.node = node;
            rep.mu = mu;
            rep.nu = nu;
            rep.alpha = al;
            rep.jet = set[p];
          }
        }
      }
    }
  }
  rep.pass = rep.max_defect <= rep.tolerance;
  return rep;
}

}  // namespace hoep
