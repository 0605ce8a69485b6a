#pragma once

// Reduced field equations for Lagrangians l(j^{k-1} sigma) on right-trivialized fields.
//
// Covector form (per node, component alpha):
//   R_alpha = sum_mu d_mu E^mu_alpha + c(g, b, alpha) sigma^b_mu E^mu_g,
//   E^mu = sum_{|J|<=k-1} (-1)^|J| D^J P^J_mu,   P^J_{mu,alpha} = dl/dA^alpha_{mu,J}.
// Spline-normalized residuals equal -sharp(R).

#include <memory>
#include <vector>

#include "hoep/connection.hpp"
#include "hoep/jets.hpp"
#include "hoep/lie_core.hpp"
#include "hoep/taylor.hpp"

namespace hoep {

enum class SignConvention { Covector, SplineNormalized };

struct EpResidual {
  AlgebraField field;
  SignConvention sign = SignConvention::Covector;
};

// One m-component field per axis, e.g. a conserved-current candidate.
struct CurrentField {
  Grid grid;
  int m = 0;
  std::vector<AlgebraField> j;
};

namespace detail {

// xi^0 = s, xi^j = D xi^{j-1} + 1/2 (ad^dag_s xi^{j-1} + ad^dag_{xi^{j-1}} s - [s, xi^{j-1}]).
template <class T>
AlgebraJet<T> xi_series(const LieAlgebra& alg, const AlgebraJet<T>& s, int steps) {
  AlgebraJet<T> xi = s;
  for (int j = 0; j < steps; ++j) {
    const AlgebraJet<T> a = ad_dagger(alg, s, xi);
    const AlgebraJet<T> b = ad_dagger(alg, xi, s);
    const AlgebraJet<T> c = bracket(alg, s, xi);
    const AlgebraJet<T> corr = combine(1.0, combine(1.0, a, 1.0, b), -1.0, c);
    xi = combine(1.0, derivative(xi, 0), 0.5, corr);
  }
  return xi;
}

}  // namespace detail

// xi^0..xi^K at a point from sigma and its first K derivatives along one axis.
inline std::vector<Vector> xi_chain(const LieAlgebra& alg, const std::vector<Vector>& derivs) {
  const int order = static_cast<int>(derivs.size()) - 1;
  const MultiIndexSet set(1, order);
  AlgebraJet<double> s(&set, alg.dim(), order);
  for (int j = 0; j <= order; ++j)
    for (int a = 0; a < alg.dim(); ++a) s.at(j)[a] = derivs[j][a];
  std::vector<Vector> out;
  for (int j = 0; j <= order; ++j) {
    const AlgebraJet<double> xi = detail::xi_series(alg, s, j);
    out.emplace_back(Eigen::Map<const Eigen::VectorXd>(xi.at(0), alg.dim()));
  }
  return out;
}

// l = sum_mu 1/2 kappa_mu |xi_mu^{k-1}|_g^2 + 1/2 tau_mu |sigma_mu|_g^2
inline LagrangianDescriptor spline_lagrangian(const LieAlgebra& alg, int n, int k, std::vector<double> kappa, std::vector<double> tau) {
  if (k < 1) fail(ErrorCode::Validation, "order k must be >= 1");
  if (static_cast<int>(kappa.size()) != n || static_cast<int>(tau.size()) != n)
    fail(ErrorCode::DimensionMismatch, "kappa and tau need one entry per base axis");
  const int m = alg.dim();
  const MultiIndexSet full(n, k - 1);
  std::vector<std::vector<int>> axis_pos(n);
  for (int mu = 0; mu < n; ++mu)
    for (int j = 0; j < k; ++j) axis_pos[mu].push_back(full.position(MultiIndex(n).plus(mu, j)));
  auto shared_alg = std::make_shared<const LieAlgebra>(alg);
  auto line = std::make_shared<const MultiIndexSet>(1, k - 1);
  auto f = [=](const double*, const auto& jets) {
    using T = std::decay_t<decltype(jets(0, 0))>;
    T total = T(0.0);
    for (int mu = 0; mu < n; ++mu) {
      AlgebraJet<T> s(line.get(), m, k - 1);
      for (int j = 0; j < k; ++j)
        for (int a = 0; a < m; ++a) s.at(j)[a] = jets(mu * m + a, axis_pos[mu][j]);
      const AlgebraJet<T> xi = detail::xi_series(*shared_alg, s, k - 1);
      if (kappa[mu] != 0.0) total += 0.5 * kappa[mu] * shared_alg->inner(xi.at(0), xi.at(0));
      if (tau[mu] != 0.0) total += 0.5 * tau[mu] * shared_alg->inner(s.at(0), s.at(0));
    }
    return total;
  };
  LagrangianDescriptor l = make_lagrangian(n, n * m, k - 1, f);
  l.reads.assign(static_cast<std::size_t>(n * m * full.size()), 0);
  for (int mu = 0; mu < n; ++mu)
    for (int a = 0; a < m; ++a)
      for (int j = 0; j < k; ++j) l.reads[(mu * m + a) * full.size() + axis_pos[mu][j]] = 1;
  return l;
}

inline void check_reduced(const LagrangianDescriptor& l, const LieAlgebra& alg, const ReducedField& sigma) {
  if (sigma.m != alg.dim()) fail(ErrorCode::DimensionMismatch, "sigma components differ from algebra dimension");
  if (l.n != sigma.n() || l.components != sigma.n() * sigma.m)
    fail(ErrorCode::DimensionMismatch, "Lagrangian layout differs from n*m reduced coordinates");
  sigma.grid.require_resolution(l.jet_order + 1);
}

// E^mu = sum_J (-1)^|J| D^J P^J_mu
inline CurrentField body_current(const LieAlgebra& alg, const LagrangianDescriptor& l, const ReducedField& sigma) {
  check_reduced(l, alg, sigma);
  const Grid& g = sigma.grid;
  const int n = g.dim(), m = sigma.m;
  const Stencils st(g, std::max(1, l.jet_order));
  const auto table = jet_table(flatten(sigma), l.set, st);
  const auto p = partial_fields(l, g, table);
  AlgebraField e(g, n * m);
  for (int pos = 0; pos < l.count(); ++pos) {
    const double sign = l.set[pos].order() % 2 ? -1.0 : 1.0;
    const AlgebraField d = partial(p[pos], l.set[pos], st);
    for (std::size_t q = 0; q < e.v.size(); ++q) e.v[q] += sign * d.v[q];
  }
  const ReducedField split = unflatten(e, m);
  return CurrentField{g, m, split.s};
}

// Sum_mu d_mu J^mu
inline AlgebraField divergence(const CurrentField& cur) {
  const Grid& g = cur.grid;
  const Stencils st(g, 1);
  AlgebraField out(g, cur.m);
  for (int mu = 0; mu < g.dim(); ++mu) {
    const AlgebraField d = partial(cur.j[mu], MultiIndex::unit(g.dim(), mu), st);
    for (std::size_t q = 0; q < out.v.size(); ++q) out.v[q] += d.v[q];
  }
  return out;
}

inline EpResidual ep_general(const LieAlgebra& alg, const LagrangianDescriptor& l, const ReducedField& sigma) {
  const CurrentField e = body_current(alg, l, sigma);
  AlgebraField r = divergence(e);
  std::vector<double> tmp(sigma.m);
  for (int node = 0; node < sigma.grid.nodes(); ++node)
    for (int mu = 0; mu < sigma.n(); ++mu) {
      alg.coad(sigma.s[mu].at(node), e.j[mu].at(node), tmp.data());
      for (int a = 0; a < sigma.m; ++a) r(node, a) += tmp[a];
    }
  return {std::move(r), SignConvention::Covector};
}

inline EpResidual to_spline_convention(const LieAlgebra& alg, const EpResidual& r) {
  if (r.sign == SignConvention::SplineNormalized) return r;
  EpResidual out{AlgebraField(r.field.grid, r.field.m), SignConvention::SplineNormalized};
  std::vector<double> tmp(r.field.m);
  for (int node = 0; node < r.field.grid.nodes(); ++node) {
    alg.sharp(r.field.at(node), tmp.data());
    for (int a = 0; a < r.field.m; ++a) out.field(node, a) = -tmp[a];
  }
  return out;
}

// Index distance from faces beyond which ep_general uses central stencils only.
inline int ep_general_margin(int k) { return 2 * (k / 2) + 1; }
inline int spline_residual_margin() { return 2; }

namespace detail {

inline std::vector<double> axis_param(const std::vector<double>& v, int n, const char* what) {
  if (static_cast<int>(v.size()) != n) fail(ErrorCode::DimensionMismatch, std::string(what) + " needs one entry per base axis");
  return v;
}

// sigma_mu and its first three derivatives along mu at every node.
inline std::vector<std::vector<AlgebraField>> axis_derivatives(const ReducedField& sigma, int upto) {
  const Grid& g = sigma.grid;
  const Stencils st(g, upto);
  std::vector<std::vector<AlgebraField>> d(sigma.n());
  for (int mu = 0; mu < sigma.n(); ++mu)
    for (int j = 0; j <= upto; ++j) d[mu].push_back(partial(sigma.s[mu], MultiIndex(g.dim()).plus(mu, j), st));
  return d;
}

}  // namespace detail

// sum_mu kappa (d + ad^dag_s) W - tau (d + ad^dag_s) s,
// eta = d s + ad^dag_s s, W = ad^dag_eta s + [eta, s] + d eta.
inline EpResidual spline_residual_k2(const LieAlgebra& alg, const ReducedField& sigma, const std::vector<double>& kappa,
                                     const std::vector<double>& tau) {
  const int n = sigma.n(), m = sigma.m;
  const auto kap = detail::axis_param(kappa, n, "kappa");
  const auto ta = detail::axis_param(tau, n, "tau");
  sigma.grid.require_resolution(2);
  const auto d = detail::axis_derivatives(sigma, 3);
  const MultiIndexSet line(1, 3);
  AlgebraField r(sigma.grid, m);
  for (int node = 0; node < sigma.grid.nodes(); ++node)
    for (int mu = 0; mu < n; ++mu) {
      AlgebraJet<double> s(&line, m, 3);
      for (int j = 0; j <= 3; ++j)
        for (int a = 0; a < m; ++a) s.at(j)[a] = d[mu][j](node, a);
      const auto ds = derivative(s, 0);
      const auto eta = combine(1.0, ds, 1.0, ad_dagger(alg, s, s));
      const auto w = combine(1.0, combine(1.0, ad_dagger(alg, eta, s), 1.0, bracket(alg, eta, s)), 1.0, derivative(eta, 0));
      const auto bend = combine(1.0, derivative(w, 0), 1.0, ad_dagger(alg, s, w));
      const auto stretch = combine(1.0, ds, 1.0, ad_dagger(alg, s, s));
      for (int a = 0; a < m; ++a) r(node, a) += kap[mu] * bend.at(0)[a] - ta[mu] * stretch.at(0)[a];
    }
  return {std::move(r), SignConvention::SplineNormalized};
}

// Bi-invariant metric: sum_mu kappa (s''' - [s, s'']) - tau s'.
inline EpResidual spline_residual_biinvariant(const LieAlgebra& alg, const ReducedField& sigma, const std::vector<double>& kappa,
                                              const std::vector<double>& tau) {
  if (!alg.is_bi_invariant()) fail(ErrorCode::NotBiInvariant, "metric is not bi-invariant for algebra '" + alg.name() + "'");
  const int n = sigma.n(), m = sigma.m;
  const auto kap = detail::axis_param(kappa, n, "kappa");
  const auto ta = detail::axis_param(tau, n, "tau");
  sigma.grid.require_resolution(2);
  const auto d = detail::axis_derivatives(sigma, 3);
  AlgebraField r(sigma.grid, m);
  std::vector<double> br(m);
  for (int node = 0; node < sigma.grid.nodes(); ++node)
    for (int mu = 0; mu < n; ++mu) {
      alg.bracket(d[mu][0].at(node), d[mu][2].at(node), br.data());
      for (int a = 0; a < m; ++a) r(node, a) += kap[mu] * (d[mu][3](node, a) - br[a]) - ta[mu] * d[mu][1](node, a);
    }
  return {std::move(r), SignConvention::SplineNormalized};
}

}  // namespace hoep
