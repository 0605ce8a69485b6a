#pragma once

// Unreduced Euler-Lagrange check in exponential-chart coordinates u = log s.
// The unreduced Lagrangian is L(j^k u) = l(j^(k-1) sigma) with the right-trivialized derivative
// sigma_mu = (d_mu exp(u)) exp(-u) = sum_j ad_u^j (d_mu u) / (j+1)!, expanded in Taylor
// arithmetic so that every D^J sigma_mu is an exact function of j^k u.

#include <cmath>
#include <type_traits>
#include <vector>

#include "hoep/connection.hpp"
#include "hoep/dual.hpp"
#include "hoep/jets.hpp"
#include "hoep/taylor.hpp"

namespace hoep {

// Series terms are added until the value part of a term drops below this fraction of the sum.
inline constexpr double kDexpRelTol = 1e-18;
inline constexpr int kDexpMaxTerms = 80;

// Jets of sigma_mu (valid to u.valid - 1) from the jet of u.
template <class T>
AlgebraJet<T> chart_sigma(const LieAlgebra& alg, const AlgebraJet<T>& u, int mu) {
  AlgebraJet<T> term = derivative(u, mu);
  AlgebraJet<T> sum = term;
  for (int j = 1; j < kDexpMaxTerms; ++j) {
    term = bracket(alg, u, term);
    for (auto& v : term.c) v = v / static_cast<double>(j + 1);
    double tn = 0.0, sn = 0.0;
    for (std::size_t i = 0; i < term.c.size(); ++i) {
      sum.c[i] += term.c[i];
      tn = std::max(tn, std::abs(value_of(term.c[i])));
      sn = std::max(sn, std::abs(value_of(sum.c[i])));
    }
    if (tn <= kDexpRelTol * sn || tn == 0.0) break;
  }
  return sum;
}

// L(x, j^k u) on m fiber coordinates from a reduced Lagrangian on n*m coordinates with jet
// order k-1.
inline LagrangianDescriptor exp_chart_lagrangian(const LieAlgebra& alg, const LagrangianDescriptor& reduced) {
  const int n = reduced.n, m = alg.dim();
  if (reduced.components != n * m) fail(ErrorCode::DimensionMismatch, "reduced Lagrangian layout differs from n*m");
  const int k = reduced.jet_order + 1;
  LagrangianDescriptor out;
  out.n = n;
  out.components = m;
  out.jet_order = k;
  out.set = MultiIndexSet(n, k);
  // Position of each reduced multi-index inside the order-k set.
  std::vector<int> map(reduced.count());
  for (int p = 0; p < reduced.count(); ++p) map[p] = out.set.position(reduced.set[p]);

  auto body = [alg, reduced, map, n, m, k](const double* x, const auto& jet) {
    using T = std::decay_t<decltype(jet(0, 0))>;
    const MultiIndexSet& set = jet.set();
    AlgebraJet<T> u(&set, m, k);
    for (int p = 0; p < set.size(); ++p)
      for (int a = 0; a < m; ++a) u.at(p)[a] = jet(a, p);
    const int rc = reduced.count();
    std::vector<T> red(static_cast<std::size_t>(n) * m * rc, T(0.0));
    for (int mu = 0; mu < n; ++mu) {
      const AlgebraJet<T> s = chart_sigma(alg, u, mu);
      for (int p = 0; p < rc; ++p)
        for (int a = 0; a < m; ++a) red[static_cast<std::size_t>(mu * m + a) * rc + p] = s.at(map[p])[a];
    }
    if constexpr (std::is_same_v<T, Dual>) {
      if (reduced.eval_dual) return reduced.eval_dual(x, JetView<Dual>(red.data(), &reduced.set));
      fail(ErrorCode::Precondition, "reduced Lagrangian has no dual evaluation");
    } else {
      return reduced.eval(x, JetView<double>(red.data(), &reduced.set));
    }
  };
  out.eval = [body](const double* x, const JetView<double>& j) { return body(x, j); };
  if (reduced.eval_dual) {
    out.eval_dual = [body](const double* x, const JetView<Dual>& j) { return body(x, j); };
  } else {
    out.strategy = DerivativeStrategy::CentralDifference;
  }
  return out;
}

// Nodewise principal logarithm; throws LogDomain outside the chart.
inline AlgebraField chart_coordinates(const LieAlgebra& alg, const GroupField& s) {
  AlgebraField u(s.grid, alg.dim());
  for (int node = 0; node < s.grid.nodes(); ++node) {
    const Vector v = alg.log(s.g[node]);
    for (int a = 0; a < alg.dim(); ++a) u(node, a) = v[a];
  }
  return u;
}

// Euler-Lagrange residual of the exponential-chart Lagrangian on log s.
inline AlgebraField el_check(const LieAlgebra& alg, const LagrangianDescriptor& reduced, const GroupField& s) {
  return el_residual(exp_chart_lagrangian(alg, reduced), chart_coordinates(alg, s));
}

}  // namespace hoep
