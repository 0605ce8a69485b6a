#pragma once

// Conserved currents of right-invariant reduced Lagrangians.
//
// Body current E^mu = sum_J (-1)^|J| D^J P^J_mu satisfies div E + ad_sigma^T E = R (covector
// EP residual), so div E = R only for abelian groups. The spatial current Ad_s^T E^mu
// satisfies div(Ad_s^T E) = Ad_s^T R and is conserved on every critical field.

#include <cmath>
#include <vector>

#include "hoep/connection.hpp"
#include "hoep/ep_residual.hpp"

namespace hoep {

inline CurrentField noether_current(const LieAlgebra& alg, const LagrangianDescriptor& l, const ReducedField& sigma) {
  return body_current(alg, l, sigma);
}

inline CurrentField spatial_current(const LieAlgebra& alg, const LagrangianDescriptor& l, const GroupField& s) {
  CurrentField cur = body_current(alg, l, reduce(alg, s));
  parallel_for(s.grid.nodes(), [&](std::size_t node) {
    const Eigen::MatrixXd adt = alg.Ad_matrix(s.g[node]).transpose();
    for (auto& j : cur.j) {
      const Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(j.at(static_cast<int>(node)), cur.m);
      Eigen::Map<Eigen::VectorXd>(j.at(static_cast<int>(node)), cur.m) = adt * e;
    }
  }, 64);
  return cur;
}

struct DefectSummary {
  double sup = 0.0;
  double l2 = 0.0;  // trapezoid-free root mean square over the counted nodes
  int margin = 0;
};

// Sum_mu d_mu J^mu per component.
inline AlgebraField divergence_defect(const CurrentField& cur) { return divergence(cur); }

// Index distance from faces beyond which the divergence of a current built from a group field
// is free of boundary closures: the central-stencil margin plus one node for the one-sided
// face rule of reduce.
inline int noether_margin(int k) { return ep_general_margin(k) + 1; }

inline DefectSummary summarize(const AlgebraField& f, int margin) {
  DefectSummary s;
  s.margin = margin;
  int count = 0;
  for (int node = 0; node < f.grid.nodes(); ++node) {
    if (f.grid.boundary_distance(node) < margin) continue;
    for (int a = 0; a < f.m; ++a) {
      s.sup = std::max(s.sup, std::abs(f(node, a)));
      s.l2 += f(node, a) * f(node, a);
      ++count;
    }
  }
  s.l2 = count ? std::sqrt(s.l2 / count) : 0.0;
  return s;
}

}  // namespace hoep
