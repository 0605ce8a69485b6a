#pragma once

// Direct minimization of a reduced action S = sum_x w_x l(j^r sigma)(x), sigma = reduce(s),
// over group-valued fields with clamped boundary layers. Variations are left-trivialized:
// a step delta at node x acts as s(x) <- exp(delta) s(x).

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hoep/connection.hpp"
#include "hoep/errors.hpp"
#include "hoep/jets.hpp"
#include "hoep/lie_core.hpp"
#include "hoep/parallel.hpp"

namespace hoep {

// Nodes whose index distance to a face is at most k-1 are fixed.
inline std::vector<char> boundary_layer(const Grid& g, int k) {
  std::vector<char> fixed(g.nodes(), 0);
  for (int node = 0; node < g.nodes(); ++node) fixed[node] = g.boundary_distance(node) <= k - 1;
  return fixed;
}

struct BoundaryData {
  GroupField values;        // read on fixed nodes only
  std::vector<char> fixed;  // one flag per node
};

inline BoundaryData clamped_boundary(const GroupField& f, int k) { return {f, boundary_layer(f.grid, k)}; }

// Margin for a diagnostic whose stencil reaches `reach` group nodes, evaluated on a solution.
// Fixed values carry the higher jets of the boundary data, not of the minimizer, so any stencil
// that touches the fixed layer sees a jump amplified by inverse powers of h.
inline int solution_margin(int k, int reach) { return k + reach; }

// Group-node reach of the closed-form k=2 residual on reduce(s).
inline int spline_residual_reach() { return 3; }

enum class SolverMethod { Newton, Gradient };
enum class StepRule { Fixed, Armijo };

struct SolverOptions {
  int max_iters = 5000;
  double grad_tol = 1e-6;  // sup norm of gradient coefficients
  SolverMethod method = SolverMethod::Newton;
  StepRule step_rule = StepRule::Armijo;
  double step = 1.0;  // fixed step, or first trial step of the gradient method
  double armijo = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-12;
  double fd_eps = 1e-5;
  int fd_points = 2;  // 2: central difference; 4: Richardson-extrapolated central difference
  double hessian_eps = 1e-4;
  std::uint64_t seed = 0;  // echoed; evaluation order is fixed, so results do not depend on it

  void validate() const {
    if (max_iters < 0) fail(ErrorCode::Validation, "max_iters must be >= 0");
    if (!(grad_tol > 0)) fail(ErrorCode::Validation, "grad_tol must be > 0");
    if (!(fd_eps > 0) || !(hessian_eps > 0)) fail(ErrorCode::Validation, "fd_eps and hessian_eps must be > 0");
    if (fd_points != 2 && fd_points != 4) fail(ErrorCode::Validation, "fd_points must be 2 or 4");
    if (!(armijo > 0 && armijo < 1)) fail(ErrorCode::Validation, "armijo constant must lie in (0,1)");
    if (!(backtrack > 0 && backtrack < 1)) fail(ErrorCode::Validation, "backtrack factor must lie in (0,1)");
    if (!(step > 0) || !(min_step > 0)) fail(ErrorCode::Validation, "step and min_step must be > 0");
  }
};

struct TraceRow {
  int iter = 0;
  double action = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct SolveResult {
  GroupField field;
  std::vector<TraceRow> trace;
  bool converged = false;
  double action = 0.0;
  double grad_norm = 0.0;
};

// Product trapezoid weights.
inline std::vector<double> trapezoid_weights(const Grid& g) {
  std::vector<double> w(g.nodes(), 1.0);
  for (int node = 0; node < g.nodes(); ++node) {
    const MultiIndex i = g.index_of(node);
    for (int mu = 0; mu < g.dim(); ++mu) {
      const bool end = i[mu] == 0 || i[mu] == g.size(mu) - 1;
      w[node] *= g.h(mu) * (end ? 0.5 : 1.0);
    }
  }
  return w;
}

// Axis-aligned jets D^j sigma_mu along mu are built from edge values
// E_mu(x + h/2 e_mu) = log(s(x + h e_mu) s(x)^-1) / h with the smallest symmetric edge window
// (j+1 edges for odd j, j+2 for even j; j+2 flush with a face). Odd orders are then compact
// and see the alternating mode of log s that centered node differences miss. Other jet
// entries use node stencils on reduce(s).
class ActionProblem {
 public:
  struct State {
    GroupField s;
    AlgebraField sigma;               // reduce(s) flattened, component mu*m + alpha
    std::vector<AlgebraField> edges;  // per axis; entry at x is the edge x -> x + h e_mu
    std::vector<double> lhat;
    double action = 0.0;
    double magnitude = 0.0;  // sum of |w l|, the roundoff scale of the action
  };
  using Change = std::pair<int, GroupElement>;

  ActionProblem(LieAlgebra alg, LagrangianDescriptor l, Grid g)
      : alg_(std::move(alg)), l_(std::move(l)), g_(std::move(g)) {
    const int n = g_.dim(), m = alg_.dim();
    if (l_.n != n || l_.components != n * m)
      fail(ErrorCode::DimensionMismatch, "Lagrangian layout differs from n*m reduced coordinates");
    g_.require_resolution(l_.jet_order + 1);
    st_ = Stencils(g_, std::max(1, l_.jet_order));
    w_ = trapezoid_weights(g_);
    build_edge_stencils();
    axis_order_.assign(static_cast<std::size_t>(l_.components) * l_.count(), -1);
    for (int c = 0; c < l_.components; ++c)
      for (int pos = 0; pos < l_.count(); ++pos) {
        const MultiIndex& j = l_.set[pos];
        const int mu = c / m;
        if (j.order() == j[mu]) axis_order_[c * l_.count() + pos] = j[mu];
        else if (l_.reads_coord(c, pos)) node_sigma_ = true;
      }
    build_influence();
  }

  const Grid& grid() const { return g_; }
  const LieAlgebra& algebra() const { return alg_; }
  const LagrangianDescriptor& lagrangian() const { return l_; }

  State evaluate(GroupField s) const {
    if (!s.grid.same_as(g_)) fail(ErrorCode::DimensionMismatch, "group field grid differs from problem grid");
    State st;
    st.sigma = node_sigma_ ? flatten(reduce(alg_, s)) : AlgebraField(g_, g_.dim() * alg_.dim());
    st.edges.assign(g_.dim(), AlgebraField(g_, alg_.dim()));
    const auto at = [&](int q) -> const GroupElement& { return s.g[q]; };
    parallel_for(g_.nodes(), [&](std::size_t node) {
      for (int mu = 0; mu < g_.dim(); ++mu)
        if (g_.index_of(static_cast<int>(node))[mu] < g_.size(mu) - 1) {
          const Vector e = edge_value(at, static_cast<int>(node), mu);
          for (int a = 0; a < alg_.dim(); ++a) st.edges[mu](static_cast<int>(node), a) = e[a];
        }
    }, 64);
    st.s = std::move(s);
    st.lhat.assign(g_.nodes(), 0.0);
    const auto look = [&](int q) { return st.sigma.at(q); };
    const auto look_edge = [&](int mu, int q) { return st.edges[mu].at(q); };
    parallel_for(g_.nodes(), [&](std::size_t q) { st.lhat[q] = lhat_at(static_cast<int>(q), look, look_edge); }, 32);
    for (int q = 0; q < g_.nodes(); ++q) {
      st.action += w_[q] * st.lhat[q];
      st.magnitude += std::abs(w_[q] * st.lhat[q]);
    }
    return st;
  }

  double value(const GroupField& s) const { return evaluate(s).action; }

  // S(s with the listed nodes replaced) - S(s), summed over the affected neighbourhood only.
  double local_delta(const State& st, const std::vector<Change>& changes) const {
    const int nm = st.sigma.m, m = alg_.dim();
    const auto at = [&](int q) -> const GroupElement& {
      for (const auto& c : changes)
        if (c.first == q) return c.second;
      return st.s.g[q];
    };

    std::vector<int> touched;
    std::vector<std::pair<int, int>> touched_edges;  // (mu, node)
    for (const auto& c : changes) {
      const MultiIndex i = g_.index_of(c.first);
      for (int nu = 0; nu < g_.dim(); ++nu) {
        if (node_sigma_)
          for (int t = -2; t <= 2; ++t) {
            const int j = i[nu] + t;
            if (j >= 0 && j < g_.size(nu)) touched.push_back(c.first + t * g_.stride(nu));
          }
        if (i[nu] < g_.size(nu) - 1) touched_edges.emplace_back(nu, c.first);
        if (i[nu] > 0) touched_edges.emplace_back(nu, c.first - g_.stride(nu));
      }
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    std::sort(touched_edges.begin(), touched_edges.end());
    touched_edges.erase(std::unique(touched_edges.begin(), touched_edges.end()), touched_edges.end());

    std::vector<double> fresh(touched.size() * nm);
    for (std::size_t t = 0; t < touched.size(); ++t)
      for (int mu = 0; mu < g_.dim(); ++mu) {
        const Vector v = reduce_at(alg_, g_, at, touched[t], mu);
        for (int a = 0; a < m; ++a) fresh[t * nm + mu * m + a] = v[a];
      }
    std::vector<double> fresh_edges(touched_edges.size() * m);
    for (std::size_t t = 0; t < touched_edges.size(); ++t) {
      const Vector v = edge_value(at, touched_edges[t].second, touched_edges[t].first);
      for (int a = 0; a < m; ++a) fresh_edges[t * m + a] = v[a];
    }
    const auto look = [&](int q) -> const double* {
      const auto it = std::lower_bound(touched.begin(), touched.end(), q);
      if (it != touched.end() && *it == q) return fresh.data() + (it - touched.begin()) * nm;
      return st.sigma.at(q);
    };
    const auto look_edge = [&](int mu, int q) -> const double* {
      const auto key = std::make_pair(mu, q);
      const auto it = std::lower_bound(touched_edges.begin(), touched_edges.end(), key);
      if (it != touched_edges.end() && *it == key) return fresh_edges.data() + (it - touched_edges.begin()) * m;
      return st.edges[mu].at(q);
    };

    std::vector<int> affected;
    for (const auto& c : changes) append_box(influence_box(c.first), affected);
    std::sort(affected.begin(), affected.end());
    affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
    double delta = 0.0;
    for (int q : affected) delta += w_[q] * (lhat_at(q, look, look_edge) - st.lhat[q]);
    return delta;
  }

  // g_{x,a} = [S(exp(+eps B_a) s(x)) - S(exp(-eps B_a) s(x))] / (2 eps); zero on fixed nodes.
  // With points = 4 the probes at +-2 eps cancel the eps^2 error term.
  AlgebraField gradient(const State& st, const std::vector<char>& fixed, double eps, int points = 2) const {
    const int m = alg_.dim();
    AlgebraField g(g_, m);
    parallel_for(g_.nodes(), [&](std::size_t node) {
      const int p = static_cast<int>(node);
      if (fixed[p]) return;
      auto probe = [&](int a, double t) { return local_delta(st, {{p, GroupElement(unit_exp(a, t) * st.s.g[p])}}); };
      for (int a = 0; a < m; ++a) {
        const double d1 = (probe(a, eps) - probe(a, -eps)) / (2.0 * eps);
        if (points == 2) {
          g(p, a) = d1;
        } else {
          const double d2 = (probe(a, 2 * eps) - probe(a, -2 * eps)) / (4.0 * eps);
          g(p, a) = (4.0 * d1 - d2) / 3.0;
        }
      }
    }, 4);
    return g;
  }

  // Second derivatives in the chart delta -> exp(delta) s over free nodes; free[p] is the
  // position of node p in the unknown vector or -1.
  Eigen::SparseMatrix<double> hessian(const State& st, const std::vector<int>& free, int count, double eps) const {
    const int m = alg_.dim();
    std::vector<std::vector<Eigen::Triplet<double>>> rows(g_.nodes());
    parallel_for(g_.nodes(), [&](std::size_t node) {
      const int p = static_cast<int>(node);
      if (free[p] < 0) return;
      std::vector<int> partners;
      append_box(partner_box(p), partners);
      auto& out = rows[p];
      for (int q : partners) {
        if (q < p || free[q] < 0) continue;
        for (int a = 0; a < m; ++a)
          for (int b = (q == p ? a : 0); b < m; ++b) {
            double sum = 0.0;
            for (int s1 : {1, -1})
              for (int s2 : {1, -1}) {
                std::vector<Change> ch;
                if (q == p) {
                  Vector d = Vector::Zero(m);
                  d[a] += s1 * eps;
                  d[b] += s2 * eps;
                  ch.emplace_back(p, GroupElement(alg_.exp(d) * st.s.g[p]));
                } else {
                  ch.emplace_back(p, GroupElement(unit_exp(a, s1 * eps) * st.s.g[p]));
                  ch.emplace_back(q, GroupElement(unit_exp(b, s2 * eps) * st.s.g[q]));
                }
                sum += s1 * s2 * local_delta(st, ch);
              }
            const double h = sum / (4.0 * eps * eps);
            const int r = free[p] * m + a, c = free[q] * m + b;
            out.emplace_back(r, c, h);
            if (r != c) out.emplace_back(c, r, h);
          }
      }
    }, 1);
    std::vector<Eigen::Triplet<double>> all;
    for (const auto& r : rows) all.insert(all.end(), r.begin(), r.end());
    Eigen::SparseMatrix<double> h(count * m, count * m);
    h.setFromTriplets(all.begin(), all.end());
    return h;
  }

 private:
  struct Box {
    std::array<int, kMaxBase> lo{}, hi{};
  };

  GroupElement unit_exp(int a, double t) const {
    Vector d = Vector::Zero(alg_.dim());
    d[a] = t;
    return alg_.exp(d);
  }

  template <class At>
  Vector edge_value(At&& at, int node, int mu) const {
    const GroupElement& here = at(node);
    return alg_.log(at(node + g_.stride(mu)) * here.partialPivLu().inverse()) / g_.h(mu);
  }

  // Edge e of an axis sits at (e + 1/2) h. Stencil::first is the first edge index relative to the node index.
  void build_edge_stencils() {
    const int r = l_.jet_order;
    edge_.assign(g_.dim(), {});
    for (int mu = 0; mu < g_.dim(); ++mu) {
      const int size = g_.size(mu), edges = size - 1;
      edge_[mu].assign(r + 1, std::vector<Stencil>(size));
      for (int j = 0; j <= r; ++j) {
        if (j + 2 > edges)
          fail(ErrorCode::StencilTooWide, "edge stencil of order " + std::to_string(j) + " needs " + std::to_string(j + 3) + " nodes");
        for (int i = 0; i < size; ++i) {
          int count = j % 2 ? j + 1 : j + 2;
          int start = i - count / 2;
          if (start < 0 || start + count > edges) {
            count = j + 2;
            start = std::clamp(i - count / 2, 0, edges - count);
          }
          std::vector<double> pts(count);
          for (int q = 0; q < count; ++q) pts[q] = (start + q + 0.5 - i) * g_.h(mu);
          edge_[mu][j][i] = Stencil{start - i, fornberg_weights(0.0, pts, j)};
        }
      }
    }
  }

  template <class Look, class LookEdge>
  double lhat_at(int q, Look&& look, LookEdge&& look_edge) const {
    const int count = l_.count(), m = alg_.dim();
    std::vector<double> jets(static_cast<std::size_t>(l_.components) * count, 0.0);
    const MultiIndex i = g_.index_of(q);
    for (int c = 0; c < l_.components; ++c)
      for (int pos = 0; pos < count; ++pos) {
        if (!l_.reads_coord(c, pos)) continue;
        const int j = axis_order_[c * count + pos];
        if (j >= 0) {
          const int mu = c / m, a = c % m;
          const Stencil& s = edge_[mu][j][i[mu]];
          double v = 0.0;
          for (std::size_t e = 0; e < s.w.size(); ++e)
            v += s.w[e] * look_edge(mu, q + (s.first + static_cast<int>(e)) * g_.stride(mu))[a];
          jets[c * count + pos] = v;
        } else {
          jets[c * count + pos] = st_.apply(g_, i, l_.set[pos], [&](int nd) { return look(nd)[c]; });
        }
      }
    const auto x = g_.coords(q);
    return hoep::evaluate(l_, x.data(), jets.data());
  }

  // Per axis: dep[i] = indices of s read by l at index i; infl[i] = indices q whose dep
  // contains i; partner[i] = indices j with infl[i] and infl[j] overlapping.
  void build_influence() {
    const int n = g_.dim();
    infl_.assign(n, {});
    partner_.assign(n, {});
    for (int mu = 0; mu < n; ++mu) {
      const int size = g_.size(mu);
      const AxisStencils& ax = st_.axis(mu);
      auto reduce_range = [&](int t) -> std::pair<int, int> {
        if (t == 0) return {0, 2};
        if (t == size - 1) return {size - 3, size - 1};
        return {t - 1, t + 1};
      };
      std::vector<std::pair<int, int>> dep(size);
      for (int i = 0; i < size; ++i) {
        int dlo = i, dhi = i;
        for (int j = 0; j <= l_.jet_order; ++j) {
          const Stencil& s = edge_[mu][j][i];
          dlo = std::min(dlo, i + s.first);
          dhi = std::max(dhi, i + s.first + static_cast<int>(s.w.size()));
        }
        if (node_sigma_) {
          int lo = i, hi = i;
          for (int j = 1; j <= l_.jet_order; ++j) {
            const Stencil& s = ax.at(j, i);
            lo = std::min(lo, i + s.first);
            hi = std::max(hi, i + s.first + static_cast<int>(s.w.size()) - 1);
          }
          for (int t = lo; t <= hi; ++t) {
            const auto r = reduce_range(t);
            dlo = std::min(dlo, r.first);
            dhi = std::max(dhi, r.second);
          }
        }
        dep[i] = {dlo, dhi};
      }
      infl_[mu].assign(size, {size, -1});
      for (int q = 0; q < size; ++q)
        for (int i = dep[q].first; i <= dep[q].second; ++i) {
          infl_[mu][i].first = std::min(infl_[mu][i].first, q);
          infl_[mu][i].second = std::max(infl_[mu][i].second, q);
        }
      partner_[mu].assign(size, {size, -1});
      for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j)
          if (infl_[mu][i].first <= infl_[mu][j].second && infl_[mu][j].first <= infl_[mu][i].second) {
            partner_[mu][i].first = std::min(partner_[mu][i].first, j);
            partner_[mu][i].second = std::max(partner_[mu][i].second, j);
          }
    }
  }

  Box box_from(int node, const std::vector<std::vector<std::pair<int, int>>>& table) const {
    const MultiIndex i = g_.index_of(node);
    Box b;
    for (int mu = 0; mu < g_.dim(); ++mu) {
      b.lo[mu] = table[mu][i[mu]].first;
      b.hi[mu] = table[mu][i[mu]].second;
    }
    return b;
  }
  Box influence_box(int node) const { return box_from(node, infl_); }
  Box partner_box(int node) const { return box_from(node, partner_); }

  void append_box(const Box& b, std::vector<int>& out) const {
    const int n = g_.dim();
    MultiIndex i(n);
    for (int mu = 0; mu < n; ++mu) i.e[mu] = b.lo[mu];
    while (true) {
      out.push_back(g_.node_of(i));
      int mu = n - 1;
      while (mu >= 0 && i.e[mu] == b.hi[mu]) {
        i.e[mu] = b.lo[mu];
        --mu;
      }
      if (mu < 0) return;
      ++i.e[mu];
    }
  }

  LieAlgebra alg_;
  LagrangianDescriptor l_;
  Grid g_;
  Stencils st_;
  std::vector<double> w_;
  std::vector<std::vector<std::vector<Stencil>>> edge_;  // [mu][order][index]
  std::vector<int> axis_order_;                          // order j for axis-aligned own-axis entries, else -1
  bool node_sigma_ = false;
  std::vector<std::vector<std::pair<int, int>>> infl_, partner_;
};

inline double action_value(const LieAlgebra& alg, const LagrangianDescriptor& l, const GroupField& s) {
  return ActionProblem(alg, l, s.grid).value(s);
}

inline AlgebraField action_gradient(const LieAlgebra& alg, const LagrangianDescriptor& l, const GroupField& s, int k,
                                    const SolverOptions& opt) {
  const ActionProblem p(alg, l, s.grid);
  return p.gradient(p.evaluate(s), boundary_layer(s.grid, k), opt.fd_eps, opt.fd_points);
}

inline double sup_norm(const AlgebraField& f) {
  double s = 0.0;
  for (double v : f.v) s = std::max(s, std::abs(v));
  return s;
}

// Interior initial guess: per axis, linear interpolation of log s between the innermost
// fixed nodes on the same line, averaged over axes, then exponentiated.
inline GroupField initial_guess(const LieAlgebra& alg, const BoundaryData& bc) {
  const Grid& g = bc.values.grid;
  const int n = g.dim(), m = alg.dim();
  GroupField out = bc.values;
  for (int node = 0; node < g.nodes(); ++node) {
    if (bc.fixed[node]) continue;
    const MultiIndex i = g.index_of(node);
    Vector y = Vector::Zero(m);
    for (int mu = 0; mu < n; ++mu) {
      int lo = i[mu], hi = i[mu];
      while (lo > 0 && !bc.fixed[node + (lo - i[mu]) * g.stride(mu)]) --lo;
      while (hi < g.size(mu) - 1 && !bc.fixed[node + (hi - i[mu]) * g.stride(mu)]) ++hi;
      const Vector ylo = alg.log(bc.values.g[node + (lo - i[mu]) * g.stride(mu)]);
      const Vector yhi = alg.log(bc.values.g[node + (hi - i[mu]) * g.stride(mu)]);
      const double s = hi == lo ? 0.0 : static_cast<double>(i[mu] - lo) / (hi - lo);
      y += ((1.0 - s) * ylo + s * yhi) / n;
    }
    out.g[node] = alg.exp(y);
  }
  return out;
}

inline void check_boundary(const GroupField& s0, const BoundaryData& bc) {
  if (!s0.grid.same_as(bc.values.grid) || static_cast<int>(bc.fixed.size()) != s0.grid.nodes())
    fail(ErrorCode::Precondition, "boundary data grid differs from the initial field grid");
  for (int node = 0; node < s0.grid.nodes(); ++node) {
    if (!bc.fixed[node]) continue;
    const double scale = std::max(1.0, bc.values.g[node].cwiseAbs().maxCoeff());
    const double diff = (s0.g[node] - bc.values.g[node]).cwiseAbs().maxCoeff();
    if (diff > 1e-12 * scale)
      fail(ErrorCode::Precondition, "initial field violates boundary data at node " + std::to_string(node) + " (difference " +
                                        std::to_string(diff) + ")");
  }
}

namespace detail {

inline GroupField step_field(const LieAlgebra& alg, const GroupField& s, const std::vector<int>& free_nodes,
                             const Eigen::VectorXd& d, double t) {
  GroupField out = s;
  const int m = alg.dim();
  for (std::size_t f = 0; f < free_nodes.size(); ++f) {
    const int p = free_nodes[f];
    out.g[p] = alg.exp(Vector(t * d.segment(f * m, m))) * s.g[p];
  }
  return out;
}

}  // namespace detail

// Armijo backtracking keeps the recorded action nonincreasing. Once the predicted decrease
// falls below the roundoff scale of the action, a step is accepted if the action does not grow.
// Jets amplify roundoff in the edge values by powers of 1/h, so that scale is
// 64 eps sum|w l| at best.
inline SolveResult minimize(const LieAlgebra& alg, const LagrangianDescriptor& l, const GroupField& s0, const BoundaryData& bc,
                            const SolverOptions& opt) {
  opt.validate();
  check_boundary(s0, bc);
  const ActionProblem prob(alg, l, s0.grid);
  const Grid& g = s0.grid;
  const int m = alg.dim();
  std::vector<int> free(g.nodes(), -1), free_nodes;
  for (int node = 0; node < g.nodes(); ++node)
    if (!bc.fixed[node]) {
      free[node] = static_cast<int>(free_nodes.size());
      free_nodes.push_back(node);
    }
  const int count = static_cast<int>(free_nodes.size());

  auto pack = [&](const AlgebraField& f) {
    Eigen::VectorXd v(count * m);
    for (int q = 0; q < count; ++q)
      for (int a = 0; a < m; ++a) v[q * m + a] = f(free_nodes[q], a);
    return v;
  };

  SolveResult res;
  ActionProblem::State st = prob.evaluate(s0);
  AlgebraField grad = prob.gradient(st, bc.fixed, opt.fd_eps, opt.fd_points);
  double gn = sup_norm(grad);
  res.trace.push_back({0, st.action, gn, 0.0});

  for (int iter = 1; iter <= opt.max_iters && gn > opt.grad_tol && count > 0; ++iter) {
    const Eigen::VectorXd gv = pack(grad);
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * st.magnitude;
    bool accepted = false;
    double taken = 0.0;
    ActionProblem::State next;

    auto try_direction = [&](const Eigen::VectorXd& d, double t0) {
      const double slope = gv.dot(d);
      if (!(slope < 0)) return false;
      // Below the roundoff scale the computed action change is noise of either sign, so
      // several step lengths near t0 are sampled before geometric backtracking.
      std::vector<double> steps;
      if (-t0 * slope <= floor && opt.step_rule != StepRule::Fixed)
        for (int i = 10; i >= 1; --i) steps.push_back(0.1 * i * t0);
      for (double t = steps.empty() ? t0 : 0.1 * t0 * opt.backtrack; t >= opt.min_step; t *= opt.backtrack) steps.push_back(t);
      for (double t : steps) {
        ActionProblem::State trial;
        try {
          trial = prob.evaluate(detail::step_field(alg, st.s, free_nodes, d, t));
        } catch (const Error& e) {
          // A trial point outside the log domain or with a non-finite Lagrangian is rejected.
          if (e.code() != ErrorCode::LogDomain && e.code() != ErrorCode::NonFiniteLagrangian) throw;
          if (opt.step_rule == StepRule::Fixed) throw;
          continue;
        }
        const bool armijo = trial.action <= st.action + opt.armijo * t * slope;
        const bool roundoff = -t * slope <= floor && trial.action <= st.action;
        if (opt.step_rule == StepRule::Fixed || armijo || roundoff) {
          next = std::move(trial);
          taken = t;
          return true;
        }
      }
      return false;
    };

    if (opt.method == SolverMethod::Newton) {
      Eigen::SparseMatrix<double> h = prob.hessian(st, free, count, opt.hessian_eps);
      double diag = 0.0;
      for (int r = 0; r < h.rows(); ++r) diag = std::max(diag, std::abs(h.coeff(r, r)));
      Eigen::SparseMatrix<double> id(h.rows(), h.cols());
      id.setIdentity();
      double lambda = 0.0;
      for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
        ldlt.compute(h + lambda * id);
        const bool pd = ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0;
        if (pd) {
          const Eigen::VectorXd d = -ldlt.solve(gv);
          accepted = d.allFinite() && try_direction(d, 1.0);
        }
        lambda = lambda == 0.0 ? 1e-8 * std::max(diag, 1.0) : 10.0 * lambda;
      }
    }
    if (!accepted) accepted = try_direction(-gv, opt.step);
    if (!accepted)
      fail(ErrorCode::LineSearchStalled, "line search stalled at iteration " + std::to_string(iter) + " (action " +
                                             std::to_string(st.action) + ", gradient " + std::to_string(gn) + ")");
    st = std::move(next);
    grad = prob.gradient(st, bc.fixed, opt.fd_eps, opt.fd_points);
    gn = sup_norm(grad);
    res.trace.push_back({iter, st.action, gn, taken});
  }
  res.converged = gn <= opt.grad_tol;
  res.action = st.action;
  res.grad_norm = gn;
  res.field = std::move(st.s);
  return res;
}

}  // namespace hoep
