#pragma once

// Jet coordinates of discrete fields, Lagrangians on jet spaces and the
// Euler-Lagrange operator sum_J (-1)^|J| D^J (dL/dy_J).

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hoep/dual.hpp"
#include "hoep/errors.hpp"
#include "hoep/grid.hpp"
#include "hoep/multi_index.hpp"
#include "hoep/parallel.hpp"

namespace hoep {

// Read-only view of jet coordinates laid out as values[comp * count + pos].
template <class T>
class JetView {
 public:
  JetView(const T* values, const MultiIndexSet* set) : values_(values), set_(set) {}
  T operator()(int comp, int pos) const { return values_[comp * set_->size() + pos]; }
  T at(int comp, const MultiIndex& j) const {
    const int p = set_->position(j);
    if (p < 0) fail(ErrorCode::DimensionMismatch, "jet index " + j.str() + " beyond jet order");
    return (*this)(comp, p);
  }
  const MultiIndexSet& set() const { return *set_; }
  const T* data() const { return values_; }

 private:
  const T* values_;
  const MultiIndexSet* set_;
};

enum class DerivativeStrategy { Dual, CentralDifference };

// A Lagrangian L(x, j^r y) with `components` fiber coordinates and jets up to `jet_order`.
// For reduced Lagrangians the components are (mu, alpha) pairs, comp = mu*m + alpha.
struct LagrangianDescriptor {
  int n = 1;
  int components = 1;
  int jet_order = 1;
  std::function<double(const double*, const JetView<double>&)> eval;
  std::function<Dual(const double*, const JetView<Dual>&)> eval_dual;
  std::vector<char> reads;  // components * set.size(); empty reads everything
  DerivativeStrategy strategy = DerivativeStrategy::Dual;
  MultiIndexSet set;

  int count() const { return set.size(); }
  bool reads_coord(int comp, int pos) const { return reads.empty() || reads[comp * count() + pos]; }
};

template <class F>
LagrangianDescriptor make_lagrangian(int n, int components, int jet_order, F f) {
  LagrangianDescriptor l;
  l.n = n;
  l.components = components;
  l.jet_order = jet_order;
  l.set = MultiIndexSet(n, jet_order);
  l.eval = [f](const double* x, const JetView<double>& j) { return f(x, j); };
  l.eval_dual = [f](const double* x, const JetView<Dual>& j) { return f(x, j); };
  return l;
}

inline LagrangianDescriptor make_lagrangian_fd(int n, int components, int jet_order,
                                               std::function<double(const double*, const JetView<double>&)> f) {
  LagrangianDescriptor l;
  l.n = n;
  l.components = components;
  l.jet_order = jet_order;
  l.set = MultiIndexSet(n, jet_order);
  l.eval = std::move(f);
  l.strategy = DerivativeStrategy::CentralDifference;
  return l;
}

inline double evaluate(const LagrangianDescriptor& l, const double* x, const double* jets) {
  const double v = l.eval(x, JetView<double>(jets, &l.set));
  if (!std::isfinite(v)) fail(ErrorCode::NonFiniteLagrangian, "Lagrangian returned a non-finite value");
  return v;
}

// dL/dy_J for every jet coordinate; out has components * count entries.
inline void jet_partials(const LagrangianDescriptor& l, const double* x, const double* jets, double* out) {
  const int total = l.components * l.count();
  if (l.strategy == DerivativeStrategy::Dual && l.eval_dual) {
    std::vector<Dual> d(total);
    for (int c = 0; c < total; ++c) d[c] = Dual(jets[c]);
    for (int c = 0; c < total; ++c) {
      if (!l.reads.empty() && !l.reads[c]) {
        out[c] = 0.0;
        continue;
      }
      d[c].d = 1.0;
      const Dual r = l.eval_dual(x, JetView<Dual>(d.data(), &l.set));
      d[c].d = 0.0;
      if (!std::isfinite(r.v) || !std::isfinite(r.d)) fail(ErrorCode::NonFiniteLagrangian, "non-finite Lagrangian or derivative");
      out[c] = r.d;
    }
    return;
  }
  std::vector<double> p(jets, jets + total);
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  for (int c = 0; c < total; ++c) {
    if (!l.reads.empty() && !l.reads[c]) {
      out[c] = 0.0;
      continue;
    }
    const double eps = base * std::max(1.0, std::abs(jets[c]));
    p[c] = jets[c] + eps;
    const double up = evaluate(l, x, p.data());
    p[c] = jets[c] - eps;
    const double dn = evaluate(l, x, p.data());
    p[c] = jets[c];
    out[c] = (up - dn) / (2.0 * eps);
  }
}

// Jet coordinates of a multi-component field at every node: table[node][comp*count + pos].
inline std::vector<double> jet_table(const AlgebraField& y, const MultiIndexSet& set, const Stencils& st) {
  const Grid& g = y.grid;
  const int cnt = set.size();
  std::vector<double> t(static_cast<std::size_t>(g.nodes()) * y.m * cnt);
  parallel_for(g.nodes(), [&](std::size_t node) {
    const MultiIndex i = g.index_of(static_cast<int>(node));
    double* row = t.data() + node * y.m * cnt;
    for (int p = 0; p < cnt; ++p)
      for (int a = 0; a < y.m; ++a) row[a * cnt + p] = st.apply(g, i, set[p], [&](int q) { return y(q, a); });
  }, 128);
  return t;
}

// Fields P^J_c = dL/dy^c_J at every node, laid out as one AlgebraField per jet position.
inline std::vector<AlgebraField> partial_fields(const LagrangianDescriptor& l, const Grid& g, const std::vector<double>& table) {
  const int cnt = l.count();
  std::vector<AlgebraField> p(cnt, AlgebraField(g, l.components));
  parallel_for(g.nodes(), [&](std::size_t node) {
    const auto x = g.coords(static_cast<int>(node));
    std::vector<double> out(l.components * cnt);
    jet_partials(l, x.data(), table.data() + node * l.components * cnt, out.data());
    for (int pos = 0; pos < cnt; ++pos)
      for (int c = 0; c < l.components; ++c) p[pos](static_cast<int>(node), c) = out[c * cnt + pos];
  }, 64);
  return p;
}

// Discrete Euler-Lagrange residual; each D^J uses the grid stencils directly.
inline AlgebraField el_residual(const LagrangianDescriptor& l, const AlgebraField& y) {
  const Grid& g = y.grid;
  if (y.m != l.components) fail(ErrorCode::DimensionMismatch, "field components differ from Lagrangian components");
  if (g.dim() != l.n) fail(ErrorCode::DimensionMismatch, "grid dimension differs from Lagrangian base dimension");
  g.require_resolution(l.jet_order);
  const Stencils st(g, l.jet_order);
  const auto table = jet_table(y, l.set, st);
  const auto p = partial_fields(l, g, table);
  AlgebraField r(g, l.components);
  for (int pos = 0; pos < l.count(); ++pos) {
    const double sign = (l.set[pos].order() % 2 == 0) ? 1.0 : -1.0;
    const AlgebraField d = partial(p[pos], l.set[pos], st);
    for (std::size_t k = 0; k < r.v.size(); ++k) r.v[k] += sign * d.v[k];
  }
  return r;
}

// Margin (index distance from faces) beyond which el_residual uses only central stencils.
inline int el_interior_margin(int jet_order) { return 2 * ((jet_order + 1) / 2); }

}  // namespace hoep
