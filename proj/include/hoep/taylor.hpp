#pragma once

// Algebra-valued truncated Taylor polynomials around a point. Coefficients are
// stored as partial derivatives c[pos*m + a] = D^J f^a, indexed by a MultiIndexSet.
// Entries with |J| > valid are unknown and ignored.

#include <vector>

#include "hoep/lie_core.hpp"
#include "hoep/multi_index.hpp"

namespace hoep {

template <class T>
struct AlgebraJet {
  const MultiIndexSet* set = nullptr;
  int m = 0;
  int valid = 0;
  std::vector<T> c;

  AlgebraJet() = default;
  AlgebraJet(const MultiIndexSet* s, int mdim, int valid_order)
      : set(s), m(mdim), valid(valid_order), c(static_cast<std::size_t>(s->size()) * mdim, T(0.0)) {}

  T* at(int pos) { return c.data() + static_cast<std::size_t>(pos) * m; }
  const T* at(int pos) const { return c.data() + static_cast<std::size_t>(pos) * m; }
};

template <class T>
AlgebraJet<T> derivative(const AlgebraJet<T>& f, int mu) {
  AlgebraJet<T> out(f.set, f.m, f.valid - 1);
  for (int p = 0; p < f.set->size(); ++p) {
    const MultiIndex& j = (*f.set)[p];
    if (j.order() > out.valid) continue;
    const int q = f.set->position(j.plus(mu));
    for (int a = 0; a < f.m; ++a) out.at(p)[a] = f.at(q)[a];
  }
  return out;
}

// Leibniz rule for a bilinear algebra operation op(x, y, out).
template <class T, class Op>
AlgebraJet<T> leibniz(const AlgebraJet<T>& f, const AlgebraJet<T>& g, Op&& op) {
  AlgebraJet<T> out(f.set, f.m, std::min(f.valid, g.valid));
  std::vector<T> tmp(f.m);
  for (int p = 0; p < f.set->size(); ++p) {
    if ((*f.set)[p].order() > out.valid) continue;
    for (const auto& sp : f.set->splits(p)) {
      op(f.at(sp.i), g.at(sp.rest), tmp.data());
      for (int a = 0; a < f.m; ++a) out.at(p)[a] += sp.weight * tmp[a];
    }
  }
  return out;
}

template <class T>
AlgebraJet<T> bracket(const LieAlgebra& alg, const AlgebraJet<T>& f, const AlgebraJet<T>& g) {
  return leibniz(f, g, [&](const T* x, const T* y, T* o) { alg.bracket(x, y, o); });
}

template <class T>
AlgebraJet<T> ad_dagger(const LieAlgebra& alg, const AlgebraJet<T>& f, const AlgebraJet<T>& g) {
  return leibniz(f, g, [&](const T* x, const T* y, T* o) { alg.ad_dagger(x, y, o); });
}

// a*f + b*g, valid to the lower order.
template <class T>
AlgebraJet<T> combine(double a, const AlgebraJet<T>& f, double b, const AlgebraJet<T>& g) {
  AlgebraJet<T> out(f.set, f.m, std::min(f.valid, g.valid));
  for (std::size_t i = 0; i < out.c.size(); ++i) out.c[i] = a * f.c[i] + b * g.c[i];
  return out;
}

}  // namespace hoep
