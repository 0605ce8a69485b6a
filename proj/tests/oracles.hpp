#pragma once

// Independent reference computations shared by unit and acceptance tests.

#include <cmath>
#include <random>
#include <vector>

#include "hoep/grid.hpp"
#include "hoep/jets.hpp"
#include "hoep/lie_core.hpp"

namespace oracle {

using hoep::AlgebraField;
using hoep::Grid;

// Polynomial in jet coordinates; each term is coeff * prod y[factor].
struct Polynomial {
  struct Term {
    double coeff;
    std::vector<int> factors;  // flat jet coordinate ids comp*count + pos
  };
  std::vector<Term> terms;

  template <class T>
  T eval(const T* y) const {
    T s = T(0.0);
    for (const auto& t : terms) {
      T p = T(t.coeff);
      for (int f : t.factors) p = p * y[f];
      s = s + p;
    }
    return s;
  }

  // Symbolic derivative with respect to coordinate c.
  double derivative(const double* y, int c) const {
    double s = 0.0;
    for (const auto& t : terms)
      for (std::size_t i = 0; i < t.factors.size(); ++i) {
        if (t.factors[i] != c) continue;
        double p = t.coeff;
        for (std::size_t j = 0; j < t.factors.size(); ++j)
          if (j != i) p *= y[t.factors[j]];
        s += p;
      }
    return s;
  }
};

inline Polynomial random_polynomial(std::mt19937& rng, int coords, int terms) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> pick(0, coords - 1);
  std::uniform_int_distribution<int> deg(1, 3);
  Polynomial p;
  // A quadratic in the top coordinates keeps every order active.
  for (int c = 0; c < coords; ++c) p.terms.push_back({0.5 * (1.0 + std::abs(u(rng))), {c, c}});
  for (int t = 0; t < terms; ++t) {
    Polynomial::Term term{u(rng), {}};
    const int d = deg(rng);
    for (int i = 0; i < d; ++i) term.factors.push_back(pick(rng));
    p.terms.push_back(term);
  }
  return p;
}

inline hoep::LagrangianDescriptor as_lagrangian(const Polynomial& p, int n, int comps, int order) {
  return hoep::make_lagrangian(n, comps, order, [p](const double*, const auto& j) { return p.eval(j.data()); });
}

// Random smooth field: sum of a few low-frequency trigonometric modes per component.
inline AlgebraField trig_field(std::mt19937& rng, const Grid& g, int m, double max_freq = 2.0, double amp = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  struct Mode {
    double a, phase;
    std::array<double, hoep::kMaxBase> k;
  };
  std::vector<std::vector<Mode>> modes(m);
  for (int a = 0; a < m; ++a)
    for (int q = 0; q < 3; ++q) {
      Mode md{amp * u(rng) / 3.0, 3.0 * u(rng), {}};
      for (int mu = 0; mu < g.dim(); ++mu) md.k[mu] = max_freq * u(rng);
      modes[a].push_back(md);
    }
  return hoep::sample(g, m, [&](const double* x, double* out) {
    for (int a = 0; a < m; ++a) {
      out[a] = 0.0;
      for (const auto& md : modes[a]) {
        double arg = md.phase;
        for (int mu = 0; mu < g.dim(); ++mu) arg += md.k[mu] * x[mu];
        out[a] += md.a * std::sin(arg);
      }
    }
  });
}

// Rotation about axis w by angle |w|.
inline hoep::GroupElement rodrigues(const hoep::Vector& w) {
  const double th = w.norm();
  Eigen::Matrix3d k;
  k << 0, -w[2], w[1], w[2], 0, -w[0], -w[1], w[0], 0;
  if (th == 0) return hoep::GroupElement::Identity(3, 3);
  return Eigen::Matrix3d::Identity() + std::sin(th) / th * k + (1 - std::cos(th)) / (th * th) * k * k;
}

}  // namespace oracle
