#pragma once

// Uniform box grids, finite-difference stencils and discrete fields.
//
// Nodes are stored row-major: axis 0 varies slowest.

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "hoep/errors.hpp"
#include "hoep/multi_index.hpp"
#include "hoep/parallel.hpp"

namespace hoep {

inline constexpr int kMaxDerivativeOrder = 6;

class Grid {
 public:
  Grid() = default;
  Grid(std::vector<double> lo, std::vector<double> hi, std::vector<int> sizes)
      : lo_(std::move(lo)), hi_(std::move(hi)), size_(std::move(sizes)) {
    n_ = static_cast<int>(size_.size());
    if (n_ < 1 || n_ > kMaxBase) fail(ErrorCode::DimensionMismatch, "grid dimension must be in [1," + std::to_string(kMaxBase) + "]");
    if (static_cast<int>(lo_.size()) != n_ || static_cast<int>(hi_.size()) != n_)
      fail(ErrorCode::DimensionMismatch, "grid extents and sizes differ in length");
    nodes_ = 1;
    for (int mu = 0; mu < n_; ++mu) {
      if (size_[mu] < 2) fail(ErrorCode::Validation, "each grid axis needs at least 2 nodes");
      if (!(hi_[mu] > lo_[mu])) fail(ErrorCode::Validation, "grid extent must satisfy a < b");
      h_.push_back((hi_[mu] - lo_[mu]) / (size_[mu] - 1));
      nodes_ *= size_[mu];
    }
    strides_.assign(n_, 1);
    for (int mu = n_ - 2; mu >= 0; --mu) strides_[mu] = strides_[mu + 1] * size_[mu + 1];
  }

  static Grid uniform(int n, double a, double b, int size) {
    return Grid(std::vector<double>(n, a), std::vector<double>(n, b), std::vector<int>(n, size));
  }

  int dim() const { return n_; }
  int size(int mu) const { return size_[mu]; }
  const std::vector<int>& sizes() const { return size_; }
  double lo(int mu) const { return lo_[mu]; }
  double hi(int mu) const { return hi_[mu]; }
  double h(int mu) const { return h_[mu]; }
  double h_max() const { return *std::max_element(h_.begin(), h_.end()); }
  int nodes() const { return nodes_; }
  int stride(int mu) const { return strides_[mu]; }

  MultiIndex index_of(int node) const {
    MultiIndex i(n_);
    for (int mu = 0; mu < n_; ++mu) {
      i[mu] = node / strides_[mu];
      node %= strides_[mu];
    }
    return i;
  }
  int node_of(const MultiIndex& i) const {
    int k = 0;
    for (int mu = 0; mu < n_; ++mu) k += i[mu] * strides_[mu];
    return k;
  }
  double coord(int mu, int i) const { return lo_[mu] + i * h_[mu]; }
  std::array<double, kMaxBase> coords(int node) const {
    std::array<double, kMaxBase> x{};
    const MultiIndex i = index_of(node);
    for (int mu = 0; mu < n_; ++mu) x[mu] = coord(mu, i[mu]);
    return x;
  }
  // Smallest index distance to any face.
  int boundary_distance(int node) const {
    const MultiIndex i = index_of(node);
    int d = size_[0];
    for (int mu = 0; mu < n_; ++mu) d = std::min({d, i[mu], size_[mu] - 1 - i[mu]});
    return d;
  }

  void require_resolution(int k) const {
    for (int mu = 0; mu < n_; ++mu)
      if (size_[mu] < 2 * k + 1)
        fail(ErrorCode::Validation, "grid axis " + std::to_string(mu + 1) + " has N=" + std::to_string(size_[mu]) +
                                        " but N >= 2k+1 = " + std::to_string(2 * k + 1) + " is required");
  }

  bool same_as(const Grid& o) const { return lo_ == o.lo_ && hi_ == o.hi_ && size_ == o.size_; }

 private:
  int n_ = 0;
  std::vector<double> lo_, hi_, h_;
  std::vector<int> size_;
  std::vector<int> strides_;
  int nodes_ = 0;
};

// Fornberg weights for the derivative of order m at x0 on the given points.
inline std::vector<double> fornberg_weights(double x0, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size()) - 1;
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = c[i][m];
  return w;
}

struct Stencil {
  int first = 0;  // offset of the first point
  std::vector<double> w;
};

// Second-order stencils along one axis: central with radius ceil(j/2) where
// it fits, otherwise j+2 contiguous points flush with the boundary.
class AxisStencils {
 public:
  AxisStencils() = default;
  AxisStencils(int size, double h, int max_order) : size_(size) {
    if (max_order > kMaxDerivativeOrder)
      fail(ErrorCode::StencilTooWide, "derivative order " + std::to_string(max_order) + " exceeds " + std::to_string(kMaxDerivativeOrder));
    table_.resize(max_order + 1);
    for (int j = 0; j <= max_order; ++j) {
      if (j > 0 && size < j + 2)
        fail(ErrorCode::StencilTooWide, "order " + std::to_string(j) + " needs " + std::to_string(j + 2) + " nodes, axis has " + std::to_string(size));
      table_[j].resize(size);
      const int r = (j + 1) / 2;
      for (int i = 0; i < size; ++i) {
        Stencil s;
        if (j == 0) {
          s.first = 0;
          s.w = {1.0};
        } else {
          int start, count;
          if (i - r >= 0 && i + r <= size - 1) {
            start = i - r;
            count = 2 * r + 1;
          } else {
            count = j + 2;
            start = i - r < 0 ? 0 : size - count;
          }
          std::vector<double> pts(count);
          for (int q = 0; q < count; ++q) pts[q] = (start + q - i) * h;
          s.first = start - i;
          s.w = fornberg_weights(0.0, pts, j);
        }
        table_[j][i] = std::move(s);
      }
    }
  }
  int max_order() const { return static_cast<int>(table_.size()) - 1; }
  const Stencil& at(int order, int i) const { return table_[order][i]; }
  // Widest reach of any stencil of this order.
  int reach(int order) const { return order == 0 ? 0 : order + 1; }
  int central_radius(int order) const { return (order + 1) / 2; }

 private:
  int size_ = 0;
  std::vector<std::vector<Stencil>> table_;
};

class Stencils {
 public:
  Stencils() = default;
  Stencils(const Grid& g, int max_order) : max_order_(max_order) {
    for (int mu = 0; mu < g.dim(); ++mu) axes_.emplace_back(g.size(mu), g.h(mu), max_order);
  }
  int max_order() const { return max_order_; }
  const AxisStencils& axis(int mu) const { return axes_[mu]; }

  // sum over the tensor-product stencil of J at node index i; f(offset node) supplies values.
  template <class F>
  double apply(const Grid& g, const MultiIndex& i, const MultiIndex& j, F&& f) const {
    for (int mu = 0; mu < g.dim(); ++mu)
      if (j[mu] > max_order_)
        fail(ErrorCode::StencilTooWide, "derivative order " + std::to_string(j[mu]) + " exceeds stencil table order " + std::to_string(max_order_));
    return recurse(g, i, j, 0, g.node_of(i), 1.0, f);
  }

 private:
  template <class F>
  double recurse(const Grid& g, const MultiIndex& i, const MultiIndex& j, int mu, int node, double w, F& f) const {
    if (mu == g.dim()) return w * f(node);
    if (j[mu] == 0) return recurse(g, i, j, mu + 1, node, w, f);
    const Stencil& s = axes_[mu].at(j[mu], i[mu]);
    double sum = 0.0;
    for (std::size_t q = 0; q < s.w.size(); ++q) {
      const int off = s.first + static_cast<int>(q);
      sum += recurse(g, i, j, mu + 1, node + off * g.stride(mu), w * s.w[q], f);
    }
    return sum;
  }

  int max_order_ = 0;
  std::vector<AxisStencils> axes_;
};

// m values per node, node-major.
struct AlgebraField {
  Grid grid;
  int m = 0;
  std::vector<double> v;

  AlgebraField() = default;
  AlgebraField(Grid g, int comps) : grid(std::move(g)), m(comps), v(static_cast<std::size_t>(grid.nodes()) * comps, 0.0) {}

  double& operator()(int node, int a) { return v[static_cast<std::size_t>(node) * m + a]; }
  double operator()(int node, int a) const { return v[static_cast<std::size_t>(node) * m + a]; }
  const double* at(int node) const { return v.data() + static_cast<std::size_t>(node) * m; }
  double* at(int node) { return v.data() + static_cast<std::size_t>(node) * m; }
};

using ScalarField = AlgebraField;  // m == 1

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (!a.same_as(b)) fail(ErrorCode::DimensionMismatch, "fields live on different grids");
}

inline AlgebraField partial(const AlgebraField& f, const MultiIndex& j, const Stencils& st) {
  AlgebraField out(f.grid, f.m);
  const Grid& g = f.grid;
  parallel_for(g.nodes(), [&](std::size_t node) {
    const MultiIndex i = g.index_of(static_cast<int>(node));
    for (int a = 0; a < f.m; ++a)
      out(static_cast<int>(node), a) = st.apply(g, i, j, [&](int q) { return f(q, a); });
  }, 256);
  return out;
}

inline AlgebraField partial(const AlgebraField& f, const MultiIndex& j) {
  int mx = 0;
  for (int mu = 0; mu < j.n; ++mu) mx = std::max(mx, j[mu]);
  return partial(f, j, Stencils(f.grid, mx));
}

template <class Fn>
AlgebraField sample(const Grid& g, int m, Fn&& fn) {
  AlgebraField out(g, m);
  for (int node = 0; node < g.nodes(); ++node) {
    const auto x = g.coords(node);
    fn(x.data(), out.at(node));
  }
  return out;
}

// Sup norm over nodes at index distance >= margin from every face.
inline double sup_interior(const AlgebraField& f, int margin) {
  double s = 0.0;
  for (int node = 0; node < f.grid.nodes(); ++node)
    if (f.grid.boundary_distance(node) >= margin)
      for (int a = 0; a < f.m; ++a) s = std::max(s, std::abs(f(node, a)));
  return s;
}

// Least-squares slope of log(err) against log(h).
inline double refinement_slope(const std::vector<double>& h, const std::vector<double>& err) {
  const std::size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace hoep
