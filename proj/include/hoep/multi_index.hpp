#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "hoep/errors.hpp"

namespace hoep {

inline constexpr int kMaxBase = 4;

struct MultiIndex {
  std::array<int, kMaxBase> e{};
  int n = 0;

  MultiIndex() = default;
  explicit MultiIndex(int dims) : n(dims) {}
  MultiIndex(std::initializer_list<int> xs) : n(static_cast<int>(xs.size())) {
    int i = 0;
    for (int x : xs) e[i++] = x;
  }

  int operator[](int mu) const { return e[mu]; }
  int& operator[](int mu) { return e[mu]; }
  int order() const { return std::accumulate(e.begin(), e.begin() + n, 0); }

  static MultiIndex unit(int dims, int mu) {
    MultiIndex j(dims);
    j[mu] = 1;
    return j;
  }
  MultiIndex plus(int mu, int by = 1) const {
    MultiIndex j = *this;
    j[mu] += by;
    return j;
  }
  bool dominated_by(const MultiIndex& j) const {
    for (int mu = 0; mu < n; ++mu)
      if (e[mu] > j[mu]) return false;
    return true;
  }
  MultiIndex minus(const MultiIndex& i) const {
    MultiIndex j = *this;
    for (int mu = 0; mu < n; ++mu) j[mu] -= i[mu];
    return j;
  }
  bool operator==(const MultiIndex& o) const {
    if (n != o.n) return false;
    for (int mu = 0; mu < n; ++mu)
      if (e[mu] != o[mu]) return false;
    return true;
  }
  std::string str() const {
    std::string s = "(";
    for (int mu = 0; mu < n; ++mu) s += (mu ? "," : "") + std::to_string(e[mu]);
    return s + ")";
  }
};

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Product of per-axis binomials binom(J_mu, I_mu).
inline double multinomial(const MultiIndex& j, const MultiIndex& i) {
  if (!i.dominated_by(j)) fail(ErrorCode::IndexNotDominated, i.str() + " is not dominated by " + j.str());
  double r = 1.0;
  for (int mu = 0; mu < j.n; ++mu) r *= binomial(j[mu], i[mu]);
  return r;
}

// All multi-indices with |J| <= order in graded-lexicographic order:
// by total order, then larger leading entries first.
class MultiIndexSet {
 public:
  MultiIndexSet() = default;
  MultiIndexSet(int n, int order) : n_(n), order_(order) {
    if (n < 1 || n > kMaxBase) fail(ErrorCode::DimensionMismatch, "base dimension must be in [1," + std::to_string(kMaxBase) + "]");
    if (order < 0) fail(ErrorCode::Validation, "jet order must be nonnegative");
    for (int d = 0; d <= order; ++d) {
      MultiIndex cur(n);
      fill(cur, 0, d);
    }
    stride_ = order + 1;
    int cells = 1;
    for (int mu = 0; mu < n; ++mu) cells *= stride_;
    lookup_.assign(cells, -1);
    for (int p = 0; p < size(); ++p) lookup_[key(list_[p])] = p;
    for (int p = 0; p < size(); ++p) {
      std::vector<Split> s;
      for (int q = 0; q < size(); ++q)
        if (list_[q].dominated_by(list_[p]))
          s.push_back({q, position(list_[p].minus(list_[q])), multinomial(list_[p], list_[q])});
      splits_.push_back(std::move(s));
    }
  }

  int n() const { return n_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(list_.size()); }
  const MultiIndex& operator[](int p) const { return list_[p]; }
  const std::vector<MultiIndex>& list() const { return list_; }

  // -1 when |J| exceeds the order.
  int position(const MultiIndex& j) const {
    for (int mu = 0; mu < n_; ++mu)
      if (j[mu] < 0 || j[mu] > order_) return -1;
    if (j.order() > order_) return -1;
    return lookup_[key(j)];
  }

  // Leibniz splittings J = I + (J - I) with weight binom(J, I).
  struct Split {
    int i;
    int rest;
    double weight;
  };
  const std::vector<Split>& splits(int p) const { return splits_[p]; }

 private:
  void fill(MultiIndex& cur, int mu, int remaining) {
    if (mu == n_ - 1) {
      cur[mu] = remaining;
      list_.push_back(cur);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      cur[mu] = v;
      fill(cur, mu + 1, remaining - v);
    }
  }
  int key(const MultiIndex& j) const {
    int k = 0;
    for (int mu = 0; mu < n_; ++mu) k = k * stride_ + j[mu];
    return k;
  }

  int n_ = 0;
  int order_ = 0;
  int stride_ = 1;
  std::vector<MultiIndex> list_;
  std::vector<int> lookup_;
  std::vector<std::vector<Split>> splits_;
};

}  // namespace hoep
