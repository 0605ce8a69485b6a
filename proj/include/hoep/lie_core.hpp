#pragma once

// Finite-dimensional Lie algebras given by structure constants, an optional
// faithful matrix basis, and a (possibly indefinite) metric.
//
// Index convention: [B_b, B_g] = c(a, b, g) B_a, stored at c[(a*m + b)*m + g].

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hoep/errors.hpp"

namespace hoep {

inline constexpr int kMaxDim = 8;

using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using GroupElement = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

struct LieAlgebraSpec {
  std::string name;
  int dim = 0;
  std::vector<double> struct_consts;  // dim^3, layout above
  Eigen::MatrixXd metric;             // empty means identity
  std::vector<Eigen::MatrixXd> basis; // empty means no matrix realization
};

struct AlgebraResiduals {
  double antisymmetry = 0.0;
  double jacobi = 0.0;
  double basis = 0.0;
  double metric_symmetry = 0.0;
};

namespace detail {

inline double norm1(const GroupElement& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

inline std::string triple(int a, int b, int c) {
  std::ostringstream os;
  os << "(" << a + 1 << "," << b + 1 << "," << c + 1 << ")";
  return os.str();
}

}  // namespace detail

// Scaling and squaring with a Taylor core on ||A/2^s||_1 <= 1/2.
inline GroupElement matrix_exp(const GroupElement& a) {
  const int d = static_cast<int>(a.rows());
  if (!a.allFinite()) fail(ErrorCode::Validation, "matrix_exp: non-finite input");
  const double nrm = d == 0 ? 0.0 : detail::norm1(a);
  int s = 0;
  if (nrm > 0.5) s = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  const GroupElement b = a / std::ldexp(1.0, s);
  GroupElement sum = GroupElement::Identity(d, d);
  GroupElement term = GroupElement::Identity(d, d);
  for (int k = 1; k < 40; ++k) {
    term = (term * b) / static_cast<double>(k);
    sum += term;
    if (detail::norm1(term) <= 1e-18 * detail::norm1(sum)) break;
  }
  for (int i = 0; i < s; ++i) sum = (sum * sum).eval();
  return sum;
}

// Principal logarithm by inverse scaling and squaring.
// Throws LogDomain when an eigenvalue lies on the closed negative real axis.
inline GroupElement matrix_log(const GroupElement& a) {
  const int d = static_cast<int>(a.rows());
  if (!a.allFinite()) fail(ErrorCode::LogDomain, "matrix_log: non-finite input");
  const GroupElement id = GroupElement::Identity(d, d);
  GroupElement y = a;
  if ((y - id).norm() > 0.5) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(y), false);
    for (int i = 0; i < d; ++i) {
      const std::complex<double> lam = es.eigenvalues()(i);
      if (std::abs(lam.imag()) <= 1e-12 * (1.0 + std::abs(lam)) && lam.real() <= 1e-300)
        fail(ErrorCode::LogDomain, "eigenvalue on the closed negative real axis (outside principal branch)");
    }
  }
  int s = 0;
  while ((y - id).norm() > 0.25) {
    if (++s > 60) fail(ErrorCode::LogDomain, "square-root iteration did not approach identity");
    GroupElement z = id;
    for (int it = 0; it < 100; ++it) {
      const GroupElement yi = y.partialPivLu().inverse();
      const GroupElement zi = z.partialPivLu().inverse();
      const GroupElement yn = 0.5 * (y + zi);
      z = 0.5 * (z + yi);
      const double delta = (yn - y).norm();
      y = yn;
      if (delta <= 1e-15 * y.norm()) break;
    }
    if (!y.allFinite()) fail(ErrorCode::LogDomain, "square-root iteration diverged");
  }
  const GroupElement x = y - id;
  const GroupElement z = (2.0 * id + x).partialPivLu().solve(x);
  const GroupElement z2 = z * z;
  GroupElement term = z;
  GroupElement sum = z;
  for (int j = 1; j < 60; ++j) {
    term = (term * z2).eval();
    const GroupElement add = term / static_cast<double>(2 * j + 1);
    sum += add;
    if (add.norm() <= 1e-18 * (sum.norm() + 1e-300)) break;
  }
  return std::ldexp(2.0, s) * sum;
}

class LieAlgebra {
 public:
  LieAlgebra() = default;

  static LieAlgebra make(LieAlgebraSpec spec, double tol = 1e-10) {
    LieAlgebra alg;
    const int m = spec.dim;
    if (m <= 0 || m > kMaxDim)
      fail(ErrorCode::DimensionMismatch, "algebra dimension must be in [1," + std::to_string(kMaxDim) + "]");
    if (static_cast<int>(spec.struct_consts.size()) != m * m * m)
      fail(ErrorCode::DimensionMismatch, "struct_consts must hold dim^3 entries");
    if (spec.metric.size() == 0) spec.metric = Eigen::MatrixXd::Identity(m, m);
    if (spec.metric.rows() != m || spec.metric.cols() != m)
      fail(ErrorCode::DimensionMismatch, "metric must be dim x dim");
    alg.spec_ = std::move(spec);
    alg.m_ = m;
    alg.check(tol);
    alg.precompute();
    return alg;
  }

  const std::string& name() const { return spec_.name; }
  int dim() const { return m_; }
  bool has_basis() const { return !spec_.basis.empty(); }
  int matrix_dim() const { return has_basis() ? static_cast<int>(spec_.basis.front().rows()) : 0; }
  const LieAlgebraSpec& spec() const { return spec_; }
  const Eigen::MatrixXd& metric() const { return spec_.metric; }
  const Eigen::MatrixXd& metric_inverse() const { return ginv_; }
  double c(int a, int b, int g) const { return spec_.struct_consts[(a * m_ + b) * m_ + g]; }
  const AlgebraResiduals& residuals() const { return residuals_; }

  // out^a = c(a,b,g) x^b y^g
  template <class T>
  void bracket(const T* x, const T* y, T* out) const {
    apply(c_terms_, x, y, out);
  }
  // out = sharp(coad(x, flat(y))) = g^-1 ad_x^T g y
  template <class T>
  void ad_dagger(const T* x, const T* y, T* out) const {
    apply(dag_terms_, x, y, out);
  }
  // out_d = c(e,b,d) x^b mu_e
  template <class T>
  void coad(const T* x, const T* mu, T* out) const {
    for (int i = 0; i < m_; ++i) out[i] = T(0.0);
    for (const auto& t : c_terms_) out[t.g] += t.v * x[t.b] * mu[t.a];
  }
  template <class T>
  void flat(const T* x, T* out) const { mat_apply(spec_.metric, x, out); }
  template <class T>
  void sharp(const T* x, T* out) const { mat_apply(ginv_, x, out); }
  template <class T>
  T inner(const T* x, const T* y) const {
    T s = T(0.0);
    for (int a = 0; a < m_; ++a)
      for (int b = 0; b < m_; ++b)
        if (spec_.metric(a, b) != 0.0) s += spec_.metric(a, b) * x[a] * y[b];
    return s;
  }

  Vector bracket(const Vector& x, const Vector& y) const { return binary(x, y, &LieAlgebra::bracket<double>); }
  Vector ad_dagger(const Vector& x, const Vector& y) const { return binary(x, y, &LieAlgebra::ad_dagger<double>); }
  Vector coad(const Vector& x, const Vector& mu) const { return binary(x, mu, &LieAlgebra::coad<double>); }
  Vector flat(const Vector& x) const { return spec_.metric * Eigen::VectorXd(x); }
  Vector sharp(const Vector& x) const { return ginv_ * Eigen::VectorXd(x); }
  double inner(const Vector& x, const Vector& y) const { return inner<double>(x.data(), y.data()); }

  // Matrix of ad_x acting on coordinates.
  Eigen::MatrixXd ad_matrix(const Vector& x) const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m_, m_);
    for (const auto& t : c_terms_) a(t.a, t.g) += t.v * x[t.b];
    return a;
  }

  bool is_abelian() const { return c_terms_.empty(); }

  bool is_bi_invariant(double tol = 1e-12) const {
    for (int b = 0; b < m_; ++b) {
      const Eigen::MatrixXd ad = ad_matrix(Vector::Unit(m_, b));
      const Eigen::MatrixXd dag = ginv_ * ad.transpose() * spec_.metric;
      if ((dag + ad).cwiseAbs().maxCoeff() > tol * (1.0 + ad.cwiseAbs().maxCoeff())) return false;
    }
    return true;
  }

  GroupElement to_matrix(const Vector& x) const {
    require_basis();
    const int d = matrix_dim();
    GroupElement out = GroupElement::Zero(d, d);
    for (int a = 0; a < m_; ++a) out += x[a] * spec_.basis[a];
    return out;
  }

  Vector coords(const GroupElement& mat) const {
    require_basis();
    const int d = matrix_dim();
    Vector out = Vector::Zero(m_);
    for (int a = 0; a < m_; ++a)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out[a] += proj_(a, i * d + j) * mat(i, j);
    return out;
  }

  GroupElement exp(const Vector& x) const { return matrix_exp(to_matrix(x)); }

  Vector log(const GroupElement& g) const {
    require_basis();
    const GroupElement l = matrix_log(g);
    const Vector x = coords(l);
    if ((to_matrix(x) - l).norm() > 1e-8 * (1.0 + l.norm()))
      fail(ErrorCode::LogDomain, "logarithm does not lie in the span of the basis");
    return x;
  }

  GroupElement identity() const {
    require_basis();
    return GroupElement::Identity(matrix_dim(), matrix_dim());
  }

  // Columns: coords(g B_b g^-1).
  Eigen::MatrixXd Ad_matrix(const GroupElement& g) const {
    require_basis();
    const GroupElement gi = g.partialPivLu().inverse();
    Eigen::MatrixXd out(m_, m_);
    for (int b = 0; b < m_; ++b) out.col(b) = Eigen::VectorXd(coords(g * spec_.basis[b] * gi));
    return out;
  }

  // Distance of g from the group realized by the basis.
  double membership_residual(const GroupElement& g) const {
    require_basis();
    const int d = matrix_dim();
    const GroupElement id = GroupElement::Identity(d, d);
    const std::string& n = spec_.name;
    if (n == "so3") {
      return (g.transpose() * g - id).norm() + std::max(0.0, -g.determinant());
    }
    if (n == "se2") {
      const GroupElement r = g.topLeftCorner(2, 2);
      return (r.transpose() * r - GroupElement::Identity(2, 2)).norm() + std::abs(g(2, 0)) + std::abs(g(2, 1)) +
             std::abs(g(2, 2) - 1.0) + std::max(0.0, -r.determinant());
    }
    if (n == "heisenberg3") {
      double r = 0.0;
      for (int i = 0; i < 3; ++i) {
        r += std::abs(g(i, i) - 1.0);
        for (int j = 0; j < i; ++j) r += std::abs(g(i, j));
      }
      return r;
    }
    if (n.rfind("abelian", 0) == 0) {
      double r = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          if (i != j) r += std::abs(g(i, j));
          else r += std::max(0.0, -g(i, i));
      return r;
    }
    return (exp(log(g)) - g).norm();
  }

 private:
  struct Term {
    int a, b, g;
    double v;
  };

  template <class T>
  void apply(const std::vector<Term>& terms, const T* x, const T* y, T* out) const {
    for (int i = 0; i < m_; ++i) out[i] = T(0.0);
    for (const auto& t : terms) out[t.a] += t.v * x[t.b] * y[t.g];
  }

  template <class T>
  void mat_apply(const Eigen::MatrixXd& mat, const T* x, T* out) const {
    for (int a = 0; a < m_; ++a) {
      T s = T(0.0);
      for (int b = 0; b < m_; ++b)
        if (mat(a, b) != 0.0) s += mat(a, b) * x[b];
      out[a] = s;
    }
  }

  Vector binary(const Vector& x, const Vector& y, void (LieAlgebra::*op)(const double*, const double*, double*) const) const {
    if (x.size() != m_ || y.size() != m_) fail(ErrorCode::DimensionMismatch, "vector length differs from algebra dimension");
    Vector out(m_);
    (this->*op)(x.data(), y.data(), out.data());
    return out;
  }

  void require_basis() const {
    if (!has_basis()) fail(ErrorCode::NoMatrixBasis, "algebra '" + spec_.name + "' has no matrix basis");
  }

  void check(double tol) {
    const int m = m_;
    double scale = 1.0;
    for (double v : spec_.struct_consts) scale = std::max(scale, std::abs(v));
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int g = 0; g < m; ++g) {
          const double r = std::abs(c(a, b, g) + c(a, g, b));
          residuals_.antisymmetry = std::max(residuals_.antisymmetry, r);
          if (r > tol * scale)
            fail(ErrorCode::AntisymmetryViolation, "c(a,b,g) + c(a,g,b) != 0 at (a,b,g)=" + detail::triple(a, b, g));
        }
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int g = 0; g < m; ++g)
          for (int d = 0; d < m; ++d) {
            double s = 0.0;
            for (int e = 0; e < m; ++e)
              s += c(e, b, g) * c(a, e, d) + c(e, g, d) * c(a, e, b) + c(e, d, b) * c(a, e, g);
            residuals_.jacobi = std::max(residuals_.jacobi, std::abs(s));
            if (std::abs(s) > tol * scale * scale)
              fail(ErrorCode::JacobiViolation,
                   "Jacobi identity fails for basis triple " + detail::triple(b, g, d) + " in component " + std::to_string(a + 1));
          }
    const Eigen::MatrixXd& g = spec_.metric;
    residuals_.metric_symmetry = (g - g.transpose()).cwiseAbs().maxCoeff();
    if (residuals_.metric_symmetry > tol * (1.0 + g.cwiseAbs().maxCoeff()))
      fail(ErrorCode::DegenerateMetric, "metric is not symmetric");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
    const auto sv = svd.singularValues();
    if (sv(m - 1) <= 1e-12 * std::max(1.0, sv(0)))
      fail(ErrorCode::DegenerateMetric, "metric is singular (smallest singular value " + std::to_string(sv(m - 1)) + ")");
    if (spec_.basis.empty()) return;
    if (static_cast<int>(spec_.basis.size()) != m)
      fail(ErrorCode::BasisMismatch, "basis must contain dim matrices");
    const auto d = spec_.basis.front().rows();
    if (d <= 0 || d > kMaxDim) fail(ErrorCode::BasisMismatch, "basis matrix size out of range");
    for (const auto& bm : spec_.basis)
      if (bm.rows() != d || bm.cols() != d) fail(ErrorCode::BasisMismatch, "basis matrices must be square and equal-sized");
    for (int b = 0; b < m; ++b)
      for (int gg = 0; gg < m; ++gg) {
        Eigen::MatrixXd comm = spec_.basis[b] * spec_.basis[gg] - spec_.basis[gg] * spec_.basis[b];
        for (int a = 0; a < m; ++a) comm -= c(a, b, gg) * spec_.basis[a];
        const double r = comm.cwiseAbs().maxCoeff();
        residuals_.basis = std::max(residuals_.basis, r);
        if (r > tol * scale)
          fail(ErrorCode::BasisMismatch,
               "commutator of basis matrices (" + std::to_string(b + 1) + "," + std::to_string(gg + 1) +
                   ") does not match struct_consts");
      }
  }

  void precompute() {
    const int m = m_;
    ginv_ = spec_.metric.inverse();
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int g = 0; g < m; ++g)
          if (c(a, b, g) != 0.0) c_terms_.push_back({a, b, g, c(a, b, g)});
    // D(a,b,l) = ginv(a,d) c(e,b,d) g(e,l)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int l = 0; l < m; ++l) {
          double s = 0.0;
          for (int d = 0; d < m; ++d)
            for (int e = 0; e < m; ++e) s += ginv_(a, d) * c(e, b, d) * spec_.metric(e, l);
          if (std::abs(s) > 1e-15) dag_terms_.push_back({a, b, l, s});
        }
    if (spec_.basis.empty()) return;
    const int d = matrix_dim();
    Eigen::MatrixXd bm(d * d, m);
    for (int a = 0; a < m; ++a)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) bm(i * d + j, a) = spec_.basis[a](i, j);
    const Eigen::MatrixXd gram = bm.transpose() * bm;
    if (Eigen::FullPivLU<Eigen::MatrixXd>(gram).rank() < m)
      fail(ErrorCode::BasisMismatch, "basis matrices are linearly dependent");
    proj_ = gram.inverse() * bm.transpose();
  }

  LieAlgebraSpec spec_;
  int m_ = 0;
  Eigen::MatrixXd ginv_;
  Eigen::MatrixXd proj_;
  std::vector<Term> c_terms_;
  std::vector<Term> dag_terms_;
  AlgebraResiduals residuals_;
};

inline std::vector<std::string> known_algebra_keys() { return {"abelian:<m>", "heisenberg3", "se2", "so3"}; }

// Structure constants are read off the matrix basis.
inline LieAlgebraSpec spec_from_basis(std::string name, std::vector<Eigen::MatrixXd> basis) {
  LieAlgebraSpec s;
  s.name = std::move(name);
  s.dim = static_cast<int>(basis.size());
  const int m = s.dim;
  const auto d = basis.front().rows();
  Eigen::MatrixXd bm(d * d, m);
  for (int a = 0; a < m; ++a) bm.col(a) = Eigen::Map<const Eigen::VectorXd>(basis[a].data(), d * d);
  const Eigen::MatrixXd pinv = (bm.transpose() * bm).inverse() * bm.transpose();
  s.struct_consts.assign(m * m * m, 0.0);
  for (int b = 0; b < m; ++b)
    for (int g = 0; g < m; ++g) {
      const Eigen::MatrixXd comm = basis[b] * basis[g] - basis[g] * basis[b];
      const Eigen::VectorXd cc = pinv * Eigen::Map<const Eigen::VectorXd>(comm.data(), d * d);
      for (int a = 0; a < m; ++a) s.struct_consts[(a * m + b) * m + g] = std::abs(cc(a)) < 1e-15 ? 0.0 : cc(a);
    }
  s.metric = Eigen::MatrixXd::Identity(m, m);
  s.basis = std::move(basis);
  return s;
}

inline LieAlgebraSpec named_algebra_spec(std::string_view key) {
  auto unit = [](int d, int i, int j) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(d, d);
    e(i, j) = 1.0;
    return e;
  };
  if (key == "so3") {
    return spec_from_basis("so3", {unit(3, 2, 1) - unit(3, 1, 2), unit(3, 0, 2) - unit(3, 2, 0), unit(3, 1, 0) - unit(3, 0, 1)});
  }
  if (key == "heisenberg3") {
    return spec_from_basis("heisenberg3", {unit(3, 0, 1), unit(3, 1, 2), unit(3, 0, 2)});
  }
  if (key == "se2") {
    return spec_from_basis("se2", {unit(3, 1, 0) - unit(3, 0, 1), unit(3, 0, 2), unit(3, 1, 2)});
  }
  if (key.rfind("abelian:", 0) == 0) {
    int m = 0;
    try {
      m = std::stoi(std::string(key.substr(8)));
    } catch (...) {
      m = 0;
    }
    if (m <= 0 || m > kMaxDim)
      fail(ErrorCode::Validation, "abelian dimension must be an integer in [1," + std::to_string(kMaxDim) + "]");
    std::vector<Eigen::MatrixXd> basis;
    for (int i = 0; i < m; ++i) basis.push_back(unit(m, i, i));
    return spec_from_basis("abelian:" + std::to_string(m), std::move(basis));
  }
  std::string known;
  for (const auto& k : known_algebra_keys()) known += (known.empty() ? "" : ", ") + k;
  fail(ErrorCode::Validation, "unknown group '" + std::string(key) + "'; known groups: " + known);
}

inline LieAlgebra named_algebra(std::string_view key, const Eigen::MatrixXd& metric = {}) {
  LieAlgebraSpec s = named_algebra_spec(key);
  if (metric.size() != 0) s.metric = metric;
  return LieAlgebra::make(std::move(s));
}

}  // namespace hoep
