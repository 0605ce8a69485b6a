#include <gtest/gtest.h>

#include <random>

#include "hoep/connection.hpp"
#include "oracles.hpp"

using namespace hoep;

namespace {

Vector v3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

// (d s / dt) s^-1 by a fine central difference on the exact group curve.
Vector sigma_oracle(const LieAlgebra& alg, const std::function<GroupElement(double)>& s, double t) {
  const double d = 1e-5;
  const GroupElement ds = (s(t + d) - s(t - d)) / (2 * d);
  return alg.coords(ds * s(t).inverse());
}

}  // namespace

TEST(Reduce, ExactOnOneParameterSubgroups) {
  const LieAlgebra so3 = named_algebra("so3");
  const Vector xi = v3(0.3, -0.5, 0.8), eta = v3(-0.2, 0.7, 0.1);
  const Grid g = Grid::uniform(2, 0.0, 1.0, 9);
  const GroupField f = sample_group(so3, g, [&](const double* x) { return GroupElement(so3.exp(x[0] * xi) * so3.exp(x[1] * eta)); });
  const ReducedField s = reduce(so3, f);
  for (int node = 0; node < g.nodes(); ++node) {
    const auto x = g.coords(node);
    const Vector s1 = Eigen::Map<const Eigen::VectorXd>(s.s[0].at(node), 3);
    const Vector s2 = Eigen::Map<const Eigen::VectorXd>(s.s[1].at(node), 3);
    EXPECT_LE((s1 - xi).norm(), 1e-12);
    const Vector ad = so3.Ad_matrix(so3.exp(x[0] * xi)) * Eigen::VectorXd(eta);
    EXPECT_LE((s2 - ad).norm(), 1e-12);
  }
}

TEST(Reduce, SecondOrderAgainstCurveDerivative) {
  const LieAlgebra se2 = named_algebra("se2");
  auto curve = [&](double t) { return GroupElement(se2.exp(v3(std::sin(2 * t), t * t, std::cos(t)))); };
  std::vector<double> hs, errs;
  for (int n : {17, 33, 65}) {
    const Grid g = Grid::uniform(1, 0.0, 1.0, n);
    const ReducedField s = reduce(se2, sample_group(se2, g, [&](const double* x) { return curve(x[0]); }));
    double e = 0;
    for (int node = 0; node < g.nodes(); ++node) {
      const Vector ref = sigma_oracle(se2, curve, g.coords(node)[0]);
      for (int a = 0; a < 3; ++a) e = std::max(e, std::abs(s.s[0](node, a) - ref[a]));
    }
    hs.push_back(g.h(0));
    errs.push_back(e);
  }
  EXPECT_GE(refinement_slope(hs, errs), 1.9);
}

TEST(Reduce, RightTranslationInvariant) {
  const LieAlgebra so3 = named_algebra("so3");
  const Grid g = Grid::uniform(1, 0.0, 1.0, 21);
  const GroupField f = sample_group(so3, g, [&](const double* x) { return GroupElement(so3.exp(v3(x[0], x[0] * x[0], 0.3))); });
  GroupField fg = f;
  const GroupElement c = so3.exp(v3(0.4, -1.0, 2.0));
  for (auto& e : fg.g) e = e * c;
  const auto a = reduce(so3, f), b = reduce(so3, fg);
  for (std::size_t q = 0; q < a.s[0].v.size(); ++q) EXPECT_NEAR(a.s[0].v[q], b.s[0].v[q], 1e-12);
}

TEST(Curvature, ConstantNonCommutingPair) {
  const LieAlgebra so3 = named_algebra("so3");
  const Grid g = Grid::uniform(2, 0.0, 1.0, 9);
  ReducedField s(g, 3);
  for (int node = 0; node < g.nodes(); ++node) {
    s.s[0](node, 0) = 1.0;
    s.s[1](node, 1) = 1.0;
  }
  const CurvatureField f = curvature(so3, s);
  ASSERT_EQ(f.f.size(), 1u);
  for (int node = 0; node < g.nodes(); ++node) {
    EXPECT_NEAR(f.f[0](node, 0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(f.f[0](node, 2)), 0.5, 1e-12);
  }
  const FlatnessReport rep = flatness_report(so3, s, 0);
  EXPECT_NEAR(rep.max_defect, 0.5, 1e-12);
  EXPECT_FALSE(rep.pass);
}

TEST(Curvature, HolonomicFieldIsFlatToSecondOrder) {
  const LieAlgebra so3 = named_algebra("so3");
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  const Vector xi = v3(u(rng), u(rng), u(rng)).normalized(), eta = v3(u(rng), u(rng), u(rng)).normalized();
  for (int r : {0, 1}) {
    std::vector<double> hs, errs;
    for (int n : {17, 33, 65}) {
      const Grid g = Grid::uniform(2, 0.0, 1.0, n);
      const GroupField f = sample_group(so3, g, [&](const double* x) { return GroupElement(so3.exp(x[0] * xi) * so3.exp(x[1] * eta)); });
      const FlatnessReport rep = flatness_report(so3, reduce(so3, f), r);
      hs.push_back(g.h(0));
      errs.push_back(rep.max_defect);
      if (n == 65) {
        EXPECT_LE(rep.max_defect, 1e-3);
        EXPECT_TRUE(rep.pass);
      }
    }
    EXPECT_GE(refinement_slope(hs, errs), 1.9) << "jet order " << r;
  }
}

TEST(Curvature, AbelianJetsConvergeToDerivativesOfCurvature) {
  const LieAlgebra ab = named_algebra("abelian:1");
  std::vector<double> errs;
  for (int n : {17, 33, 65}) {
    const Grid g = Grid::uniform(2, 0.0, 1.0, n);
    ReducedField s(g, 1);
    s.s[0] = sample(g, 1, [](const double* x, double* o) { o[0] = std::sin(x[1]) * x[0]; });
    s.s[1] = sample(g, 1, [](const double* x, double* o) { o[0] = 0.0 * x[0]; });
    // F = -1/2 x cos(y); its largest first jet is 1/2 |cos y| at (1, 0).
    const FlatnessReport rep = flatness_report(ab, s, 1, 1e9);
    errs.push_back(std::abs(rep.max_defect - 0.5));
  }
  EXPECT_LE(errs.back(), 1e-3);
  EXPECT_LT(errs[2], errs[0]);
  const FlatnessReport mixed = flatness_report(ab, ReducedField(Grid::uniform(2, 0.0, 1.0, 9), 1), 2, 1e9);
  EXPECT_EQ(mixed.max_defect, 0.0);
}
