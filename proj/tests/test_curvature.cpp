#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ahg/catalog.hpp"
#include "ahg/curvature.hpp"

using namespace ahg;

namespace {

// Product of two unit spheres, each in conformal coordinates (x1,x3) and (x2,x4): Kahler, s = 4.
ChartSpec sphere_product() {
  ChartSpec c;
  c.name = "s2xs2";
  c.n = 2;
  c.domain.assign(4, Axis{-1, 1, false});
  const char* a = "4/(1+x1^2+x3^2)^2";
  const char* b = "4/(1+x2^2+x4^2)^2";
  for (const char* s : {a, "0", "0", "0", "0", b, "0", "0", "0", "0", a, "0", "0", "0", "0", b})
    c.g.push_back(parse_expression(s, 4));
  c.J = standard_complex_structure(2);
  return c;
}

std::vector<std::vector<double>> pts(const ChartSpec& c, int k) { return sample_points(c, k, 42); }

}  // namespace

TEST(Ricci, ConstantCurvatureAndFlat) {
  EXPECT_NEAR(ricci_and_scalar(load("t4_kahler").chart, std::vector<double>{1, 2, 3, 4}).s, 0.0, 1e-14);
  for (const auto& [name, s] : {std::pair{"s4_round", 12.0}, std::pair{"h4_hyperbolic", -12.0}}) {
    ChartSpec c = load(name).chart;
    for (const auto& p : pts(c, 5)) {
      RicciScalar r = ricci_and_scalar(c, p);
      EXPECT_NEAR(r.s, s, 1e-9) << name;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) EXPECT_NEAR(r.ric(a, b), r.ric(b, a), 1e-9);
    }
  }
}

TEST(Ricci, FrameIndependence) {
  for (const char* name : {"hopf_surface", "kodaira_thurston", "s6_nearly_kahler", "iwasawa"}) {
    ChartSpec c = load(name).chart;
    const int m = c.dim();
    std::vector<int> perm(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) perm[static_cast<std::size_t>(i)] = m - 1 - i;
    for (const auto& p : pts(c, 3)) {
      Geometry g1(c, p, 2), g2(c, p, 2, perm);
      const Expr f = identity_test_function(m);
      CurvatureReport a = curvature_report(g1, f), b = curvature_report(g2, f);
      EXPECT_NEAR(a.s, b.s, 1e-9) << name;
      EXPECT_NEAR(a.s_J, b.s_J, 1e-9) << name;
      EXPECT_NEAR(a.S1, b.S1, 1e-9) << name;
      EXPECT_NEAR(a.S2, b.S2, 1e-9) << name;
      EXPECT_NEAR(a.lap.hessian, b.lap.hessian, 1e-9) << name;
    }
  }
}

TEST(JScalar, UnitaryFormulasAgree) {
  for (const auto& name : catalog_names()) {
    ChartSpec c = load(name).chart;
    for (const auto& p : pts(c, 3)) {
      JScalar j = j_scalar(c, p);
      EXPECT_NEAR(j.s_J, j.s_J_unitary, 1e-9) << name;
      EXPECT_NEAR(j.s, j.s_line1, 1e-9) << name;
      EXPECT_NEAR(j.s, j.s_line2, 1e-9) << name;
      // Ric_J(X,Y) = Ric_J(JY,JX)
      Geometry geo(c, p, 2);
      TensorD r = j.ric_J;
      const auto& Jm = geo.Jm();
      const int m = c.dim();
      for (int X = 0; X < m; ++X)
        for (int Y = 0; Y < m; ++Y) {
          double v = 0;
          for (int C = 0; C < m; ++C)
            for (int D = 0; D < m; ++D) v += Jm(C, Y) * Jm(D, X) * r(C, D);
          EXPECT_NEAR(r(X, Y), v, 1e-9) << name;
        }
    }
  }
}

TEST(JScalar, KahlerEqualsRiemannian) {
  ChartSpec c = sphere_product();
  for (const auto& p : pts(c, 5)) {
    CurvatureReport r = curvature_report(c, p);
    EXPECT_NEAR(r.s, 4.0, 1e-9);
    EXPECT_NEAR(r.s_J, r.s, 1e-8);
    EXPECT_NEAR(r.s, 2 * r.S1, 1e-8);
    EXPECT_NEAR(r.s, 2 * r.S2, 1e-8);
    EXPECT_LE(r.alpha2 + r.N02 + r.dF_minus2 + r.dF0_plus2, 1e-20);
  }
}

TEST(ChernConnection, DefiningProperties) {
  for (const auto& name : catalog_names()) {
    ChartSpec c = load(name).chart;
    for (const auto& p : pts(c, 4)) {
      Geometry geo(c, p, 1);
      ChernConnectionCheck k = check_chern_connection(geo, chern_connection(geo));
      EXPECT_LE(k.metric, 1e-10) << name;
      EXPECT_LE(k.complex, 1e-10) << name;
      EXPECT_LE(k.torsion_11, 1e-10) << name;
    }
  }
}

TEST(ChernConnection, KahlerCoincidesWithLeviCivita) {
  ChartSpec c = sphere_product();
  for (const auto& p : pts(c, 3)) {
    Geometry geo(c, p, 1);
    EXPECT_LE(sup_norm(chern_connection(geo) - geo.connection()), 1e-12);
  }
  ChartSpec h = load("hopf_surface").chart;
  Geometry geo(h, pts(h, 1)[0], 1);
  EXPECT_GT(sup_norm(chern_connection(geo) - geo.connection()), 0.1);
}

TEST(ChernScalars, HopfConstantsAndClosedRho) {
  ChartSpec c = load("hopf_surface").chart;
  for (const auto& p : pts(c, 6)) {
    ChernScalars ch = chern_scalars(c, p);
    EXPECT_NEAR(ch.S1, 4.0, 1e-8);
    EXPECT_NEAR(ch.S2, 2.0, 1e-8);
    ASSERT_TRUE(ch.drho.has_value());
    EXPECT_LE(*ch.drho, 1e-7);
  }
}

TEST(ChernScalars, RhoMatchesUnitaryDefinition) {
  for (const char* name : {"hopf_surface", "s6_nearly_kahler", "kodaira_thurston"}) {
    ChartSpec c = load(name).chart;
    for (const auto& p : pts(c, 3)) {
      Geometry geo(c, p, 2);
      ChernScalars ch = chern_scalars(geo);
      const int m = c.dim(), n = c.n;
      const Eigen::MatrixXcd W = geo.unitary_rows();
      double trace = 0;
      for (int X = 0; X < m; ++X)
        for (int Y = 0; Y < m; ++Y) {
          std::complex<double> acc(0);
          for (int i = 0; i < n; ++i)
            for (int A = 0; A < m; ++A)
              for (int B = 0; B < m; ++B) acc += W(n + i, A) * W(i, B) * ch.R(A, B, X, Y);
          acc *= std::complex<double>(0, 1);
          EXPECT_NEAR(acc.imag(), 0.0, 1e-10) << name;
          EXPECT_NEAR(acc.real(), ch.rho(X, Y), 1e-10) << name;
        }
      for (int j = 0; j < n; ++j) trace += ch.rho(j, n + j);
      EXPECT_NEAR(trace, ch.S1, 1e-9) << name;
    }
  }
}

TEST(ChernScalars, ClosedRhoOnCatalog) {
  for (const char* name : {"kodaira_thurston", "s6_nearly_kahler", "t4_perturbed", "s4_round"}) {
    ChartSpec c = load(name).chart;
    for (const auto& p : pts(c, 2)) {
      ChernScalars ch = chern_scalars(c, p);
      ASSERT_TRUE(ch.drho.has_value());
      EXPECT_LE(*ch.drho, 1e-7) << name;
    }
  }
}

TEST(Catalog, DeclaredScalars) {
  for (const auto& name : catalog_names()) {
    CatalogEntry e = load(name);
    for (const auto& p : pts(e.chart, 4)) {
      CurvatureReport r = curvature_report(e.chart, p);
      const auto& x = e.scalars;
      if (x.s) EXPECT_LE(relative_residual(r.s, *x.s), 1e-7) << name;
      if (x.s_J) EXPECT_LE(relative_residual(r.s_J, *x.s_J), 1e-7) << name;
      if (x.S1) EXPECT_LE(relative_residual(r.S1, *x.S1), 1e-7) << name;
      if (x.S2) EXPECT_LE(relative_residual(r.S2, *x.S2), 1e-7) << name;
      if (x.alpha2) EXPECT_LE(relative_residual(r.alpha2, *x.alpha2), 1e-7) << name;
      if (x.delta_alpha) EXPECT_LE(relative_residual(r.delta_alpha, *x.delta_alpha), 1e-7) << name;
    }
  }
}

TEST(Identities, RegistryOnCatalog) {
  for (const auto& name : catalog_names()) {
    CatalogEntry e = load(name);
    const bool hermitian = e.integrable;
    for (const auto& p : pts(e.chart, 5)) {
      CurvatureReport r = curvature_report(e.chart, p);
      for (const auto& ir : r.identities) {
        if (identity_needs_hermitian(ir.id) && !hermitian) continue;
        EXPECT_LE(ir.rel_residual, 1e-7) << name << " " << identity_name(ir.id) << " lhs " << ir.lhs << " rhs "
                                         << ir.rhs;
      }
    }
  }
}

TEST(Identities, NamesRoundTrip) {
  for (IdentityId id : all_identities()) EXPECT_EQ(parse_identity(identity_name(id)), id);
  EXPECT_FALSE(parse_identity("I9.9").has_value());
  ChartSpec c = load("t4_kahler").chart;
  IdentityResidual r = identity_residual(c, std::vector<double>{1, 2, 3, 4}, IdentityId::I2_7);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.rhs, 0.0);
}

TEST(Identities, ChernLaplacianAgainstFlatOracle) {
  // flat torus: Delta^Ch f = -sum d^2 f/dx_i^2
  ChartSpec c = load("t4_kahler").chart;
  Expr f = identity_test_function(4);
  std::vector<double> p{0.4, 1.1, 2.0, 5.0};
  Geometry geo(c, p, 2);
  ChernLaplacian l = chern_laplacian_routes(geo, chern_connection(geo), lee_form_jets(geo), eval_jet(f, p, 2));
  Jet fj = eval_jet(f, p, 2);
  double lap = 0;
  for (int i = 0; i < 4; ++i) lap -= fj.derivative({i, i});
  EXPECT_NEAR(l.hessian, lap, 1e-12);
  EXPECT_NEAR(l.hodge_lee, lap, 1e-12);
  EXPECT_NEAR(l.ddc, lap, 1e-12);
}

TEST(HolSect, FlatSphereAndScaling) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  auto rnd = [&](int n) {
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = {nd(rng), nd(rng)};
    return v;
  };
  ChartSpec t = load("t4_kahler").chart;
  EXPECT_EQ(hol_sect_curv(t, std::vector<double>{1, 1, 1, 1}, rnd(2)), 0.0);
  ChartSpec s = load("s4_round").chart;
  for (const auto& p : pts(s, 3)) {
    Eigen::VectorXcd xi = rnd(2);
    const double h = hol_sect_curv(s, p, xi);
    EXPECT_NEAR(h, 1.0, 1e-9);
    EXPECT_NEAR(hol_sect_curv(s, p, xi * std::complex<double>(2.5, -1.3)), h, 1e-10);
  }
  ChartSpec k = load("kodaira_thurston").chart;
  Eigen::VectorXcd xi = rnd(2);
  EXPECT_NEAR(hol_sect_curv(k, pts(k, 1)[0], xi), hol_sect_curv(k, pts(k, 1)[0], xi * 0.1), 1e-10);
  EXPECT_THROW(hol_sect_curv(k, pts(k, 1)[0], Eigen::VectorXcd::Zero(2)), std::invalid_argument);
}

TEST(Berger, SphereVolume) {
  EXPECT_NEAR(sphere_volume(2), 2 * std::numbers::pi * std::numbers::pi, 1e-12);
  EXPECT_NEAR(sphere_volume(3), std::pow(std::numbers::pi, 3), 1e-12);
}

TEST(Berger, FlatAndHopf) {
  BergerResult f = berger_average(load("t4_kahler").chart, std::vector<double>{1, 1, 1, 1}, 1000, 1);
  EXPECT_EQ(f.lhs, 0.0);
  EXPECT_EQ(f.rhs, 0.0);
  ChartSpec h = load("hopf_surface").chart;
  BergerResult b = berger_average(h, pts(h, 1)[0], 100000, 42);
  EXPECT_GT(b.std_error, 0.0);
  EXPECT_LE(std::abs(b.lhs - b.rhs), 3 * b.std_error);
}
