#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ahg/catalog.hpp"
#include "ahg/hermitian.hpp"

using namespace ahg;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

std::vector<std::vector<double>> pts(const ChartSpec& c, int k, std::uint64_t seed = 42) {
  return sample_points(c, k, seed);
}

}  // namespace

TEST(FundamentalForm, FlatTorusStandard) {
  ChartSpec c = load("t4_kahler").chart;
  std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  TensorD F = fundamental_form(c, p).components;
  EXPECT_DOUBLE_EQ(F(0, 2), 1.0);
  EXPECT_DOUBLE_EQ(F(1, 3), 1.0);
  EXPECT_DOUBLE_EQ(F(2, 0), -1.0);
  EXPECT_DOUBLE_EQ(F(0, 1), 0.0);
}

TEST(FundamentalForm, TamesAndVolume) {
  ChartSpec c = load("hopf_surface").chart;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  for (const auto& p : pts(c, 10)) {
    Geometry geo(c, p, 0);
    TensorD F = values(fundamental_form_jets(geo));
    // F(X, JX) = |X|^2 in the orthonormal frame
    Eigen::VectorXd X(4);
    for (int i = 0; i < 4; ++i) X(i) = nd(rng);
    Eigen::VectorXd JX = geo.Jm() * X;
    double v = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) v += F(a, b) * X(a) * JX(b);
    EXPECT_NEAR(v, X.squaredNorm(), 1e-10 * X.squaredNorm());
    // F^2/2 in coordinates against sqrt(det g); x1..x4 is opposite to the J-orientation
    TensorJ Fc = geo.to_coordinates(fundamental_form_jets(geo));
    TensorD vol = wedge(values(Fc), values(Fc)) * 0.5;
    Eigen::MatrixXd G(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) G(i, j) = eval(c.metric(i, j), p);
    EXPECT_LE(rel(-vol(0, 1, 2, 3), std::sqrt(G.determinant())), 1e-10);
  }
}

TEST(LeeForm, KahlerAndBalancedVanish) {
  for (const char* name : {"t4_kahler", "iwasawa"}) {
    ChartSpec c = load(name).chart;
    for (const auto& p : pts(c, 5)) EXPECT_LE(sup_norm(lee_form(c, p).alpha.components), 1e-12) << name;
  }
}

TEST(LeeForm, HopfConstantNormAndReconstruction) {
  ChartSpec c = load("hopf_surface").chart;
  for (const auto& p : pts(c, 10)) {
    LeeFormResult r = lee_form(c, p);
    EXPECT_NEAR(form_norm2(r.alpha.components), 4.0, 1e-8);
    EXPECT_LE(r.reconstruction_residual, 1e-9);
  }
}

TEST(LeeForm, ExactOnConformallyFlat) {
  // g = e^{2f} delta with standard J: alpha = 2 (n-1) df
  ChartSpec c = load("t4_perturbed").chart;
  Expr f = parse_expression("0.05*sin(x1)", 4);
  for (const auto& p : pts(c, 5)) {
    Geometry geo(c, p, 1);
    TensorD alpha = values(lee_form_jets(geo));
    TensorD df = values(geo.df(eval_jet(f, p, 1)));
    EXPECT_LE(sup_norm(alpha - df * 2.0), 1e-12);
  }
}

TEST(Nijenhuis, IntegrableStructuresVanish) {
  for (const char* name : {"t4_kahler", "t4_perturbed", "iwasawa", "hopf_surface", "s4_round"}) {
    ChartSpec c = load(name).chart;
    for (const auto& p : pts(c, 5)) {
      EXPECT_LE(sup_norm(nijenhuis(c, p).N.components), 1e-9) << name;
      EXPECT_LE(sup_norm(nijenhuis_coordinate(c, p)), 1e-9) << name;
    }
  }
}

TEST(Nijenhuis, NonIntegrableWitnesses) {
  for (const char* name : {"kodaira_thurston", "s6_nearly_kahler"}) {
    CatalogEntry e = load(name);
    const TensorD N = nijenhuis(e.chart, e.witness_point).N.components;
    EXPECT_GT(std::sqrt(form_norm2(N, 1)), 0.1) << name;
  }
}

TEST(Nijenhuis, FrameMatchesCoordinateFormula) {
  for (const char* name : {"kodaira_thurston", "s6_nearly_kahler"}) {
    ChartSpec c = load(name).chart;
    const int m = c.dim();
    for (const auto& p : pts(c, 3)) {
      Geometry geo(c, p, 1);
      TensorD Nf = nijenhuis(c, p).N.components;
      TensorD Nc = nijenhuis_coordinate(c, p);
      for (int A = 0; A < m; ++A)
        for (int B = 0; B < m; ++B)
          for (int C = 0; C < m; ++C) {
            double acc = 0;
            for (int k = 0; k < m; ++k)
              for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                  acc += geo.theta()(A, k).value() * Nc(k, i, j) * geo.E()(i, B).value() * geo.E()(j, C).value();
            EXPECT_NEAR(Nf(A, B, C), acc, 1e-10) << name;
          }
    }
  }
}

TEST(Nijenhuis, AlgebraicSymmetries) {
  ChartSpec c = load("s6_nearly_kahler").chart;
  for (const auto& p : pts(c, 4)) {
    HermitianBudget b = hermitian_budget(Geometry(c, p, 2));
    const int m = c.dim();
    for (int A = 0; A < m; ++A)
      for (int B = 0; B < m; ++B)
        for (int C = 0; C < m; ++C) EXPECT_NEAR(b.N(A, B, C), -b.N(A, C, B), 1e-12);
    EXPECT_LE(b.n_type_residual, 1e-9);
    EXPECT_LE(b.bN0_residual, 1e-9);
  }
}

TEST(TypeSplit, HermitianChartsHaveNoMinusPart) {
  for (const char* name : {"iwasawa", "hopf_surface", "t4_perturbed"}) {
    ChartSpec c = load(name).chart;
    for (const auto& p : pts(c, 5)) {
      HermitianBudget b = df_components(c, p);
      EXPECT_LE(sup_norm(b.dF_minus), 1e-10) << name;
      EXPECT_LE(b.split_residual, 1e-9) << name;
    }
  }
}

TEST(TypeSplit, NearlyKahlerIsPurelyMinus) {
  ChartSpec c = load("s6_nearly_kahler").chart;
  for (const auto& p : pts(c, 5)) {
    HermitianBudget b = df_components(c, p);
    EXPECT_LE(sup_norm(b.dF_plus), 1e-9);
    EXPECT_LE(sup_norm(b.alpha), 1e-9);
    EXPECT_GT(b.norm2_dF_minus, 0.1);
    EXPECT_LE(b.split_residual, 1e-9);
  }
}

TEST(TypeSplit, HopfIsLeeOnly) {
  ChartSpec c = load("hopf_surface").chart;
  for (const auto& p : pts(c, 5)) {
    HermitianBudget b = df_components(c, p);
    EXPECT_LE(sup_norm(b.dF0_plus), 1e-8);
    EXPECT_LE(sup_norm(b.dF - wedge(b.alpha, b.F)), 1e-8);
  }
}

TEST(NablaF, DecompositionAndBudgetOnCatalog) {
  for (const auto& name : catalog_names()) {
    ChartSpec c = load(name).chart;
    for (const auto& p : pts(c, 6)) {
      HermitianBudget b = nabla_F_budget(c, p);
      EXPECT_LE(b.decomposition_residual, 1e-8) << name;
      if (b.budget_lhs < 1e-8)
        EXPECT_LE(std::abs(b.budget_lhs - b.budget_rhs), 1e-10) << name;
      else
        EXPECT_LE(rel(b.budget_lhs, b.budget_rhs), 1e-7) << name;
      EXPECT_LE(b.primitive_residual, 1e-9) << name;
    }
  }
}

TEST(NablaF, SpecialisedBudgets) {
  ChartSpec s6 = load("s6_nearly_kahler").chart;
  for (const auto& p : pts(s6, 4)) {
    HermitianBudget b = nabla_F_budget(s6, p);
    EXPECT_LE(rel(b.norm2_nablaF, b.norm2_dF_minus / 3.0), 1e-7);
  }
  ChartSpec hopf = load("hopf_surface").chart;
  for (const auto& p : pts(hopf, 4)) {
    HermitianBudget b = nabla_F_budget(hopf, p);
    EXPECT_LE(rel(b.norm2_nablaF, b.norm2_alpha), 1e-7);
  }
}

TEST(GrayHervella, Labels) {
  EXPECT_EQ(gray_hervella_label(false, false, false, false), "Kahler");
  EXPECT_EQ(gray_hervella_label(false, false, true, true), "W3+W4");
  EXPECT_EQ(gray_hervella_label(true, false, false, false), "W1");
}

TEST(GrayHervella, CatalogClasses) {
  for (const auto& name : catalog_names()) {
    CatalogEntry e = load(name);
    GrayHervellaFlags f = classify_gray_hervella(e.chart, 6, 42);
    EXPECT_EQ(f.label, e.expected_class) << name;
  }
}

TEST(GrayHervella, Deterministic) {
  ChartSpec c = load("hopf_surface").chart;
  GrayHervellaFlags a = classify_gray_hervella(c, 4, 7), b = classify_gray_hervella(c, 4, 7);
  EXPECT_EQ(a.alpha, b.alpha);
  EXPECT_THROW(classify_gray_hervella(c, 0, 7), std::invalid_argument);
}
