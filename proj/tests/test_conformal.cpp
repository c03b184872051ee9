#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "ahg/conformal.hpp"

using namespace ahg;

namespace {

constexpr double kPi = std::numbers::pi;

Expr parse4(const char* s) { return parse_expression(s, 4); }

// Random trigonometric polynomial with modes |k_a| <= 2.
Expr random_trig(std::mt19937_64& rng, int dim, int terms) {
  std::uniform_int_distribution<int> kd(-2, 2);
  std::normal_distribution<double> cd(0.0, 1.0);
  Expr f(0.0);
  for (int t = 0; t < terms; ++t) {
    Expr phase(0.0);
    for (int a = 0; a < dim; ++a) phase += static_cast<double>(kd(rng)) * Expr::var(a);
    f += cd(rng) * cos(phase) + cd(rng) * sin(phase);
  }
  return f;
}

SpectralGrid sample_expr(const Expr& e, std::vector<int> res) {
  return SpectralGrid::sample(std::move(res), [&](std::span<const double> x) { return eval(e, x); });
}

double max_abs_diff(const SpectralGrid& a, const SpectralGrid& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace

TEST(SpectralGrid, RoundTripAndHermitianSymmetry) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  SpectralGrid g({8, 4, 16, 2});
  for (double& v : g.values) v = u(rng);
  const auto c = g.fourier();
  EXPECT_LE(hermitian_symmetry_defect(g.resolution, c), 1e-15);
  const SpectralGrid back = SpectralGrid::from_fourier(g.resolution, c);
  EXPECT_LE(max_abs_diff(g, back), 1e-12 * g.sup());
}

TEST(SpectralGrid, SineCoefficients) {
  const SpectralGrid g = sample_expr(parse4("sin(x1) + 3"), {8, 8, 8, 8});
  const auto c = g.fourier();
  EXPECT_NEAR(c[0].real(), 3.0, 1e-14);
  // index of k = (1,0,0,0) and (-1,0,0,0)
  const std::size_t plus = 512, minus = 7 * 512;
  EXPECT_NEAR(c[plus].imag(), -0.5, 1e-14);
  EXPECT_NEAR(c[minus].imag(), 0.5, 1e-14);
  EXPECT_EQ(g.wave_vector(minus)[0], -1);
}

TEST(SpectralGrid, ToExprInterpolatesGrid) {
  std::mt19937_64 rng(5);
  const Expr f = random_trig(rng, 4, 3);
  const SpectralGrid g = sample_expr(f, {8, 8, 8, 8});
  const Expr back = g.to_expr();
  for (std::size_t i = 0; i < g.size(); i += 97) EXPECT_NEAR(eval(back, g.point(i)), g.values[i], 1e-12);
  // Between nodes too, since f is band-limited below the Nyquist frequency.
  const std::vector<double> x{0.123, 1.7, 2.9, 5.1};
  EXPECT_NEAR(eval(back, x), eval(f, x), 1e-12);
}

TEST(SpectralGrid, FileRoundTripAndHeader) {
  SpectralGrid g({4, 2});
  for (std::size_t i = 0; i < g.size(); ++i) g.values[i] = 0.5 * i - 1.25;
  const auto path = (std::filesystem::temp_directory_path() / "ahg_grid_test.bin").string();
  save_grid(g, path);
  std::ifstream is(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), {});
  ASSERT_EQ(bytes.size(), 8u + 8u + 2 * 8u + 8 * 8u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "AHGGRID1");
  EXPECT_EQ(bytes[8], 2);
  EXPECT_EQ(bytes[16], 4);
  EXPECT_EQ(bytes[24], 2);
  const SpectralGrid back = load_grid(path);
  EXPECT_EQ(back.resolution, g.resolution);
  EXPECT_EQ(back.values, g.values);

  std::ofstream(path, std::ios::binary) << "NOTAGRID";
  EXPECT_THROW(load_grid(path), ConformalError);
  std::filesystem::remove(path);
}

TEST(ScaleChart, ZeroFactorIsIdentity) {
  const auto hopf = load("hopf_surface");
  const ConformalPair pair = scale_chart(hopf.chart, Expr(0.0));
  for (const auto& p : sample_points(hopf.chart, 3, 2)) {
    for (int i = 0; i < 16; ++i) EXPECT_DOUBLE_EQ(eval(pair.scaled.g[i], p), eval(hopf.chart.g[i], p));
    EXPECT_LE(lee_transform_residual(pair, p), 1e-12);
    for (const auto& r : conformal_scalar_residuals(pair, p)) EXPECT_LE(r.abs_residual, 1e-12) << identity_name(r.id);
  }
}

TEST(ScaleChart, VolumeElementScales) {
  const auto kt = load("kodaira_thurston");
  const Expr f = parse4("0.2*x1*x3 - 0.1*x2");
  const ConformalPair pair = scale_chart(kt.chart, f);
  CatalogEntry e = kt;
  QuadratureOptions opt;
  opt.gauss_nodes = 6;
  opt.estimate_error = false;
  const double lhs = integrate(e, pair.scaled, [](std::span<const double>) { return 1.0; }, opt).value;
  const double rhs =
      integrate(e, kt.chart, [&](std::span<const double> x) { return std::exp(4.0 * eval(f, x)); }, opt).value;
  EXPECT_NEAR(lhs, rhs, 1e-12 * rhs);
}

TEST(ScaleChart, FlatTorusLeeFormIsTwiceDf) {
  const auto t4 = load("t4_kahler");
  const ConformalPair pair = scale_chart(t4.chart, parse4("0.1*sin(x1)"));
  for (const auto& p : sample_points(t4.chart, 5, 3)) {
    const LeeFormResult lf = lee_form(pair.scaled, p);
    // Frame components: e_1 = e^{-f} d_1, so alpha(e_1) = e^{-f} 0.2 cos(x1).
    const double f = 0.1 * std::sin(p[0]);
    EXPECT_NEAR(lf.alpha.components(0), std::exp(-f) * 0.2 * std::cos(p[0]), 1e-12);
    for (int A = 1; A < 4; ++A) EXPECT_NEAR(lf.alpha.components(A), 0.0, 1e-12);
    EXPECT_LE(lee_transform_residual(pair, p), 1e-12);
  }
}

TEST(ScaleChart, HopfLeeTransform) {
  const auto hopf = load("hopf_surface");
  const ConformalPair pair = scale_chart(hopf.chart, parse4("0.1*sin(x1)*x2 + 0.05*x3*x4 - 0.2*log(x1^2+x2^2)"));
  for (const auto& p : sample_points(hopf.chart, 10, 17)) EXPECT_LE(lee_transform_residual(pair, p), 1e-9);
}

TEST(ChernLaplacian, ConstantAndEigenfunction) {
  const auto t4 = load("t4_kahler");
  const auto hopf = load("hopf_surface");
  for (const auto& p : sample_points(hopf.chart, 3, 4)) {
    const ChernLaplacian c = chern_laplacian(hopf.chart, Expr(2.5), p);
    EXPECT_NEAR(c.hessian, 0.0, 1e-13);
    EXPECT_NEAR(c.hodge_lee, 0.0, 1e-13);
    EXPECT_NEAR(c.ddc, 0.0, 1e-13);
  }
  for (const auto& p : sample_points(t4.chart, 5, 4)) {
    const ChernLaplacian c = chern_laplacian(t4.chart, parse4("sin(x1)"), p);
    EXPECT_NEAR(c.hessian, std::sin(p[0]), 1e-12);
    EXPECT_NEAR(c.hodge_lee, std::sin(p[0]), 1e-12);
    EXPECT_NEAR(c.ddc, std::sin(p[0]), 1e-12);
  }
}

TEST(ChernLaplacian, HopfRadialRoutesAgree) {
  const auto hopf = load("hopf_surface");
  const Expr f = parse4("log(x1^2+x2^2+x3^2+x4^2) + 0.3*x1*x2");
  for (const auto& p : sample_points(hopf.chart, 10, 9)) {
    const ChernLaplacian c = chern_laplacian(hopf.chart, f, p);
    EXPECT_LE(std::abs(c.hessian - c.hodge_lee), 1e-7);
    EXPECT_LE(std::abs(c.hodge_lee - c.ddc), 1e-7);
  }
}

TEST(ConformalResiduals, FlatTorusScalars) {
  const auto t4 = load("t4_kahler");
  const Expr f = parse4("0.1*sin(x1)");
  const ConformalPair pair = scale_chart(t4.chart, f);
  for (const auto& p : sample_points(t4.chart, 5, 6)) {
    const auto res = conformal_scalar_residuals(pair, p);
    ASSERT_EQ(res.size(), 4u);
    EXPECT_EQ(res[0].id, IdentityId::I3_11);
    // Base S1 = 0 and Delta^Ch f = 0.1 sin(x1) on the flat torus.
    EXPECT_NEAR(res[0].rhs, 2 * 0.1 * std::sin(p[0]), 1e-12);
    EXPECT_LE(res[0].abs_residual, 1e-8);
    EXPECT_NEAR(res[1].rhs, 0.1 * std::sin(p[0]), 1e-12);
    EXPECT_LE(res[1].abs_residual, 1e-8);
  }
}

TEST(ConformalResiduals, HopfGenericFactor) {
  const auto hopf = load("hopf_surface");
  const ConformalPair pair = scale_chart(hopf.chart, parse4("0.1*sin(x1)*x2 + 0.05*x3*x4 - 0.2*log(x1^2+x2^2)"));
  for (const auto& p : sample_points(hopf.chart, 10, 21))
    for (const auto& r : conformal_scalar_residuals(pair, p)) EXPECT_LE(r.rel_residual, 1e-7) << identity_name(r.id);
}

TEST(ConformalResiduals, ChernLaplacianCovarianceTwentyPoints) {
  const auto iw = load("iwasawa");
  const Expr f = parse_expression("0.1*x1*x2 - 0.2*x5 + 0.05*x3^2", 6);
  const ConformalPair pair = scale_chart(iw.chart, f);
  const Expr v = parse_expression("sin(x1 + x4) + x2*x6", 6);
  for (const auto& p : sample_points(iw.chart, 20, 8)) {
    const auto res = conformal_scalar_residuals(pair, p, v);
    EXPECT_EQ(res[2].id, IdentityId::I4_2);
    EXPECT_LE(res[2].abs_residual, 1e-8);
  }
}

TEST(ConformalResiduals, PointwiseBudgetOnScaledHermitianCharts) {
  const auto hopf = load("hopf_surface");
  const ConformalPair pair = scale_chart(hopf.chart, parse4("0.3*x1 - 0.1*x2*x4"));
  for (const auto& p : sample_points(hopf.chart, 5, 2)) {
    const CurvatureReport r = curvature_report(pair.scaled, p);
    const double e = std::exp(-2 * (0.3 * p[0] - 0.1 * p[1] * p[3]));
    const double rhs = r.s / 2 + r.N02 / 16 + 0.25 * r.budget.norm2_dF_plus - 0.5 * r.delta_alpha;
    EXPECT_LE(std::abs(e * rhs - e * r.S1), 1e-7);
  }
}

TEST(Quadrature, GaussLegendreExactness) {
  std::vector<double> x, w;
  for (int n : {1, 2, 5, 24}) {
    gauss_legendre(n, x, w);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += w[i] * std::pow(x[i], k);
      EXPECT_NEAR(s, k % 2 ? 0.0 : 2.0 / (k + 1), 1e-14) << n << " " << k;
    }
  }
}

TEST(Quadrature, TorusVolumeAndLaplacianIntegral) {
  const auto t4 = load("t4_kahler");
  const Quadrature vol = integrate(t4, [](std::span<const double>) { return 1.0; });
  EXPECT_NEAR(vol.value, std::pow(2 * kPi, 4), 1e-9);
  const Expr v = parse4("sin(x1)*cos(x2)");
  QuadratureOptions opt;
  opt.torus_resolution = 8;
  const Quadrature q =
      integrate(t4, [&](std::span<const double> x) { return chern_laplacian(t4.chart, v, x).hessian; }, opt);
  EXPECT_LE(std::abs(q.value), 1e-10);
}

TEST(Quadrature, HopfVolumeAndGauduchonIdentity) {
  const auto hopf = load("hopf_surface");
  const Quadrature vol = integrate(hopf, [](std::span<const double>) { return 1.0; });
  const double exact = 2 * kPi * kPi * std::log(2.0);
  EXPECT_NEAR(vol.value, exact, 1e-10 * exact);
  EXPECT_LE(vol.error_estimate, 1e-8);

  QuadratureOptions opt;
  opt.hopf_nodes = 4;
  const Quadrature lhs = integrate(hopf, [&](std::span<const double> x) {
    const auto c = chern_scalars(hopf.chart, x);
    return c.S1 - c.S2;
  }, opt);
  const Quadrature rhs = integrate(hopf, [&](std::span<const double> x) {
    return 0.5 * curvature_report(hopf.chart, x).alpha2;
  }, opt);
  EXPECT_LE(relative_residual(lhs.value, rhs.value), 1e-3);
  EXPECT_GT(lhs.value, 1.0);
}

TEST(Quadrature, RejectsUndeclaredDomains) {
  EXPECT_THROW(integrate(load("s4_round"), [](std::span<const double>) { return 1.0; }), ConformalError);
  EXPECT_THROW(integrate(load("s6_nearly_kahler"), [](std::span<const double>) { return 1.0; }), ConformalError);
}

TEST(Gamma, FlatTorusVanishes) {
  const auto t4 = load("t4_kahler");
  for (auto [l, m] : {std::pair{1.0, 0.0}, {0.0, 1.0}, {2.0, -3.0}}) {
    const GammaInvariant g = gamma_invariant(t4, l, m);
    EXPECT_NEAR(g.value, 0.0, 1e-12);
    EXPECT_NEAR(g.unit_volume_factor, 1.0 / (4 * kPi * kPi), 1e-12);
  }
}

TEST(Gamma, HopfPositive) {
  const auto hopf = load("hopf_surface");
  QuadratureOptions opt;
  opt.hopf_nodes = 6;
  const GammaInvariant g = gamma_invariant(hopf, 1.0, 0.0, std::nullopt, opt);
  EXPECT_GT(g.value, 0.0);
  // S1 = 4 everywhere: Gamma = 4 V / sqrt(V).
  const double V = 2 * kPi * kPi * std::log(2.0);
  EXPECT_NEAR(g.value, 4 * std::sqrt(V), 1e-7 * g.value);
  EXPECT_LE(g.lee_coclosed_residual, 1e-8);
}

TEST(Gamma, RequiresGauduchonAndIsConformallyInvariant) {
  const auto tp = load("t4_perturbed");
  EXPECT_THROW(gamma_invariant(tp, 1.0, 0.0), ConformalError);
  const GauduchonSearch gs = find_gauduchon_factor(tp.chart);
  ASSERT_TRUE(gs.converged);
  const Expr factor = gs.f.to_expr() + Expr(gs.volume_shift);
  const GammaInvariant scaled = gamma_invariant(tp, 1.0, 2.0, factor);
  const GammaInvariant base = gamma_invariant(load("t4_kahler"), 1.0, 2.0);
  EXPECT_NEAR(scaled.value, base.value, 1e-5);
  EXPECT_NEAR(scaled.volume, 1.0, 1e-9);
}

TEST(TorusFamily, RejectsOtherCharts) {
  EXPECT_THROW(torus_family(load("hopf_surface").chart, {8}), ConformalError);
  EXPECT_THROW(torus_family(load("kodaira_thurston").chart, {8}), ConformalError);
  EXPECT_THROW(torus_family(load("t4_kahler").chart, {6}), ConformalError);
}

TEST(TorusFamily, SpectralChernLaplacianMatchesJets) {
  const auto tp = load("t4_perturbed");
  const TorusFamily fam = torus_family(tp.chart, {16});
  const Expr v = parse4("sin(x1 + x2) + 0.5*cos(2*x3 - x4)");
  const SpectralGrid lap = chern_laplacian(fam, sample_expr(v, fam.h.resolution));
  for (std::size_t i = 0; i < lap.size(); i += 4099)
    EXPECT_NEAR(lap.values[i], chern_laplacian(tp.chart, v, lap.point(i)).hessian, 1e-11);
  const SpectralGrid da = lee_codifferential(fam);
  for (std::size_t i = 0; i < da.size(); i += 8191)
    EXPECT_NEAR(da.values[i], curvature_report(tp.chart, da.point(i)).delta_alpha, 1e-11);
}

TEST(TorusFamily, AdjointIdentity) {
  std::mt19937_64 rng(3);
  for (const char* name : {"t4_kahler", "t4_perturbed"}) {
    const TorusFamily fam = torus_family(load(name).chart, {16});
    for (int trial = 0; trial < 5; ++trial) {
      const SpectralGrid u = sample_expr(random_trig(rng, 4, 3), fam.h.resolution);
      const SpectralGrid v = sample_expr(random_trig(rng, 4, 3), fam.h.resolution);
      const double lhs = l2_product(fam, chern_laplacian(fam, u), v);
      const double rhs = l2_product(fam, u, chern_laplacian_adjoint(fam, v));
      EXPECT_LE(std::abs(lhs - rhs), 1e-8 * std::max({1.0, std::abs(lhs), std::abs(rhs)})) << name;
    }
  }
}

TEST(TorusFamily, AdjointKernelIsConstants) {
  const TorusFamily fam = torus_family(load("t4_kahler").chart, {8});
  const auto kernel = adjoint_kernel_modes(fam);
  ASSERT_EQ(kernel.size(), 1u);
  EXPECT_EQ(kernel[0], std::vector<int>(4, 0));
}

TEST(TorusFamily, LaplacianIntegratesToZeroOnGauduchonMetrics) {
  std::mt19937_64 rng(8);
  const auto tp = load("t4_perturbed");
  const GauduchonSearch gs = find_gauduchon_factor(tp.chart);
  const ConformalPair pair = scale_chart(tp.chart, gs.f);
  const TorusFamily gaud = torus_family(pair.scaled, {16});
  const TorusFamily plain = torus_family(tp.chart, {16});
  for (int trial = 0; trial < 5; ++trial) {
    const SpectralGrid v = sample_expr(random_trig(rng, 4, 3) + parse4("sin(x1)"), gaud.h.resolution);
    EXPECT_LE(std::abs(grid_integral(gaud, chern_laplacian(gaud, v))), 1e-10);
  }
  const SpectralGrid c1 = sample_expr(parse4("sin(x1)"), plain.h.resolution);
  EXPECT_GT(std::abs(grid_integral(plain, chern_laplacian(plain, c1))), 1e-3);
}

TEST(MixedEquation, KahlerTorusIsTrivial) {
  const MixedSolution s = solve_mixed_equation(load("t4_kahler").chart, 1.0, 0.0, {8});
  EXPECT_EQ(s.f.sup(), 0.0);
  EXPECT_EQ(s.gamma, 0.0);
  EXPECT_EQ(s.residual, 0.0);
}

TEST(MixedEquation, PerturbedTorus) {
  const auto tp = load("t4_perturbed");
  const MixedSolution s = solve_mixed_equation(tp.chart, 1.0, 0.0, {16}, std::nullopt, 12);
  EXPECT_LE(s.residual, 1e-10);
  EXPECT_LE(s.check_residual, 1e-6);
  EXPECT_LE(std::abs(s.f.mean()), 1e-15);
  // The conformal class contains the flat metric, so f = -h.
  for (std::size_t i = 0; i < s.f.size(); i += 37)
    EXPECT_NEAR(s.f.values[i], -0.05 * std::sin(s.f.point(i)[0]), 1e-13);
}

TEST(MixedEquation, OtherWeights) {
  const auto tp = load("t4_perturbed");
  for (auto [l, m] : {std::pair{0.0, 1.0}, {1.0, 1.0}, {-1.0, 3.0}}) {
    const MixedSolution s = solve_mixed_equation(tp.chart, l, m, {16}, std::nullopt, 6);
    EXPECT_LE(s.residual, 1e-10);
    EXPECT_LE(s.check_residual, 1e-6);
  }
}

TEST(MixedEquation, Errors) {
  const auto tp = load("t4_perturbed");
  EXPECT_THROW(solve_mixed_equation(tp.chart, 1.0, -2.0, {8}), ConformalError);
  EXPECT_THROW(solve_mixed_equation(load("hopf_surface").chart, 1.0, 0.0, {8}), ConformalError);
  EXPECT_THROW(solve_mixed_equation(tp.chart, 1.0, 0.0, {8}, 1.0), ConformalError);
  EXPECT_NO_THROW(solve_mixed_equation(tp.chart, 1.0, 0.0, {8}, 0.0));
}

TEST(GauduchonSearch, AlreadyGauduchon) {
  const GauduchonSearch gs = find_gauduchon_factor(load("t4_kahler").chart, 1e-9, 4, {8});
  EXPECT_TRUE(gs.converged);
  EXPECT_EQ(gs.iterations, 0);
  EXPECT_EQ(gs.f.sup(), 0.0);
  EXPECT_NEAR(gs.volume_shift, -std::log(2 * kPi), 1e-12);
}

TEST(GauduchonSearch, RecoversPerturbation) {
  const auto tp = load("t4_perturbed");
  const GauduchonSearch gs = find_gauduchon_factor(tp.chart);
  EXPECT_TRUE(gs.converged);
  ASSERT_GE(gs.history.size(), 2u);
  for (std::size_t i = 1; i < gs.history.size(); ++i) EXPECT_LT(gs.history[i], gs.history[i - 1]);
  SpectralGrid d = gs.f;
  for (std::size_t i = 0; i < d.size(); ++i) d.values[i] += 0.05 * std::sin(d.point(i)[0]);
  const double m = d.mean();
  double err = 0;
  for (double v : d.values) err = std::max(err, std::abs(v - m));
  EXPECT_LE(err, 1e-5);

  // Independent check of co-closedness with jets on the rescaled chart.
  const ConformalPair pair = scale_chart(tp.chart, gs.f.to_expr() + Expr(gs.volume_shift));
  for (const auto& p : sample_points(tp.chart, 5, 12))
    EXPECT_LE(std::abs(curvature_report(pair.scaled, p).delta_alpha), 1e-8);
}

TEST(GauduchonSearch, Unconverged) {
  const GauduchonSearch gs = find_gauduchon_factor(load("t4_perturbed").chart, 1e-9, 4, {16}, 1);
  EXPECT_FALSE(gs.converged);
  EXPECT_EQ(gs.iterations, 1);
  EXPECT_GT(gs.residual, 1e-9);
}
