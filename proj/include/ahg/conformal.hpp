#pragma once

// Conformal rescalings, the Chern Laplacian, global quadrature on compact
// catalog charts, the mixed invariant Gamma and spectral solves on tori.
//
// Torus operations work on the conformally flat family g = e^{2h} delta with
// the standard J on [0, 2pi)^{2n}. There the Chern Laplacian is
// e^{-2h} Delta_0, with Delta_0 = -sum d^2 the flat Laplacian.

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ahg/catalog.hpp"
#include "ahg/curvature.hpp"

namespace ahg {

class ConformalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Grids

/// Scalar field on the uniform grid of [0, 2pi)^d, row-major (last axis fastest).
struct SpectralGrid {
  std::vector<int> resolution;
  std::vector<double> values;

  SpectralGrid() = default;
  explicit SpectralGrid(std::vector<int> res, double fill = 0.0);

  static SpectralGrid sample(std::vector<int> res, const std::function<double(std::span<const double>)>& fn);

  int axes() const { return static_cast<int>(resolution.size()); }
  std::size_t size() const { return values.size(); }
  /// Grid coordinates of a flat index.
  std::vector<double> point(std::size_t index) const;
  /// Signed wave number of an index along one axis.
  int wave_number(int axis, int j) const;
  std::vector<int> wave_vector(std::size_t index) const;

  /// Coefficients c_k with f(x) = sum c_k e^{i k.x}.
  std::vector<std::complex<double>> fourier() const;
  /// Real part of the inverse transform.
  static SpectralGrid from_fourier(std::vector<int> res, std::span<const std::complex<double>> coeffs);

  double mean() const;
  double sup() const;

  /// Trigonometric polynomial through the grid values, modes below `cutoff`
  /// (relative to the largest) dropped.
  Expr to_expr(double cutoff = 1e-14) const;
};

/// max |c_k - conj(c_{-k})|.
double hermitian_symmetry_defect(const std::vector<int>& res, std::span<const std::complex<double>> coeffs);

/// Binary record: "AHGGRID1", uint64 axis count, uint64 resolutions, f64 values (little-endian).
void save_grid(const SpectralGrid& grid, const std::string& path);
SpectralGrid load_grid(const std::string& path);

// ---------------------------------------------------------------------------
// Conformal pairs

struct ConformalPair {
  ChartSpec base;
  Expr f;
  ChartSpec scaled;  // e^{2f} g, same J
};

ConformalPair scale_chart(const ChartSpec& chart, const Expr& f);
ConformalPair scale_chart(const ChartSpec& chart, const SpectralGrid& f, double cutoff = 1e-14);

/// max |alpha~ - alpha - 2(n-1) df| in coordinate components.
double lee_transform_residual(const ConformalPair& pair, std::span<const double> p);

/// All three routes; throws JetError when the chart cannot supply 2-jets.
ChernLaplacian chern_laplacian(const ChartSpec& chart, const Expr& f, std::span<const double> p);

/// Residuals of I3.11, I3.12, I4.2 and I4.5. `v` is the test function for I4.2
/// (identity_test_function when empty).
std::vector<IdentityResidual> conformal_scalar_residuals(const ConformalPair& pair, std::span<const double> p,
                                                         std::optional<Expr> v = std::nullopt);

// ---------------------------------------------------------------------------
// Quadrature

struct QuadratureOptions {
  int torus_resolution = 16;  // trapezoid nodes per periodic axis
  int gauss_nodes = 8;        // Gauss-Legendre nodes per bounded axis
  int hopf_nodes = 24;        // per polar axis on the Hopf annulus
  /// Coordinates the integrand depends on besides the chart data (all if empty).
  std::vector<bool> field_axes;
  bool estimate_error = true;  // repeat with halved node counts
};

struct Quadrature {
  double value = 0;
  double error_estimate = 0;
  std::size_t evaluations = 0;
};

using ScalarField = std::function<double(std::span<const double>)>;

/// Coordinates referenced by the chart's metric and structure.
std::vector<bool> chart_axes(const ChartSpec& chart);

/// Integral of field * dV_g over the entry's fundamental domain.
Quadrature integrate(const CatalogEntry& entry, const ScalarField& field, const QuadratureOptions& opt = {});
/// Same with the metric of `chart` on the domain of `entry`.
Quadrature integrate(const CatalogEntry& entry, const ChartSpec& chart, const ScalarField& field,
                     const QuadratureOptions& opt = {});

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights);

// ---------------------------------------------------------------------------
// The mixed invariant

struct GammaInvariant {
  double lambda = 0, mu = 0;
  double value = 0;               // after unit-volume normalization
  double raw_integral = 0;        // int (lambda S1 + mu S2) dV before normalization
  double volume = 0;
  double unit_volume_factor = 1;  // c with c g of unit volume
  double lee_coclosed_residual = 0;  // sup |delta alpha| over the nodes
  double error_estimate = 0;
};

/// Throws ConformalError when the (rescaled) metric is not Gauduchon within `tol`.
GammaInvariant gamma_invariant(const CatalogEntry& entry, double lambda, double mu,
                               std::optional<Expr> gauduchon_factor = std::nullopt,
                               const QuadratureOptions& opt = {}, double tol = 1e-8);

// ---------------------------------------------------------------------------
// Torus spectral calculus

struct TorusFamily {
  int n = 2;
  SpectralGrid h;  // g = e^{2h} delta
};

/// Throws ConformalError unless the chart is a conformally flat torus with standard J.
TorusFamily torus_family(const ChartSpec& chart, std::vector<int> res);

SpectralGrid flat_laplacian(const SpectralGrid& u);
std::vector<SpectralGrid> gradient(const SpectralGrid& u);
/// Delta^Ch u = e^{-2h} Delta_0 u.
SpectralGrid chern_laplacian(const TorusFamily& fam, const SpectralGrid& u);
/// Formal L^2(dV_g) adjoint: Delta v - <alpha, dv> + (delta alpha) v.
SpectralGrid chern_laplacian_adjoint(const TorusFamily& fam, const SpectralGrid& v);
/// delta^g alpha for the family metric.
SpectralGrid lee_codifferential(const TorusFamily& fam);
/// int u v dV_g by the trapezoid rule.
double l2_product(const TorusFamily& fam, const SpectralGrid& u, const SpectralGrid& v);
double grid_integral(const TorusFamily& fam, const SpectralGrid& u);
/// Wave vectors k whose Fourier mode is annihilated by the adjoint (norm <= tol).
std::vector<std::vector<int>> adjoint_kernel_modes(const TorusFamily& fam, double tol = 1e-10);

struct MixedSolution {
  SpectralGrid f;
  double gamma = 0;              // constant right-hand side used
  double residual = 0;           // sup |(n lambda + mu) Delta^Ch f - (gamma - S)|
  double zero_mode_removed = 0;  // projected compatibility defect
  double check_residual = -1;    // sup relative residual of lambda S1~ + mu S2~ = e^{-2f} gamma
};

/// Solves (n lambda + mu) Delta^Ch f = gamma - (lambda S1 + mu S2). Without
/// `gamma` the compatible constant is used. `check_points` > 0 evaluates the
/// rescaled scalars at that many grid points.
MixedSolution solve_mixed_equation(const ChartSpec& chart, double lambda, double mu, std::vector<int> res,
                                   std::optional<double> gamma = std::nullopt, int check_points = 0);

struct GauduchonSearch {
  SpectralGrid f;                // zero-mean factor; e^{2f} g is Gauduchon
  double volume_shift = 0;       // constant making e^{2(f + shift)} g of unit volume
  std::vector<double> history;   // objective after each accepted step (first entry: start)
  double residual = 0;           // sup |delta^ghat alpha^|
  int iterations = 0;
  bool converged = false;
};

GauduchonSearch find_gauduchon_factor(const ChartSpec& chart, double tol = 1e-9, int max_modes = 4,
                                      std::vector<int> res = {}, int max_iterations = 200);

}  // namespace ahg
