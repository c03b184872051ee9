#pragma once

// Coordinate charts carrying a metric and an almost complex structure as
// expression matrices.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ahg/expr.hpp"

namespace ahg {

class ChartError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMetricError : public ChartError {
 public:
  using ChartError::ChartError;
};

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool periodic = false;
};

struct ChartSpec {
  std::string name;
  int n = 2;                  // complex dimension
  std::vector<Axis> domain;   // one per real coordinate
  std::vector<Expr> g;        // g_ij, row-major 2n x 2n
  std::vector<Expr> J;        // J^i_j (row i, column j)

  int dim() const { return 2 * n; }
  const Expr& metric(int i, int j) const { return g[static_cast<std::size_t>(i * dim() + j)]; }
  const Expr& cplx(int i, int j) const { return J[static_cast<std::size_t>(i * dim() + j)]; }
};

/// Standard structure J d_i = d_{n+i} on a 2n-dimensional chart.
std::vector<Expr> standard_complex_structure(int n);
/// The identity matrix scaled by an expression.
std::vector<Expr> conformal_identity(int dim, const Expr& factor);

struct ChartInvariantReport {
  double symmetry = 0.0;        // max |g_ij - g_ji|
  double min_eigenvalue = 0.0;  // of g
  double j_squared = 0.0;       // max |J^2 + I|
  double compatibility = 0.0;   // max |J^T g J - g|
  bool ok(double tol = 1e-10) const {
    return symmetry <= tol && min_eigenvalue > 1e-12 && j_squared <= tol && compatibility <= tol;
  }
};

/// Point values of g and J; throws SingularMetricError for eigenvalues below 1e-12.
ChartInvariantReport check_chart(const ChartSpec& chart, std::span<const double> p);

/// Seeded interior sample points (periodic axes sampled on the full period).
std::vector<std::vector<double>> sample_points(const ChartSpec& chart, int count, std::uint64_t seed);

/// Deterministic 64-bit mixing of a seed with a stream index.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace ahg
