#pragma once

// Scalar curvatures, the Chern connection and the pointwise identity registry.

#include <optional>
#include <string>
#include <vector>

#include "ahg/hermitian.hpp"

namespace ahg {

struct RicciScalar {
  TensorD ric;
  double s = 0;
};
RicciScalar ricci_and_scalar(const Geometry& geo);
RicciScalar ricci_and_scalar(const ChartSpec& chart, std::span<const double> p);

struct JScalar {
  double s_J = 0;          // real-frame trace of Ric_J
  double s_J_unitary = 0;  // 2 sum R(u_i bar, u_i, u_j, u_j bar)
  double s = 0;            // real-frame trace
  double s_line1 = 0;      // first unitary expression for s
  double s_line2 = 0;      // second unitary expression for s
  TensorD ric_J;
};
JScalar j_scalar(const Geometry& geo);
JScalar j_scalar(const ChartSpec& chart, std::span<const double> p);

/// R evaluated on the basis rows of W in every slot.
TensorC complexify(const TensorD& t, const Eigen::MatrixXcd& W);

/// K(C,A,B) = theta^C(D_{e_A} e_B) for the Chern connection D.
TensorJ chern_connection(const Geometry& geo);

struct ChernConnectionCheck {
  double metric = 0;   // Dg
  double complex = 0;  // DJ
  double torsion_11 = 0;  // J-invariant part of the torsion
};
ChernConnectionCheck check_chern_connection(const Geometry& geo, const TensorJ& K);

struct ChernScalars {
  double S1 = 0, S2 = 0;
  TensorD rho;       // Chern-Ricci form, frame components
  TensorD R;         // Chern curvature at the point
  std::optional<double> drho;  // sup |d rho| when jets allow
};
ChernScalars chern_scalars(const Geometry& geo);
ChernScalars chern_scalars(const ChartSpec& chart, std::span<const double> p);

/// Chern Laplacian of f along three routes.
struct ChernLaplacian {
  double hessian = 0;   // -sum [H(e_i,e_i) + H(Je_i,Je_i)] with the Chern Hessian
  double hodge_lee = 0; // Delta f + <alpha, df>
  double ddc = 0;       // -<d J df, F>
};
ChernLaplacian chern_laplacian_routes(const Geometry& geo, const TensorJ& K, const TensorJ& alpha, const Jet& f);

/// Default smooth test function for the Chern Laplacian identity.
Expr identity_test_function(int dim);

enum class IdentityId {
  I2_1, I2_3, I2_4, I2_5, I2_6, I2_7, I3_2, I3_3, I3_5, I4_4, I5_4, I5_5,
  // conformal pairs
  I3_11, I3_12, I4_2, I4_5,
};

/// Pointwise identities evaluated by curvature_report.
const std::vector<IdentityId>& all_identities();
/// Identities relating a chart and a conformal rescaling.
const std::vector<IdentityId>& conformal_identities();
std::string identity_name(IdentityId id);
std::optional<IdentityId> parse_identity(std::string_view name);
/// Identities that assume (dF)- = N0 = 0.
bool identity_needs_hermitian(IdentityId id);

struct IdentityResidual {
  IdentityId id = IdentityId::I2_3;
  std::vector<double> point;
  double lhs = 0, rhs = 0;
  double abs_residual = 0, rel_residual = 0;
};

double relative_residual(double lhs, double rhs);

struct CurvatureReport {
  std::vector<double> point;
  int n = 2;
  double s = 0, s_J = 0, S1 = 0, S2 = 0;
  double alpha2 = 0, N02 = 0, dF_minus2 = 0, dF0_plus2 = 0, dF2 = 0, delta_alpha = 0, nablaF2 = 0;
  TensorD rho;
  std::optional<double> drho;
  HermitianBudget budget;
  JScalar js;
  ChernLaplacian lap;
  std::vector<IdentityResidual> identities;  // every registry id at this point
};

/// Full pointwise evaluation. Geometry order 2 suffices; order 3 adds d rho.
CurvatureReport curvature_report(const Geometry& geo, const Expr& test_fn);
CurvatureReport curvature_report(const ChartSpec& chart, std::span<const double> p, int order = 2);

IdentityResidual identity_residual(const ChartSpec& chart, std::span<const double> p, IdentityId id);

/// H(xi) = R(xi bar, xi, xi, xi bar)/|xi|^4 for xi = sum xi^i u_i.
double hol_sect_curv(const TensorD& R, const Eigen::MatrixXcd& W, const Eigen::VectorXcd& xi);
double hol_sect_curv(const ChartSpec& chart, std::span<const double> p, const Eigen::VectorXcd& xi);

struct BergerResult {
  double lhs = 0, rhs = 0, std_error = 0;
  int samples = 0;
};
/// Volume of the unit sphere S^{2n-1}.
double sphere_volume(int n);
BergerResult berger_average(const Geometry& geo, int samples, std::uint64_t seed);
BergerResult berger_average(const ChartSpec& chart, std::span<const double> p, int samples, std::uint64_t seed);

}  // namespace ahg
