#pragma once

// Almost-Hermitian invariants in the adapted orthonormal frame.
//
// F(X,Y) = g(JX,Y), alpha = J delta F with (J beta)(X) = -beta(JX),
// N(X,Y,Z) = <X, N(Y,Z)>, bN = cyclic average, N0 = N - bN.
// Norms sum over increasing form indices; TM-valued slots are summed freely.

#include <string>
#include <vector>

#include "ahg/geometry.hpp"

namespace ahg {

/// F(A,B) = Jm(B,A), constant jets.
TensorJ fundamental_form_jets(const Geometry& geo);
/// P(A,C,B) = (nabla_{e_A} J)^C_B.
TensorJ nabla_J(const Geometry& geo);
/// (J beta)(e_A) = -beta(J e_A) for a frame 1-form.
TensorJ complex_structure_on_1form(const Geometry& geo, const TensorJ& beta);
/// Lee form jets (order drops by one).
TensorJ lee_form_jets(const Geometry& geo);
/// N(A,B,C) = theta^A(N(e_B, e_C)) from nabla J.
TensorJ nijenhuis_jets(const Geometry& geo);
/// Contraction (Lambda beta)(...) = sum_i beta(e_i, e_{n+i}, ...).
TensorD trace_with_F(const TensorD& form, int n);

/// Cyclic average t(A,B,C) -> (t(A,B,C) + t(B,C,A) + t(C,A,B)) / 3.
TensorD cyclic_part(const TensorD& t);
/// (t with J applied to slot `slot`)(..., X, ...) = t(..., JX, ...).
TensorD apply_J_slot(const TensorD& t, const Eigen::MatrixXd& Jm, int slot);

struct HermitianBudget {
  std::vector<double> point;
  int n = 2;
  TensorD F, dF, dF_minus, dF_plus, dF0_plus, alpha, N, bN, N0, nablaF;
  double norm2_dF = 0, norm2_dF_minus = 0, norm2_dF_plus = 0, norm2_dF0_plus = 0;
  double norm2_alpha = 0, norm2_N = 0, norm2_N0 = 0, norm2_nablaF = 0;
  double delta_alpha = 0;

  // Residuals of the structural identities.
  double split_residual = 0;      // (dF)+ + (dF)- - dF
  double primitive_residual = 0;  // Lambda((dF) - alpha^F/(n-1))
  double bN0_residual = 0;        // b(N0)
  double n_type_residual = 0;     // N(JX,Y) + J N(X,Y)
  double decomposition_residual = 0;  // nabla F minus its four-term decomposition
  double decomposition_norm = 0;      // |four-term decomposition|
  double budget_lhs = 0, budget_rhs = 0;  // |nabla F|^2 and the weighted sum
};

/// Needs a Geometry of order >= 2.
HermitianBudget hermitian_budget(const Geometry& geo);

TensorValue fundamental_form(const ChartSpec& chart, std::span<const double> p);

struct LeeFormResult {
  TensorValue alpha;
  double reconstruction_residual = 0;  // primitivity of dF - alpha^F/(n-1)
};
LeeFormResult lee_form(const ChartSpec& chart, std::span<const double> p);

struct NijenhuisResult {
  TensorValue N, bN, N0;
};
NijenhuisResult nijenhuis(const ChartSpec& chart, std::span<const double> p);
/// N^k_ij straight from the coordinate bracket formula.
TensorD nijenhuis_coordinate(const ChartSpec& chart, std::span<const double> p);

HermitianBudget df_components(const ChartSpec& chart, std::span<const double> p);
HermitianBudget nabla_F_budget(const ChartSpec& chart, std::span<const double> p);

struct GrayHervellaFlags {
  double dF_minus = 0, N0 = 0, dF0_plus = 0, alpha = 0;  // sup over samples of the norms
  bool dF_minus_zero = true, N0_zero = true, dF0_plus_zero = true, alpha_zero = true;
  std::string label;  // "Kahler" or e.g. "W3+W4"
};

/// Label from the four vanishing flags.
std::string gray_hervella_label(bool w1, bool w2, bool w3, bool w4);

GrayHervellaFlags classify_gray_hervella(const ChartSpec& chart, int sample_count, std::uint64_t seed,
                                         double tol = 1e-8);

}  // namespace ahg
