#pragma once

// Twistor spaces of conformally flat 4-dimensional bases.
//
// Coordinates (x1..x4, a, b): base point and stereographic fiber coordinates.
// The local section of the frame bundle is u = e Q with e_a = phi^{-1} d_a and
// Q = L_q, left multiplication by the unit quaternion q ~ (1 + a j + b k) e^{i psi}.
// Coframe of g_t: theta^1..theta^4, 2t theta^5, 2t theta^6 with
// theta^5 = (w13 - w24)/2, theta^6 = (w14 + w23)/2 of the pulled-back connection.
// J+ has (1,0)-forms phi1, phi2, phi3; J- has phi1, phi2, conj(phi3).

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ahg/catalog.hpp"
#include "ahg/curvature.hpp"

namespace ahg {

enum class TwistorSign { Plus, Minus };

struct TwistorSpec {
  ChartSpec base;          // 4-dimensional, g = psi * delta with the standard J
  bool einstein = true;
  bool asd = true;
  double s_N = 0.0;        // base scalar curvature (Einstein bases)
  double t = 1.0;          // fiber scale
  TwistorSign sign = TwistorSign::Plus;
  double gauge_angle = 0.0;   // U(1) rotation of the local section
  double fiber_extent = 1.5;  // fiber coordinates sampled in [-extent, extent]^2
};

/// Spec over a catalog twistor base (s_N from its declared scalar curvature).
TwistorSpec twistor_spec(const CatalogEntry& base, double t, TwistorSign sign);

struct TwistorChart {
  TwistorSpec spec;
  ChartSpec chart;                            // 6-dimensional (g_t, J+-)
  std::vector<std::vector<Expr>> theta;       // theta^1..theta^4, theta^5, theta^6; 6 coordinate components each
  std::vector<std::vector<std::vector<Expr>>> omega;  // omega[a][b] = w^a_b, coordinate components
  std::vector<std::vector<Expr>> coframe;     // orthonormal coframe rows
  std::vector<std::vector<Expr>> Q;           // gauge rotation, u_b = sum_a e_a Q(a,b)
};

/// Throws ChartError for an invalid base (not conformally flat, failed ASD or
/// Einstein check) or t <= 0.
TwistorChart build_twistor_chart(const TwistorSpec& spec);

struct TwistorCoframe {
  std::vector<double> point;
  Eigen::MatrixXd theta;     // 6 x 6: rows theta^1..theta^6
  Eigen::MatrixXd coframe;   // 6 x 6: rows of the g_t-orthonormal coframe
  Eigen::MatrixXcd phi;      // 3 x 6: phi1, phi2, phi3
  double gram_residual = 0;  // |E^T g E - I| with g from the chart
  double fundamental_form_residual = 0;  // F from the phis vs g(J., .)
};
TwistorCoframe twistor_coframe(const TwistorChart& tc, std::span<const double> p);

struct ClosedFormScalars {
  double s = 0, s_J_plus = 0, s_J_minus = 0, S1_plus = 0, S1_minus = 0;
};
/// Throws std::invalid_argument for t <= 0.
ClosedFormScalars closed_form_scalars(double s_N, double t);

struct StructureResiduals {
  double first = 0;   // d theta + omega ^ theta
  double second = 0;  // d omega + omega ^ omega - Omega
  TensorD Omega;      // Omega^a_b(E_C, E_D) from d omega + omega ^ omega, a,b < 4
};
StructureResiduals structure_equation_residual(const TwistorChart& tc, std::span<const double> p);

struct LeviCivitaForms {
  TensorD forms;             // Theta^A_B(E_C), orthonormal frame components
  double structure_residual = 0;  // d Theta^A + Theta^A_B ^ Theta^B
  double antisymmetry = 0;        // Theta^A_B + Theta^B_A
  double scalar_curvature = 0;    // assembled from d Theta + Theta ^ Theta
};
LeviCivitaForms levi_civita_forms(const TwistorChart& tc, std::span<const double> p);

struct ChernRicciForm {
  TensorD rho;              // d(Theta^1_2 + Theta^3_4 +- Theta^5_6), orthonormal frame components
  double pairing = 0;       // <rho, F+->
  double formula_residual = 0;    // rho+ vs (2/t^2) Theta^5 ^ Theta^6 + 2 (Omega^1_2 + Omega^3_4)
  std::optional<double> einstein_residual;  // Omega^1_2 + Omega^3_4 vs (s_N / 12)(theta^12 + theta^34)
};
ChernRicciForm chern_ricci_forms(const TwistorChart& tc, std::span<const double> p);

struct CanonicalFormCheck {
  double type31 = 0;        // sup of the (3,1) part of d(phi1 ^ phi2 ^ conj phi3)
  double type13 = 0;        // sup of the (1,3) part
  double rhs_residual = 0;  // d(...) minus the displayed right side
  double rhs_norm = 0;
};
/// Requires the minus sign.
CanonicalFormCheck canonical_form_check(const TwistorChart& tc, std::span<const double> p);

struct TwistorIntegrability {
  double F_wedge_dF = 0;
  double alpha = 0;      // |alpha|
  double nijenhuis = 0;  // |N|
  double dF_minus = 0;   // |(dF)-|
};
TwistorIntegrability lee_and_integrability_check(const TwistorChart& tc, std::span<const double> p);

/// Self-dual combinations R1312 + R4212 + R1334 + R4234 and R1412 + R2312 + R1434 + R2334
/// in the frame u at a twistor point.
std::array<double, 2> asd_combinations(const TwistorChart& tc, std::span<const double> p);

}  // namespace ahg
