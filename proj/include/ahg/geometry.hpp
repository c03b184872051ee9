#pragma once

// Tensor calculus at a point of a chart, carried out on jets.
//
// Conventions:
//   R(X,Y,Z,W) = <R(Z,W)Y, X>,  R(Z,W) = [nabla_Z, nabla_W] - nabla_[Z,W]
//   conn(C,A,B) = Gamma^C_{AB} = theta^C(nabla_{e_A} e_B)
//   delta = -div on the leading slot; the Hodge Laplacian is nonnegative.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ahg/chart.hpp"
#include "ahg/jet.hpp"
#include "ahg/tensor.hpp"

namespace ahg {

using JetMatrix = Eigen::Matrix<Jet, Eigen::Dynamic, Eigen::Dynamic>;

struct FrameAtPoint {
  std::vector<double> point;
  Eigen::MatrixXd e;   // column A = e_A in coordinates
  Eigen::MatrixXcd u;  // column i = u_i in coordinates
};

class Geometry {
 public:
  /// `order` is the jet order of g and J (at most 3). `seed_order` permutes the
  /// coordinate vectors used to seed the adapted frame (identity if empty).
  Geometry(const ChartSpec& chart, std::span<const double> p, int order = kMaxOrder,
           std::span<const int> seed_order = {});

  int dim() const { return m_; }
  int n() const { return m_ / 2; }
  int order() const { return order_; }
  const std::vector<double>& point() const { return point_; }

  const JetMatrix& g() const { return g_; }
  const JetMatrix& ginv() const { return ginv_; }
  const JetMatrix& J() const { return J_; }        // J(i,j) = J^i_j
  const JetMatrix& E() const { return E_; }        // E(mu,A) = e_A^mu
  const JetMatrix& theta() const { return theta_; }  // theta(A,mu)
  const TensorJ& christoffel() const { return chr_; }  // chr(k,i,j) = Gamma^k_ij
  const TensorJ& connection() const { return conn_; }
  const TensorJ& riemann() const { return riem_; }   // R(A,B,C,D), order-2 jets
  /// J e_B = sum_C Jm(C,B) e_C.
  const Eigen::MatrixXd& Jm() const { return Jm_; }

  /// e_A(f): derivative along a frame vector; order drops by one.
  Jet e(int A, const Jet& f) const;
  /// Frame components e_A(f) of df.
  TensorJ df(const Jet& f) const;
  /// Levi-Civita derivative of a covariant frame tensor; new leading slot.
  TensorJ covariant(const TensorJ& t) const;
  /// Exterior derivative of a frame form.
  TensorJ d(const TensorJ& form) const;
  /// Codifferential of a frame form of degree >= 1.
  TensorJ codiff(const TensorJ& form) const;
  /// Curvature R(A,B,C,D) of the frame connection with coefficients
  /// K(A,C,B) = theta^A(D_{e_C} e_B).
  TensorJ curvature_of(const TensorJ& K) const;

  /// Covariant tensor with coordinate components -> frame components.
  TensorJ to_frame(const TensorJ& coord) const;
  /// Frame covariant tensor -> coordinate components.
  TensorJ to_coordinates(const TensorJ& frame) const;

  /// Rows 0..n-1: u_i = (e_i - i e_{n+i})/sqrt2, rows n..2n-1: conjugates,
  /// written in the real frame basis.
  Eigen::MatrixXcd unitary_rows() const;

  FrameAtPoint frame_at_point() const;

 private:
  void build_frame(std::span<const int> seed_order);

  int m_ = 0;
  int order_ = 0;
  std::vector<double> point_;
  JetMatrix g_, ginv_, J_, E_, theta_;
  TensorJ chr_, conn_, riem_;
  Eigen::MatrixXd Jm_;
};

/// Christoffel symbols Gamma^k_ij in the coordinate frame, with 1-jets.
TensorJ christoffel_jets(const ChartSpec& chart, std::span<const double> p, int order = 2);
TensorValue christoffel(const ChartSpec& chart, std::span<const double> p);

/// Riemann tensor in the adapted orthonormal frame.
TensorValue riemann(const ChartSpec& chart, std::span<const double> p);
/// Coordinate components R(rho,sigma,mu,nu) from the classical Christoffel
/// formula (independent of the frame machinery).
TensorJ riemann_coordinate(const ChartSpec& chart, std::span<const double> p, int order = 1);

FrameAtPoint adapted_frame(const ChartSpec& chart, std::span<const double> p,
                           std::span<const int> seed_order = {});

/// Exterior derivative of a form given by coordinate-component jets.
TensorJ ext_d_coordinate(const TensorJ& form);
/// Coordinate-component jets of a coordinate form given as expressions
/// (all m^k components, antisymmetric).
TensorJ form_jets(const std::vector<Expr>& components, int degree, int dim, std::span<const double> p, int order);

/// Exterior derivative of a coordinate form given by expressions.
TensorValue ext_d(const std::vector<Expr>& components, int degree, int dim, std::span<const double> p);
/// Codifferential of a coordinate form, returned in coordinate components.
TensorValue codiff(const ChartSpec& chart, const std::vector<Expr>& components, int degree,
                   std::span<const double> p);
/// Levi-Civita derivative of a coordinate covariant tensor, coordinate components.
TensorValue covder_form(const ChartSpec& chart, const std::vector<Expr>& components, int rank,
                        std::span<const double> p);

/// (delta d f)(p) = Hodge Laplacian of a function.
double hodge_laplacian_fn(const ChartSpec& chart, const Expr& f, std::span<const double> p);
double hodge_laplacian_fn(const Geometry& geo, const Jet& f);

/// Jets of a scalar expression at the geometry's point.
Jet scalar_jet(const Geometry& geo, const Expr& f, int order);

}  // namespace ahg
