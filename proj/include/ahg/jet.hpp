#pragma once

// Truncated multivariate Taylor polynomials ("jets").
//
// A Jet stores the Taylor coefficients of a scalar field at a point, for all
// monomials of total degree <= order in `vars` variables. Coefficients are
// indexed by unordered multi-indices, so mixed partials are symmetric by
// construction. Arithmetic is exact truncated polynomial arithmetic.
//
// A Jet with vars() == 0 is a plain constant; it adopts the shape of the other
// operand in binary operations.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <stdexcept>

#include <Eigen/Core>

namespace ahg {

inline constexpr int kMaxVars = 6;
inline constexpr int kMaxOrder = 3;
inline constexpr int kMaxCoeffs = 84;  // C(6 + 3, 3)

/// Number of monomials of degree <= order in `vars` variables.
int monomial_count(int vars, int order);

class JetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Jet {
 public:
  Jet() = default;
  Jet(double c) { c_[0] = c; }  // NOLINT: implicit constants keep formulas readable

  static Jet constant(int vars, int order, double c);
  /// The coordinate function x_index expanded around `value`.
  static Jet variable(int vars, int order, int index, double value);

  int vars() const { return vars_; }
  int order() const { return order_; }
  bool is_constant() const { return vars_ == 0; }
  std::size_t size() const { return static_cast<std::size_t>(monomial_count(vars_, order_)); }

  double value() const { return c_[0]; }
  /// Raw Taylor coefficient of monomial number k (graded ordering).
  double coeff(std::size_t k) const { return c_[k]; }
  double& coeff(std::size_t k) { return c_[k]; }

  /// Partial derivative value, e.g. {0, 0, 1} for d^3/dx0 dx0 dx1.
  double derivative(std::initializer_list<int> indices) const;
  double derivative(std::span<const int> indices) const;

  /// d/dx_v; the result has order one less.
  Jet partial(int v) const;
  Jet truncated(int order) const;
  /// Re-express in a larger variable set; the first vars() variables are kept.
  Jet embedded(int vars) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator-(Jet a);

  friend bool operator==(const Jet& a, const Jet& b);

  /// Compose with a univariate function given its derivatives at value():
  /// derivs[k] = phi^{(k)}(value()), k = 0..order().
  Jet compose(std::span<const double> derivs) const;

 private:
  void adopt_shape(const Jet& o);

  std::array<double, kMaxCoeffs> c_{};
  std::int8_t vars_ = 0;
  std::int8_t order_ = kMaxOrder;
};

Jet sin(const Jet& x);
Jet cos(const Jet& x);
Jet tan(const Jet& x);
Jet exp(const Jet& x);
Jet log(const Jet& x);
Jet sqrt(const Jet& x);
Jet atan(const Jet& x);
/// x^(num/den). Integer exponents accept any base (nonzero when negative);
/// non-integer exponents need a positive base.
Jet pow(const Jet& x, long num, long den = 1);
Jet abs(const Jet& x);
Jet inverse(const Jet& x);

std::ostream& operator<<(std::ostream& os, const Jet& j);

/// Exponent tuple of monomial k in the graded ordering for `vars` variables.
std::array<int, kMaxVars> monomial_exponents(int vars, std::size_t k);
/// Index of the monomial with the given exponents (sum <= kMaxOrder).
std::size_t monomial_index(int vars, std::span<const int> exponents);

}  // namespace ahg

namespace Eigen {
template <>
struct NumTraits<ahg::Jet> : GenericNumTraits<double> {
  using Real = ahg::Jet;
  using NonInteger = ahg::Jet;
  using Nested = ahg::Jet;
  using Literal = ahg::Jet;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 20,
    AddCost = 40,
    MulCost = 400
  };
  static inline Real epsilon() { return Real(std::numeric_limits<double>::epsilon()); }
  static inline Real dummy_precision() { return Real(1e-12); }
  static inline int digits10() { return std::numeric_limits<double>::digits10; }
};
}  // namespace Eigen
