#pragma once

// Scalar-field expressions over coordinates x1..xd.
//
// Grammar (whitespace ignored):
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ('+'|'-') factor | base ('^' rational)?
//   base   := number | var | 'pi' | func '(' expr ')' | '(' expr ')'
//   var    := 'x' digits            (1-based)
//   func   := sin | cos | tan | exp | log | sqrt | atan
//   rational := ['-'] digits ['/' digits] | '(' rational ')'
//
// Expressions are immutable DAGs; sub-expressions may be shared. Evaluation
// memoizes shared nodes.

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ahg/jet.hpp"

namespace ahg {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Atan };

struct ExprNode;

class Expr {
 public:
  Expr();  // constant 0
  Expr(double c);  // NOLINT: implicit constants

  static Expr var(int index);  // 0-based coordinate index
  static Expr func(Func f, Expr arg);
  static Expr power(Expr base, long num, long den = 1);

  bool is_constant() const;
  bool is_constant(double c) const;
  double constant_value() const;
  /// Largest referenced coordinate index (0-based), -1 for none.
  int max_var_index() const;
  /// Number of distinct nodes in the DAG.
  std::size_t node_count() const;

  const ExprNode* node() const { return node_.get(); }

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

  Expr& operator+=(const Expr& o) { return *this = *this + o; }
  Expr& operator-=(const Expr& o) { return *this = *this - o; }
  Expr& operator*=(const Expr& o) { return *this = *this * o; }

 private:
  std::shared_ptr<const ExprNode> node_;

 public:
  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
  const std::shared_ptr<const ExprNode>& shared() const { return node_; }
};

Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr tan(const Expr& e);
Expr exp(const Expr& e);
Expr log(const Expr& e);
Expr sqrt(const Expr& e);
Expr atan(const Expr& e);

enum class NodeKind { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call };

struct ExprNode {
  NodeKind kind = NodeKind::Const;
  double value = 0.0;     // Const
  int index = 0;          // Var
  long num = 1, den = 1;  // Pow exponent
  Func func = Func::Sin;  // Call
  std::shared_ptr<const ExprNode> lhs, rhs;  // children (lhs only for unary)
};

/// Parse `src` over coordinates x1..x{dim}.
Expr parse_expression(std::string_view src, int dim);

/// Fully parenthesized text that parses back to an equivalent expression.
std::string to_string(const Expr& e);

/// Truncated Taylor expansion at `point` (dim = point.size()) to `order`.
Jet eval_jet(const Expr& e, std::span<const double> point, int order);
/// Batch evaluation sharing one memo table across all expressions.
std::vector<Jet> eval_jets(std::span<const Expr> exprs, std::span<const double> point, int order);
double eval(const Expr& e, std::span<const double> point);

/// Symbolic partial derivative d/dx_var (no simplification beyond constant folding).
Expr derivative(const Expr& e, int var);

/// Shared memo for repeated symbolic differentiation of related expressions.
class Differentiator {
 public:
  Differentiator();
  ~Differentiator();
  Differentiator(Differentiator&&) noexcept;
  Differentiator& operator=(Differentiator&&) noexcept;
  Expr operator()(const Expr& e, int var);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ahg
