#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ahg/expr.hpp"

using namespace ahg;

namespace {

// Central finite differences, step h.
double fd1(const Expr& e, std::vector<double> p, int i, double h = 1e-5) {
  auto pp = p, pm = p;
  pp[i] += h;
  pm[i] -= h;
  return (eval(e, pp) - eval(e, pm)) / (2 * h);
}

double fd2(const Expr& e, std::vector<double> p, int i, int j, double h = 1e-4) {
  auto at = [&](double si, double sj) {
    auto q = p;
    q[i] += si;
    q[j] += sj;
    return eval(e, q);
  };
  if (i == j) return (at(h, 0) - 2 * eval(e, p) + at(-h, 0)) / (h * h);
  return (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
}

}  // namespace

TEST(Expr, ParsesProductRoot) {
  Expr e = parse_expression("sin(x1)*x2^2", 4);
  EXPECT_EQ(e.node()->kind, NodeKind::Mul);
  std::vector<double> p{0.5, 2.0, 0, 0};
  EXPECT_NEAR(eval(e, p), std::sin(0.5) * 4.0, 1e-15);
}

TEST(Expr, HopfFactor) {
  Expr e = parse_expression("1/(x1^2+x2^2)", 4);
  std::vector<double> p{1.0, 1.0, 0, 0};
  EXPECT_DOUBLE_EQ(eval(e, p), 0.5);
}

TEST(Expr, Errors) {
  EXPECT_THROW(parse_expression("x5", 4), ParseError);
  EXPECT_THROW(parse_expression("foo(x1)", 4), ParseError);
  EXPECT_THROW(parse_expression("x1 +", 4), ParseError);
  EXPECT_THROW(parse_expression("(x1", 4), ParseError);
  EXPECT_THROW(parse_expression("x1^x2", 4), ParseError);
  try {
    parse_expression("x1 + $", 4);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 5u);
  }
}

TEST(Expr, EvalErrors) {
  std::vector<double> p{0, 0, 0, 0};
  EXPECT_THROW(eval_jet(parse_expression("1/x1", 4), p, 1), JetError);
  EXPECT_THROW(eval_jet(parse_expression("log(x1)", 4), p, 1), JetError);
  EXPECT_THROW(eval_jet(parse_expression("x1", 4), p, 4), JetError);
}

TEST(Expr, ExpProductJet) {
  Expr e = parse_expression("exp(x1*x2)", 4);
  std::vector<double> p{1, 1, 0, 0};
  Jet j = eval_jet(e, p, 2);
  const double E = std::numbers::e;
  EXPECT_NEAR(j.value(), E, 1e-14);
  EXPECT_NEAR(j.derivative({0}), E, 1e-14);
  EXPECT_NEAR(j.derivative({1}), E, 1e-14);
  EXPECT_NEAR(j.derivative({0, 1}), 2 * E, 1e-14);
  EXPECT_NEAR(j.derivative({0, 0}), E, 1e-14);
  // independent oracle: central differences
  EXPECT_NEAR(j.derivative({0}), fd1(e, p, 0), 1e-8);
  EXPECT_NEAR(j.derivative({0, 1}), fd2(e, p, 0, 1), 1e-6);
}

TEST(Expr, JetsAgreeWithFiniteDifferences) {
  const char* srcs[] = {"sin(x1)*cos(x2)+0.1*x1*x3+exp(0.2*x2)", "4/(1+x1^2+x2^2+x3^2+x4^2)^2",
                        "sqrt(1+x1^2)*atan(x2)-log(2+x3)", "tan(0.3*x4)+x1^(3/2)"};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.2, 0.9);
  for (const char* s : srcs) {
    Expr e = parse_expression(s, 4);
    for (int k = 0; k < 100; ++k) {
      std::vector<double> p{u(rng), u(rng), u(rng), u(rng)};
      Jet j = eval_jet(e, p, 2);
      for (int i = 0; i < 4; ++i) {
        const double fd = fd1(e, p, i);
        EXPECT_LE(std::abs(j.derivative({i}) - fd), 1e-6 * std::max(1.0, std::abs(fd)));
        for (int l = i; l < 4; ++l) {
          const double f2 = fd2(e, p, i, l);
          EXPECT_LE(std::abs(j.derivative({i, l}) - f2), 1e-5 * std::max(1.0, std::abs(f2)));
        }
      }
    }
  }
}

TEST(Expr, RoundTrip) {
  const char* srcs[] = {"-x1^2+3*x2/(1+x3)", "sin(x1)*x2^(-1/3)", "2^3*x1 - -x2", "pi*x1-(x2-x3)-x4",
                        "exp(-(x1-0.5)^2)/sqrt(x2+1e-3)"};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (const char* s : srcs) {
    Expr a = parse_expression(s, 4);
    Expr b = parse_expression(to_string(a), 4);
    EXPECT_EQ(to_string(a), to_string(b));
    for (int k = 0; k < 10; ++k) {
      std::vector<double> p{u(rng), u(rng), u(rng), u(rng)};
      EXPECT_EQ(eval(a, p), eval(b, p));
    }
  }
}

TEST(Expr, SymbolicDerivativeMatchesJet) {
  Expr e = parse_expression("sin(x1*x2)/(1+x3^2)+sqrt(x4)*atan(x1)+tan(x2)^2+log(x3)", 4);
  std::vector<double> p{0.3, 0.7, 1.1, 0.4};
  Differentiator D;
  for (int i = 0; i < 4; ++i) {
    Expr de = D(e, i);
    Jet jd = eval_jet(de, p, 2);
    Jet j = eval_jet(e, p, 3).partial(i);
    EXPECT_NEAR(jd.value(), j.value(), 1e-13);
    for (int l = 0; l < 4; ++l) EXPECT_NEAR(jd.derivative({l}), j.derivative({l}), 1e-12);
  }
}

TEST(Expr, SharedSubexpressionsEvaluateOnce) {
  Expr x = Expr::var(0);
  Expr s = sin(x) + 1.0;
  Expr t = s;
  for (int i = 0; i < 40; ++i) t = t * s + s;  // deep DAG, shared node
  EXPECT_LT(t.node_count(), 200u);
  std::vector<double> p{0.2};
  Jet j = eval_jet(t, p, 3);
  EXPECT_TRUE(std::isfinite(j.value()));
}

TEST(Expr, ConstantFolding) {
  Expr e = Expr(2.0) * Expr(3.0) + Expr(1.0);
  EXPECT_TRUE(e.is_constant());
  EXPECT_DOUBLE_EQ(e.constant_value(), 7.0);
  Expr x = Expr::var(1);
  EXPECT_EQ((x * 1.0).node(), x.node());
  EXPECT_TRUE((x * 0.0).is_constant(0.0));
  EXPECT_EQ(x.max_var_index(), 1);
}
