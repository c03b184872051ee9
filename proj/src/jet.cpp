#include "ahg/jet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <vector>

namespace ahg {
namespace {

struct Pair {
  std::uint8_t a, b, out;
};

// Monomial tables for a fixed number of variables, up to kMaxOrder.
struct Layout {
  int vars = 0;
  std::vector<std::array<int, kMaxVars>> exps;
  std::vector<int> degree;
  std::array<int, kMaxOrder + 2> count_upto{};  // count_upto[o] = #monomials with degree <= o
  std::vector<int> code_to_index;               // base-4 encoding of exponents
  std::vector<Pair> pairs;                      // sorted by degree of `out`
  std::array<std::size_t, kMaxOrder + 1> pairs_upto{};
  // shift[v][k]: index of monomial k + e_v, or -1 past kMaxOrder.
  std::array<std::vector<int>, kMaxVars> shift;

  static int encode(const std::array<int, kMaxVars>& e) {
    int code = 0;
    for (int i = kMaxVars - 1; i >= 0; --i) code = code * 4 + e[i];
    return code;
  }

  explicit Layout(int v) : vars(v) {
    for (int d = 0; d <= kMaxOrder; ++d) {
      // enumerate exponent tuples of total degree d in lexicographic order
      std::array<int, kMaxVars> e{};
      auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == vars - 1 || vars == 0) {
          if (vars > 0) e[pos] = left;
          if (vars == 0 && left != 0) return;
          exps.push_back(e);
          degree.push_back(d);
          if (vars > 0) e[pos] = 0;
          return;
        }
        for (int k = left; k >= 0; --k) {
          e[pos] = k;
          self(self, pos + 1, left - k);
        }
        e[pos] = 0;
      };
      rec(rec, 0, d);
      count_upto[d] = static_cast<int>(exps.size());
    }
    count_upto[kMaxOrder + 1] = count_upto[kMaxOrder];
    code_to_index.assign(1 << (2 * kMaxVars), -1);
    for (std::size_t k = 0; k < exps.size(); ++k) code_to_index[encode(exps[k])] = static_cast<int>(k);

    for (std::size_t a = 0; a < exps.size(); ++a) {
      for (std::size_t b = 0; b < exps.size(); ++b) {
        if (degree[a] + degree[b] > kMaxOrder) continue;
        std::array<int, kMaxVars> e{};
        for (int i = 0; i < kMaxVars; ++i) e[i] = exps[a][i] + exps[b][i];
        pairs.push_back({static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b),
                         static_cast<std::uint8_t>(code_to_index[encode(e)])});
      }
    }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [&](const Pair& x, const Pair& y) { return degree[x.out] < degree[y.out]; });
    for (int o = 0; o <= kMaxOrder; ++o) {
      pairs_upto[o] = static_cast<std::size_t>(
          std::count_if(pairs.begin(), pairs.end(), [&](const Pair& p) { return degree[p.out] <= o; }));
    }
    for (int i = 0; i < vars; ++i) {
      shift[i].assign(exps.size(), -1);
      for (std::size_t k = 0; k < exps.size(); ++k) {
        if (degree[k] == kMaxOrder) continue;
        auto e = exps[k];
        ++e[i];
        shift[i][k] = code_to_index[encode(e)];
      }
    }
  }
};

const Layout& layout(int vars) {
  static const std::array<Layout, kMaxVars + 1> tables = [] {
    return std::array<Layout, kMaxVars + 1>{Layout(0), Layout(1), Layout(2), Layout(3),
                                            Layout(4), Layout(5), Layout(6)};
  }();
  return tables[vars];
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

int monomial_count(int vars, int order) { return layout(vars).count_upto[order]; }

std::array<int, kMaxVars> monomial_exponents(int vars, std::size_t k) { return layout(vars).exps.at(k); }

std::size_t monomial_index(int vars, std::span<const int> exponents) {
  std::array<int, kMaxVars> e{};
  int total = 0;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    e[i] = exponents[i];
    total += e[i];
  }
  if (total > kMaxOrder) throw JetError("monomial degree exceeds maximum jet order");
  return static_cast<std::size_t>(layout(vars).code_to_index[Layout::encode(e)]);
}

Jet Jet::constant(int vars, int order, double c) {
  if (vars < 0 || vars > kMaxVars) throw JetError("jet variable count out of range");
  if (order < 0 || order > kMaxOrder) throw JetError("jet order out of range");
  Jet j;
  j.vars_ = static_cast<std::int8_t>(vars);
  j.order_ = static_cast<std::int8_t>(order);
  j.c_[0] = c;
  return j;
}

Jet Jet::variable(int vars, int order, int index, double value) {
  Jet j = constant(vars, order, value);
  if (index < 0 || index >= vars) throw JetError("jet variable index out of range");
  if (order >= 1) j.c_[1 + index] = 1.0;
  return j;
}

double Jet::derivative(std::initializer_list<int> indices) const {
  return derivative(std::span<const int>(indices.begin(), indices.size()));
}

double Jet::derivative(std::span<const int> indices) const {
  if (static_cast<int>(indices.size()) > order_) throw JetError("derivative order exceeds jet order");
  if (indices.empty()) return c_[0];
  if (vars_ == 0) return 0.0;
  std::array<int, kMaxVars> e{};
  for (int i : indices) {
    if (i < 0 || i >= vars_) throw JetError("derivative index out of range");
    ++e[i];
  }
  const auto& L = layout(vars_);
  double scale = 1.0;
  for (int i = 0; i < vars_; ++i) scale *= factorial(e[i]);
  return scale * c_[L.code_to_index[Layout::encode(e)]];
}

Jet Jet::partial(int v) const {
  if (order_ == 0) throw JetError("cannot differentiate an order-0 jet");
  if (vars_ == 0) return Jet::constant(0, order_ - 1, 0.0);
  if (v < 0 || v >= vars_) throw JetError("partial index out of range");
  const auto& L = layout(vars_);
  Jet r = Jet::constant(vars_, order_ - 1, 0.0);
  const int n = L.count_upto[order_ - 1];
  for (int k = 0; k < n; ++k) r.c_[k] = (L.exps[k][v] + 1) * c_[L.shift[v][k]];
  return r;
}

Jet Jet::truncated(int order) const {
  if (order >= order_) return *this;
  Jet r = *this;
  r.order_ = static_cast<std::int8_t>(order);
  if (vars_ > 0) {
    const auto& L = layout(vars_);
    std::fill(r.c_.begin() + L.count_upto[order], r.c_.end(), 0.0);
  }
  return r;
}

Jet Jet::embedded(int vars) const {
  if (vars == vars_ || vars_ == 0) {
    Jet r = *this;
    if (vars_ == 0) return r;
    return r;
  }
  if (vars < vars_) throw JetError("cannot embed jet into fewer variables");
  Jet r = Jet::constant(vars, order_, 0.0);
  const auto& L = layout(vars_);
  const auto& M = layout(vars);
  for (int k = 0; k < L.count_upto[order_]; ++k) r.c_[M.code_to_index[Layout::encode(L.exps[k])]] = c_[k];
  return r;
}

void Jet::adopt_shape(const Jet& o) {
  if (o.vars_ == 0) {
    if (o.order_ < order_) *this = truncated(o.order_);
    return;
  }
  if (vars_ == 0) {
    const double c = c_[0];
    const int ord = std::min<int>(order_, o.order_);
    *this = Jet::constant(o.vars_, ord, c);
    return;
  }
  if (vars_ != o.vars_) throw JetError("jet variable counts differ");
  if (o.order_ < order_) *this = truncated(o.order_);
}

Jet& Jet::operator+=(const Jet& o) {
  adopt_shape(o);
  const int n = vars_ == 0 ? 1 : monomial_count(vars_, order_);
  if (o.vars_ == 0) {
    c_[0] += o.c_[0];
  } else {
    for (int k = 0; k < n; ++k) c_[k] += o.c_[k];
  }
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  adopt_shape(o);
  const int n = vars_ == 0 ? 1 : monomial_count(vars_, order_);
  if (o.vars_ == 0) {
    c_[0] -= o.c_[0];
  } else {
    for (int k = 0; k < n; ++k) c_[k] -= o.c_[k];
  }
  return *this;
}

Jet operator-(Jet a) {
  const int n = a.vars_ == 0 ? 1 : monomial_count(a.vars_, a.order_);
  for (int k = 0; k < n; ++k) a.c_[k] = -a.c_[k];
  return a;
}

Jet operator*(const Jet& a, const Jet& b) {
  if (b.vars_ == 0) {
    Jet r = a;
    if (b.order_ < r.order_) r = r.truncated(b.order_);
    const int n = r.vars_ == 0 ? 1 : monomial_count(r.vars_, r.order_);
    for (int k = 0; k < n; ++k) r.c_[k] *= b.c_[0];
    return r;
  }
  if (a.vars_ == 0) return b * a;
  if (a.vars_ != b.vars_) throw JetError("jet variable counts differ");
  const int ord = std::min(a.order_, b.order_);
  Jet r = Jet::constant(a.vars_, ord, 0.0);
  const auto& L = layout(a.vars_);
  const std::size_t np = L.pairs_upto[ord];
  const Pair* p = L.pairs.data();
  for (std::size_t i = 0; i < np; ++i) r.c_[p[i].out] += a.c_[p[i].a] * b.c_[p[i].b];
  return r;
}

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }

Jet operator/(const Jet& a, const Jet& b) {
  if (b.vars_ == 0) {
    if (b.c_[0] == 0.0) throw JetError("division by zero");
    return a * Jet(1.0 / b.c_[0]).truncated(b.order_);
  }
  return a * inverse(b);
}

Jet& Jet::operator/=(const Jet& o) { return *this = *this / o; }

bool operator==(const Jet& a, const Jet& b) {
  if (a.vars_ != b.vars_ || a.order_ != b.order_) return false;
  const int n = a.vars_ == 0 ? 1 : monomial_count(a.vars_, a.order_);
  return std::equal(a.c_.begin(), a.c_.begin() + n, b.c_.begin());
}

Jet Jet::compose(std::span<const double> derivs) const {
  if (static_cast<int>(derivs.size()) < order_ + 1 && vars_ != 0)
    throw JetError("not enough derivatives for composition");
  if (vars_ == 0) {
    Jet r = *this;
    r.c_[0] = derivs[0];
    return r;
  }
  Jet h = *this;
  h.c_[0] = 0.0;
  Jet result = Jet::constant(vars_, order_, derivs[0]);
  Jet power = h;
  for (int k = 1; k <= order_; ++k) {
    const double w = derivs[k] / factorial(k);
    const int n = monomial_count(vars_, order_);
    for (int i = 0; i < n; ++i) result.c_[i] += w * power.c_[i];
    if (k < order_) power = power * h;
  }
  return result;
}

Jet inverse(const Jet& x) {
  const double a = x.value();
  if (a == 0.0) throw JetError("division by zero");
  const double i1 = 1.0 / a;
  const std::array<double, 4> d{i1, -i1 * i1, 2.0 * i1 * i1 * i1, -6.0 * i1 * i1 * i1 * i1};
  return x.compose(d);
}

Jet sin(const Jet& x) {
  const double s = std::sin(x.value()), c = std::cos(x.value());
  const std::array<double, 4> d{s, c, -s, -c};
  return x.compose(d);
}

Jet cos(const Jet& x) {
  const double s = std::sin(x.value()), c = std::cos(x.value());
  const std::array<double, 4> d{c, -s, -c, s};
  return x.compose(d);
}

Jet tan(const Jet& x) {
  const double c = std::cos(x.value());
  if (std::abs(c) < 1e-300) throw JetError("tan singular");
  const double t = std::tan(x.value());
  const double s2 = 1.0 + t * t;  // sec^2
  const std::array<double, 4> d{t, s2, 2.0 * t * s2, 2.0 * s2 * (1.0 + 3.0 * t * t)};
  return x.compose(d);
}

Jet exp(const Jet& x) {
  const double e = std::exp(x.value());
  const std::array<double, 4> d{e, e, e, e};
  return x.compose(d);
}

Jet log(const Jet& x) {
  const double a = x.value();
  if (!(a > 0.0)) throw JetError("log of nonpositive value");
  const double i1 = 1.0 / a;
  const std::array<double, 4> d{std::log(a), i1, -i1 * i1, 2.0 * i1 * i1 * i1};
  return x.compose(d);
}

Jet sqrt(const Jet& x) {
  const double a = x.value();
  if (!(a > 0.0)) {
    if (a == 0.0 && (x.order() == 0 || x.is_constant())) return x.compose(std::array<double, 4>{0, 0, 0, 0});
    throw JetError("sqrt of nonpositive value");
  }
  const double s = std::sqrt(a);
  const std::array<double, 4> d{s, 0.5 / s, -0.25 / (s * a), 0.375 / (s * a * a)};
  return x.compose(d);
}

Jet atan(const Jet& x) {
  const double a = x.value();
  const double q = 1.0 / (1.0 + a * a);
  const std::array<double, 4> d{std::atan(a), q, -2.0 * a * q * q, (6.0 * a * a - 2.0) * q * q * q};
  return x.compose(d);
}

Jet pow(const Jet& x, long num, long den) {
  if (den == 0) throw JetError("zero exponent denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  if (num % den == 0) {
    const long k = num / den;
    if (k == 0) return x * 0.0 + 1.0;
    Jet base = k < 0 ? inverse(x) : x;
    Jet r = base;
    for (long i = 1; i < std::abs(k); ++i) r = r * base;
    return r;
  }
  const double a = x.value();
  if (!(a > 0.0)) throw JetError("fractional power of nonpositive value");
  const double r = static_cast<double>(num) / static_cast<double>(den);
  const std::array<double, 4> d{std::pow(a, r), r * std::pow(a, r - 1.0), r * (r - 1.0) * std::pow(a, r - 2.0),
                                r * (r - 1.0) * (r - 2.0) * std::pow(a, r - 3.0)};
  return x.compose(d);
}

Jet abs(const Jet& x) { return x.value() < 0.0 ? -x : x; }

std::ostream& operator<<(std::ostream& os, const Jet& j) {
  os << "Jet(" << j.value();
  if (!j.is_constant() && j.order() > 0) {
    os << "; d=[";
    for (int i = 0; i < j.vars(); ++i) os << (i ? ", " : "") << j.derivative({i});
    os << "]";
  }
  return os << ")";
}

}  // namespace ahg
