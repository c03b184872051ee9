#include "ahg/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace ahg {

ParseError::ParseError(const std::string& msg, std::size_t offset)
    : std::runtime_error(msg + " at byte " + std::to_string(offset)), offset_(offset) {}

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make_const(double c) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Const;
  n->value = c;
  return n;
}

const NodePtr& zero_node() {
  static const NodePtr z = make_const(0.0);
  return z;
}

NodePtr make_node(NodeKind k, NodePtr a, NodePtr b = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

bool is_const(const NodePtr& n) { return n->kind == NodeKind::Const; }
bool is_const(const NodePtr& n, double c) { return n->kind == NodeKind::Const && n->value == c; }

}  // namespace

Expr::Expr() : node_(zero_node()) {}
Expr::Expr(double c) : node_(c == 0.0 ? zero_node() : make_const(c)) {}

Expr Expr::var(int index) {
  if (index < 0) throw std::invalid_argument("negative variable index");
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Var;
  n->index = index;
  return Expr(NodePtr(n));
}

Expr Expr::func(Func f, Expr arg) {
  if (arg.is_constant()) {
    const double v = arg.constant_value();
    switch (f) {
      case Func::Sin: return Expr(std::sin(v));
      case Func::Cos: return Expr(std::cos(v));
      case Func::Tan: return Expr(std::tan(v));
      case Func::Exp: return Expr(std::exp(v));
      case Func::Atan: return Expr(std::atan(v));
      case Func::Log:
        if (v > 0) return Expr(std::log(v));
        break;
      case Func::Sqrt:
        if (v >= 0) return Expr(std::sqrt(v));
        break;
    }
  }
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Call;
  n->func = f;
  n->lhs = arg.node_;
  return Expr(NodePtr(n));
}

Expr Expr::power(Expr base, long num, long den) {
  if (den == 0) throw std::invalid_argument("zero exponent denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const long g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num == 0) return Expr(1.0);
  if (num == 1 && den == 1) return base;
  if (base.is_constant() && den == 1) return Expr(std::pow(base.constant_value(), static_cast<double>(num)));
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Pow;
  n->num = num;
  n->den = den;
  n->lhs = base.node_;
  return Expr(NodePtr(n));
}

bool Expr::is_constant() const { return is_const(node_); }
bool Expr::is_constant(double c) const { return is_const(node_, c); }
double Expr::constant_value() const { return node_->value; }

int Expr::max_var_index() const {
  int best = -1;
  std::unordered_set<const ExprNode*> seen;
  std::function<void(const ExprNode*)> walk = [&](const ExprNode* n) {
    if (!n || !seen.insert(n).second) return;
    if (n->kind == NodeKind::Var) best = std::max(best, n->index);
    walk(n->lhs.get());
    walk(n->rhs.get());
  };
  walk(node_.get());
  return best;
}

std::size_t Expr::node_count() const {
  std::unordered_set<const ExprNode*> seen;
  std::function<void(const ExprNode*)> walk = [&](const ExprNode* n) {
    if (!n || !seen.insert(n).second) return;
    walk(n->lhs.get());
    walk(n->rhs.get());
  };
  walk(node_.get());
  return seen.size();
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.constant_value() + b.constant_value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return Expr(make_node(NodeKind::Add, a.shared(), b.shared()));
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.constant_value() - b.constant_value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return Expr(make_node(NodeKind::Sub, a.shared(), b.shared()));
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.constant_value() * b.constant_value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  return Expr(make_node(NodeKind::Mul, a.shared(), b.shared()));
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_constant(0.0)) throw std::domain_error("division by constant zero");
  if (a.is_constant() && b.is_constant()) return Expr(a.constant_value() / b.constant_value());
  if (a.is_constant(0.0)) return Expr(0.0);
  if (b.is_constant(1.0)) return a;
  return Expr(make_node(NodeKind::Div, a.shared(), b.shared()));
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr(-a.constant_value());
  if (a.node()->kind == NodeKind::Neg) return Expr(a.node()->lhs);
  return Expr(make_node(NodeKind::Neg, a.shared()));
}

Expr sin(const Expr& e) { return Expr::func(Func::Sin, e); }
Expr cos(const Expr& e) { return Expr::func(Func::Cos, e); }
Expr tan(const Expr& e) { return Expr::func(Func::Tan, e); }
Expr exp(const Expr& e) { return Expr::func(Func::Exp, e); }
Expr log(const Expr& e) { return Expr::func(Func::Log, e); }
Expr sqrt(const Expr& e) { return Expr::func(Func::Sqrt, e); }
Expr atan(const Expr& e) { return Expr::func(Func::Atan, e); }

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  Parser(std::string_view src, int dim) : src_(src), dim_(dim) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos_ != src_.size()) throw ParseError("unexpected character '" + std::string(1, src_[pos_]) + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) throw ParseError(std::string("expected '") + c + "' but reached end of input", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (accept('+')) {
        e = Expr(make_node(NodeKind::Add, e.shared(), term().shared()));
      } else if (accept('-')) {
        e = Expr(make_node(NodeKind::Sub, e.shared(), term().shared()));
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = factor();
    for (;;) {
      if (accept('*')) {
        e = Expr(make_node(NodeKind::Mul, e.shared(), factor().shared()));
      } else if (accept('/')) {
        e = Expr(make_node(NodeKind::Div, e.shared(), factor().shared()));
      } else {
        return e;
      }
    }
  }

  Expr factor() {
    if (accept('-')) return Expr(make_node(NodeKind::Neg, factor().shared()));
    if (accept('+')) return factor();
    Expr b = base();
    if (accept('^')) {
      auto [num, den] = rational();
      if (den == 0) throw ParseError("zero denominator in exponent", pos_);
      auto n = std::make_shared<ExprNode>();
      n->kind = NodeKind::Pow;
      n->num = num;
      n->den = den;
      n->lhs = b.shared();
      return Expr(NodePtr(n));
    }
    return b;
  }

  long integer() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (start == pos_) throw ParseError("expected integer", start);
    long v = 0;
    auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (res.ec != std::errc()) throw ParseError("integer out of range", start);
    return v;
  }

  std::pair<long, long> rational() {
    if (accept('(')) {
      auto r = rational();
      expect(')');
      return r;
    }
    const bool neg = accept('-');
    long num = integer();
    long den = 1;
    if (accept('/')) den = integer();
    if (den < 0) throw ParseError("negative denominator", pos_);
    return {neg ? -num : num, den};
  }

  Expr base() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        pos_ = p;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) throw ParseError("malformed number", start);
    return Expr(make_const(v));
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::string_view id = src_.substr(start, pos_ - start);
    if (id.size() >= 2 && id[0] == 'x' &&
        std::all_of(id.begin() + 1, id.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      int idx = 0;
      std::from_chars(id.data() + 1, id.data() + id.size(), idx);
      if (idx < 1) throw ParseError("variable index must start at 1", start);
      if (idx > dim_)
        throw ParseError("variable index " + std::to_string(idx) + " exceeds dimension " + std::to_string(dim_),
                         start);
      auto n = std::make_shared<ExprNode>();
      n->kind = NodeKind::Var;
      n->index = idx - 1;
      return Expr(NodePtr(n));
    }
    if (id == "pi") return Expr(make_const(std::numbers::pi));
    static const std::map<std::string_view, Func> funcs{{"sin", Func::Sin},   {"cos", Func::Cos},
                                                        {"tan", Func::Tan},   {"exp", Func::Exp},
                                                        {"log", Func::Log},   {"sqrt", Func::Sqrt},
                                                        {"atan", Func::Atan}};
    auto it = funcs.find(id);
    if (it == funcs.end()) throw ParseError("unknown identifier '" + std::string(id) + "'", start);
    expect('(');
    Expr arg = expr();
    expect(')');
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Call;
    n->func = it->second;
    n->lhs = arg.shared();
    return Expr(NodePtr(n));
  }

  std::string_view src_;
  int dim_;
  std::size_t pos_ = 0;
};

const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tan: return "tan";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
    case Func::Atan: return "atan";
  }
  return "?";
}

void print(const ExprNode* n, std::string& out) {
  switch (n->kind) {
    case NodeKind::Const: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", n->value);
      if (n->value < 0) {
        out += "(";
        out += buf;
        out += ")";
      } else {
        out += buf;
      }
      return;
    }
    case NodeKind::Var:
      out += "x" + std::to_string(n->index + 1);
      return;
    case NodeKind::Neg:
      out += "(-";
      print(n->lhs.get(), out);
      out += ")";
      return;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div: {
      const char op = n->kind == NodeKind::Add ? '+' : n->kind == NodeKind::Sub ? '-' : n->kind == NodeKind::Mul ? '*' : '/';
      out += "(";
      print(n->lhs.get(), out);
      out += op;
      print(n->rhs.get(), out);
      out += ")";
      return;
    }
    case NodeKind::Pow:
      out += "(";
      print(n->lhs.get(), out);
      out += "^";
      if (n->den == 1)
        out += n->num < 0 ? "(" + std::to_string(n->num) + ")" : std::to_string(n->num);
      else
        out += "(" + std::to_string(n->num) + "/" + std::to_string(n->den) + ")";
      out += ")";
      return;
    case NodeKind::Call:
      out += func_name(n->func);
      out += "(";
      print(n->lhs.get(), out);
      out += ")";
      return;
  }
}

class Evaluator {
 public:
  Evaluator(std::span<const double> point, int order) : point_(point), order_(order) {
    memo_.reserve(256);
  }

  Jet operator()(const ExprNode* n) {
    if (n->kind == NodeKind::Const) return Jet(n->value);
    if (auto it = memo_.find(n); it != memo_.end()) return it->second;
    Jet r = compute(n);
    memo_.emplace(n, r);
    return r;
  }

  Jet shaped(Jet j) const {
    if (j.is_constant()) return Jet::constant(static_cast<int>(point_.size()), order_, j.value());
    return j;
  }

 private:
  Jet compute(const ExprNode* n) {
    switch (n->kind) {
      case NodeKind::Const: return Jet(n->value);
      case NodeKind::Var:
        if (n->index >= static_cast<int>(point_.size())) throw JetError("variable index exceeds point dimension");
        return Jet::variable(static_cast<int>(point_.size()), order_, n->index, point_[n->index]);
      case NodeKind::Neg: return -(*this)(n->lhs.get());
      case NodeKind::Add: return (*this)(n->lhs.get()) + (*this)(n->rhs.get());
      case NodeKind::Sub: return (*this)(n->lhs.get()) - (*this)(n->rhs.get());
      case NodeKind::Mul: return (*this)(n->lhs.get()) * (*this)(n->rhs.get());
      case NodeKind::Div: {
        Jet d = (*this)(n->rhs.get());
        if (d.value() == 0.0) throw JetError("division by zero");
        return (*this)(n->lhs.get()) / d;
      }
      case NodeKind::Pow: return pow((*this)(n->lhs.get()), n->num, n->den);
      case NodeKind::Call: {
        const Jet a = (*this)(n->lhs.get());
        switch (n->func) {
          case Func::Sin: return sin(a);
          case Func::Cos: return cos(a);
          case Func::Tan: return tan(a);
          case Func::Exp: return exp(a);
          case Func::Log: return log(a);
          case Func::Sqrt: return sqrt(a);
          case Func::Atan: return atan(a);
        }
      }
    }
    throw JetError("corrupt expression node");
  }

  std::span<const double> point_;
  int order_;
  std::unordered_map<const ExprNode*, Jet> memo_;
};

}  // namespace

Expr parse_expression(std::string_view src, int dim) {
  if (dim < 1) throw std::invalid_argument("dimension must be positive");
  return Parser(src, dim).parse();
}

std::string to_string(const Expr& e) {
  std::string out;
  print(e.node(), out);
  return out;
}

Jet eval_jet(const Expr& e, std::span<const double> point, int order) {
  if (order < 0 || order > kMaxOrder) throw JetError("jet order overflow (maximum is 3)");
  if (point.size() > static_cast<std::size_t>(kMaxVars)) throw JetError("too many coordinates for jet evaluation");
  Evaluator ev(point, order);
  return ev.shaped(ev(e.node()));
}

std::vector<Jet> eval_jets(std::span<const Expr> exprs, std::span<const double> point, int order) {
  if (order < 0 || order > kMaxOrder) throw JetError("jet order overflow (maximum is 3)");
  if (point.size() > static_cast<std::size_t>(kMaxVars)) throw JetError("too many coordinates for jet evaluation");
  Evaluator ev(point, order);
  std::vector<Jet> out;
  out.reserve(exprs.size());
  for (const auto& e : exprs) out.push_back(ev.shaped(ev(e.node())));
  return out;
}

double eval(const Expr& e, std::span<const double> point) { return eval_jet(e, point, 0).value(); }

// ---------------------------------------------------------------------------
// Symbolic differentiation

struct Differentiator::Impl {
  std::map<std::pair<const ExprNode*, int>, Expr> cache;
  std::vector<NodePtr> keep_alive;

  Expr d(const NodePtr& n, int v) {
    if (n->kind == NodeKind::Const) return Expr(0.0);
    if (n->kind == NodeKind::Var) return Expr(n->index == v ? 1.0 : 0.0);
    auto key = std::make_pair(n.get(), v);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    Expr r = compute(n, v);
    keep_alive.push_back(n);
    cache.emplace(key, r);
    return r;
  }

  Expr compute(const NodePtr& n, int v) {
    const Expr a(n->lhs ? n->lhs : zero_node());
    const Expr b(n->rhs ? n->rhs : zero_node());
    const Expr self(n);
    switch (n->kind) {
      case NodeKind::Const:
      case NodeKind::Var: break;
      case NodeKind::Neg: return -d(n->lhs, v);
      case NodeKind::Add: return d(n->lhs, v) + d(n->rhs, v);
      case NodeKind::Sub: return d(n->lhs, v) - d(n->rhs, v);
      case NodeKind::Mul: return d(n->lhs, v) * b + a * d(n->rhs, v);
      case NodeKind::Div: {
        const Expr da = d(n->lhs, v), db = d(n->rhs, v);
        if (db.is_constant(0.0)) return da / b;
        return da / b - self * db / b;
      }
      case NodeKind::Pow: {
        const Expr da = d(n->lhs, v);
        if (da.is_constant(0.0)) return Expr(0.0);
        const Expr lower = Expr::power(a, n->num - n->den, n->den);
        return Expr(static_cast<double>(n->num) / static_cast<double>(n->den)) * lower * da;
      }
      case NodeKind::Call: {
        const Expr da = d(n->lhs, v);
        if (da.is_constant(0.0)) return Expr(0.0);
        switch (n->func) {
          case Func::Sin: return cos(a) * da;
          case Func::Cos: return -(sin(a) * da);
          case Func::Tan: return (Expr(1.0) + self * self) * da;
          case Func::Exp: return self * da;
          case Func::Log: return da / a;
          case Func::Sqrt: return da / (Expr(2.0) * self);
          case Func::Atan: return da / (Expr(1.0) + a * a);
        }
      }
    }
    return Expr(0.0);
  }
};

Differentiator::Differentiator() : impl_(std::make_unique<Impl>()) {}
Differentiator::~Differentiator() = default;
Differentiator::Differentiator(Differentiator&&) noexcept = default;
Differentiator& Differentiator::operator=(Differentiator&&) noexcept = default;

Expr Differentiator::operator()(const Expr& e, int var) { return impl_->d(e.shared(), var); }

Expr derivative(const Expr& e, int var) {
  Differentiator d;
  return d(e, var);
}

}  // namespace ahg
