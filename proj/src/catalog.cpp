#include "ahg/catalog.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace ahg {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

// Oriented lines of the Fano plane, 1-based: e_a x e_b = e_c.
constexpr std::array<std::array<int, 3>, 7> kFano{{
    {1, 2, 3}, {1, 4, 5}, {1, 7, 6}, {2, 4, 6}, {2, 5, 7}, {3, 4, 7}, {3, 6, 5}}};

// phi(a,b,c) with u x v = sum phi(a,b,c) u_a v_b e_c (0-based).
const std::array<double, 343>& phi_table() {
  static const std::array<double, 343> t = [] {
    std::array<double, 343> r{};
    for (const auto& l : kFano) {
      const int a = l[0] - 1, b = l[1] - 1, c = l[2] - 1;
      const int cyc[3][3] = {{a, b, c}, {b, c, a}, {c, a, b}};
      for (const auto& q : cyc) {
        r[static_cast<std::size_t>((q[0] * 7 + q[1]) * 7 + q[2])] = 1.0;
        r[static_cast<std::size_t>((q[1] * 7 + q[0]) * 7 + q[2])] = -1.0;
      }
    }
    return r;
  }();
  return t;
}

Expr x(int i) { return Expr::var(i); }

std::vector<Expr> parse_all(std::initializer_list<const char*> src, int dim) {
  std::vector<Expr> out;
  for (const char* s : src) out.push_back(parse_expression(s, dim));
  return out;
}

std::vector<Axis> box(int dim, double lo, double hi, bool periodic) { return std::vector<Axis>(dim, Axis{lo, hi, periodic}); }

Expr radius2(int dim) {
  Expr r2(0.0);
  for (int i = 0; i < dim; ++i) r2 += x(i) * x(i);
  return r2;
}

ChartSpec conformal_chart(std::string name, int n, const Expr& factor, std::vector<Axis> dom) {
  ChartSpec c;
  c.name = std::move(name);
  c.n = n;
  c.domain = std::move(dom);
  c.g = conformal_identity(2 * n, factor);
  c.J = standard_complex_structure(n);
  return c;
}

CatalogEntry t4_kahler(std::string name) {
  CatalogEntry e;
  e.name = name;
  e.description = "Flat torus R^4/(2 pi Z)^4 with the standard structure; parallel J, all curvature zero.";
  e.chart = conformal_chart(name, 2, Expr(1.0), box(4, 0, kTwoPi, true));
  e.expected_class = "Kahler";
  e.compact = true;
  e.domain = FundamentalDomain::Box;
  e.scalars = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  return e;
}

CatalogEntry t4_perturbed() {
  CatalogEntry e;
  e.name = "t4_perturbed";
  e.description = "Flat torus rescaled by exp(2 eps sin x1), eps = 0.05; conformally Kahler with exact Lee form.";
  e.chart = conformal_chart(e.name, 2, parse_expression("exp(0.1*sin(x1))", 4), box(4, 0, kTwoPi, true));
  e.expected_class = "W4";
  e.compact = true;
  e.domain = FundamentalDomain::Box;
  return e;
}

CatalogEntry kodaira_thurston() {
  CatalogEntry e;
  e.name = "kodaira_thurston";
  e.description =
      "Heisenberg x R nilmanifold with left-invariant coframe dx1, dx2, dx3 - x1 dx2, dx4 and the almost-Kahler "
      "structure e1 -> e3, e2 -> e4 (dF = 0, N != 0). Scalar curvature -1/2 from the structure constants.";
  ChartSpec& c = e.chart;
  c.name = e.name;
  c.n = 2;
  c.domain = box(4, 0, 1, false);
  c.g = parse_all({"1", "0", "0", "0",  //
                   "0", "1+x1^2", "-x1", "0",  //
                   "0", "-x1", "1", "0",  //
                   "0", "0", "0", "1"},
                  4);
  c.J = parse_all({"0", "x1", "-1", "0",  //
                   "0", "0", "0", "-1",  //
                   "1", "0", "0", "-x1",  //
                   "0", "1", "0", "0"},
                  4);
  e.expected_class = "W2";
  e.integrable = false;
  e.compact = true;
  e.domain = FundamentalDomain::Box;
  e.scalars.s = -0.5;
  e.witness_point = {0.3, 0.4, 0.5, 0.6};
  return e;
}

CatalogEntry iwasawa() {
  CatalogEntry e;
  e.name = "iwasawa";
  e.description =
      "Iwasawa manifold: complex Heisenberg group modulo Gaussian integers with the left-invariant metric of the "
      "coframe dz1, dz2, dz3 - z1 dz2. Complex parallelizable, balanced; scalar curvature -2 from the structure "
      "constants.";
  ChartSpec& c = e.chart;
  c.name = e.name;
  c.n = 3;
  c.domain = box(6, 0, 1, false);
  // x1..x3 real parts, x4..x6 imaginary parts.
  c.g = parse_all({"1", "0", "0", "0", "0", "0",  //
                   "0", "1+x1^2+x4^2", "-x1", "0", "0", "-x4",  //
                   "0", "-x1", "1", "0", "x4", "0",  //
                   "0", "0", "0", "1", "0", "0",  //
                   "0", "0", "x4", "0", "1+x1^2+x4^2", "-x1",  //
                   "0", "-x4", "0", "0", "-x1", "1"},
                  6);
  c.J = standard_complex_structure(3);
  e.expected_class = "W3";
  e.compact = true;
  e.domain = FundamentalDomain::Box;
  e.scalars.s = -2.0;
  e.scalars.alpha2 = 0.0;
  return e;
}

CatalogEntry hopf_surface() {
  CatalogEntry e;
  e.name = "hopf_surface";
  e.description =
      "Hopf surface (C^2 minus 0)/(z ~ 2z) with the metric |z|^-2 delta and the standard structure; locally "
      "conformally Kahler. Constants from S^3 x R: s = 6, |alpha|^2 = 4, s_J = 2, S1 = 4, S2 = 2.";
  e.chart = conformal_chart(e.name, 2, Expr(1.0) / radius2(4),
                            {Axis{0.5, 1.5, false}, Axis{-1, 1, false}, Axis{-1, 1, false}, Axis{-1, 1, false}});
  e.expected_class = "W4";
  e.compact = true;
  e.domain = FundamentalDomain::HopfAnnulus;
  e.scalars = {6.0, 2.0, 4.0, 2.0, 4.0, 0.0};
  return e;
}

CatalogEntry s6_nearly_kahler() {
  CatalogEntry e;
  e.name = "s6_nearly_kahler";
  e.description =
      "Round S^6 in stereographic coordinates with J_p X = p x X from the octonionic cross product; nearly Kahler. "
      "Scalar curvature 30 from constant curvature 1.";
  ChartSpec& c = e.chart;
  c.name = e.name;
  c.n = 3;
  c.domain = box(6, -0.8, 0.8, false);
  const Expr w = Expr(1.0) / (1.0 + radius2(6));
  c.g = conformal_identity(6, 4.0 * w * w);
  // Embedding P into R^7 and its coordinate derivatives.
  std::array<Expr, 7> P;
  for (int a = 0; a < 6; ++a) P[static_cast<std::size_t>(a)] = 2.0 * x(a) * w;
  P[6] = 2.0 * w - 1.0;
  std::array<std::array<Expr, 7>, 6> dP;
  for (int i = 0; i < 6; ++i) {
    for (int a = 0; a < 6; ++a)
      dP[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] =
          (a == i ? 2.0 * w : Expr(0.0)) - 4.0 * x(a) * x(i) * w * w;
    dP[static_cast<std::size_t>(i)][6] = -4.0 * x(i) * w * w;
  }
  // J^k_i = <P x dP_i, dP_k> / |dP_k|^2, |dP_k|^2 = 4 w^2.
  const auto& phi = phi_table();
  const Expr scale = 0.25 * (1.0 + radius2(6)) * (1.0 + radius2(6));
  std::array<std::array<Expr, 7>, 6> cr;  // P x dP_i
  for (int i = 0; i < 6; ++i)
    for (int cc = 0; cc < 7; ++cc) {
      Expr acc(0.0);
      for (int a = 0; a < 7; ++a)
        for (int b = 0; b < 7; ++b) {
          const double s = phi[static_cast<std::size_t>((a * 7 + b) * 7 + cc)];
          if (s != 0.0) acc += s * P[static_cast<std::size_t>(a)] * dP[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)];
        }
      cr[static_cast<std::size_t>(i)][static_cast<std::size_t>(cc)] = acc;
    }
  c.J.assign(36, Expr(0.0));
  for (int k = 0; k < 6; ++k)
    for (int i = 0; i < 6; ++i) {
      Expr acc(0.0);
      for (int cc = 0; cc < 7; ++cc)
        acc += cr[static_cast<std::size_t>(i)][static_cast<std::size_t>(cc)] *
               dP[static_cast<std::size_t>(k)][static_cast<std::size_t>(cc)];
      c.J[static_cast<std::size_t>(k * 6 + i)] = scale * acc;
    }
  e.expected_class = "W1";
  e.integrable = false;
  e.scalars.s = 30.0;
  e.scalars.alpha2 = 0.0;
  e.witness_point = {0.1, -0.2, 0.3, 0.15, -0.25, 0.05};
  return e;
}

CatalogEntry s4_round() {
  CatalogEntry e;
  e.name = "s4_round";
  e.description =
      "Unit S^4 in stereographic coordinates with the chart's standard structure; constant curvature 1 gives "
      "s = 12 and s_J = 4.";
  e.chart = conformal_chart(e.name, 2, 4.0 / ((1.0 + radius2(4)) * (1.0 + radius2(4))), box(4, -1, 1, false));
  e.expected_class = "W4";
  e.twistor_base = true;
  e.scalars.s = 12.0;
  e.scalars.s_J = 4.0;
  return e;
}

CatalogEntry h4_hyperbolic() {
  CatalogEntry e;
  e.name = "h4_hyperbolic";
  e.description =
      "Poincare ball model of H^4 with the chart's standard structure; constant curvature -1 gives s = -12 and "
      "s_J = -4.";
  e.chart = conformal_chart(e.name, 2, 4.0 / ((1.0 - radius2(4)) * (1.0 - radius2(4))), box(4, -0.45, 0.45, false));
  e.expected_class = "W4";
  e.twistor_base = true;
  e.scalars.s = -12.0;
  e.scalars.s_J = -4.0;
  return e;
}

CatalogEntry t4_flat_base() {
  CatalogEntry e = t4_kahler("t4_flat_base");
  e.description = "Flat torus used as a twistor base.";
  e.twistor_base = true;
  return e;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

}  // namespace

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names{"t4_kahler",  "t4_perturbed",     "kodaira_thurston",
                                              "iwasawa",    "hopf_surface",     "s6_nearly_kahler",
                                              "s4_round",   "h4_hyperbolic",    "t4_flat_base"};
  return names;
}

CatalogEntry load(std::string_view name) {
  if (name == "t4_kahler") return t4_kahler("t4_kahler");
  if (name == "t4_perturbed") return t4_perturbed();
  if (name == "kodaira_thurston") return kodaira_thurston();
  if (name == "iwasawa") return iwasawa();
  if (name == "hopf_surface") return hopf_surface();
  if (name == "s6_nearly_kahler") return s6_nearly_kahler();
  if (name == "s4_round") return s4_round();
  if (name == "h4_hyperbolic") return h4_hyperbolic();
  if (name == "t4_flat_base") return t4_flat_base();
  throw CatalogError("unknown catalog entry '" + std::string(name) + "'");
}

ChartSpec parse_chart_file(std::string_view text) {
  ChartSpec c;
  c.n = 0;
  std::string section;
  std::vector<std::string> domain_lines, metric_rows, j_rows;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw CatalogError("line " + std::to_string(line_no) + ": malformed section header");
      section = line.substr(1, line.size() - 2);
      if (section != "meta" && section != "domain" && section != "metric" && section != "J")
        throw CatalogError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      continue;
    }
    if (section == "meta") {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw CatalogError("line " + std::to_string(line_no) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
      if (key == "n") {
        try {
          c.n = std::stoi(val);
        } catch (const std::exception&) {
          throw CatalogError("line " + std::to_string(line_no) + ": n must be an integer");
        }
      } else if (key == "name") {
        c.name = val;
      } else {
        throw CatalogError("line " + std::to_string(line_no) + ": unknown meta key '" + key + "'");
      }
    } else if (section == "domain") {
      domain_lines.push_back(line);
    } else if (section == "metric") {
      metric_rows.push_back(line);
    } else if (section == "J") {
      j_rows.push_back(line);
    } else {
      throw CatalogError("line " + std::to_string(line_no) + ": content outside a section");
    }
  }
  if (c.n < 1 || 2 * c.n > kMaxVars) throw CatalogError("[meta] n must be between 1 and 3");
  const int m = c.dim();
  if (static_cast<int>(domain_lines.size()) != m) throw CatalogError("[domain] needs one line per coordinate");
  for (const auto& l : domain_lines) {
    std::istringstream ls(l);
    std::string lo, hi, flag;
    ls >> lo >> hi >> flag;
    if (hi.empty()) throw CatalogError("[domain] line needs 'lo hi [periodic]'");
    Axis a;
    a.lo = eval(parse_expression(lo, 1), std::vector<double>{0.0});
    a.hi = eval(parse_expression(hi, 1), std::vector<double>{0.0});
    if (!flag.empty() && flag != "periodic") throw CatalogError("[domain] unknown axis flag '" + flag + "'");
    a.periodic = flag == "periodic";
    if (!(a.hi > a.lo)) throw CatalogError("[domain] needs lo < hi");
    c.domain.push_back(a);
  }
  auto read_matrix = [&](const std::vector<std::string>& rows, const char* what) {
    if (static_cast<int>(rows.size()) != m) throw CatalogError(std::string("[") + what + "] needs 2n rows");
    std::vector<Expr> out;
    for (const auto& r : rows) {
      const auto cells = split(r, ',');
      if (static_cast<int>(cells.size()) != m) throw CatalogError(std::string("[") + what + "] needs 2n columns");
      for (const auto& cell : cells) out.push_back(parse_expression(cell, m));
    }
    return out;
  };
  c.g = read_matrix(metric_rows, "metric");
  c.J = read_matrix(j_rows, "J");
  if (c.name.empty()) c.name = "custom";
  return c;
}

CatalogEntry load_chart_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw CatalogError("cannot open chart file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  CatalogEntry e;
  e.chart = parse_chart_file(ss.str());
  e.name = e.chart.name;
  e.description = "custom chart from " + path;
  return e;
}

std::vector<double> cross7(std::span<const double> u, std::span<const double> v) {
  const auto& phi = phi_table();
  std::vector<double> r(7, 0.0);
  for (int a = 0; a < 7; ++a)
    for (int b = 0; b < 7; ++b)
      for (int c = 0; c < 7; ++c) {
        const double s = phi[static_cast<std::size_t>((a * 7 + b) * 7 + c)];
        if (s != 0.0) r[static_cast<std::size_t>(c)] += s * u[static_cast<std::size_t>(a)] * v[static_cast<std::size_t>(b)];
      }
  return r;
}

}  // namespace ahg
