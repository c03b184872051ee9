#include "ahg/conformal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

namespace ahg {

namespace {

using cd = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<std::size_t> strides_of(const std::vector<int>& res) {
  std::vector<std::size_t> s(res.size(), 1);
  for (int a = static_cast<int>(res.size()) - 2; a >= 0; --a) s[a] = s[a + 1] * static_cast<std::size_t>(res[a + 1]);
  return s;
}

std::size_t total_size(const std::vector<int>& res) {
  std::size_t n = 1;
  for (int r : res) n *= static_cast<std::size_t>(r);
  return n;
}

int signed_wave(int j, int N) { return j <= N / 2 ? j : j - N; }

// Unscaled transform of every line along every axis.
void transform_all(std::vector<cd>& data, const std::vector<int>& res, bool inverse) {
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  const auto strides = strides_of(res);
  const std::size_t total = data.size();
  std::vector<cd> line, out;
  for (std::size_t a = 0; a < res.size(); ++a) {
    const int N = res[a];
    const std::size_t st = strides[a];
    line.resize(static_cast<std::size_t>(N));
    for (std::size_t base = 0; base < total; ++base) {
      if ((base / st) % static_cast<std::size_t>(N) != 0) continue;
      for (int j = 0; j < N; ++j) line[j] = data[base + j * st];
      if (inverse)
        fft.inv(out, line);
      else
        fft.fwd(out, line);
      for (int j = 0; j < N; ++j) data[base + j * st] = out[j];
    }
  }
}

void collect_vars(const ExprNode* node, std::unordered_set<const ExprNode*>& seen, std::vector<bool>& used) {
  if (!node || !seen.insert(node).second) return;
  if (node->kind == NodeKind::Var && node->index < static_cast<int>(used.size())) used[node->index] = true;
  collect_vars(node->lhs.get(), seen, used);
  collect_vars(node->rhs.get(), seen, used);
}

double sqrt_det_metric(const ChartSpec& chart, std::span<const double> p) {
  const int m = chart.dim();
  Eigen::MatrixXd g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = eval(chart.metric(i, j), p);
  const double det = g.determinant();
  if (!(det > 0)) throw SingularMetricError("metric determinant is not positive at a quadrature node");
  return std::sqrt(det);
}

struct Rule {
  std::vector<double> x, w;
};

Rule gauss_rule(int count, double lo, double hi) {
  Rule r;
  std::vector<double> t, w;
  gauss_legendre(count, t, w);
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  for (int i = 0; i < count; ++i) {
    r.x.push_back(mid + half * t[i]);
    r.w.push_back(half * w[i]);
  }
  return r;
}

Rule periodic_rule(int count, double lo, double hi) {
  Rule r;
  for (int i = 0; i < count; ++i) {
    r.x.push_back(lo + (hi - lo) * i / count);
    r.w.push_back((hi - lo) / count);
  }
  return r;
}

Quadrature tensor_quadrature(const std::vector<Rule>& rules, const std::function<double(std::span<const double>)>& fn) {
  Quadrature q;
  const std::size_t d = rules.size();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d);
  while (true) {
    double w = 1.0;
    for (std::size_t a = 0; a < d; ++a) {
      x[a] = rules[a].x[idx[a]];
      w *= rules[a].w[idx[a]];
    }
    q.value += w * fn(x);
    ++q.evaluations;
    std::size_t a = d;
    while (a > 0) {
      --a;
      if (++idx[a] < rules[a].x.size()) break;
      idx[a] = 0;
      if (a == 0) return q;
    }
    if (d == 0) return q;
  }
}

Quadrature box_quadrature(const ChartSpec& chart, const ScalarField& field, const QuadratureOptions& opt,
                          bool half) {
  const int m = chart.dim();
  std::vector<bool> active = chart_axes(chart);
  for (int a = 0; a < m; ++a)
    if (opt.field_axes.empty() || (a < static_cast<int>(opt.field_axes.size()) && opt.field_axes[a])) active[a] = true;
  std::vector<Rule> rules;
  for (int a = 0; a < m; ++a) {
    const Axis& ax = chart.domain[a];
    if (!active[a]) {
      rules.push_back(Rule{{0.5 * (ax.lo + ax.hi)}, {ax.hi - ax.lo}});
    } else if (ax.periodic) {
      const int N = half ? std::max(1, opt.torus_resolution / 2) : opt.torus_resolution;
      rules.push_back(periodic_rule(N, ax.lo, ax.hi));
    } else {
      const int N = half ? std::max(1, opt.gauss_nodes / 2) : opt.gauss_nodes;
      rules.push_back(gauss_rule(N, ax.lo, ax.hi));
    }
  }
  return tensor_quadrature(rules, [&](std::span<const double> x) { return field(x) * sqrt_det_metric(chart, x); });
}

// Polar coordinates (r, eta, xi1, xi2) with z1 = (x1, x3), z2 = (x2, x4).
Quadrature hopf_quadrature(const ChartSpec& chart, const ScalarField& field, const QuadratureOptions& opt, bool half) {
  if (chart.dim() != 4) throw ConformalError("Hopf annulus quadrature needs a 4-dimensional chart");
  const int N = half ? std::max(1, opt.hopf_nodes / 2) : opt.hopf_nodes;
  std::vector<Rule> rules{gauss_rule(N, 1.0, 2.0), gauss_rule(N, 0.0, std::numbers::pi / 2),
                          periodic_rule(N, 0.0, kTwoPi), periodic_rule(N, 0.0, kTwoPi)};
  return tensor_quadrature(rules, [&](std::span<const double> y) {
    const double r = y[0], ce = std::cos(y[1]), se = std::sin(y[1]);
    const double x[4] = {r * ce * std::cos(y[2]), r * se * std::cos(y[3]), r * ce * std::sin(y[2]),
                         r * se * std::sin(y[3])};
    const double jac = r * r * r * ce * se;
    return field(x) * sqrt_det_metric(chart, x) * jac;
  });
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

std::vector<int> normalize_resolution(std::vector<int> res, int dim) {
  if (res.empty()) res.assign(static_cast<std::size_t>(dim), 16);
  if (res.size() == 1) res.assign(static_cast<std::size_t>(dim), res[0]);
  if (static_cast<int>(res.size()) != dim) throw ConformalError("resolution needs one entry per coordinate");
  for (int r : res)
    if (!is_power_of_two(r) || r < 2) throw ConformalError("grid resolutions must be powers of two");
  return res;
}

SpectralGrid map_grid(const SpectralGrid& a, const std::function<double(double)>& fn) {
  SpectralGrid r = a;
  for (double& v : r.values) v = fn(v);
  return r;
}

SpectralGrid combine(const SpectralGrid& a, const SpectralGrid& b, const std::function<double(double, double)>& fn) {
  SpectralGrid r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r.values[i] = fn(a.values[i], b.values[i]);
  return r;
}

SpectralGrid spectral_multiply(const SpectralGrid& u, const std::function<cd(std::span<const int>)>& symbol) {
  auto c = u.fourier();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= symbol(u.wave_vector(i));
  return SpectralGrid::from_fourier(u.resolution, c);
}

double k_squared(std::span<const int> k) {
  double s = 0;
  for (int v : k) s += static_cast<double>(v) * v;
  return s;
}

SpectralGrid grad_dot(const std::vector<SpectralGrid>& a, const std::vector<SpectralGrid>& b) {
  SpectralGrid r(a[0].resolution);
  for (std::size_t ax = 0; ax < a.size(); ++ax)
    for (std::size_t i = 0; i < r.size(); ++i) r.values[i] += a[ax].values[i] * b[ax].values[i];
  return r;
}

SpectralGrid divergence(const std::vector<SpectralGrid>& v) {
  SpectralGrid r(v[0].resolution);
  for (std::size_t ax = 0; ax < v.size(); ++ax) {
    const int a = static_cast<int>(ax);
    const int N = v[ax].resolution[ax];
    const SpectralGrid d = spectral_multiply(v[ax], [&](std::span<const int> k) {
      return 2 * std::abs(k[a]) == N ? cd(0) : cd(0, k[a]);
    });
    for (std::size_t i = 0; i < r.size(); ++i) r.values[i] += d.values[i];
  }
  return r;
}

// Curvature values at every grid point, evaluated once per distinct point of
// the coordinates the chart depends on.
template <class Fn>
SpectralGrid sample_chart_field(const ChartSpec& chart, const std::vector<int>& res, Fn fn) {
  const std::vector<bool> active = chart_axes(chart);
  SpectralGrid out(res);
  const auto strides = strides_of(res);
  std::unordered_map<std::size_t, double> cache;
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::size_t key = 0;
    for (std::size_t a = 0; a < res.size(); ++a)
      if (active[a]) key += ((i / strides[a]) % res[a]) * strides[a];
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, fn(out.point(key))).first;
    out.values[i] = it->second;
  }
  return out;
}


}  // namespace

// ---------------------------------------------------------------------------

SpectralGrid::SpectralGrid(std::vector<int> res, double fill) : resolution(std::move(res)) {
  values.assign(total_size(resolution), fill);
}

SpectralGrid SpectralGrid::sample(std::vector<int> res, const std::function<double(std::span<const double>)>& fn) {
  SpectralGrid g(std::move(res));
  for (std::size_t i = 0; i < g.size(); ++i) g.values[i] = fn(g.point(i));
  return g;
}

std::vector<double> SpectralGrid::point(std::size_t index) const {
  const auto st = strides_of(resolution);
  std::vector<double> x(resolution.size());
  for (std::size_t a = 0; a < resolution.size(); ++a)
    x[a] = kTwoPi * static_cast<double>((index / st[a]) % resolution[a]) / resolution[a];
  return x;
}

int SpectralGrid::wave_number(int axis, int j) const { return signed_wave(j, resolution[axis]); }

std::vector<int> SpectralGrid::wave_vector(std::size_t index) const {
  const auto st = strides_of(resolution);
  std::vector<int> k(resolution.size());
  for (std::size_t a = 0; a < resolution.size(); ++a)
    k[a] = signed_wave(static_cast<int>((index / st[a]) % resolution[a]), resolution[a]);
  return k;
}

std::vector<cd> SpectralGrid::fourier() const {
  std::vector<cd> c(values.begin(), values.end());
  transform_all(c, resolution, false);
  const double inv = 1.0 / static_cast<double>(size());
  for (auto& v : c) v *= inv;
  return c;
}

SpectralGrid SpectralGrid::from_fourier(std::vector<int> res, std::span<const cd> coeffs) {
  if (coeffs.size() != total_size(res)) throw ConformalError("coefficient count does not match the resolution");
  std::vector<cd> c(coeffs.begin(), coeffs.end());
  transform_all(c, res, true);
  SpectralGrid g(std::move(res));
  for (std::size_t i = 0; i < g.size(); ++i) g.values[i] = c[i].real();
  return g;
}

double SpectralGrid::mean() const {
  double s = 0;
  for (double v : values) s += v;
  return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

double SpectralGrid::sup() const {
  double s = 0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

Expr SpectralGrid::to_expr(double cutoff) const {
  const auto c = fourier();
  double cmax = 0;
  for (const auto& v : c) cmax = std::max(cmax, std::abs(v));
  const auto st = strides_of(resolution);
  Expr out(0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (std::abs(c[i]) <= cutoff * cmax) continue;
    std::size_t neg = 0;
    for (std::size_t a = 0; a < resolution.size(); ++a) {
      const std::size_t j = (i / st[a]) % resolution[a];
      neg += ((resolution[a] - j) % resolution[a]) * st[a];
    }
    if (neg < i) continue;
    const double weight = neg == i ? 1.0 : 2.0;
    const auto k = wave_vector(i);
    Expr phase(0.0);
    bool zero = true;
    for (std::size_t a = 0; a < k.size(); ++a)
      if (k[a] != 0) {
        phase += static_cast<double>(k[a]) * Expr::var(static_cast<int>(a));
        zero = false;
      }
    if (zero) {
      out += weight * c[i].real();
      continue;
    }
    if (std::abs(c[i].real()) > cutoff * cmax) out += weight * c[i].real() * cos(phase);
    if (std::abs(c[i].imag()) > cutoff * cmax) out -= weight * c[i].imag() * sin(phase);
  }
  return out;
}

double hermitian_symmetry_defect(const std::vector<int>& res, std::span<const cd> coeffs) {
  const auto st = strides_of(res);
  double worst = 0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    std::size_t neg = 0;
    for (std::size_t a = 0; a < res.size(); ++a) neg += ((res[a] - (i / st[a]) % res[a]) % res[a]) * st[a];
    worst = std::max(worst, std::abs(coeffs[i] - std::conj(coeffs[neg])));
  }
  return worst;
}

namespace {
constexpr char kMagic[8] = {'A', 'H', 'G', 'G', 'R', 'I', 'D', '1'};

void write_le(std::ofstream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

std::uint64_t read_le(std::ifstream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw ConformalError("grid file is truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}
}  // namespace

void save_grid(const SpectralGrid& grid, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConformalError("cannot write " + path);
  os.write(kMagic, sizeof kMagic);
  write_le(os, grid.resolution.size());
  for (int r : grid.resolution) write_le(os, static_cast<std::uint64_t>(r));
  for (double v : grid.values) write_le(os, std::bit_cast<std::uint64_t>(v));
  if (!os) throw ConformalError("failed writing " + path);
}

SpectralGrid load_grid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConformalError("cannot read " + path);
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0) throw ConformalError(path + " is not a grid file");
  const auto axes = read_le(is);
  if (axes == 0 || axes > 16) throw ConformalError("grid file has an invalid axis count");
  std::vector<int> res;
  for (std::uint64_t a = 0; a < axes; ++a) {
    const auto r = read_le(is);
    if (r == 0 || r > (1u << 20)) throw ConformalError("grid file has an invalid resolution");
    res.push_back(static_cast<int>(r));
  }
  SpectralGrid g(std::move(res));
  for (double& v : g.values) v = std::bit_cast<double>(read_le(is));
  return g;
}

// ---------------------------------------------------------------------------

ConformalPair scale_chart(const ChartSpec& chart, const Expr& f) {
  ConformalPair pair{chart, f, chart};
  pair.scaled.name = chart.name + "_scaled";
  const Expr factor = exp(2.0 * f);
  for (auto& gij : pair.scaled.g)
    if (!gij.is_constant(0.0)) gij = factor * gij;
  return pair;
}

ConformalPair scale_chart(const ChartSpec& chart, const SpectralGrid& f, double cutoff) {
  if (f.axes() != chart.dim()) throw ConformalError("grid and chart dimensions differ");
  return scale_chart(chart, f.to_expr(cutoff));
}

double lee_transform_residual(const ConformalPair& pair, std::span<const double> p) {
  const Geometry base(pair.base, p, 2), scaled(pair.scaled, p, 2);
  const TensorD a = values(base.to_coordinates(lee_form_jets(base)));
  const TensorD at = values(scaled.to_coordinates(lee_form_jets(scaled)));
  const Jet fj = eval_jet(pair.f, p, 1);
  const int m = base.dim(), n = base.n();
  double worst = 0;
  for (int mu = 0; mu < m; ++mu)
    worst = std::max(worst, std::abs(at(mu) - a(mu) - 2.0 * (n - 1) * fj.derivative({mu})));
  return worst;
}

ChernLaplacian chern_laplacian(const ChartSpec& chart, const Expr& f, std::span<const double> p) {
  const Geometry geo(chart, p, 2);
  return chern_laplacian_routes(geo, chern_connection(geo), lee_form_jets(geo), eval_jet(f, p, 2));
}

std::vector<IdentityResidual> conformal_scalar_residuals(const ConformalPair& pair, std::span<const double> p,
                                                         std::optional<Expr> v) {
  const Expr test = v ? *v : identity_test_function(pair.base.dim());
  const Geometry base(pair.base, p, 2), scaled(pair.scaled, p, 2);
  const int n = base.n();
  const ChernScalars cb = chern_scalars(base), cs = chern_scalars(scaled);
  const TensorJ Kb = chern_connection(base), Ks = chern_connection(scaled);
  const TensorJ ab = lee_form_jets(base), as = lee_form_jets(scaled);
  const Jet fj = eval_jet(pair.f, p, 2), vj = eval_jet(test, p, 2);
  const double e2f = std::exp(2.0 * fj.value());
  const double lap_f = chern_laplacian_routes(base, Kb, ab, fj).hessian;
  const double lap_v = chern_laplacian_routes(base, Kb, ab, vj).hessian;
  const double lap_v_scaled = chern_laplacian_routes(scaled, Ks, as, vj).hessian;

  // delta of the base Lee form with respect to the scaled metric.
  const TensorJ a_scaled_frame = scaled.to_frame(base.to_coordinates(ab));
  const double delta_hat = scaled.codiff(a_scaled_frame)().value();
  const double delta = base.codiff(ab)().value();
  const TensorJ df = base.df(fj);
  double df_alpha = 0;
  for (int A = 0; A < base.dim(); ++A) df_alpha += df(A).value() * ab(A).value();

  std::vector<IdentityResidual> out;
  auto push = [&](IdentityId id, double lhs, double rhs) {
    IdentityResidual r;
    r.id = id;
    r.point.assign(p.begin(), p.end());
    r.lhs = lhs;
    r.rhs = rhs;
    r.abs_residual = std::abs(lhs - rhs);
    r.rel_residual = relative_residual(lhs, rhs);
    out.push_back(r);
  };
  push(IdentityId::I3_11, e2f * cs.S1, cb.S1 + n * lap_f);
  push(IdentityId::I3_12, e2f * cs.S2, cb.S2 + lap_f);
  push(IdentityId::I4_2, lap_v_scaled, lap_v / e2f);
  push(IdentityId::I4_5, delta_hat, (delta - (2.0 * n - 2.0) * df_alpha) / e2f);
  return out;
}

// ---------------------------------------------------------------------------

void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights) {
  if (count < 1) throw std::invalid_argument("Gauss rule needs at least one node");
  nodes.assign(static_cast<std::size_t>(count), 0.0);
  weights.assign(static_cast<std::size_t>(count), 0.0);
  for (int i = 0; i < (count + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= count; ++k) {
        const double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = count * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1, p1 = x;
    for (int k = 2; k <= count; ++k) {
      const double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = count * (x * p1 - p0) / (x * x - 1);
    nodes[i] = -x;
    nodes[count - 1 - i] = x;
    weights[i] = weights[count - 1 - i] = 2.0 / ((1 - x * x) * dp * dp);
  }
}

std::vector<bool> chart_axes(const ChartSpec& chart) {
  std::vector<bool> used(static_cast<std::size_t>(chart.dim()), false);
  std::unordered_set<const ExprNode*> seen;
  for (const auto& e : chart.g) collect_vars(e.node(), seen, used);
  for (const auto& e : chart.J) collect_vars(e.node(), seen, used);
  return used;
}

Quadrature integrate(const CatalogEntry& entry, const ScalarField& field, const QuadratureOptions& opt) {
  return integrate(entry, entry.chart, field, opt);
}

Quadrature integrate(const CatalogEntry& entry, const ChartSpec& chart, const ScalarField& field,
                     const QuadratureOptions& opt) {
  auto run = [&](bool half) {
    switch (entry.domain) {
      case FundamentalDomain::Box: return box_quadrature(chart, field, opt, half);
      case FundamentalDomain::HopfAnnulus: return hopf_quadrature(chart, field, opt, half);
      case FundamentalDomain::None: break;
    }
    throw ConformalError(entry.name + " has no declared compact fundamental domain");
  };
  Quadrature q = run(false);
  if (opt.estimate_error) {
    const Quadrature coarse = run(true);
    q.error_estimate = std::abs(q.value - coarse.value);
    q.evaluations += coarse.evaluations;
  }
  return q;
}

GammaInvariant gamma_invariant(const CatalogEntry& entry, double lambda, double mu, std::optional<Expr> gauduchon_factor,
                               const QuadratureOptions& opt, double tol) {
  const ChartSpec chart = gauduchon_factor ? scale_chart(entry.chart, *gauduchon_factor).scaled : entry.chart;
  GammaInvariant r;
  r.lambda = lambda;
  r.mu = mu;
  const int n = chart.n;
  QuadratureOptions chart_only = opt;
  chart_only.field_axes.assign(static_cast<std::size_t>(chart.dim()), false);
  double worst = 0;
  const Quadrature mixed = integrate(entry, chart, [&](std::span<const double> x) {
    const Geometry geo(chart, x, 2);
    worst = std::max(worst, std::abs(geo.codiff(lee_form_jets(geo))().value()));
    const ChernScalars cs = chern_scalars(geo);
    return lambda * cs.S1 + mu * cs.S2;
  }, chart_only);
  r.lee_coclosed_residual = worst;
  if (worst > tol)
    throw ConformalError("metric is not Gauduchon: sup |delta alpha| = " + std::to_string(worst) +
                         "; supply a Gauduchon factor");
  const Quadrature vol = integrate(entry, chart, [](std::span<const double>) { return 1.0; }, chart_only);
  r.volume = vol.value;
  r.raw_integral = mixed.value;
  r.unit_volume_factor = std::pow(vol.value, -1.0 / n);
  const double scale = std::pow(vol.value, -(n - 1.0) / n);
  r.value = scale * mixed.value;
  r.error_estimate = scale * mixed.error_estimate + std::abs(r.value) * vol.error_estimate / std::max(vol.value, 1e-300);
  return r;
}

// ---------------------------------------------------------------------------

TorusFamily torus_family(const ChartSpec& chart, std::vector<int> res) {
  const int m = chart.dim();
  res = normalize_resolution(std::move(res), m);
  for (const Axis& a : chart.domain)
    if (!a.periodic || std::abs(a.lo) > 1e-12 || std::abs(a.hi - kTwoPi) > 1e-12)
      throw ConformalError(chart.name + " is not a torus chart on [0, 2pi)");
  const auto J0 = standard_complex_structure(chart.n);
  for (int i = 0; i < m * m; ++i)
    if (!chart.J[i].is_constant() || chart.J[i].constant_value() != J0[i].constant_value())
      throw ConformalError(chart.name + " does not carry the standard complex structure");
  const std::string diag = to_string(chart.metric(0, 0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j ? to_string(chart.metric(i, j)) != diag : !chart.metric(i, j).is_constant(0.0))
        throw ConformalError(chart.name + " is not conformally flat in its coordinates");
    }
  TorusFamily fam;
  fam.n = chart.n;
  const Expr phi = chart.metric(0, 0);
  fam.h = SpectralGrid::sample(res, [&](std::span<const double> x) {
    const double v = eval(phi, x);
    if (!(v > 0)) throw SingularMetricError("conformal factor is not positive");
    return 0.5 * std::log(v);
  });
  return fam;
}

SpectralGrid flat_laplacian(const SpectralGrid& u) {
  return spectral_multiply(u, [](std::span<const int> k) { return cd(k_squared(k)); });
}

std::vector<SpectralGrid> gradient(const SpectralGrid& u) {
  std::vector<SpectralGrid> out;
  for (int a = 0; a < u.axes(); ++a) {
    const int N = u.resolution[a];
    out.push_back(spectral_multiply(u, [&](std::span<const int> k) {
      return 2 * std::abs(k[a]) == N ? cd(0) : cd(0, k[a]);
    }));
  }
  return out;
}

SpectralGrid chern_laplacian(const TorusFamily& fam, const SpectralGrid& u) {
  return combine(flat_laplacian(u), fam.h, [](double l, double h) { return std::exp(-2 * h) * l; });
}

SpectralGrid lee_codifferential(const TorusFamily& fam) {
  const double c = 2.0 * fam.n - 2.0;
  const auto dh = gradient(fam.h);
  const SpectralGrid dh2 = grad_dot(dh, dh), lh = flat_laplacian(fam.h);
  SpectralGrid r(fam.h.resolution);
  for (std::size_t i = 0; i < r.size(); ++i)
    r.values[i] = std::exp(-2 * fam.h.values[i]) * c * (lh.values[i] - c * dh2.values[i]);
  return r;
}

SpectralGrid chern_laplacian_adjoint(const TorusFamily& fam, const SpectralGrid& v) {
  const double c = 2.0 * fam.n - 2.0;
  const SpectralGrid lv = flat_laplacian(v), da = lee_codifferential(fam);
  const SpectralGrid hv = grad_dot(gradient(fam.h), gradient(v));
  SpectralGrid r(v.resolution);
  for (std::size_t i = 0; i < r.size(); ++i)
    r.values[i] = std::exp(-2 * fam.h.values[i]) * (lv.values[i] - 2 * c * hv.values[i]) + da.values[i] * v.values[i];
  return r;
}

double grid_integral(const TorusFamily& fam, const SpectralGrid& u) {
  const double cell = std::pow(kTwoPi, u.axes()) / static_cast<double>(u.size());
  double s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u.values[i] * std::exp(2.0 * fam.n * fam.h.values[i]);
  return s * cell;
}

double l2_product(const TorusFamily& fam, const SpectralGrid& u, const SpectralGrid& v) {
  return grid_integral(fam, combine(u, v, [](double a, double b) { return a * b; }));
}

std::vector<std::vector<int>> adjoint_kernel_modes(const TorusFamily& fam, double tol) {
  const auto& res = fam.h.resolution;
  const int d = static_cast<int>(res.size());
  const int kmax = 2;
  std::vector<std::vector<int>> kernel;
  std::vector<int> k(static_cast<std::size_t>(d), -kmax);
  while (true) {
    bool annihilated = true;
    for (int phase = 0; phase < 2 && annihilated; ++phase) {
      const SpectralGrid mode = SpectralGrid::sample(res, [&](std::span<const double> x) {
        double t = 0;
        for (int a = 0; a < d; ++a) t += k[a] * x[a];
        return phase == 0 ? std::cos(t) : std::sin(t);
      });
      if (mode.sup() < 0.5) continue;  // sin of the zero mode
      annihilated = chern_laplacian_adjoint(fam, mode).sup() <= tol;
    }
    if (annihilated) kernel.push_back(k);
    int a = d - 1;
    while (a >= 0 && ++k[a] > kmax) k[a--] = -kmax;
    if (a < 0) break;
  }
  return kernel;
}

MixedSolution solve_mixed_equation(const ChartSpec& chart, double lambda, double mu, std::vector<int> res,
                                   std::optional<double> gamma, int check_points) {
  const int n = chart.n;
  const double coef = n * lambda + mu;
  if (std::abs(coef) < 1e-14)
    throw ConformalError("n*lambda + mu = 0: the mixed scalar curvature integral is then a conformal invariant "
                         "and the equation is not solvable for f in general");
  const TorusFamily fam = torus_family(chart, std::move(res));
  const auto& grid_res = fam.h.resolution;
  const SpectralGrid S = sample_chart_field(chart, grid_res, [&](std::span<const double> x) {
    const ChernScalars cs = chern_scalars(Geometry(chart, x, 2));
    return lambda * cs.S1 + mu * cs.S2;
  });
  // Delta^Ch = e^{-2h} Delta_0, so the image is orthogonal to e^{2h} in flat L^2.
  const SpectralGrid w = map_grid(fam.h, [](double h) { return std::exp(2 * h); });
  const double wmean = w.mean();
  MixedSolution sol;
  sol.gamma = gamma ? *gamma : combine(w, S, [](double a, double b) { return a * b; }).mean() / wmean;
  SpectralGrid rhs = map_grid(S, [&](double s) { return sol.gamma - s; });
  const double defect = combine(w, rhs, [](double a, double b) { return a * b; }).mean() / wmean;
  if (std::abs(defect) > 1e-12 * std::max(1.0, S.sup()))
    throw ConformalError("right-hand side is not orthogonal to the adjoint kernel (defect " + std::to_string(defect) +
                         ")");
  for (double& v : rhs.values) v -= defect;
  sol.zero_mode_removed = defect;
  const SpectralGrid src = combine(w, rhs, [&](double a, double b) { return a * b / coef; });
  sol.f = spectral_multiply(src, [](std::span<const int> k) {
    const double k2 = k_squared(k);
    return k2 == 0 ? cd(0) : cd(1.0 / k2);
  });
  const SpectralGrid lhs = chern_laplacian(fam, sol.f);
  for (std::size_t i = 0; i < lhs.size(); ++i)
    sol.residual = std::max(sol.residual, std::abs(coef * lhs.values[i] - rhs.values[i]));

  if (check_points > 0) {
    const ConformalPair pair = scale_chart(chart, sol.f);
    sol.check_residual = 0;
    const std::size_t total = sol.f.size();
    for (int c = 0; c < check_points; ++c) {
      const std::size_t idx = (static_cast<std::size_t>(c) * 2654435761u) % total;
      const auto x = sol.f.point(idx);
      const ChernScalars cs = chern_scalars(Geometry(pair.scaled, x, 2));
      const double lhs_v = lambda * cs.S1 + mu * cs.S2;
      const double rhs_v = std::exp(-2 * sol.f.values[idx]) * sol.gamma;
      sol.check_residual = std::max(sol.check_residual, relative_residual(lhs_v, rhs_v));
    }
  }
  return sol;
}

namespace {

struct GauduchonObjective {
  int n;
  double c;
  // E = c^2 int e^{(2n-4)w} Q^2 dx with Q = Delta_0 w - c |dw|^2.
  double value(const SpectralGrid& w, SpectralGrid* Q_out = nullptr) const {
    const auto dw = gradient(w);
    const SpectralGrid Q = combine(flat_laplacian(w), grad_dot(dw, dw), [&](double l, double g2) { return l - c * g2; });
    double s = 0;
    for (std::size_t i = 0; i < Q.size(); ++i)
      s += c * c * std::exp((2.0 * n - 4.0) * w.values[i]) * Q.values[i] * Q.values[i];
    if (Q_out) *Q_out = Q;
    return s * std::pow(kTwoPi, w.axes()) / static_cast<double>(w.size());
  }
  SpectralGrid gradient_density(const SpectralGrid& w, const SpectralGrid& Q) const {
    SpectralGrid rho = map_grid(w, [&](double v) { return c * c * std::exp((2.0 * n - 4.0) * v); });
    const SpectralGrid rq = combine(rho, Q, [](double a, double b) { return a * b; });
    auto dw = gradient(w);
    for (auto& comp : dw)
      for (std::size_t i = 0; i < comp.size(); ++i) comp.values[i] *= rq.values[i];
    const SpectralGrid lap = flat_laplacian(rq), div = divergence(dw);
    SpectralGrid G(w.resolution);
    for (std::size_t i = 0; i < G.size(); ++i)
      G.values[i] = (2.0 * n - 4.0) * rq.values[i] * Q.values[i] + 2 * lap.values[i] + 4 * c * div.values[i];
    return G;
  }
  double residual(const SpectralGrid& w) const {
    SpectralGrid Q;
    value(w, &Q);
    double s = 0;
    for (std::size_t i = 0; i < Q.size(); ++i) s = std::max(s, std::abs(c * std::exp(-2 * w.values[i]) * Q.values[i]));
    return s;
  }
};

}  // namespace

GauduchonSearch find_gauduchon_factor(const ChartSpec& chart, double tol, int max_modes, std::vector<int> res,
                                      int max_iterations) {
  const TorusFamily fam = torus_family(chart, std::move(res));
  const GauduchonObjective obj{fam.n, 2.0 * fam.n - 2.0};
  GauduchonSearch out;
  out.f = SpectralGrid(fam.h.resolution);
  const double cell = std::pow(kTwoPi, fam.h.axes()) / static_cast<double>(fam.h.size());
  auto total = [&](const SpectralGrid& f) { return combine(f, fam.h, [](double a, double b) { return a + b; }); };

  SpectralGrid Q;
  double E = obj.value(total(out.f), &Q);
  out.history.push_back(E);
  out.residual = obj.residual(total(out.f));
  while (out.residual > tol && out.iterations < max_iterations) {
    const SpectralGrid w = total(out.f);
    const SpectralGrid G = obj.gradient_density(w, Q);
    double rho_mean = 0;
    for (double v : w.values) rho_mean += obj.c * obj.c * std::exp((2.0 * fam.n - 4.0) * v);
    rho_mean /= static_cast<double>(w.size());
    const SpectralGrid dir = spectral_multiply(G, [&](std::span<const int> k) {
      for (int v : k)
        if (std::abs(v) > max_modes) return cd(0);
      const double k2 = k_squared(k);
      return k2 == 0 ? cd(0) : cd(-1.0 / (2.0 * rho_mean * k2 * k2));
    });
    double slope = 0;
    for (std::size_t i = 0; i < G.size(); ++i) slope += G.values[i] * dir.values[i];
    slope *= cell;
    if (!(slope < 0)) break;
    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt, t *= 0.5) {
      SpectralGrid trial = out.f;
      for (std::size_t i = 0; i < trial.size(); ++i) trial.values[i] += t * dir.values[i];
      SpectralGrid Qt;
      const double Et = obj.value(total(trial), &Qt);
      if (Et < E && Et <= E + 1e-4 * t * slope) {
        out.f = std::move(trial);
        E = Et;
        Q = std::move(Qt);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    ++out.iterations;
    out.history.push_back(E);
    out.residual = obj.residual(total(out.f));
  }
  out.converged = out.residual <= tol;
  // Unit volume: int e^{2n(f + h + s)} dx = 1.
  const SpectralGrid w = total(out.f);
  double vol = 0;
  for (double v : w.values) vol += std::exp(2.0 * fam.n * v);
  vol *= cell;
  out.volume_shift = -std::log(vol) / (2.0 * fam.n);
  return out;
}

}  // namespace ahg
