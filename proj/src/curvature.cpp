#include "ahg/curvature.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace ahg {

namespace {

using cd = std::complex<double>;

// (Jm X)(C,B) = sum_D Jm(C,D) X(D,B) for a slice X(D,B) = P(A,D,B).
Jet j_times(const Eigen::MatrixXd& Jm, const TensorJ& P, int A, int C, int B) {
  Jet acc(0.0);
  for (int D = 0; D < Jm.rows(); ++D)
    if (Jm(C, D) != 0.0) acc += P(A, D, B) * Jm(C, D);
  return acc;
}

// (nabla_{J e_B} J)^X_Y
Jet p_of_j(const Eigen::MatrixXd& Jm, const TensorJ& P, int B, int X, int Y) {
  Jet acc(0.0);
  for (int D = 0; D < Jm.rows(); ++D)
    if (Jm(D, B) != 0.0) acc += P(D, X, Y) * Jm(D, B);
  return acc;
}

double pair_with_F(const TensorD& beta, int n) {
  double acc = 0;
  for (int i = 0; i < n; ++i) acc += beta(i, n + i);
  return acc;
}

IdentityResidual make_residual(IdentityId id, const std::vector<double>& p, double lhs, double rhs,
                               std::optional<double> abs = std::nullopt) {
  IdentityResidual r;
  r.id = id;
  r.point = p;
  r.lhs = lhs;
  r.rhs = rhs;
  r.abs_residual = abs ? *abs : std::abs(lhs - rhs);
  r.rel_residual = r.abs_residual / std::max({1.0, std::abs(lhs), std::abs(rhs)});
  return r;
}

}  // namespace

double relative_residual(double lhs, double rhs) {
  return std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

RicciScalar ricci_and_scalar(const Geometry& geo) {
  const TensorD R = values(geo.riemann());
  const int m = geo.dim();
  RicciScalar r{TensorD(m, 2), 0.0};
  for (int X = 0; X < m; ++X)
    for (int Y = 0; Y < m; ++Y) {
      double acc = 0;
      for (int A = 0; A < m; ++A) acc += R(A, X, A, Y);
      r.ric(X, Y) = acc;
    }
  for (int A = 0; A < m; ++A) r.s += r.ric(A, A);
  return r;
}

RicciScalar ricci_and_scalar(const ChartSpec& chart, std::span<const double> p) {
  return ricci_and_scalar(Geometry(chart, p, 2));
}

TensorC complexify(const TensorD& t, const Eigen::MatrixXcd& W) { return transform_all<cd>(t, W); }

JScalar j_scalar(const Geometry& geo) {
  const TensorD R = values(geo.riemann());
  const int m = geo.dim(), n = geo.n();
  const auto& Jm = geo.Jm();
  JScalar r;
  // Ric_J(X,Y) = sum_A R(e_A, X, J e_A, J Y)
  r.ric_J = TensorD(m, 2);
  for (int X = 0; X < m; ++X)
    for (int Y = 0; Y < m; ++Y) {
      double acc = 0;
      for (int A = 0; A < m; ++A)
        for (int C = 0; C < m; ++C) {
          if (Jm(C, A) == 0.0) continue;
          for (int D = 0; D < m; ++D)
            if (Jm(D, Y) != 0.0) acc += Jm(C, A) * Jm(D, Y) * R(A, X, C, D);
        }
      r.ric_J(X, Y) = acc;
    }
  for (int A = 0; A < m; ++A) {
    r.s_J += r.ric_J(A, A);
    for (int B = 0; B < m; ++B) r.s += R(B, A, B, A);
  }
  const TensorC Rc = complexify(R, geo.unitary_rows());
  cd a(0), b(0), c(0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a += Rc(n + i, i, j, n + j);      // R(ui bar, ui, uj, uj bar)
      b += Rc(n + i, n + j, i, j);      // R(ui bar, uj bar, ui, uj)
      c += Rc(n + i, j, i, n + j);      // R(ui bar, uj, ui, uj bar)
    }
  r.s_J_unitary = 2.0 * a.real();
  r.s_line1 = 4.0 * b.real() + 2.0 * a.real();
  r.s_line2 = 4.0 * c.real() - 2.0 * a.real();
  return r;
}

JScalar j_scalar(const ChartSpec& chart, std::span<const double> p) { return j_scalar(Geometry(chart, p, 2)); }

TensorJ chern_connection(const Geometry& geo) {
  const int m = geo.dim();
  const auto& Jm = geo.Jm();
  const auto& conn = geo.connection();
  const TensorJ P = nabla_J(geo);
  TensorJ K(m, 3);
  for (int C = 0; C < m; ++C)
    for (int A = 0; A < m; ++A)
      for (int B = 0; B < m; ++B) {
        Jet v = conn(C, A, B) - 0.5 * j_times(Jm, P, A, C, B);
        v += 0.25 * (p_of_j(Jm, P, B, A, C) + j_times(Jm, P, B, A, C));
        v -= 0.25 * (p_of_j(Jm, P, C, A, B) + j_times(Jm, P, C, A, B));
        K(C, A, B) = v;
      }
  return K;
}

ChernConnectionCheck check_chern_connection(const Geometry& geo, const TensorJ& K) {
  const int m = geo.dim();
  const auto& Jm = geo.Jm();
  const auto& conn = geo.connection();
  const TensorD k = values(K);
  ChernConnectionCheck r;
  TensorD T(m, 3);
  for (int A = 0; A < m; ++A)
    for (int C = 0; C < m; ++C)
      for (int B = 0; B < m; ++B) {
        r.metric = std::max(r.metric, std::abs(k(C, A, B) + k(B, A, C)));
        double kj = 0, jk = 0;
        for (int D = 0; D < m; ++D) {
          kj += k(C, A, D) * Jm(D, B);
          jk += Jm(C, D) * k(D, A, B);
        }
        r.complex = std::max(r.complex, std::abs(kj - jk));
        // T^C(e_A, e_B)
        T(C, A, B) = k(C, A, B) - k(C, B, A) - (conn(C, A, B).value() - conn(C, B, A).value());
      }
  // (1,1) part of T: (T(X,Y) + T(JX,JY))/2
  const TensorD TJ = apply_J_slot(apply_J_slot(T, Jm, 1), Jm, 2);
  r.torsion_11 = 0.5 * sup_norm(T + TJ);
  return r;
}

ChernScalars chern_scalars(const Geometry& geo) {
  if (geo.order() < 2) throw JetError("Chern curvature needs jets of order 2");
  const int m = geo.dim(), n = geo.n();
  const TensorJ K = chern_connection(geo);
  const TensorJ Rj = geo.curvature_of(K);
  ChernScalars r;
  r.R = values(Rj);
  const TensorC Rc = complexify(r.R, geo.unitary_rows());
  cd s1(0), s2(0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      s1 += Rc(n + i, i, j, n + j);
      s2 += Rc(n + i, j, i, n + j);
    }
  r.S1 = s1.real();
  r.S2 = s2.real();
  // rho(X,Y) = i sum R(ui bar, ui, X, Y) = sum R(e_i, e_{n+i}, X, Y)
  TensorJ rho(m, 2);
  for (int C = 0; C < m; ++C)
    for (int D = 0; D < m; ++D) {
      Jet acc(0.0);
      for (int i = 0; i < n; ++i) acc += Rj(i, n + i, C, D);
      rho(C, D) = acc;
    }
  r.rho = values(rho);
  if (geo.order() >= 3) r.drho = sup_norm(geo.d(rho));
  return r;
}

ChernScalars chern_scalars(const ChartSpec& chart, std::span<const double> p) {
  return chern_scalars(Geometry(chart, p, 3));
}

ChernLaplacian chern_laplacian_routes(const Geometry& geo, const TensorJ& K, const TensorJ& alpha, const Jet& f) {
  const int m = geo.dim(), n = geo.n();
  const auto& Jm = geo.Jm();
  ChernLaplacian r;
  const TensorJ df = geo.df(f);
  for (int A = 0; A < m; ++A) {
    double h = geo.e(A, df(A)).value();
    for (int C = 0; C < m; ++C) h -= K(C, A, A).value() * df(C).value();
    r.hessian -= h;
  }
  r.hodge_lee = hodge_laplacian_fn(geo, f);
  for (int A = 0; A < m; ++A) r.hodge_lee += alpha(A).value() * df(A).value();
  TensorJ jdf(m, 1);
  for (int A = 0; A < m; ++A) {
    Jet acc(0.0);
    for (int C = 0; C < m; ++C)
      if (Jm(C, A) != 0.0) acc -= df(C) * Jm(C, A);
    jdf(A) = acc;
  }
  r.ddc = -pair_with_F(values(geo.d(jdf)), n);
  return r;
}

Expr identity_test_function(int dim) {
  Expr f(0.0);
  for (int i = 0; i < dim; ++i) f += (0.3 + 0.1 * i) * sin(Expr::var(i) + 0.2 * (i + 1));
  if (dim >= 2) f += 0.25 * cos(Expr::var(0) - Expr::var(dim - 1)) * Expr::var(1);
  return f;
}

const std::vector<IdentityId>& all_identities() {
  static const std::vector<IdentityId> ids{IdentityId::I2_1, IdentityId::I2_3, IdentityId::I2_4, IdentityId::I2_5,
                                           IdentityId::I2_6, IdentityId::I2_7, IdentityId::I3_2, IdentityId::I3_3,
                                           IdentityId::I3_5, IdentityId::I4_4, IdentityId::I5_4, IdentityId::I5_5};
  return ids;
}

const std::vector<IdentityId>& conformal_identities() {
  static const std::vector<IdentityId> ids{IdentityId::I3_11, IdentityId::I3_12, IdentityId::I4_2, IdentityId::I4_5};
  return ids;
}

std::string identity_name(IdentityId id) {
  switch (id) {
    case IdentityId::I2_1: return "I2.1";
    case IdentityId::I2_3: return "I2.3";
    case IdentityId::I2_4: return "I2.4";
    case IdentityId::I2_5: return "I2.5";
    case IdentityId::I2_6: return "I2.6";
    case IdentityId::I2_7: return "I2.7";
    case IdentityId::I3_2: return "I3.2";
    case IdentityId::I3_3: return "I3.3";
    case IdentityId::I3_5: return "I3.5";
    case IdentityId::I4_4: return "I4.4";
    case IdentityId::I3_11: return "I3.11";
    case IdentityId::I3_12: return "I3.12";
    case IdentityId::I4_2: return "I4.2";
    case IdentityId::I4_5: return "I4.5";
    case IdentityId::I5_4: return "I5.4";
    case IdentityId::I5_5: return "I5.5";
  }
  return "?";
}

std::optional<IdentityId> parse_identity(std::string_view name) {
  for (const auto* list : {&all_identities(), &conformal_identities()})
    for (IdentityId id : *list)
      if (identity_name(id) == name) return id;
  return std::nullopt;
}

bool identity_needs_hermitian(IdentityId id) { return id == IdentityId::I5_4 || id == IdentityId::I5_5; }

CurvatureReport curvature_report(const Geometry& geo, const Expr& test_fn) {
  if (geo.order() < 2) throw JetError("curvature report needs jets of order 2");
  CurvatureReport r;
  r.point = geo.point();
  const int n = geo.n();
  r.n = n;
  r.budget = hermitian_budget(geo);
  const HermitianBudget& b = r.budget;
  r.js = j_scalar(geo);
  r.s = r.js.s;
  r.s_J = r.js.s_J;
  const ChernScalars ch = chern_scalars(geo);
  r.S1 = ch.S1;
  r.S2 = ch.S2;
  r.rho = ch.rho;
  r.drho = ch.drho;
  r.alpha2 = b.norm2_alpha;
  r.N02 = b.norm2_N0;
  r.dF_minus2 = b.norm2_dF_minus;
  r.dF0_plus2 = b.norm2_dF0_plus;
  r.dF2 = b.norm2_dF;
  r.delta_alpha = b.delta_alpha;
  r.nablaF2 = b.norm2_nablaF;

  const TensorJ K = chern_connection(geo);
  const TensorJ alpha = lee_form_jets(geo);
  r.lap = chern_laplacian_routes(geo, K, alpha, eval_jet(test_fn, geo.point(), geo.order()));

  const auto& p = r.point;
  const double s = r.s, da = r.delta_alpha, a2 = r.alpha2;
  auto& ids = r.identities;
  {
    TensorD recon = b.dF_minus + b.dF0_plus + wedge(b.alpha, b.F) * (1.0 / (n - 1));
    const double gap = std::max(sup_norm(b.dF - recon), b.primitive_residual);
    ids.push_back(make_residual(IdentityId::I2_1, p, std::sqrt(b.norm2_dF), std::sqrt(form_norm2(recon)), gap));
  }
  ids.push_back(make_residual(IdentityId::I2_3, p, std::sqrt(b.norm2_nablaF), b.decomposition_norm,
                              b.decomposition_residual));
  ids.push_back(make_residual(IdentityId::I2_4, p, b.budget_lhs, b.budget_rhs));
  ids.push_back(make_residual(IdentityId::I2_5, p, r.js.s_J, r.js.s_J_unitary));
  ids.push_back(make_residual(IdentityId::I2_6, p, s, r.js.s_line1,
                              std::max(std::abs(s - r.js.s_line1), std::abs(s - r.js.s_line2))));
  ids.push_back(make_residual(IdentityId::I2_7, p, r.s_J,
                              s - 2.0 / 3.0 * r.dF_minus2 + 0.25 * r.N02 - a2 - 2.0 * da));
  ids.push_back(make_residual(IdentityId::I3_2, p, r.S1,
                              s / 2 - 5.0 / 12.0 * r.dF_minus2 + r.N02 / 16.0 + 0.25 * r.dF0_plus2 +
                                  a2 / (4.0 * (n - 1)) - 0.5 * da));
  ids.push_back(make_residual(IdentityId::I3_3, p, r.S2,
                              s / 2 - r.dF_minus2 / 12.0 + r.N02 / 32.0 + 0.25 * r.dF0_plus2 +
                                  (1.0 / (4.0 * (n - 1)) - 0.5) * a2 - da));
  ids.push_back(make_residual(IdentityId::I3_5, p, r.lap.hessian, r.lap.hodge_lee,
                              std::max(std::abs(r.lap.hessian - r.lap.hodge_lee), std::abs(r.lap.hessian - r.lap.ddc))));
  ids.push_back(make_residual(IdentityId::I4_4, p, r.S1,
                              s / 2 - 5.0 / 12.0 * r.dF_minus2 + r.N02 / 16.0 + 0.25 * b.norm2_dF_plus - 0.5 * da));
  ids.push_back(make_residual(IdentityId::I5_4, p, r.S1, s / 2 + 0.25 * r.dF2 - 0.5 * da));
  ids.push_back(make_residual(IdentityId::I5_5, p, r.S2, s / 2 + 0.25 * r.dF2 - 0.5 * a2 - da));
  return r;
}

CurvatureReport curvature_report(const ChartSpec& chart, std::span<const double> p, int order) {
  return curvature_report(Geometry(chart, p, order), identity_test_function(chart.dim()));
}

IdentityResidual identity_residual(const ChartSpec& chart, std::span<const double> p, IdentityId id) {
  const CurvatureReport r = curvature_report(chart, p);
  for (const auto& ir : r.identities)
    if (ir.id == id) return ir;
  throw std::invalid_argument("unknown identity");
}

double hol_sect_curv(const TensorD& R, const Eigen::MatrixXcd& W, const Eigen::VectorXcd& xi) {
  const int m = R.dim(), n = m / 2;
  if (xi.size() != n) throw std::invalid_argument("direction has the wrong dimension");
  const double nrm2 = xi.squaredNorm();
  if (nrm2 == 0.0) throw std::invalid_argument("holomorphic sectional curvature needs a nonzero direction");
  Eigen::VectorXcd v = W.topRows(n).transpose() * xi;  // real-frame components of xi
  Eigen::VectorXcd vb = v.conjugate();
  cd acc(0);
  for (int A = 0; A < m; ++A)
    for (int B = 0; B < m; ++B)
      for (int C = 0; C < m; ++C)
        for (int D = 0; D < m; ++D) {
          const double r = R(A, B, C, D);
          if (r != 0.0) acc += r * vb(A) * v(B) * v(C) * vb(D);
        }
  return acc.real() / (nrm2 * nrm2);
}

double hol_sect_curv(const ChartSpec& chart, std::span<const double> p, const Eigen::VectorXcd& xi) {
  Geometry geo(chart, p, 2);
  return hol_sect_curv(values(geo.riemann()), geo.unitary_rows(), xi);
}

double sphere_volume(int n) { return 2.0 * std::pow(std::numbers::pi, n) / std::tgamma(n); }

BergerResult berger_average(const Geometry& geo, int samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("Monte Carlo needs at least two samples");
  const int n = geo.n();
  const TensorD R = values(geo.riemann());
  const TensorC Rc = complexify(R, geo.unitary_rows());
  // Q(i,j,k,l) = R(ui bar, uj, uk, ul bar)
  std::vector<cd> Q(static_cast<std::size_t>(n * n * n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) Q[static_cast<std::size_t>(((i * n + j) * n + k) * n + l)] = Rc(n + i, j, k, n + l);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<cd> xi(static_cast<std::size_t>(n));
  double mean = 0, m2 = 0;
  for (int t = 0; t < samples; ++t) {
    double nrm2 = 0;
    for (auto& z : xi) {
      z = cd(nd(rng), nd(rng));
      nrm2 += std::norm(z);
    }
    cd acc(0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const cd ij = std::conj(xi[static_cast<std::size_t>(i)]) * xi[static_cast<std::size_t>(j)];
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            acc += Q[static_cast<std::size_t>(((i * n + j) * n + k) * n + l)] * ij * xi[static_cast<std::size_t>(k)] *
                   std::conj(xi[static_cast<std::size_t>(l)]);
      }
    const double h = acc.real() / (nrm2 * nrm2);
    const double delta = h - mean;
    mean += delta / (t + 1);
    m2 += delta * (h - mean);
  }
  const double vol = sphere_volume(n);
  const JScalar js = j_scalar(geo);
  BergerResult r;
  r.samples = samples;
  r.lhs = vol * mean;
  r.std_error = vol * std::sqrt(m2 / (samples - 1) / samples);
  r.rhs = vol * (js.s + 3.0 * js.s_J) / (4.0 * n * (n + 1));
  return r;
}

BergerResult berger_average(const ChartSpec& chart, std::span<const double> p, int samples, std::uint64_t seed) {
  return berger_average(Geometry(chart, p, 2), samples, seed);
}

}  // namespace ahg
