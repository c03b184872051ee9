#include "ahg/twistor.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace ahg {

namespace {

constexpr int kDim = 6;
constexpr double kPoleRadius2 = 1e8;

using Form = std::vector<Expr>;  // coordinate components of a 1-form
using ExprMat = std::vector<std::vector<Expr>>;

Form zero_form() { return Form(kDim, Expr(0.0)); }

Form scaled(const Form& a, const Expr& s) {
  Form r(kDim);
  for (int i = 0; i < kDim; ++i) r[i] = a[i] * s;
  return r;
}

Form sum(const Form& a, const Form& b, double sb = 1.0) {
  Form r(kDim);
  for (int i = 0; i < kDim; ++i) r[i] = a[i] + b[i] * Expr(sb);
  return r;
}

void check_base(const ChartSpec& base) {
  if (base.dim() != 4) throw ChartError("twistor base must be 4-dimensional");
  const std::string diag = to_string(base.metric(0, 0));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i == j ? to_string(base.metric(i, j)) != diag : !base.metric(i, j).is_constant(0.0))
        throw ChartError(base.name + " is not conformally flat in its coordinates");
  if (base.g[0].max_var_index() > 3) throw ChartError("base metric references fiber coordinates");
}

void check_fiber(std::span<const double> p) {
  if (p.size() != kDim) throw ChartError("twistor point must have 6 coordinates");
  const double r2 = p[4] * p[4] + p[5] * p[5];
  if (!(r2 < kPoleRadius2)) throw ChartError("twistor point too close to the fiber pole");
}

/// Left multiplication by the quaternion (w, x, y, z) in the basis (1, i, j, k).
ExprMat left_mult(const Expr& w, const Expr& x, const Expr& y, const Expr& z) {
  return {{w, -x, -y, -z}, {x, w, -z, y}, {y, z, w, -x}, {z, -y, x, w}};
}

// ---------------------------------------------------------------------------
// Point evaluation

struct PointData {
  std::vector<double> point;
  std::vector<TensorJ> th;              // theta^1..4, theta^5, theta^6 (unscaled), coordinate 1-forms
  std::vector<TensorJ> cof;             // orthonormal coframe 1-forms
  std::vector<std::vector<TensorJ>> om; // omega^a_b
  TensorJ Ru;                           // base curvature in the frame u, 6-variable jets
  Eigen::MatrixXd E;                    // E(mu, A)
  Eigen::MatrixXd Et;                   // transpose, for transform_all
};

PointData evaluate(const TwistorChart& tc, std::span<const double> p, int order, int r_order) {
  check_fiber(p);
  PointData d;
  d.point.assign(p.begin(), p.end());
  std::vector<Expr> all;
  for (const auto& f : tc.theta) all.insert(all.end(), f.begin(), f.end());
  for (const auto& row : tc.omega)
    for (const auto& f : row) all.insert(all.end(), f.begin(), f.end());
  for (const auto& row : tc.Q) all.insert(all.end(), row.begin(), row.end());
  const std::vector<Jet> jets = eval_jets(all, p, order);
  std::size_t k = 0;
  auto take_form = [&] {
    TensorJ f(kDim, 1);
    for (int i = 0; i < kDim; ++i) f(i) = jets[k++];
    return f;
  };
  for (int a = 0; a < 6; ++a) d.th.push_back(take_form());
  d.om.assign(4, std::vector<TensorJ>(4));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) d.om[a][b] = take_form();
  JetMatrix Qt(4, 4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) Qt(b, a) = jets[k++];

  const double two_t = 2.0 * tc.spec.t;
  d.cof = d.th;
  d.cof[4] *= Jet(two_t);
  d.cof[5] *= Jet(two_t);
  Eigen::MatrixXd C(kDim, kDim);
  for (int A = 0; A < kDim; ++A)
    for (int mu = 0; mu < kDim; ++mu) C(A, mu) = d.cof[A](mu).value();
  d.E = C.inverse();
  d.Et = d.E.transpose();

  if (r_order >= 0) {
    const std::vector<double> base_p(p.begin(), p.begin() + 4);
    const TensorJ Rc = riemann_coordinate(tc.spec.base, base_p, r_order);
    const Jet psi = eval_jet(tc.spec.base.g[0], base_p, r_order);
    const Jet w = inverse(psi * psi);
    TensorJ Re(4, 4);
    for (std::size_t f = 0; f < Re.size(); ++f) Re.data()[f] = (Rc.data()[f] * w).embedded(kDim);
    JetMatrix Qr = Qt.unaryExpr([r_order](const Jet& j) { return j.truncated(r_order); });
    d.Ru = transform_all<Jet>(Re, Qr);
  }
  return d;
}

TensorD frame_values(const TensorJ& form, const PointData& d) {
  return transform_all<double>(values(form), d.Et);
}

TensorJ dform(const TensorJ& f) { return ext_d_coordinate(f); }

/// Theta^A_B as coordinate 1-form jets.
std::vector<std::vector<TensorJ>> lc_forms(const PointData& d, double t) {
  const auto& R = d.Ru;
  std::vector<std::vector<TensorJ>> T(kDim, std::vector<TensorJ>(kDim, TensorJ(kDim, 1)));
  const Jet t2(t * t), th(t / 2);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const Jet c5 = R(0, 2, b, a) + R(3, 1, b, a);
      const Jet c6 = R(0, 3, b, a) + R(1, 2, b, a);
      T[a][b] = d.om[a][b] + d.th[4] * (t2 * c5) + d.th[5] * (t2 * c6);
    }
  for (int b = 0; b < 4; ++b) {
    TensorJ f5(kDim, 1), f6(kDim, 1);
    for (int a = 0; a < 4; ++a) {
      f5 += d.th[a] * (th * (R(0, 2, b, a) + R(3, 1, b, a)));
      f6 += d.th[a] * (th * (R(0, 3, b, a) + R(1, 2, b, a)));
    }
    T[4][b] = f5;
    T[b][4] = f5 * Jet(-1.0);
    T[5][b] = f6;
    T[b][5] = f6 * Jet(-1.0);
  }
  T[4][5] = d.om[0][1] + d.om[2][3];
  T[5][4] = T[4][5] * Jet(-1.0);
  return T;
}

Eigen::MatrixXd complex_structure_frame(TwistorSign sign) {
  Eigen::MatrixXd Jm = Eigen::MatrixXd::Zero(kDim, kDim);
  const double s = sign == TwistorSign::Plus ? 1.0 : -1.0;
  Jm(1, 0) = 1;
  Jm(0, 1) = -1;
  Jm(3, 2) = 1;
  Jm(2, 3) = -1;
  Jm(5, 4) = s;
  Jm(4, 5) = -s;
  return Jm;
}

double sup_abs(const TensorC& t) {
  double m = 0;
  for (const auto& z : t.data()) m = std::max(m, std::abs(z));
  return m;
}

TensorC covector(std::initializer_list<std::pair<int, std::complex<double>>> entries) {
  TensorC f(kDim, 1);
  for (const auto& [i, v] : entries) f(i) = v;
  return f;
}

TensorC conj(const TensorC& t) {
  return t.map([](const std::complex<double>& z) { return std::conj(z); });
}

}  // namespace

TwistorSpec twistor_spec(const CatalogEntry& base, double t, TwistorSign sign) {
  if (!base.twistor_base) throw CatalogError(base.name + " is not a twistor base");
  TwistorSpec s;
  s.base = base.chart;
  s.einstein = base.scalars.s.has_value();
  s.asd = true;
  s.s_N = base.scalars.s.value_or(0.0);
  s.t = t;
  s.sign = sign;
  return s;
}

TwistorChart build_twistor_chart(const TwistorSpec& spec) {
  if (!(spec.t > 0)) throw ChartError("twistor fiber scale must be positive");
  check_base(spec.base);

  TwistorChart tc;
  tc.spec = spec;
  const Expr psi = spec.base.g[0];
  const Expr phi = sqrt(psi);
  std::vector<Expr> du(4);  // d log phi
  for (int b = 0; b < 4; ++b) du[b] = derivative(psi, b) / (2.0 * psi);

  // Base frame e_a = d_a / phi: theta_e^a = phi dx^a, omega_e^a_b = u_b dx^a - u_a dx^b.
  std::vector<std::vector<Form>> om_base(4, std::vector<Form>(4, zero_form()));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      om_base[a][b][a] = du[b];
      om_base[a][b][b] = -du[a];
    }

  // Gauge: q = (1 + a j + b k) / |.| times (cos psi_g + i sin psi_g).
  const Expr fa = Expr::var(4), fb = Expr::var(5);
  const Expr nrm = sqrt(1.0 + fa * fa + fb * fb);
  const double cg = std::cos(spec.gauge_angle), sg = std::sin(spec.gauge_angle);
  const Expr q0 = Expr(cg) / nrm;
  const Expr q1 = Expr(sg) / nrm;
  const Expr q2 = (fa * cg + fb * sg) / nrm;
  const Expr q3 = (fb * cg - fa * sg) / nrm;
  tc.Q = left_mult(q0, q1, q2, q3);
  const auto& Q = tc.Q;

  // theta_u^a = sum_b Q(b, a) theta_e^b.
  tc.theta.assign(6, zero_form());
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) tc.theta[a][b] = Q[b][a] * phi;

  // omega_u = Q^T omega Q + Q^T dQ.
  tc.omega.assign(4, std::vector<Form>(4, zero_form()));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      Form f = zero_form();
      for (int c = 0; c < 4; ++c)
        for (int e = 0; e < 4; ++e) {
          const Expr w = Q[c][a] * Q[e][b];
          if (w.is_constant(0.0)) continue;
          f = sum(f, scaled(om_base[c][e], w));
        }
      for (int c = 0; c < 4; ++c)
        for (int v = 4; v < 6; ++v) f[v] = f[v] + Q[c][a] * derivative(Q[c][b], v);
      tc.omega[a][b] = f;
    }
  tc.theta[4] = scaled(sum(tc.omega[0][2], tc.omega[1][3], -1.0), Expr(0.5));
  tc.theta[5] = scaled(sum(tc.omega[0][3], tc.omega[1][2]), Expr(0.5));

  const Expr two_t(2.0 * spec.t);
  tc.coframe = tc.theta;
  tc.coframe[4] = scaled(tc.theta[4], two_t);
  tc.coframe[5] = scaled(tc.theta[5], two_t);
  const auto& Th = tc.coframe;

  // Inverse frame E(mu, A) from the block-triangular coframe.
  ExprMat E(kDim, std::vector<Expr>(kDim, Expr(0.0)));
  for (int mu = 0; mu < 4; ++mu)
    for (int a = 0; a < 4; ++a) E[mu][a] = Q[mu][a] / phi;
  const Expr det = Th[4][4] * Th[5][5] - Th[4][5] * Th[5][4];
  const Expr vinv[2][2] = {{Th[5][5] / det, -Th[4][5] / det}, {-Th[5][4] / det, Th[4][4] / det}};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) E[4 + i][4 + j] = vinv[i][j];
  for (int i = 0; i < 2; ++i)
    for (int a = 0; a < 4; ++a) {
      Expr acc(0.0);
      for (int j = 0; j < 2; ++j)
        for (int mu = 0; mu < 4; ++mu) acc = acc + vinv[i][j] * Th[4 + j][mu] * E[mu][a];
      E[4 + i][a] = -acc;
    }

  ChartSpec& c = tc.chart;
  c.name = spec.base.name + (spec.sign == TwistorSign::Plus ? "_twistor_plus" : "_twistor_minus");
  c.n = 3;
  c.domain = spec.base.domain;
  c.domain.push_back(Axis{-spec.fiber_extent, spec.fiber_extent, false});
  c.domain.push_back(Axis{-spec.fiber_extent, spec.fiber_extent, false});
  c.g.assign(kDim * kDim, Expr(0.0));
  for (int mu = 0; mu < kDim; ++mu)
    for (int nu = mu; nu < kDim; ++nu) {
      Expr acc(0.0);
      for (int A = 0; A < kDim; ++A) acc = acc + Th[A][mu] * Th[A][nu];
      c.g[mu * kDim + nu] = acc;
      c.g[nu * kDim + mu] = acc;
    }
  const Eigen::MatrixXd Jm = complex_structure_frame(spec.sign);
  c.J.assign(kDim * kDim, Expr(0.0));
  for (int mu = 0; mu < kDim; ++mu)
    for (int nu = 0; nu < kDim; ++nu) {
      Expr acc(0.0);
      for (int C = 0; C < kDim; ++C)
        for (int B = 0; B < kDim; ++B)
          if (Jm(C, B) != 0.0) acc = acc + E[mu][C] * Expr(Jm(C, B)) * Th[B][nu];
      c.J[mu * kDim + nu] = acc;
    }

  // Base validation at seeded points.
  const auto pts = sample_points(c, 3, 0x7157u);
  for (const auto& p : pts) {
    if (spec.asd) {
      const auto combos = asd_combinations(tc, p);
      if (std::abs(combos[0]) > 1e-8 || std::abs(combos[1]) > 1e-8)
        throw ChartError(spec.base.name + " fails the anti-self-duality check");
    }
    if (spec.einstein) {
      const std::vector<double> bp(p.begin(), p.begin() + 4);
      const RicciScalar rs = ricci_and_scalar(spec.base, bp);
      double dev = std::abs(rs.s - spec.s_N);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) dev = std::max(dev, std::abs(rs.ric(i, j) - (i == j ? spec.s_N / 4 : 0.0)));
      if (dev > 1e-8 * std::max(1.0, std::abs(spec.s_N)))
        throw ChartError(spec.base.name + " fails the Einstein check with s_N = " + std::to_string(spec.s_N));
    }
  }
  return tc;
}

TwistorCoframe twistor_coframe(const TwistorChart& tc, std::span<const double> p) {
  check_fiber(p);
  TwistorCoframe r;
  r.point.assign(p.begin(), p.end());
  r.theta.resize(kDim, kDim);
  r.coframe.resize(kDim, kDim);
  for (int A = 0; A < kDim; ++A)
    for (int mu = 0; mu < kDim; ++mu) {
      r.theta(A, mu) = eval(tc.theta[A][mu], p);
      r.coframe(A, mu) = eval(tc.coframe[A][mu], p);
    }
  const std::complex<double> I(0, 1);
  r.phi.resize(3, kDim);
  for (int k = 0; k < 3; ++k) r.phi.row(k) = r.theta.row(2 * k).cast<std::complex<double>>() + I * r.theta.row(2 * k + 1);

  Eigen::MatrixXd g(kDim, kDim), J(kDim, kDim);
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      g(i, j) = eval(tc.chart.metric(i, j), p);
      J(i, j) = eval(tc.chart.cplx(i, j), p);
    }
  const Eigen::MatrixXd E = r.coframe.inverse();
  r.gram_residual = (E.transpose() * g * E - Eigen::MatrixXd::Identity(kDim, kDim)).cwiseAbs().maxCoeff();

  // F = (i/2)(phi1 ^ phi1bar + phi2 ^ phi2bar +- 4t^2 phi3 ^ phi3bar), coordinates.
  const double s = tc.spec.sign == TwistorSign::Plus ? 1.0 : -1.0;
  const double w[3] = {1.0, 1.0, s * 4.0 * tc.spec.t * tc.spec.t};
  Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(kDim, kDim);
  for (int k = 0; k < 3; ++k) {
    const Eigen::VectorXcd a = r.phi.row(k).transpose();
    const Eigen::VectorXcd b = a.conjugate();
    F += w[k] * 0.5 * I * (a * b.transpose() - b * a.transpose());
  }
  // F(X, Y) = g(JX, Y): F_{mu nu} = J^rho_mu g_{rho nu}.
  const Eigen::MatrixXd Fg = J.transpose() * g;
  r.fundamental_form_residual = (F - Fg.cast<std::complex<double>>()).cwiseAbs().maxCoeff();
  return r;
}

ClosedFormScalars closed_form_scalars(double s_N, double t) {
  if (!(t > 0)) throw std::invalid_argument("fiber scale t must be positive");
  const double t2 = t * t;
  ClosedFormScalars c;
  c.s = s_N + 2.0 / t2 - s_N * s_N * t2 / 72.0;
  c.s_J_plus = c.s;
  c.s_J_minus = -s_N / 3.0 + 2.0 / t2 + s_N * s_N * t2 / 24.0;
  c.S1_plus = s_N / 3.0 + 2.0 / t2;
  c.S1_minus = 0.0;
  return c;
}

StructureResiduals structure_equation_residual(const TwistorChart& tc, std::span<const double> p) {
  const PointData d = evaluate(tc, p, 2, 0);
  StructureResiduals r;
  r.Omega = TensorD(kDim, 4);
  for (int a = 0; a < 4; ++a) {
    TensorJ res = dform(d.th[a]);
    for (int b = 0; b < 4; ++b) res += wedge(d.om[a][b], d.th[b]);
    r.first = std::max(r.first, sup_norm(frame_values(res, d)));
  }
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      TensorJ curv = dform(d.om[a][b]);
      for (int c = 0; c < 4; ++c) curv += wedge(d.om[a][c], d.om[c][b]);
      const TensorD fv = frame_values(curv, d);
      TensorD model(kDim, 2);
      for (int c = 0; c < 4; ++c)
        for (int e = 0; e < 4; ++e) model(c, e) = d.Ru(a, b, c, e).value();
      r.second = std::max(r.second, sup_norm(fv - model));
      for (int C = 0; C < kDim; ++C)
        for (int D = 0; D < kDim; ++D) r.Omega(a, b, C, D) = fv(C, D);
    }
  return r;
}

LeviCivitaForms levi_civita_forms(const TwistorChart& tc, std::span<const double> p) {
  const PointData d = evaluate(tc, p, 2, 1);
  const auto T = lc_forms(d, tc.spec.t);
  LeviCivitaForms r;
  r.forms = TensorD(kDim, 3);
  for (int A = 0; A < kDim; ++A)
    for (int B = 0; B < kDim; ++B) {
      const TensorD fv = frame_values(T[A][B], d);
      for (int C = 0; C < kDim; ++C) r.forms(A, B, C) = fv(C);
      r.antisymmetry = std::max(r.antisymmetry, sup_norm(values(T[A][B] + T[B][A])));
    }
  for (int A = 0; A < kDim; ++A) {
    TensorJ res = dform(d.cof[A]);
    for (int B = 0; B < kDim; ++B) res += wedge(T[A][B], d.cof[B]);
    r.structure_residual = std::max(r.structure_residual, sup_norm(frame_values(res, d)));
  }
  double s = 0;
  for (int A = 0; A < kDim; ++A)
    for (int B = 0; B < kDim; ++B) {
      if (A == B) continue;
      TensorJ curv = dform(T[A][B]);
      for (int C = 0; C < kDim; ++C) curv += wedge(T[A][C], T[C][B]);
      s += frame_values(curv, d)(A, B);
    }
  r.scalar_curvature = s;
  return r;
}

ChernRicciForm chern_ricci_forms(const TwistorChart& tc, std::span<const double> p) {
  const PointData d = evaluate(tc, p, 2, 1);
  const auto T = lc_forms(d, tc.spec.t);
  const double s = tc.spec.sign == TwistorSign::Plus ? 1.0 : -1.0;
  const TensorJ trace = T[0][1] + T[2][3] + T[4][5] * Jet(s);
  ChernRicciForm r;
  r.rho = frame_values(dform(trace), d);
  r.pairing = r.rho(0, 1) + r.rho(2, 3) + s * r.rho(4, 5);

  // Omega^1_2 + Omega^3_4 in frame components from the base curvature.
  TensorD om(kDim, 2);
  for (int c = 0; c < 4; ++c)
    for (int e = 0; e < 4; ++e) om(c, e) = d.Ru(0, 1, c, e).value() + d.Ru(2, 3, c, e).value();
  const double t = tc.spec.t;
  TensorD model = om * 2.0;
  model(4, 5) += 2.0 / (t * t);
  model(5, 4) -= 2.0 / (t * t);
  if (tc.spec.sign == TwistorSign::Plus) r.formula_residual = sup_norm(r.rho - model);
  else r.formula_residual = sup_norm(r.rho);
  if (tc.spec.einstein) {
    TensorD ein(kDim, 2);
    const double k = tc.spec.s_N / 12.0;
    ein(0, 1) = k;
    ein(1, 0) = -k;
    ein(2, 3) = k;
    ein(3, 2) = -k;
    r.einstein_residual = sup_norm(om - ein);
  }
  return r;
}

CanonicalFormCheck canonical_form_check(const TwistorChart& tc, std::span<const double> p) {
  if (tc.spec.sign != TwistorSign::Minus) throw std::invalid_argument("canonical form check needs the minus structure");
  const PointData d = evaluate(tc, p, 2, 0);
  const auto& th = d.th;
  const TensorJ X = wedge(th[0], th[2]) - wedge(th[1], th[3]);
  const TensorJ Y = wedge(th[0], th[3]) + wedge(th[1], th[2]);
  const TensorJ re = wedge(X, th[4]) + wedge(Y, th[5]);
  const TensorJ im = wedge(Y, th[4]) - wedge(X, th[5]);
  const TensorD dre = frame_values(dform(re), d), dim = frame_values(dform(im), d);
  const std::complex<double> I(0, 1);
  TensorC ds(kDim, 4);
  for (std::size_t k = 0; k < ds.size(); ++k) ds.data()[k] = dre.data()[k] + I * dim.data()[k];

  // (1,0) vectors for J-: Z1 = (E1 - iE2)/2, Z2 = (E3 - iE4)/2, Z3 = t(E5 + iE6).
  const double t = tc.spec.t;
  Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(kDim, kDim);
  W(0, 0) = 0.5;
  W(0, 1) = -0.5 * I;
  W(1, 2) = 0.5;
  W(1, 3) = -0.5 * I;
  W(2, 4) = t;
  W(2, 5) = t * I;
  W.bottomRows(3) = W.topRows(3).conjugate();
  const TensorC c = transform_all<std::complex<double>>(ds, W);
  CanonicalFormCheck r;
  for (int l = 3; l < 6; ++l) r.type31 = std::max(r.type31, std::abs(c(0, 1, 2, l)));
  for (int i = 0; i < 3; ++i) r.type13 = std::max(r.type13, std::abs(c(i, 3, 4, 5)));

  // Right side in orthonormal frame components.
  const TensorC p1 = covector({{0, 1.0}, {1, I}});
  const TensorC p2 = covector({{2, 1.0}, {3, I}});
  const TensorC p3 = covector({{4, 1.0 / (2 * t)}, {5, I / (2 * t)}});
  const TensorC h = wedge(p1, conj(p1)) + wedge(p2, conj(p2));
  TensorC rhs = wedge(wedge(h, conj(p3)), p3) * std::complex<double>(-1.0);
  if (tc.spec.einstein) {
    rhs -= wedge(wedge(p1, conj(p1)), wedge(p2, conj(p2))) * std::complex<double>(tc.spec.s_N / 24.0);
  } else {
    TensorC om(kDim, 2);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        om(a, b) = 0.5 * (d.Ru(0, 2, a, b).value() - d.Ru(1, 3, a, b).value() -
                          I * (d.Ru(1, 2, a, b).value() + d.Ru(0, 3, a, b).value()));
    rhs += wedge(wedge(p1, p2), om);
  }
  r.rhs_residual = sup_abs(ds - rhs);
  r.rhs_norm = sup_abs(rhs);
  return r;
}

TwistorIntegrability lee_and_integrability_check(const TwistorChart& tc, std::span<const double> p) {
  check_fiber(p);
  const Geometry geo(tc.chart, p, 2);
  const HermitianBudget b = hermitian_budget(geo);
  TwistorIntegrability r;
  r.F_wedge_dF = sup_norm(wedge(b.F, b.dF));
  r.alpha = std::sqrt(b.norm2_alpha);
  r.nijenhuis = std::sqrt(b.norm2_N);
  r.dF_minus = std::sqrt(b.norm2_dF_minus);
  return r;
}

std::array<double, 2> asd_combinations(const TwistorChart& tc, std::span<const double> p) {
  const PointData d = evaluate(tc, p, 0, 0);
  auto R = [&](int a, int b, int c, int e) { return d.Ru(a, b, c, e).value(); };
  return {R(0, 2, 0, 1) + R(3, 1, 0, 1) + R(0, 2, 2, 3) + R(3, 1, 2, 3),
          R(0, 3, 0, 1) + R(1, 2, 0, 1) + R(0, 3, 2, 3) + R(1, 2, 2, 3)};
}

}  // namespace ahg
