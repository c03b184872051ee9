#include "ahg/geometry.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace ahg {
namespace {

using JetVector = Eigen::Matrix<Jet, Eigen::Dynamic, 1>;

Jet inner(const JetMatrix& g, const JetVector& v, const JetVector& w) {
  const int m = static_cast<int>(g.rows());
  Jet acc(0.0);
  for (int i = 0; i < m; ++i) {
    Jet row(0.0);
    for (int j = 0; j < m; ++j) row += g(i, j) * w(j);
    acc += v(i) * row;
  }
  return acc;
}

// out(a1..ak) = sum M(a1,A1)..M(ak,Ak) t(A1..Ak)
TensorJ transform_jets(const TensorJ& t, const JetMatrix& M) {
  const int k = t.rank();
  const int m = t.dim();
  std::vector<Jet> cur = t.data();
  std::size_t outer = 1, inner_sz = 1;
  for (int i = 1; i < k; ++i) inner_sz *= static_cast<std::size_t>(m);
  for (int s = 0; s < k; ++s) {
    std::vector<Jet> nxt(cur.size(), Jet(0.0));
    for (std::size_t o = 0; o < outer; ++o)
      for (int a = 0; a < m; ++a)
        for (int A = 0; A < m; ++A) {
          const Jet& w = M(a, A);
          if (w.is_constant() && w.value() == 0.0) continue;
          const Jet* src = &cur[(o * m + A) * inner_sz];
          Jet* dst = &nxt[(o * m + a) * inner_sz];
          for (std::size_t r = 0; r < inner_sz; ++r) dst[r] += w * src[r];
        }
    cur.swap(nxt);
    outer *= static_cast<std::size_t>(m);
    if (s + 1 < k) inner_sz /= static_cast<std::size_t>(m);
  }
  TensorJ r(m, k);
  r.data() = std::move(cur);
  return r;
}

JetMatrix eval_matrix(const std::vector<Jet>& flat, std::size_t off, int m) {
  JetMatrix M(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) M(i, j) = flat[off + static_cast<std::size_t>(i * m + j)];
  return M;
}

// Gauss-Jordan on jets (symmetric positive definite input, no pivoting needed).
JetMatrix jet_inverse(JetMatrix A) {
  const int m = static_cast<int>(A.rows());
  JetMatrix I(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) I(i, j) = Jet(i == j ? 1.0 : 0.0);
  for (int c = 0; c < m; ++c) {
    const Jet piv = inverse(A(c, c));
    for (int j = 0; j < m; ++j) {
      A(c, j) = A(c, j) * piv;
      I(c, j) = I(c, j) * piv;
    }
    for (int r = 0; r < m; ++r) {
      if (r == c) continue;
      const Jet f = A(r, c);
      if (f.is_constant() && f.value() == 0.0) continue;
      for (int j = 0; j < m; ++j) {
        A(r, j) -= f * A(c, j);
        I(r, j) -= f * I(c, j);
      }
    }
  }
  return I;
}

TensorJ christoffel_from(const JetMatrix& g, const JetMatrix& ginv, int order) {
  const int m = static_cast<int>(g.rows());
  // dg(i,l,j) = d_i g_lj
  TensorJ dg(m, 3);
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < m; ++l)
      for (int j = 0; j < m; ++j) dg(i, l, j) = g(l, j).partial(i);
  TensorJ low(m, 3);
  for (int l = 0; l < m; ++l)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        low(l, i, j) = 0.5 * (dg(i, l, j) + dg(j, l, i) - dg(l, i, j));
        low(l, j, i) = low(l, i, j);
      }
  TensorJ chr(m, 3);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        Jet acc(0.0);
        for (int l = 0; l < m; ++l) acc += ginv(k, l).truncated(order) * low(l, i, j);
        chr(k, i, j) = acc;
        chr(k, j, i) = acc;
      }
  return chr;
}

void check_metric(const JetMatrix& g) {
  const int m = static_cast<int>(g.rows());
  Eigen::MatrixXd G(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) G(i, j) = g(i, j).value();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (G + G.transpose()), Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 1e-12)) throw SingularMetricError("singular metric at evaluation point");
}

}  // namespace

Geometry::Geometry(const ChartSpec& chart, std::span<const double> p, int order, std::span<const int> seed_order)
    : m_(chart.dim()), order_(order), point_(p.begin(), p.end()) {
  if (static_cast<int>(p.size()) != m_) throw ChartError("point dimension does not match chart");
  if (order < 0 || order > kMaxOrder) throw JetError("jet order overflow (maximum is 3)");
  std::vector<Expr> all;
  all.reserve(2 * chart.g.size());
  all.insert(all.end(), chart.g.begin(), chart.g.end());
  all.insert(all.end(), chart.J.begin(), chart.J.end());
  const auto jets = eval_jets(all, p, order);
  g_ = eval_matrix(jets, 0, m_);
  J_ = eval_matrix(jets, static_cast<std::size_t>(m_ * m_), m_);
  check_metric(g_);
  build_frame(seed_order);

  theta_ = JetMatrix(m_, m_);
  ginv_ = JetMatrix(m_, m_);
  for (int A = 0; A < m_; ++A)
    for (int mu = 0; mu < m_; ++mu) {
      Jet acc(0.0);
      for (int nu = 0; nu < m_; ++nu) acc += E_(nu, A) * g_(nu, mu);
      theta_(A, mu) = acc;
    }
  for (int i = 0; i < m_; ++i)
    for (int j = i; j < m_; ++j) {
      Jet acc(0.0);
      for (int A = 0; A < m_; ++A) acc += E_(i, A) * E_(j, A);
      ginv_(i, j) = acc;
      ginv_(j, i) = acc;
    }

  Jm_ = Eigen::MatrixXd::Zero(m_, m_);
  const int nn = m_ / 2;
  for (int i = 0; i < nn; ++i) {
    Jm_(nn + i, i) = 1.0;
    Jm_(i, nn + i) = -1.0;
  }

  if (order_ >= 1) {
    chr_ = christoffel_from(g_, ginv_, order_ - 1);
    // D(nu, mu, B) = d_mu E^nu_B + Gamma^nu_{mu lambda} E^lambda_B
    TensorJ D(m_, 3);
    for (int nu = 0; nu < m_; ++nu)
      for (int mu = 0; mu < m_; ++mu)
        for (int B = 0; B < m_; ++B) {
          Jet acc = E_(nu, B).partial(mu);
          for (int l = 0; l < m_; ++l) acc += chr_(nu, mu, l) * E_(l, B);
          D(nu, mu, B) = acc;
        }
    TensorJ G(m_, 3);
    for (int nu = 0; nu < m_; ++nu)
      for (int A = 0; A < m_; ++A)
        for (int B = 0; B < m_; ++B) {
          Jet acc(0.0);
          for (int mu = 0; mu < m_; ++mu) acc += E_(mu, A) * D(nu, mu, B);
          G(nu, A, B) = acc;
        }
    conn_ = TensorJ(m_, 3);
    for (int C = 0; C < m_; ++C)
      for (int A = 0; A < m_; ++A)
        for (int B = 0; B < m_; ++B) {
          Jet acc(0.0);
          for (int nu = 0; nu < m_; ++nu) acc += theta_(C, nu) * G(nu, A, B);
          conn_(C, A, B) = acc;
        }
  }
  if (order_ >= 2) riem_ = curvature_of(conn_);
}

void Geometry::build_frame(std::span<const int> seed_order) {
  std::vector<int> order(static_cast<std::size_t>(m_));
  if (seed_order.empty()) {
    std::iota(order.begin(), order.end(), 0);
  } else {
    if (static_cast<int>(seed_order.size()) != m_) throw ChartError("seed order must be a permutation");
    order.assign(seed_order.begin(), seed_order.end());
  }
  const int nn = m_ / 2;
  std::vector<JetVector> built;
  std::vector<JetVector> frame(static_cast<std::size_t>(m_));
  for (int i = 0; i < nn; ++i) {
    bool found = false;
    for (int k : order) {
      JetVector r(m_);
      for (int mu = 0; mu < m_; ++mu) r(mu) = Jet(mu == k ? 1.0 : 0.0);
      for (const auto& b : built) {
        const Jet c = inner(g_, r, b);
        for (int mu = 0; mu < m_; ++mu) r(mu) -= c * b(mu);
      }
      const Jet n2 = inner(g_, r, r);
      if (n2.value() <= 1e-8 * g_(k, k).value()) continue;
      const Jet s = pow(n2, -1, 2);
      for (int mu = 0; mu < m_; ++mu) r(mu) = r(mu) * s;
      JetVector jr(m_);
      for (int mu = 0; mu < m_; ++mu) {
        Jet acc(0.0);
        for (int nu = 0; nu < m_; ++nu) acc += J_(mu, nu) * r(nu);
        jr(mu) = acc;
      }
      frame[static_cast<std::size_t>(i)] = r;
      frame[static_cast<std::size_t>(nn + i)] = jr;
      built.push_back(r);
      built.push_back(jr);
      found = true;
      break;
    }
    if (!found) throw ChartError("could not complete adapted frame");
  }
  E_ = JetMatrix(m_, m_);
  for (int A = 0; A < m_; ++A)
    for (int mu = 0; mu < m_; ++mu) {
      // Promote constants to full jets so every entry has the chart shape.
      const Jet& v = frame[static_cast<std::size_t>(A)](mu);
      E_(mu, A) = v.is_constant() ? Jet::constant(m_, order_, v.value()) : v;
    }
}

Jet Geometry::e(int A, const Jet& f) const {
  if (f.is_constant()) return Jet(0.0);
  Jet acc(0.0);
  for (int mu = 0; mu < m_; ++mu) acc += E_(mu, A) * f.partial(mu);
  return acc;
}

TensorJ Geometry::df(const Jet& f) const {
  TensorJ r(m_, 1);
  for (int A = 0; A < m_; ++A) r(A) = e(A, f);
  return r;
}

TensorJ Geometry::covariant(const TensorJ& t) const {
  const int k = t.rank();
  TensorJ r(m_, k + 1);
  std::vector<int> idx(static_cast<std::size_t>(k + 1)), sub(static_cast<std::size_t>(k));
  for (std::size_t f = 0; f < r.size(); ++f) {
    r.unflatten(f, idx);
    const int A = idx[0];
    for (int i = 0; i < k; ++i) sub[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i + 1)];
    Jet acc = e(A, t.at(sub));
    for (int i = 0; i < k; ++i) {
      const int Bi = sub[static_cast<std::size_t>(i)];
      for (int D = 0; D < m_; ++D) {
        const Jet& c = conn_(D, A, Bi);
        sub[static_cast<std::size_t>(i)] = D;
        const Jet& tv = t.at(sub);
        if (!(tv.is_constant() && tv.value() == 0.0)) acc -= c * tv;
      }
      sub[static_cast<std::size_t>(i)] = Bi;
    }
    r.data()[f] = acc;
  }
  return r;
}

TensorJ Geometry::d(const TensorJ& form) const {
  const int k = form.rank();
  const TensorJ nab = covariant(form);
  TensorJ r(m_, k + 1);
  std::vector<int> sub(static_cast<std::size_t>(k + 1));
  for (const auto& out : increasing_tuples(m_, k + 1)) {
    Jet acc(0.0);
    for (int i = 0; i <= k; ++i) {
      sub[0] = out[static_cast<std::size_t>(i)];
      for (int j = 0, pos = 1; j <= k; ++j)
        if (j != i) sub[static_cast<std::size_t>(pos++)] = out[static_cast<std::size_t>(j)];
      const Jet& v = nab.at(sub);
      if (i % 2 == 0)
        acc += v;
      else
        acc -= v;
    }
    r.at(out) = acc;
  }
  antisymmetrize_from_increasing(r);
  return r;
}

TensorJ Geometry::codiff(const TensorJ& form) const {
  const int k = form.rank();
  if (k < 1) throw std::invalid_argument("codifferential needs a form of degree >= 1");
  const TensorJ nab = covariant(form);
  TensorJ r(m_, k - 1);
  std::vector<int> idx(static_cast<std::size_t>(k - 1)), sub(static_cast<std::size_t>(k + 1));
  for (std::size_t f = 0; f < r.size(); ++f) {
    r.unflatten(f, idx);
    Jet acc(0.0);
    for (int A = 0; A < m_; ++A) {
      sub[0] = A;
      sub[1] = A;
      for (int i = 0; i < k - 1; ++i) sub[static_cast<std::size_t>(i + 2)] = idx[static_cast<std::size_t>(i)];
      acc -= nab.at(sub);
    }
    r.data()[f] = acc;
  }
  return r;
}

TensorJ Geometry::curvature_of(const TensorJ& K) const {
  // eK(C,A,D,B) = e_C(K(A,D,B))
  TensorJ eK(m_, 4);
  for (int C = 0; C < m_; ++C)
    for (int A = 0; A < m_; ++A)
      for (int D = 0; D < m_; ++D)
        for (int B = 0; B < m_; ++B) eK(C, A, D, B) = e(C, K(A, D, B));
  TensorJ R(m_, 4);
  for (int C = 0; C < m_; ++C)
    for (int D = C + 1; D < m_; ++D) {
      std::vector<Jet> bracket(static_cast<std::size_t>(m_));
      for (int E = 0; E < m_; ++E) bracket[static_cast<std::size_t>(E)] = conn_(E, C, D) - conn_(E, D, C);
      for (int A = 0; A < m_; ++A)
        for (int B = 0; B < m_; ++B) {
          Jet acc = eK(C, A, D, B) - eK(D, A, C, B);
          for (int E = 0; E < m_; ++E) {
            acc += K(E, D, B) * K(A, C, E) - K(E, C, B) * K(A, D, E) -
                   bracket[static_cast<std::size_t>(E)] * K(A, E, B);
          }
          R(A, B, C, D) = acc;
          R(A, B, D, C) = -acc;
        }
    }
  return R;
}

TensorJ Geometry::to_frame(const TensorJ& coord) const { return transform_jets(coord, E_.transpose()); }

TensorJ Geometry::to_coordinates(const TensorJ& frame) const {
  return transform_jets(frame, theta_.transpose());
}

Eigen::MatrixXcd Geometry::unitary_rows() const {
  const int nn = m_ / 2;
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(m_, m_);
  for (int i = 0; i < nn; ++i) {
    W(i, i) = s;
    W(i, nn + i) = std::complex<double>(0.0, -s);
    W(nn + i, i) = s;
    W(nn + i, nn + i) = std::complex<double>(0.0, s);
  }
  return W;
}

FrameAtPoint Geometry::frame_at_point() const {
  FrameAtPoint f;
  f.point = point_;
  f.e = Eigen::MatrixXd(m_, m_);
  for (int mu = 0; mu < m_; ++mu)
    for (int A = 0; A < m_; ++A) f.e(mu, A) = E_(mu, A).value();
  const Eigen::MatrixXcd W = unitary_rows();
  f.u = (W.topRows(m_ / 2) * f.e.transpose().cast<std::complex<double>>()).transpose();
  return f;
}

// ---------------------------------------------------------------------------

TensorJ christoffel_jets(const ChartSpec& chart, std::span<const double> p, int order) {
  if (order + 1 > kMaxOrder) throw JetError("jet order overflow (maximum is 3)");
  const int m = chart.dim();
  std::vector<Jet> gj = eval_jets(chart.g, p, order + 1);
  const JetMatrix g = eval_matrix(gj, 0, m);
  check_metric(g);
  return christoffel_from(g, jet_inverse(g), order);
}

TensorValue christoffel(const ChartSpec& chart, std::span<const double> p) {
  TensorValue t;
  t.components = values(christoffel_jets(chart, p, 1));
  t.variance = "udd";
  t.frame = FrameTag::Coordinate;
  t.point.assign(p.begin(), p.end());
  return t;
}

TensorValue riemann(const ChartSpec& chart, std::span<const double> p) {
  Geometry geo(chart, p, 2);
  TensorValue t;
  t.components = values(geo.riemann());
  t.variance = "dddd";
  t.frame = FrameTag::Orthonormal;
  t.point.assign(p.begin(), p.end());
  return t;
}

TensorJ riemann_coordinate(const ChartSpec& chart, std::span<const double> p, int order) {
  if (order + 2 > kMaxOrder) throw JetError("jet order overflow (maximum is 3)");
  const int m = chart.dim();
  std::vector<Jet> gj = eval_jets(chart.g, p, order + 2);
  const JetMatrix g = eval_matrix(gj, 0, m);
  check_metric(g);
  const TensorJ G = christoffel_from(g, jet_inverse(g), order + 1);
  // Rup(rho, sigma, mu, nu)
  TensorJ Rup(m, 4);
  for (int rho = 0; rho < m; ++rho)
    for (int sig = 0; sig < m; ++sig)
      for (int mu = 0; mu < m; ++mu)
        for (int nu = mu + 1; nu < m; ++nu) {
          Jet acc = G(rho, nu, sig).partial(mu) - G(rho, mu, sig).partial(nu);
          for (int l = 0; l < m; ++l) acc += G(rho, mu, l) * G(l, nu, sig) - G(rho, nu, l) * G(l, mu, sig);
          Rup(rho, sig, mu, nu) = acc;
          Rup(rho, sig, nu, mu) = -acc;
        }
  TensorJ R(m, 4);
  for (int rho = 0; rho < m; ++rho)
    for (int sig = 0; sig < m; ++sig)
      for (int mu = 0; mu < m; ++mu)
        for (int nu = 0; nu < m; ++nu) {
          Jet acc(0.0);
          for (int k = 0; k < m; ++k) acc += g(rho, k).truncated(order) * Rup(k, sig, mu, nu);
          R(rho, sig, mu, nu) = acc;
        }
  return R;
}

FrameAtPoint adapted_frame(const ChartSpec& chart, std::span<const double> p, std::span<const int> seed_order) {
  return Geometry(chart, p, 1, seed_order).frame_at_point();
}

TensorJ form_jets(const std::vector<Expr>& components, int degree, int dim, std::span<const double> p, int order) {
  TensorJ t(dim, degree);
  if (components.size() != t.size()) throw std::invalid_argument("form component count mismatch");
  auto jets = eval_jets(components, p, order);
  for (std::size_t k = 0; k < jets.size(); ++k) t.data()[k] = jets[k];
  return t;
}

TensorJ ext_d_coordinate(const TensorJ& form) {
  const int k = form.rank();
  const int m = form.dim();
  TensorJ r(m, k + 1);
  std::vector<int> sub(static_cast<std::size_t>(k));
  for (const auto& out : increasing_tuples(m, k + 1)) {
    Jet acc(0.0);
    for (int i = 0; i <= k; ++i) {
      for (int j = 0, pos = 0; j <= k; ++j)
        if (j != i) sub[static_cast<std::size_t>(pos++)] = out[static_cast<std::size_t>(j)];
      const Jet& v = form.at(sub);
      if (v.is_constant()) continue;
      const Jet dv = v.partial(out[static_cast<std::size_t>(i)]);
      if (i % 2 == 0)
        acc += dv;
      else
        acc -= dv;
    }
    r.at(out) = acc;
  }
  antisymmetrize_from_increasing(r);
  return r;
}

TensorValue ext_d(const std::vector<Expr>& components, int degree, int dim, std::span<const double> p) {
  TensorValue t;
  t.components = values(ext_d_coordinate(form_jets(components, degree, dim, p, 1)));
  t.variance = std::string(static_cast<std::size_t>(degree + 1), 'd');
  t.frame = FrameTag::Coordinate;
  t.point.assign(p.begin(), p.end());
  return t;
}

TensorValue codiff(const ChartSpec& chart, const std::vector<Expr>& components, int degree,
                   std::span<const double> p) {
  Geometry geo(chart, p, 2);
  const TensorJ frame = geo.to_frame(form_jets(components, degree, chart.dim(), p, 1));
  TensorValue t;
  t.components = values(geo.to_coordinates(geo.codiff(frame)));
  t.variance = std::string(static_cast<std::size_t>(degree - 1), 'd');
  t.frame = FrameTag::Coordinate;
  t.point.assign(p.begin(), p.end());
  return t;
}

TensorValue covder_form(const ChartSpec& chart, const std::vector<Expr>& components, int rank,
                        std::span<const double> p) {
  Geometry geo(chart, p, 2);
  const TensorJ frame = geo.to_frame(form_jets(components, rank, chart.dim(), p, 1));
  TensorValue t;
  t.components = values(geo.to_coordinates(geo.covariant(frame)));
  t.variance = std::string(static_cast<std::size_t>(rank + 1), 'd');
  t.frame = FrameTag::Coordinate;
  t.point.assign(p.begin(), p.end());
  return t;
}

double hodge_laplacian_fn(const Geometry& geo, const Jet& f) {
  const TensorJ nab = geo.covariant(geo.df(f));
  double acc = 0.0;
  for (int A = 0; A < geo.dim(); ++A) acc -= nab(A, A).value();
  return acc;
}

double hodge_laplacian_fn(const ChartSpec& chart, const Expr& f, std::span<const double> p) {
  Geometry geo(chart, p, 2);
  return hodge_laplacian_fn(geo, eval_jet(f, p, 2));
}

Jet scalar_jet(const Geometry& geo, const Expr& f, int order) { return eval_jet(f, geo.point(), order); }

}  // namespace ahg
