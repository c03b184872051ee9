#include "ahg/hermitian.hpp"

#include <cmath>

namespace ahg {

namespace {

double residual_sup(const TensorD& a, const TensorD& b) { return sup_norm(a - b); }

TensorD point_values(const TensorJ& t) { return values(t); }

TensorValue make_value(TensorD t, std::string variance, std::span<const double> p) {
  TensorValue v;
  v.components = std::move(t);
  v.variance = std::move(variance);
  v.frame = FrameTag::Orthonormal;
  v.point.assign(p.begin(), p.end());
  return v;
}

}  // namespace

TensorJ fundamental_form_jets(const Geometry& geo) {
  const int m = geo.dim();
  TensorJ F(m, 2);
  for (int A = 0; A < m; ++A)
    for (int B = 0; B < m; ++B) F(A, B) = Jet(geo.Jm()(B, A));
  return F;
}

TensorJ nabla_J(const Geometry& geo) {
  const int m = geo.dim();
  const auto& conn = geo.connection();
  const auto& Jm = geo.Jm();
  TensorJ P(m, 3);
  for (int A = 0; A < m; ++A)
    for (int C = 0; C < m; ++C)
      for (int B = 0; B < m; ++B) {
        Jet acc(0.0);
        for (int D = 0; D < m; ++D) {
          if (Jm(D, B) != 0.0) acc += conn(C, A, D) * Jm(D, B);
          if (Jm(C, D) != 0.0) acc -= conn(D, A, B) * Jm(C, D);
        }
        P(A, C, B) = acc;
      }
  return P;
}

TensorJ complex_structure_on_1form(const Geometry& geo, const TensorJ& beta) {
  const int m = geo.dim();
  TensorJ r(m, 1);
  for (int A = 0; A < m; ++A) {
    Jet acc(0.0);
    for (int C = 0; C < m; ++C)
      if (geo.Jm()(C, A) != 0.0) acc -= beta(C) * geo.Jm()(C, A);
    r(A) = acc;
  }
  return r;
}

TensorJ lee_form_jets(const Geometry& geo) {
  return complex_structure_on_1form(geo, geo.codiff(fundamental_form_jets(geo)));
}

TensorJ nijenhuis_jets(const Geometry& geo) {
  const int m = geo.dim();
  const auto& Jm = geo.Jm();
  const TensorJ P = nabla_J(geo);
  // Q(B,A,C) = (J nabla_B J - nabla_{J e_B} J)^A_C
  TensorJ Q(m, 3);
  for (int B = 0; B < m; ++B)
    for (int A = 0; A < m; ++A)
      for (int C = 0; C < m; ++C) {
        Jet acc(0.0);
        for (int D = 0; D < m; ++D) {
          if (Jm(A, D) != 0.0) acc += P(B, D, C) * Jm(A, D);
          if (Jm(D, B) != 0.0) acc -= P(D, A, C) * Jm(D, B);
        }
        Q(B, A, C) = acc;
      }
  TensorJ N(m, 3);
  for (int A = 0; A < m; ++A)
    for (int B = 0; B < m; ++B)
      for (int C = 0; C < m; ++C) N(A, B, C) = Q(B, A, C) - Q(C, A, B);
  return N;
}

TensorD trace_with_F(const TensorD& form, int n) {
  const int m = form.dim(), k = form.rank();
  TensorD r(m, k - 2);
  std::vector<int> idx(static_cast<std::size_t>(k - 2)), full(static_cast<std::size_t>(k));
  for (std::size_t f = 0; f < r.size(); ++f) {
    r.unflatten(f, idx);
    for (int i = 0; i < k - 2; ++i) full[static_cast<std::size_t>(i + 2)] = idx[static_cast<std::size_t>(i)];
    double acc = 0;
    for (int i = 0; i < n; ++i) {
      full[0] = i;
      full[1] = n + i;
      acc += form.at(full);
    }
    r.data()[f] = acc;
  }
  return r;
}

TensorD cyclic_part(const TensorD& t) {
  const int m = t.dim();
  TensorD r(m, 3);
  for (int A = 0; A < m; ++A)
    for (int B = 0; B < m; ++B)
      for (int C = 0; C < m; ++C) r(A, B, C) = (t(A, B, C) + t(B, C, A) + t(C, A, B)) / 3.0;
  return r;
}

TensorD apply_J_slot(const TensorD& t, const Eigen::MatrixXd& Jm, int slot) {
  const int m = t.dim();
  TensorD r(m, t.rank());
  std::vector<int> idx(static_cast<std::size_t>(t.rank()));
  for (std::size_t f = 0; f < r.size(); ++f) {
    r.unflatten(f, idx);
    const int A = idx[static_cast<std::size_t>(slot)];
    double acc = 0;
    for (int D = 0; D < m; ++D) {
      if (Jm(D, A) == 0.0) continue;
      idx[static_cast<std::size_t>(slot)] = D;
      acc += Jm(D, A) * t.at(idx);
    }
    r.data()[f] = acc;
  }
  return r;
}

HermitianBudget hermitian_budget(const Geometry& geo) {
  if (geo.order() < 2) throw JetError("hermitian budget needs jets of order 2");
  const int n = geo.n();
  const auto& Jm = geo.Jm();
  HermitianBudget b;
  b.point = geo.point();
  b.n = n;

  const TensorJ Fj = fundamental_form_jets(geo);
  const TensorJ alphaj = lee_form_jets(geo);
  b.F = point_values(Fj);
  b.dF = point_values(geo.d(Fj));
  b.nablaF = point_values(geo.covariant(Fj));
  b.alpha = point_values(alphaj);
  b.delta_alpha = geo.codiff(alphaj)().value();

  const TypeBasis W(geo.unitary_rows());
  b.dF_minus = type_project(b.dF, W, {0, 3});
  b.dF_plus = type_project(b.dF, W, {1, 2});
  const TensorD lee_part = wedge(b.alpha, b.F) * (1.0 / (n - 1));
  b.dF0_plus = b.dF_plus - lee_part;

  b.N = point_values(nijenhuis_jets(geo));
  b.bN = cyclic_part(b.N);
  b.N0 = b.N - b.bN;

  b.norm2_dF = form_norm2(b.dF);
  b.norm2_dF_minus = form_norm2(b.dF_minus);
  b.norm2_dF_plus = form_norm2(b.dF_plus);
  b.norm2_dF0_plus = form_norm2(b.dF0_plus);
  b.norm2_alpha = form_norm2(b.alpha);
  b.norm2_N = form_norm2(b.N, 1);
  b.norm2_N0 = form_norm2(b.N0, 1);
  b.norm2_nablaF = form_norm2(b.nablaF, 1);

  b.split_residual = residual_sup(b.dF_plus + b.dF_minus, b.dF);
  b.primitive_residual = sup_norm(trace_with_F(b.dF - lee_part, n));
  b.bN0_residual = sup_norm(cyclic_part(b.N0));

  // N(JX,Y) = -J N(X,Y): first slot of N is the output index.
  const TensorD NJ = apply_J_slot(b.N, Jm, 1);
  TensorD JN(b.N.dim(), 3);
  const int m = geo.dim();
  for (int A = 0; A < m; ++A)
    for (int B = 0; B < m; ++B)
      for (int C = 0; C < m; ++C) {
        double acc = 0;
        for (int D = 0; D < m; ++D) acc += Jm(A, D) * b.N(D, B, C);
        JN(A, B, C) = acc;
      }
  b.n_type_residual = sup_norm(NJ + JN);

  const TensorD rhs = b.dF_minus * (1.0 / 3.0) - apply_J_slot(b.N0, Jm, 0) * 0.5 + b.dF_plus * 0.5 -
                      apply_J_slot(apply_J_slot(b.dF_plus, Jm, 1), Jm, 2) * 0.5;
  b.decomposition_residual = residual_sup(b.nablaF, rhs);
  b.decomposition_norm = std::sqrt(form_norm2(rhs, 1));

  b.budget_lhs = b.norm2_nablaF;
  b.budget_rhs = b.norm2_alpha / (n - 1) + b.norm2_dF0_plus + 0.25 * b.norm2_N0 + b.norm2_dF_minus / 3.0;
  return b;
}

TensorValue fundamental_form(const ChartSpec& chart, std::span<const double> p) {
  Geometry geo(chart, p, 0);
  return make_value(point_values(fundamental_form_jets(geo)), "dd", p);
}

LeeFormResult lee_form(const ChartSpec& chart, std::span<const double> p) {
  Geometry geo(chart, p, 1);
  const int n = geo.n();
  const TensorJ Fj = fundamental_form_jets(geo);
  LeeFormResult r;
  const TensorD alpha = point_values(lee_form_jets(geo));
  const TensorD F = point_values(Fj);
  const TensorD dF = point_values(geo.d(Fj));
  r.reconstruction_residual = sup_norm(trace_with_F(dF - wedge(alpha, F) * (1.0 / (n - 1)), n));
  r.alpha = make_value(alpha, "d", p);
  return r;
}

NijenhuisResult nijenhuis(const ChartSpec& chart, std::span<const double> p) {
  Geometry geo(chart, p, 1);
  const TensorD N = point_values(nijenhuis_jets(geo));
  const TensorD bN = cyclic_part(N);
  NijenhuisResult r;
  r.N = make_value(N, "ddd", p);
  r.bN = make_value(bN, "ddd", p);
  r.N0 = make_value(N - bN, "ddd", p);
  return r;
}

TensorD nijenhuis_coordinate(const ChartSpec& chart, std::span<const double> p) {
  const int m = chart.dim();
  const auto jets = eval_jets(chart.J, p, 1);
  auto J = [&](int i, int j) -> const Jet& { return jets[static_cast<std::size_t>(i * m + j)]; };
  auto dJ = [&](int l, int i, int j) { return J(i, j).is_constant() ? 0.0 : J(i, j).derivative({l}); };
  TensorD N(m, 3);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double acc = 0;
        for (int l = 0; l < m; ++l) {
          acc += J(k, l).value() * (dJ(i, l, j) - dJ(j, l, i));
          acc -= J(l, i).value() * dJ(l, k, j) - J(l, j).value() * dJ(l, k, i);
        }
        N(k, i, j) = acc;
      }
  return N;
}

HermitianBudget df_components(const ChartSpec& chart, std::span<const double> p) {
  return hermitian_budget(Geometry(chart, p, 2));
}

HermitianBudget nabla_F_budget(const ChartSpec& chart, std::span<const double> p) {
  return hermitian_budget(Geometry(chart, p, 2));
}

std::string gray_hervella_label(bool w1, bool w2, bool w3, bool w4) {
  std::string s;
  const bool on[4] = {w1, w2, w3, w4};
  for (int i = 0; i < 4; ++i)
    if (on[i]) s += (s.empty() ? "W" : "+W") + std::to_string(i + 1);
  return s.empty() ? "Kahler" : s;
}

GrayHervellaFlags classify_gray_hervella(const ChartSpec& chart, int sample_count, std::uint64_t seed, double tol) {
  if (sample_count < 1) throw std::invalid_argument("sample count must be positive");
  GrayHervellaFlags f;
  for (const auto& p : sample_points(chart, sample_count, seed)) {
    HermitianBudget b;
    try {
      b = hermitian_budget(Geometry(chart, p, 2));
    } catch (const std::exception& e) {
      std::string where;
      for (double x : p) where += (where.empty() ? "" : ",") + std::to_string(x);
      throw ChartError(std::string(e.what()) + " at point (" + where + ")");
    }
    f.dF_minus = std::max(f.dF_minus, std::sqrt(b.norm2_dF_minus));
    f.N0 = std::max(f.N0, std::sqrt(b.norm2_N0));
    f.dF0_plus = std::max(f.dF0_plus, std::sqrt(b.norm2_dF0_plus));
    f.alpha = std::max(f.alpha, std::sqrt(b.norm2_alpha));
  }
  f.dF_minus_zero = f.dF_minus <= tol;
  f.N0_zero = f.N0 <= tol;
  f.dF0_plus_zero = f.dF0_plus <= tol;
  f.alpha_zero = f.alpha <= tol;
  f.label = gray_hervella_label(!f.dF_minus_zero, !f.N0_zero, !f.dF0_plus_zero, !f.alpha_zero);
  return f;
}

}  // namespace ahg
