#include "ahg/chart.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>

namespace ahg {

std::vector<Expr> standard_complex_structure(int n) {
  const int m = 2 * n;
  std::vector<Expr> J(static_cast<std::size_t>(m * m), Expr(0.0));
  for (int i = 0; i < n; ++i) {
    J[static_cast<std::size_t>((n + i) * m + i)] = Expr(1.0);
    J[static_cast<std::size_t>(i * m + n + i)] = Expr(-1.0);
  }
  return J;
}

std::vector<Expr> conformal_identity(int dim, const Expr& factor) {
  std::vector<Expr> g(static_cast<std::size_t>(dim * dim), Expr(0.0));
  for (int i = 0; i < dim; ++i) g[static_cast<std::size_t>(i * dim + i)] = factor;
  return g;
}

ChartInvariantReport check_chart(const ChartSpec& chart, std::span<const double> p) {
  const int m = chart.dim();
  if (static_cast<int>(chart.g.size()) != m * m || static_cast<int>(chart.J.size()) != m * m)
    throw ChartError("chart component matrices have the wrong size");
  auto gv = eval_jets(chart.g, p, 0);
  auto jv = eval_jets(chart.J, p, 0);
  Eigen::MatrixXd G(m, m), Jm(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      G(i, j) = gv[static_cast<std::size_t>(i * m + j)].value();
      Jm(i, j) = jv[static_cast<std::size_t>(i * m + j)].value();
    }
  ChartInvariantReport r;
  r.symmetry = (G - G.transpose()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (G + G.transpose()), Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  if (!(r.min_eigenvalue > 1e-12)) throw SingularMetricError("singular metric at evaluation point");
  r.j_squared = (Jm * Jm + Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
  r.compatibility = (Jm.transpose() * G * Jm - G).cwiseAbs().maxCoeff();
  return r;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::vector<double>> sample_points(const ChartSpec& chart, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> pts;
  pts.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int k = 0; k < count; ++k) {
    std::vector<double> p(chart.domain.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Axis& a = chart.domain[i];
      const double t = a.periodic ? u(rng) : 0.02 + 0.96 * u(rng);
      p[i] = a.lo + (a.hi - a.lo) * t;
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace ahg
