// Acceptance suite: one PASS/FAIL line per criterion. Exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ahg/conformal.hpp"
#include "ahg/curvature.hpp"
#include "ahg/hermitian.hpp"
#include "ahg/twistor.hpp"

using namespace ahg;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

const char* kBases[] = {"t4_flat_base", "s4_round", "h4_hyperbolic"};
constexpr TwistorSign kSigns[] = {TwistorSign::Plus, TwistorSign::Minus};

TwistorChart twistor(const char* base, double t, TwistorSign sign) {
  return build_twistor_chart(twistor_spec(load(base), t, sign));
}

// Identity suite on every catalog entry.
void identity_suite(Outcome& o) {
  double worst = 0;
  std::string where;
  int evaluated = 0;
  for (const auto& name : catalog_names()) {
    const CatalogEntry e = load(name);
    for (const auto& p : sample_points(e.chart, 50, 1)) {
      const CurvatureReport r = curvature_report(e.chart, p, 2);
      for (const auto& ir : r.identities) {
        if (identity_needs_hermitian(ir.id) && !e.integrable) continue;
        ++evaluated;
        if (ir.rel_residual > worst) {
          worst = ir.rel_residual;
          where = name + " " + identity_name(ir.id);
        }
      }
    }
  }
  o.detail << evaluated << " residuals, worst " << worst << " (" << where << ")";
  o.require(worst <= 1e-7, "relative residual <= 1e-7");
}

void twistor_oracle(Outcome& o) {
  double worst = 0;
  for (const char* b : kBases)
    for (TwistorSign sign : kSigns)
      for (double t : {0.5, 1.0, 2.0}) {
        const TwistorChart tc = twistor(b, t, sign);
        const auto cf = closed_form_scalars(tc.spec.s_N, t);
        const bool plus = sign == TwistorSign::Plus;
        for (const auto& p : sample_points(tc.chart, 10, 2)) {
          const CurvatureReport r = curvature_report(tc.chart, p, 2);
          worst = std::max({worst, relative_residual(r.s, cf.s),
                            relative_residual(r.s_J, plus ? cf.s_J_plus : cf.s_J_minus),
                            relative_residual(r.S1, plus ? cf.S1_plus : cf.S1_minus)});
        }
      }
  o.detail << "worst relative residual " << worst;
  o.require(worst <= 1e-6, "generic vs closed form <= 1e-6");

  const TwistorChart plus = twistor("s4_round", 1, TwistorSign::Plus);
  const TwistorChart minus = twistor("s4_round", 1, TwistorSign::Minus);
  const auto p = sample_points(plus.chart, 1, 3)[0];
  const CurvatureReport rp = curvature_report(plus.chart, p, 2);
  const CurvatureReport rm = curvature_report(minus.chart, p, 2);
  o.detail << "; s(1)=" << rp.s << " S1(J+,1)=" << rp.S1 << " S1(J-,1)=" << rm.S1 << " s_J-(1)=" << rm.s_J;
  o.require(relative_residual(rp.s, 12) <= 1e-6, "s(1) = 12");
  o.require(relative_residual(rp.S1, 6) <= 1e-6, "S1(J+,1) = 6");
  o.require(std::abs(rm.S1) <= 1e-6, "S1(J-) = 0");
  o.require(relative_residual(rm.s_J, 4) <= 1e-6, "s_J-(1) = 4");
  for (double t : {0.5, 2.0}) {
    const TwistorChart m = twistor("s4_round", t, TwistorSign::Minus);
    o.require(std::abs(curvature_report(m.chart, sample_points(m.chart, 1, 4)[0], 2).S1) <= 1e-6, "S1(J-, t) = 0");
  }
}

void chern_ricci_minus(Outcome& o) {
  double rho = 0, t31 = 0, rhs = 0;
  for (const char* b : kBases) {
    const TwistorChart tc = twistor(b, 1, TwistorSign::Minus);
    for (const auto& p : sample_points(tc.chart, 50, 5)) {
      rho = std::max(rho, sup_norm(chern_ricci_forms(tc, p).rho));
      const CanonicalFormCheck c = canonical_form_check(tc, p);
      t31 = std::max(t31, c.type31);
      rhs = std::max(rhs, c.rhs_residual / std::max(1.0, c.rhs_norm));
    }
  }
  o.detail << "sup|rho-| " << rho << ", sup (3,1) part " << t31 << ", (2,2) part vs closed form " << rhs;
  o.require(rho <= 1e-7, "rho- = 0");
  o.require(t31 <= 1e-7, "(3,1) part <= 1e-7");
  o.require(rhs <= 1e-7, "(2,2) part");
}

void integrability(Outcome& o) {
  double plus = 0, minus = 1e300;
  for (const char* b : kBases) {
    const TwistorChart tp = twistor(b, 1, TwistorSign::Plus);
    const TwistorChart tm = twistor(b, 1, TwistorSign::Minus);
    for (const auto& p : sample_points(tp.chart, 10, 6)) {
      plus = std::max(plus, lee_and_integrability_check(tp, p).nijenhuis);
      minus = std::min(minus, lee_and_integrability_check(tm, p).nijenhuis);
    }
  }
  o.detail << "sup|N| for J+ " << plus << ", min |N| for J- " << minus;
  o.require(plus <= 1e-8, "J+ integrable");
  o.require(minus >= 1e-2, "J- not integrable");
}

void conformal_machinery(Outcome& o) {
  double scalars = 0, lee = 0;
  const std::pair<const char*, const char*> pairs[] = {
      {"t4_perturbed", "0.1*sin(x1)*cos(x2) + 0.05*cos(x3 - x4)"},
      {"hopf_surface", "0.1*sin(x1)*x2 + 0.05*x3*x4 - 0.2*log(x1^2+x2^2)"}};
  for (const auto& [name, f] : pairs) {
    const CatalogEntry e = load(name);
    const ConformalPair pair = scale_chart(e.chart, parse_expression(f, 4));
    for (const auto& p : sample_points(e.chart, 20, 7)) {
      for (const auto& r : conformal_scalar_residuals(pair, p)) scalars = std::max(scalars, r.rel_residual);
      lee = std::max(lee, lee_transform_residual(pair, p));
    }
  }
  const CatalogEntry tp = load("t4_perturbed");
  const MixedSolution s = solve_mixed_equation(tp.chart, 1.0, 0.0, {16}, std::nullopt, 20);
  const GauduchonSearch gs = find_gauduchon_factor(tp.chart);
  SpectralGrid d = gs.f;
  for (std::size_t i = 0; i < d.size(); ++i) d.values[i] += 0.05 * std::sin(d.point(i)[0]);
  const double m = d.mean();
  double err = 0;
  for (double v : d.values) err = std::max(err, std::abs(v - m));
  o.detail << "scalar identities " << scalars << ", Lee transform " << lee << ", solve residual " << s.residual
           << ", rescaled check " << s.check_residual << ", Gauduchon recovery " << err;
  o.require(scalars <= 1e-7, "conformal identities");
  o.require(lee <= 1e-7, "Lee transform");
  o.require(s.residual <= 1e-10, "operator reapplication");
  o.require(s.check_residual >= 0 && s.check_residual <= 1e-6, "rescaled scalar check");
  o.require(gs.converged && err <= 1e-5, "Gauduchon recovery");
}

void global_integrals(Outcome& o) {
  const CatalogEntry tp = load("t4_perturbed");
  const GauduchonSearch gs = find_gauduchon_factor(tp.chart);
  const ConformalPair pair = scale_chart(tp.chart, gs.f);
  const TorusFamily fam = torus_family(pair.scaled, {16});
  double lap = 0;
  for (const char* v : {"sin(x1)", "cos(x1 + 2*x3) + sin(x2 - x4)", "sin(x1)*cos(x2)*sin(x3 + x4)"}) {
    const Expr e = parse_expression(v, 4);
    const SpectralGrid g =
        SpectralGrid::sample(fam.h.resolution, [&](std::span<const double> x) { return eval(e, x); });
    lap = std::max(lap, std::abs(grid_integral(fam, chern_laplacian(fam, g))));
  }

  const CatalogEntry hopf = load("hopf_surface");
  QuadratureOptions opt;
  opt.hopf_nodes = 4;
  const Quadrature lhs = integrate(hopf, [&](std::span<const double> x) {
    const auto c = chern_scalars(hopf.chart, x);
    return c.S1 - c.S2;
  }, opt);
  const Quadrature rhs =
      integrate(hopf, [&](std::span<const double> x) { return 0.5 * curvature_report(hopf.chart, x).alpha2; }, opt);
  const double rel = relative_residual(lhs.value, rhs.value);
  o.detail << "sup |int Lap^Ch v| " << lap << "; Hopf int(S1-S2) " << lhs.value << " vs int |alpha|^2/2 " << rhs.value
           << " (relative " << rel << ")";
  o.require(lap <= 1e-10, "Laplacian integral");
  o.require(rel <= 1e-3, "Hopf integral identity");
}

void berger(Outcome& o) {
  double worst = 0;
  int count = 0;
  auto check = [&](const ChartSpec& c, std::span<const double> p, std::uint64_t seed) {
    const BergerResult b = berger_average(c, p, 100000, seed);
    const double gap = std::max(0.0, std::abs(b.lhs - b.rhs) - 1e-12 * std::max(1.0, std::abs(b.rhs)));
    const double z = b.std_error > 0 ? gap / b.std_error : (gap == 0 ? 0.0 : 1e300);
    worst = std::max(worst, z);
    ++count;
  };
  const ChartSpec hopf = load("hopf_surface").chart;
  std::uint64_t seed = 100;
  for (const auto& p : sample_points(hopf, 5, 8)) check(hopf, p, seed++);
  const TwistorChart tc = twistor("s4_round", 0.5, TwistorSign::Plus);
  check(tc.chart, sample_points(tc.chart, 1, 9)[0], seed++);
  o.detail << count << " points, worst deviation " << worst << " standard errors";
  o.require(worst <= 3, "within 3 standard errors");
}

void classification(Outcome& o) {
  for (const auto& name : catalog_names()) {
    const CatalogEntry e = load(name);
    if (e.expected_class.empty()) continue;
    const auto f = classify_gray_hervella(e.chart, 10, 11);
    o.detail << name << "=" << f.label << " ";
    o.require(f.label == e.expected_class, name + " expected " + e.expected_class);
  }
  for (const char* b : kBases) {
    const auto fp = classify_gray_hervella(twistor(b, 0.8, TwistorSign::Plus).chart, 4, 12);
    const auto fm = classify_gray_hervella(twistor(b, 0.8, TwistorSign::Minus).chart, 4, 12);
    o.require(fp.label == "W3", std::string(b) + " J+ in W3");
    o.require(!fm.dF_minus_zero, std::string(b) + " J- has nonzero (dF)-");
    if (b == std::string("s4_round")) o.detail << "| twistor J+=" << fp.label << " J- |(dF)-|=" << fm.dF_minus;
  }
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
      {"identity suite", identity_suite},
      {"twistor closed forms", twistor_oracle},
      {"Chern-Ricci form and canonical form of J-", chern_ricci_minus},
      {"integrability dichotomy", integrability},
      {"conformal machinery", conformal_machinery},
      {"global integrals", global_integrals},
      {"Berger averaging", berger},
      {"classification", classification},
  };
  int failed = 0, index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    Outcome o;
    o.detail.precision(3);
    const auto start = std::chrono::steady_clock::now();
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("%s %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
