#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "CLI11.hpp"

#include "ahg/conformal.hpp"
#include "ahg/curvature.hpp"
#include "ahg/twistor.hpp"

namespace ahg::cli {

using Json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Output

struct Output {
  Json config;
  std::vector<Json> results;
  Json summary = Json::object();
  std::vector<std::string> notes;
  int exit_code = 0;
};

void dump_value(const Json& j, std::ostream& os, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  switch (j.type()) {
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      os << (std::isfinite(v) ? format_double(v) : "null");
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) os << ",\n";
        first = false;
        os << pad << Json(k).dump() << ": ";
        dump_value(v, os, indent + 2);
      }
      os << "\n" << std::string(static_cast<std::size_t>(indent), ' ') << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      const bool scalars = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      if (scalars) {
        os << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          dump_value(j[i], os, indent);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        dump_value(j[i], os, indent + 2);
      }
      os << "\n" << std::string(static_cast<std::size_t>(indent), ' ') << "]";
      return;
    }
    default:
      os << j.dump();
  }
}

std::string csv_cell(const Json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  if (v.is_array()) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + csv_cell(v[i]);
    return s;
  }
  return v.dump();
}

std::string text_cell(const Json& v) {
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  if (v.is_object()) {
    std::string s;
    for (const auto& [k, e] : v.items()) s += (s.empty() ? "" : "  ") + k + "=" + text_cell(e);
    return s;
  }
  if (v.is_array()) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + text_cell(v[i]);
    return s + ")";
  }
  return v.dump();
}

void write_output(const Output& o, const std::string& format, std::ostream& os) {
  if (format == "json") {
    Json top;
    top["config"] = o.config;
    top["results"] = o.results;
    top["summary"] = o.summary;
    os << dump_json(top) << "\n";
    return;
  }
  std::vector<std::string> cols;
  if (!o.results.empty())
    for (const auto& [k, v] : o.results.front().items()) cols.push_back(k);
  if (format == "csv") {
    for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
    os << "\n";
    for (const auto& r : o.results) {
      for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << csv_cell(r.at(cols[c]));
      os << "\n";
    }
    return;
  }
  os << o.config.value("command", "") << " " << o.config.value("manifold", "") << "\n";
  std::vector<std::size_t> width(cols.size());
  std::vector<std::vector<std::string>> cells;
  for (std::size_t c = 0; c < cols.size(); ++c) width[c] = cols[c].size();
  for (const auto& r : o.results) {
    std::vector<std::string> row;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      row.push_back(text_cell(r.at(cols[c])));
      width[c] = std::max(width[c], row.back().size());
    }
    cells.push_back(std::move(row));
  }
  auto line = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "  " : "") << std::setw(static_cast<int>(width[c])) << row[c];
    os << "\n";
  };
  if (!cols.empty()) line(cols);
  for (const auto& row : cells) line(row);
  for (const auto& [k, v] : o.summary.items()) os << k << ": " << text_cell(v) << "\n";
}

// ---------------------------------------------------------------------------
// Manifold addressing

TwistorSign parse_sign(const std::string& s) {
  if (s == "+" || s == "plus") return TwistorSign::Plus;
  if (s == "-" || s == "minus") return TwistorSign::Minus;
  throw UsageError("twistor sign must be + or -, got '" + s + "'");
}

double parse_number(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw UsageError("invalid " + what + " '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

// ---------------------------------------------------------------------------
// Commands

Json point_json(const std::vector<double>& p) {
  Json a = Json::array();
  for (double v : p) a.push_back(v);
  return a;
}

std::vector<std::vector<double>> sample(const Manifold& m, const RunConfig& cfg) {
  if (cfg.points < 1) throw UsageError("--points must be positive");
  return sample_points(m.entry.chart, cfg.points, cfg.seed);
}

struct Stat {
  double lo = std::numeric_limits<double>::infinity(), hi = -std::numeric_limits<double>::infinity(), sum = 0;
  int count = 0;
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
    ++count;
  }
  Json json() const { return Json{{"min", lo}, {"max", hi}, {"mean", count ? sum / count : 0.0}}; }
};

Output cmd_report(const RunConfig& cfg) {
  const Manifold m = resolve_manifold(cfg.manifold);
  Output o;
  const char* keys[] = {"s", "s_J", "S1", "S2", "alpha2", "N0_2", "dF_minus2", "dF0_plus2", "delta_alpha"};
  std::map<std::string, Stat> stats;
  int idx = 0;
  for (const auto& p : sample(m, cfg)) {
    const CurvatureReport r = curvature_report(m.entry.chart, p, 2);
    const double vals[] = {r.s, r.s_J, r.S1, r.S2, r.alpha2, r.N02, r.dF_minus2, r.dF0_plus2, r.delta_alpha};
    Json row;
    row["index"] = idx++;
    row["point"] = point_json(p);
    for (std::size_t k = 0; k < std::size(keys); ++k) {
      row[keys[k]] = vals[k];
      stats[keys[k]].add(vals[k]);
    }
    o.results.push_back(row);
  }
  for (const char* k : keys) o.summary[k] = stats[k].json();
  return o;
}

enum class CheckKind { Registry, Conformal, Twistor };
struct Check {
  std::string name;
  CheckKind kind = CheckKind::Registry;
  IdentityId id = IdentityId::I2_1;
};

const std::vector<std::string>& twistor_check_names() {
  static const std::vector<std::string> names{"T.coframe",       "T.structure", "T.levi_civita", "T.rho",
                                              "T.integrability", "T.canonical", "T.closed_form"};
  return names;
}

bool twistor_check_applies(const std::string& name, const TwistorChart& tc) {
  if (name == "T.canonical") return tc.spec.sign == TwistorSign::Minus;
  if (name == "T.closed_form") return tc.spec.einstein;
  return true;
}

/// Worst-case residual of a twistor check at one point.
double twistor_check(const std::string& name, const TwistorChart& tc, std::span<const double> p) {
  if (name == "T.coframe") {
    const auto c = twistor_coframe(tc, p);
    return std::max(c.gram_residual, c.fundamental_form_residual);
  }
  if (name == "T.structure") {
    const auto s = structure_equation_residual(tc, p);
    return std::max(s.first, s.second);
  }
  if (name == "T.levi_civita") {
    const auto l = levi_civita_forms(tc, p);
    return std::max(l.structure_residual, l.antisymmetry);
  }
  if (name == "T.rho") {
    const auto r = chern_ricci_forms(tc, p);
    return std::max(r.formula_residual, r.einstein_residual.value_or(0.0));
  }
  if (name == "T.integrability") {
    const auto r = lee_and_integrability_check(tc, p);
    const double base = std::max(r.F_wedge_dF, r.alpha);
    return tc.spec.sign == TwistorSign::Plus ? std::max(base, r.nijenhuis) : base;
  }
  if (name == "T.canonical") {
    const auto c = canonical_form_check(tc, p);
    return std::max(c.type31, c.rhs_residual);
  }
  const auto cf = closed_form_scalars(tc.spec.s_N, tc.spec.t);
  const CurvatureReport r = curvature_report(tc.chart, p, 2);
  const bool plus = tc.spec.sign == TwistorSign::Plus;
  return std::max({relative_residual(r.s, cf.s), relative_residual(r.s_J, plus ? cf.s_J_plus : cf.s_J_minus),
                   relative_residual(r.S1, plus ? cf.S1_plus : cf.S1_minus)});
}

Output cmd_verify(const RunConfig& cfg) {
  const Manifold m = resolve_manifold(cfg.manifold);
  const double tol = cfg.tol.value_or(1e-7);
  Output o;
  std::vector<Check> checks;
  const bool all = cfg.identities == "all";
  std::optional<Expr> factor;
  if (cfg.factor) factor = parse_expression(*cfg.factor, m.entry.chart.dim());
  if (all) {
    for (IdentityId id : all_identities()) {
      if (identity_needs_hermitian(id) && !m.entry.integrable) {
        o.notes.push_back(identity_name(id) + " skipped: needs a Hermitian structure");
        continue;
      }
      checks.push_back({identity_name(id), CheckKind::Registry, id});
    }
    if (factor)
      for (IdentityId id : conformal_identities()) checks.push_back({identity_name(id), CheckKind::Conformal, id});
    if (m.twistor)
      for (const auto& n : twistor_check_names())
        if (twistor_check_applies(n, *m.twistor)) checks.push_back({n, CheckKind::Twistor});
  } else {
    for (const auto& name : split(cfg.identities, ',')) {
      if (std::find(twistor_check_names().begin(), twistor_check_names().end(), name) != twistor_check_names().end()) {
        if (!m.twistor || !twistor_check_applies(name, *m.twistor))
          throw UsageError(name + " does not apply to " + cfg.manifold);
        checks.push_back({name, CheckKind::Twistor});
        continue;
      }
      const auto id = parse_identity(name);
      if (!id) throw UsageError("unknown identity '" + name + "'");
      const bool conformal = std::find(conformal_identities().begin(), conformal_identities().end(), *id) !=
                             conformal_identities().end();
      if (conformal && !factor) throw UsageError(name + " needs --factor");
      if (identity_needs_hermitian(*id) && !m.entry.integrable)
        throw UsageError(name + " is inapplicable: " + cfg.manifold + " is not Hermitian (J is not integrable)");
      checks.push_back({name, conformal ? CheckKind::Conformal : CheckKind::Registry, *id});
    }
  }

  struct Worst {
    double rel = -1, abs = 0;
    int index = -1;
  };
  std::vector<Worst> worst(checks.size());
  std::optional<ConformalPair> pair;
  if (factor) pair = scale_chart(m.entry.chart, *factor);
  const auto pts = sample(m, cfg);
  for (std::size_t pi = 0; pi < pts.size(); ++pi) {
    const auto& p = pts[pi];
    std::optional<CurvatureReport> report;
    std::optional<std::vector<IdentityResidual>> conformal;
    for (std::size_t c = 0; c < checks.size(); ++c) {
      double rel = 0, abs = 0;
      if (checks[c].kind == CheckKind::Registry) {
        if (!report) report = curvature_report(m.entry.chart, p, 2);
        for (const auto& ir : report->identities)
          if (ir.id == checks[c].id) rel = ir.rel_residual, abs = ir.abs_residual;
      } else if (checks[c].kind == CheckKind::Conformal) {
        if (!conformal) conformal = conformal_scalar_residuals(*pair, p);
        for (const auto& ir : *conformal)
          if (ir.id == checks[c].id) rel = ir.rel_residual, abs = ir.abs_residual;
      } else {
        abs = rel = twistor_check(checks[c].name, *m.twistor, p);
      }
      if (rel > worst[c].rel) worst[c] = {rel, abs, static_cast<int>(pi)};
    }
  }
  int failed = 0;
  for (std::size_t c = 0; c < checks.size(); ++c) {
    const bool pass = worst[c].rel <= tol;
    failed += !pass;
    Json row;
    row["check"] = checks[c].name;
    row["worst_rel"] = worst[c].rel;
    row["worst_abs"] = worst[c].abs;
    row["worst_index"] = worst[c].index;
    row["worst_point"] = point_json(pts[static_cast<std::size_t>(std::max(0, worst[c].index))]);
    row["pass"] = pass;
    o.results.push_back(row);
  }
  o.summary["checks"] = static_cast<int>(checks.size());
  o.summary["failed"] = failed;
  o.summary["tol"] = tol;
  o.exit_code = failed ? 1 : 0;
  return o;
}

Output cmd_classify(const RunConfig& cfg) {
  const Manifold m = resolve_manifold(cfg.manifold);
  const double tol = cfg.tol.value_or(1e-8);
  const auto f = classify_gray_hervella(m.entry.chart, cfg.points, cfg.seed, tol);
  Output o;
  Json row;
  row["dF_minus"] = f.dF_minus;
  row["N0"] = f.N0;
  row["dF0_plus"] = f.dF0_plus;
  row["alpha"] = f.alpha;
  row["label"] = f.label;
  row["expected"] = m.entry.expected_class;
  const bool match = m.entry.expected_class.empty() || m.entry.expected_class == f.label;
  row["match"] = match;
  o.results.push_back(row);
  o.summary["label"] = f.label;
  o.summary["tol"] = tol;
  o.exit_code = match ? 0 : 1;
  return o;
}

Output cmd_twistor_sweep(const RunConfig& cfg) {
  if (!(cfg.t_min > 0) || !(cfg.t_max >= cfg.t_min) || cfg.steps < 1)
    throw UsageError("twistor-sweep needs 0 < t-min <= t-max and steps >= 1");
  const TwistorSign sign = parse_sign(cfg.sign);
  const CatalogEntry base = load(cfg.manifold);
  const double tol = cfg.tol.value_or(1e-6);
  Output o;
  int failed = 0;
  for (int k = 0; k < cfg.steps; ++k) {
    const double t = cfg.steps == 1 ? cfg.t_min : cfg.t_min + (cfg.t_max - cfg.t_min) * k / (cfg.steps - 1);
    const TwistorChart tc = build_twistor_chart(twistor_spec(base, t, sign));
    const auto p = sample_points(tc.chart, 1, mix_seed(cfg.seed, static_cast<std::uint64_t>(k)))[0];
    const CurvatureReport r = curvature_report(tc.chart, p, 2);
    const auto cf = closed_form_scalars(tc.spec.s_N, t);
    const bool plus = sign == TwistorSign::Plus;
    const double sJ = plus ? cf.s_J_plus : cf.s_J_minus, S1 = plus ? cf.S1_plus : cf.S1_minus;
    const double res = std::max({relative_residual(r.s, cf.s), relative_residual(r.s_J, sJ), relative_residual(r.S1, S1)});
    failed += res > tol;
    Json row;
    row["t"] = t;
    row["s_closed"] = cf.s;
    row["s_generic"] = r.s;
    row["s_J_closed"] = sJ;
    row["s_J_generic"] = r.s_J;
    row["S1_closed"] = S1;
    row["S1_generic"] = r.S1;
    row["residual"] = res;
    o.results.push_back(row);
  }
  o.summary["rows"] = cfg.steps;
  o.summary["failed"] = failed;
  o.summary["tol"] = tol;
  o.exit_code = failed ? 1 : 0;
  return o;
}

Output cmd_solve(const RunConfig& cfg) {
  const Manifold m = resolve_manifold(cfg.manifold);
  const int n = m.entry.chart.n;
  if (std::abs(n * cfg.lambda + cfg.mu) < 1e-14)
    throw UsageError("n*lambda + mu = 0: the equation degenerates; the sign of lambda S1 + mu S2 is then the same for "
                     "every metric in the conformal class, so no conformal factor is needed");
  if (cfg.resolution < 2) throw UsageError("--resolution must be at least 2");
  const double tol = cfg.tol.value_or(1e-6);
  const std::vector<int> res(static_cast<std::size_t>(m.entry.chart.dim()), cfg.resolution);
  const MixedSolution s = solve_mixed_equation(m.entry.chart, cfg.lambda, cfg.mu, res, std::nullopt,
                                               std::min(cfg.points, 20));
  if (!cfg.grid.empty()) save_grid(s.f, cfg.grid);
  Output o;
  Json row;
  row["gamma"] = s.gamma;
  row["residual"] = s.residual;
  row["zero_mode_removed"] = s.zero_mode_removed;
  row["sign_check_residual"] = s.check_residual;
  row["f_sup"] = s.f.sup();
  const bool ok = s.residual <= 1e-10 && s.check_residual <= tol;
  row["pass"] = ok;
  o.results.push_back(row);
  o.summary["gamma"] = s.gamma;
  o.summary["sign"] = std::abs(s.gamma) <= 1e-10 ? "zero" : (s.gamma > 0 ? "positive" : "negative");
  o.summary["grid"] = cfg.grid;
  o.exit_code = ok ? 0 : 1;
  return o;
}

Output cmd_gauduchon(const RunConfig& cfg) {
  const Manifold m = resolve_manifold(cfg.manifold);
  const double tol = cfg.tol.value_or(1e-9);
  std::vector<int> res;
  if (cfg.resolution > 0) res.assign(static_cast<std::size_t>(m.entry.chart.dim()), cfg.resolution);
  const GauduchonSearch g = find_gauduchon_factor(m.entry.chart, tol, cfg.modes, res);
  if (!cfg.grid.empty()) save_grid(g.f, cfg.grid);
  Output o;
  for (std::size_t k = 0; k < g.history.size(); ++k) o.results.push_back(Json{{"iteration", k}, {"objective", g.history[k]}});
  o.summary["iterations"] = g.iterations;
  o.summary["residual"] = g.residual;
  o.summary["volume_shift"] = g.volume_shift;
  o.summary["converged"] = g.converged;
  o.summary["grid"] = cfg.grid;
  o.exit_code = g.converged ? 0 : 1;
  return o;
}

Output cmd_gamma(const RunConfig& cfg) {
  const Manifold m = resolve_manifold(cfg.manifold);
  QuadratureOptions q;
  q.gauss_nodes = cfg.nodes;
  q.hopf_nodes = cfg.nodes;
  q.torus_resolution = cfg.resolution;
  std::optional<Expr> factor;
  Output o;
  if (cfg.gauduchon) {
    const GauduchonSearch g = find_gauduchon_factor(m.entry.chart);
    if (!g.converged) o.notes.push_back("Gauduchon search did not converge");
    factor = g.f.to_expr();
  }
  const GammaInvariant gi = gamma_invariant(m.entry, cfg.lambda, cfg.mu, factor, q, cfg.tol.value_or(1e-8));
  Json row;
  row["lambda"] = gi.lambda;
  row["mu"] = gi.mu;
  row["value"] = gi.value;
  row["raw_integral"] = gi.raw_integral;
  row["volume"] = gi.volume;
  row["unit_volume_factor"] = gi.unit_volume_factor;
  row["lee_coclosed_residual"] = gi.lee_coclosed_residual;
  row["error_estimate"] = gi.error_estimate;
  o.results.push_back(row);
  o.summary["value"] = gi.value;
  return o;
}

Output cmd_berger(const RunConfig& cfg) {
  const Manifold m = resolve_manifold(cfg.manifold);
  if (cfg.samples < 2) throw UsageError("--samples must be at least 2");
  Output o;
  int failed = 0, idx = 0;
  for (const auto& p : sample(m, cfg)) {
    const BergerResult b = berger_average(m.entry.chart, p, cfg.samples, mix_seed(cfg.seed, static_cast<std::uint64_t>(idx)));
    const double gap = std::abs(b.lhs - b.rhs);
    const bool pass = gap <= 3 * b.std_error + 1e-12 * std::max(1.0, std::abs(b.rhs));
    failed += !pass;
    Json row;
    row["index"] = idx++;
    row["average"] = b.lhs;
    row["formula"] = b.rhs;
    row["std_error"] = b.std_error;
    row["z"] = b.std_error > 0 ? gap / b.std_error : 0.0;
    row["pass"] = pass;
    o.results.push_back(row);
  }
  o.summary["samples"] = cfg.samples;
  o.summary["failed"] = failed;
  o.exit_code = failed ? 1 : 0;
  return o;
}

Json config_json(const RunConfig& cfg, const std::string& format) {
  Json c;
  c["command"] = cfg.command;
  c["manifold"] = cfg.manifold;
  c["points"] = cfg.points;
  c["seed"] = cfg.seed;
  if (cfg.tol) c["tol"] = *cfg.tol;
  c["format"] = format;
  if (cfg.command == "verify") {
    c["identities"] = cfg.identities;
    if (cfg.factor) c["factor"] = *cfg.factor;
  } else if (cfg.command == "twistor-sweep") {
    c["sign"] = cfg.sign;
    c["t_min"] = cfg.t_min;
    c["t_max"] = cfg.t_max;
    c["steps"] = cfg.steps;
  } else if (cfg.command == "solve" || cfg.command == "gamma") {
    c["lambda"] = cfg.lambda;
    c["mu"] = cfg.mu;
    c["resolution"] = cfg.resolution;
    if (cfg.command == "gamma") {
      c["nodes"] = cfg.nodes;
      c["gauduchon"] = cfg.gauduchon;
    }
  } else if (cfg.command == "gauduchon") {
    c["modes"] = cfg.modes;
  } else if (cfg.command == "berger") {
    c["samples"] = cfg.samples;
  }
  return c;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string dump_json(const Json& j) {
  std::ostringstream os;
  dump_value(j, os, 0);
  return os.str();
}

Manifold resolve_manifold(const std::string& address) {
  Manifold m;
  if (address.rfind("file:", 0) == 0) {
    m.entry = load_chart_file(address.substr(5));
    return m;
  }
  if (address.rfind("twistor:", 0) == 0) {
    const auto parts = split(address, ':');
    if (parts.size() != 4 || parts[3].rfind("t=", 0) != 0)
      throw UsageError("twistor address must read twistor:<base>:<sign>:t=<value>");
    const TwistorSign sign = parse_sign(parts[2]);
    const double t = parse_number(parts[3].substr(2), "fiber scale");
    if (!(t > 0)) throw UsageError("fiber scale must be positive");
    TwistorChart tc = build_twistor_chart(twistor_spec(load(parts[1]), t, sign));
    CatalogEntry& e = m.entry;
    e.name = address;
    e.description = "Twistor space of " + parts[1];
    e.chart = tc.chart;
    e.integrable = sign == TwistorSign::Plus;
    e.expected_class = sign == TwistorSign::Plus ? "W3" : "";
    if (tc.spec.einstein) {
      const auto cf = closed_form_scalars(tc.spec.s_N, t);
      e.scalars.s = cf.s;
      e.scalars.s_J = sign == TwistorSign::Plus ? cf.s_J_plus : cf.s_J_minus;
      e.scalars.S1 = sign == TwistorSign::Plus ? cf.S1_plus : cf.S1_minus;
    }
    m.twistor = std::move(tc);
    return m;
  }
  m.entry = load(address);
  return m;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"ahg"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Almost-Hermitian geometry toolkit"};
  app.require_subcommand(1);
  auto common = [&cfg](CLI::App* sub, bool manifold = true) {
    if (manifold)
      sub->add_option("manifold", cfg.manifold, "<catalog-name> | twistor:<base>:<sign>:t=<val> | file:<path>")
          ->required();
    sub->add_option("--points", cfg.points, "Sample points")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    sub->add_option("--tol", cfg.tol, "Tolerance override");
    sub->add_option("--format", cfg.format, "text | json | csv")->check(CLI::IsMember({"text", "json", "csv"}));
    sub->add_option("--out", cfg.out, "Output path (stdout when empty)");
  };

  auto* report = app.add_subcommand("report", "Curvature report at sampled points");
  common(report);
  auto* verify = app.add_subcommand("verify", "Check identities at sampled points");
  verify->add_option("identities", cfg.identities, "'all' or comma-separated ids (I2.4, T.rho, ...)")->required();
  common(verify);
  verify->add_option("--factor", cfg.factor, "Conformal factor f for the conformal identities");
  auto* classify = app.add_subcommand("classify", "Gray-Hervella classification");
  common(classify);
  auto* sweep = app.add_subcommand("twistor-sweep", "Closed-form and generic twistor scalars against t");
  sweep->add_option("base", cfg.manifold, "Twistor base")->required();
  common(sweep, false);
  sweep->add_option("--sign", cfg.sign, "+ or -")->capture_default_str();
  sweep->add_option("--t-min", cfg.t_min)->capture_default_str();
  sweep->add_option("--t-max", cfg.t_max)->capture_default_str();
  sweep->add_option("--steps", cfg.steps)->capture_default_str();
  auto* solve = app.add_subcommand("solve", "Spectral solve of the mixed conformal equation on a torus");
  solve->add_option("manifold", cfg.manifold)->required();
  solve->add_option("lambda", cfg.lambda)->required();
  solve->add_option("mu", cfg.mu)->required();
  solve->add_option("resolution", cfg.resolution)->required();
  common(solve, false);
  solve->add_option("--grid", cfg.grid, "Write the solution grid here");
  auto* gaud = app.add_subcommand("gauduchon", "Gauduchon factor search on a torus");
  common(gaud);
  gaud->add_option("--modes", cfg.modes)->capture_default_str();
  gaud->add_option("--resolution", cfg.resolution, "Grid points per axis (0: automatic)");
  gaud->add_option("--grid", cfg.grid, "Write the factor grid here");
  auto* gamma = app.add_subcommand("gamma", "Mixed invariant by global quadrature");
  common(gamma);
  gamma->add_option("--lambda", cfg.lambda)->capture_default_str();
  gamma->add_option("--mu", cfg.mu)->capture_default_str();
  gamma->add_option("--nodes", cfg.nodes, "Gauss nodes per bounded axis")->capture_default_str();
  gamma->add_option("--resolution", cfg.resolution, "Trapezoid nodes per periodic axis")->capture_default_str();
  gamma->add_flag("--gauduchon", cfg.gauduchon, "Rescale to the Gauduchon metric first");
  auto* berger = app.add_subcommand("berger", "Monte Carlo holomorphic sectional curvature average");
  common(berger);
  berger->add_option("--samples", cfg.samples)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  if (cfg.command == "gauduchon" && gaud->count("--resolution") == 0) cfg.resolution = 0;

  std::string format = cfg.format;
  if (format.empty()) format = cfg.command == "twistor-sweep" ? "csv" : "text";
  Output o;
  try {
    if (cfg.command == "report") o = cmd_report(cfg);
    else if (cfg.command == "verify") o = cmd_verify(cfg);
    else if (cfg.command == "classify") o = cmd_classify(cfg);
    else if (cfg.command == "twistor-sweep") o = cmd_twistor_sweep(cfg);
    else if (cfg.command == "solve") o = cmd_solve(cfg);
    else if (cfg.command == "gauduchon") o = cmd_gauduchon(cfg);
    else if (cfg.command == "gamma") o = cmd_gamma(cfg);
    else o = cmd_berger(cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  o.config = config_json(cfg, format);
  for (const auto& n : o.notes) err << "note: " << n << "\n";
  if (cfg.out.empty()) {
    write_output(o, format, out);
  } else {
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) {
      err << "error: cannot write " << cfg.out << "\n";
      return 2;
    }
    write_output(o, format, f);
  }
  return o.exit_code;
}

}  // namespace ahg::cli
