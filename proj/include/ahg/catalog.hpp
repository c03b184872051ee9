#pragma once

// Built-in charts with known Gray-Hervella classes and reference scalars.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ahg/chart.hpp"

namespace ahg {

class CatalogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Constant reference values over the whole chart, where known.
struct ExpectedScalars {
  std::optional<double> s, s_J, S1, S2, alpha2, delta_alpha;
};

/// Fundamental domain used for global integrals.
enum class FundamentalDomain {
  None,         // not compact or not declared
  Box,          // the chart's coordinate box
  HopfAnnulus,  // 1 <= |x| < 2 in R^4, quotient by x -> 2x
};

struct CatalogEntry {
  std::string name;
  std::string description;  // construction and where each reference value comes from
  ChartSpec chart;
  std::string expected_class;  // label as produced by gray_hervella_label
  bool integrable = true;
  bool compact = false;  // the domain is a fundamental domain of a closed manifold
  FundamentalDomain domain = FundamentalDomain::None;
  bool twistor_base = false;
  ExpectedScalars scalars;
  std::vector<double> witness_point;  // generic point for non-integrability checks
};

const std::vector<std::string>& catalog_names();
CatalogEntry load(std::string_view name);

/// Sections [meta] (name, n), [domain] ("lo hi [periodic]" per axis),
/// [metric] and [J] (one comma-separated row per line). '#' starts a comment.
ChartSpec parse_chart_file(std::string_view text);
CatalogEntry load_chart_file(const std::string& path);

/// 7-dimensional cross product u x v (indices 0..6).
std::vector<double> cross7(std::span<const double> u, std::span<const double> v);

}  // namespace ahg
