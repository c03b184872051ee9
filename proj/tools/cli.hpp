#pragma once

// Command-line front end. Exit codes: 0 pass, 1 verification failure, 2 usage
// or input error.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ahg/catalog.hpp"
#include "ahg/twistor.hpp"

namespace ahg::cli {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string manifold;
  int points = 50;
  std::uint64_t seed = 42;
  std::optional<double> tol;
  std::string format;  // text | json | csv; empty selects the command default
  std::string out;

  std::string identities = "all";  // verify
  std::optional<std::string> factor;  // verify: conformal factor f for the pair (g, e^{2f} g)
  std::string sign = "+";          // twistor-sweep
  double t_min = 0.2, t_max = 2.0;
  int steps = 50;
  double lambda = 1.0, mu = 0.0;   // solve, gamma
  int resolution = 16;
  std::string grid;                // solve, gauduchon: grid output path
  int modes = 4;                   // gauduchon
  bool gauduchon = false;          // gamma: rescale to the Gauduchon metric first
  int nodes = 8;                   // gamma: Gauss nodes per bounded axis
  int samples = 100000;            // berger
};

/// A resolved manifold address: `<catalog-name>`, `twistor:<base>:<sign>:t=<val>` or `file:<path>`.
struct Manifold {
  CatalogEntry entry;
  std::optional<TwistorChart> twistor;
};
Manifold resolve_manifold(const std::string& address);

/// JSON text with every float written as %.17g.
std::string dump_json(const nlohmann::ordered_json& j);
std::string format_double(double v);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ahg::cli
