#pragma once

// Run configuration: an INI file with sections [diffusion], [functional],
// [verify], [sim], [zero_one], [quad], [output]. Every key but mu, sigma,
// ell, r, x0 and f has a default; see README.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "zeroone/feller.hpp"
#include "zeroone/mc.hpp"

namespace zeroone::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ZeroOneSim {
  std::vector<double> horizons{25, 50, 100, 200};
  std::optional<double> L, R;  // default to the [sim] window
  double base_step = 1e-2;
  std::size_t n_paths = 2000;
  double stabilization_tol = 0.05;
  double growth_factor = 1.5;
};

struct RunConfig {
  std::string mu, sigma;
  double ell = 0.0, r = 0.0;
  std::optional<double> c;
  double x0 = 0.0;
  std::optional<std::string> f;
  std::optional<std::string> b2;    // time-change integrand, default f
  std::optional<std::string> x_b2;  // b^2 used for the direct X simulation, default b2
  mc::SimConfig sim;
  bool window_given = false;
  ZeroOneSim zero_one;
  double tol = 1e-9;
  double margin = 0.025;
  int ladder_length = 48;
  std::string out_dir = "zeroone_out";
  std::size_t dump_paths = 0;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& ini_text);

/// Fills a default simulation window from J and x0 when none was given.
void resolve_window(RunConfig& cfg);

/// Parses mu and sigma; expression errors become ConfigError with position.
feller::CoefficientSet coefficients(const RunConfig& cfg);
expr::Expression parse_field(const std::string& name, const std::string& text);
feller::Tolerances tolerances(const RunConfig& cfg);

/// Resolved configuration, every default included. Worker count and output
/// directory are left out: neither changes any result.
nlohmann::ordered_json to_json(const RunConfig& cfg);

}  // namespace zeroone::cli
