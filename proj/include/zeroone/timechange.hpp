#pragma once

// Time change of a diffusion path by phi_t = int_0^t b^2(Y_u) du and the
// transformed coefficients of X_t = Y_{T_t}.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zeroone/expr.hpp"
#include "zeroone/feller.hpp"

namespace zeroone::timechange {

enum class Exit { None, Left, Right };

const char* to_string(Exit e);

struct PathRecord {
  std::vector<double> times;
  std::vector<double> states;
  std::vector<double> phi;  // empty until accumulate_phi
  Exit exit = Exit::None;
  std::optional<double> exit_time;
  bool censored = false;
  std::uint64_t seed = 0;
  /// Set when a coefficient evaluation aborted the path.
  bool failed = false;
  std::string failure;
  /// Increments of phi computed from one endpoint only.
  int one_sided_increments = 0;
  /// Proposals that left the window and were pulled back onto it.
  std::uint64_t clamp_count = 0;
  /// Grid samples dropped by time_change_path beyond the available phi range.
  std::size_t censored_samples = 0;
};

/// drift mu / b^2, diffusion sigma / b, built symbolically; same J, c, x0.
/// Throws std::invalid_argument when b vanishes on the probe grid.
feller::CoefficientSet transformed_coefficients(const feller::CoefficientSet& cs, const expr::Expression& b);

/// Trapezoidal phi on the path grid for the integrand b_squared.
PathRecord accumulate_phi(PathRecord path, const expr::Expression& b_squared);

/// T_t, tagged: past phi_zeta on an exited path T_t = infinity; past the
/// available range of a censored path the value is unknown.
struct InverseTime {
  enum class Kind { Finite, Infinite, Censored };
  Kind kind = Kind::Finite;
  double value = 0.0;  // meaningful only for Finite
};

InverseTime inverse_time(const PathRecord& path, double t);

/// X_t = Y_{T_t} on the grid, followed by the exit knot (phi_zeta, final state)
/// for exited paths. The result carries no phi.
PathRecord time_change_path(const PathRecord& path, const std::vector<double>& grid);

}  // namespace zeroone::timechange
