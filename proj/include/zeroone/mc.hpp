#pragma once

// Euler-Maruyama simulation with boundary-aware stepping, and the two
// verification experiments: the time-change identity and the zero-one law.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "zeroone/expr.hpp"
#include "zeroone/feller.hpp"
#include "zeroone/law.hpp"
#include "zeroone/stats.hpp"
#include "zeroone/timechange.hpp"

namespace zeroone::mc {

using timechange::Exit;
using timechange::PathRecord;

struct SimConfig {
  double horizon = 10.0;
  double base_step = 1e-3;
  /// Exit is declared within boundary_band * (R - L) of a truncation level.
  double boundary_band = 1e-6;
  double L = -10.0;
  double R = 10.0;
  std::size_t n_paths = 10000;
  std::uint64_t seed = 0;
  double step_shrink = 0.5;
  /// Parallelism only; results do not depend on it.
  unsigned workers = 1;
};

/// Throws std::invalid_argument on an unusable configuration.
void check_config(const feller::CoefficientSet& cs, const SimConfig& cfg);

/// Stream offsets separating the samples of one experiment.
inline constexpr std::uint64_t kStreamX = std::uint64_t{1} << 40;
inline constexpr std::uint64_t kStreamNull = std::uint64_t{2} << 40;

struct PathOutcome {
  Exit exit = Exit::None;
  double end_time = 0.0;
  double end_state = 0.0;
  bool censored = false;
  bool failed = false;
  std::string failure;
  std::uint64_t clamp_count = 0;
  std::uint64_t steps = 0;
};

/// Called at every knot of the path, starting with (0, x0); the exit knot is
/// the last call.
using Visitor = std::function<void(double t, double y)>;

/// One path on normal stream `stream`. Every time in `checkpoints` inside the
/// horizon is a knot of the path.
PathOutcome run_path(const feller::CoefficientSet& cs, const SimConfig& cfg, std::uint64_t stream,
                     const Visitor& visit, const std::vector<double>& checkpoints = {});

/// Full path record (no phi).
PathRecord simulate_path(const feller::CoefficientSet& cs, const SimConfig& cfg, std::uint64_t path_seed);

/// Runs body(i) for i in [0, n) on `workers` threads. The first exception by
/// index is rethrown after all workers finish.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body);

struct EventFrequencies {
  std::size_t n = 0;
  std::size_t left = 0, right = 0, censored = 0, failed = 0;
  stats::Interval left_ci, right_ci, censored_ci;
  std::uint64_t clamp_count = 0;
};

EventFrequencies estimate_event_probabilities(const feller::CoefficientSet& cs, const SimConfig& cfg);

enum class Agreement { Consistent, Contradicts, Underpowered };

const char* to_string(Agreement a);

struct SideComparison {
  Exit side = Exit::Right;
  std::size_t n1 = 0, n2 = 0;
  double ks = 0.0;
  double threshold = 0.0;
  bool evaluated = false;
};

struct Rung {
  double horizon = 0.0;
  std::size_t count = 0;  // boundary-tending paths
  double mean = 0.0;
  double q90 = 0.0;
};

struct VerificationSummary {
  double ks_distance = 0.0;
  double ks_threshold = 0.0;
  std::size_t n_effective_1 = 0, n_effective_2 = 0;
  double exit_side_agreement = 0.0;
  std::vector<Rung> functional_diagnostics;
  Agreement verdict_agreement = Agreement::Underpowered;

  std::vector<SideComparison> sides;
  EventFrequencies sample_1, sample_2;
  bool exit_frequencies_agree = false;
  /// Largest |phi_zeta - time-changed exit time| over the structurally checked paths.
  double structural_max_gap = 0.0;
  std::size_t structural_paths = 0;
  double tending_threshold = 0.0;  // zero-one: state beyond which a path counts as boundary-tending
  std::string note;
};

struct TimeChangeOptions {
  int null_resamples = 200;
  double null_quantile = 0.99;
  double threshold_factor = 1.5;
  std::size_t min_count = 100;
  std::size_t structural_paths = 256;
};

/// Sample 1: phi_zeta = int_0^zeta b2(Y) du over exited Y-paths. Sample 2:
/// exit times of X simulated directly with b^2 = x_b2 (defaults to b2).
VerificationSummary verify_time_change_identity(const feller::CoefficientSet& cs, const expr::Expression& b2,
                                                const SimConfig& cfg,
                                                const std::optional<expr::Expression>& x_b2 = std::nullopt,
                                                const TimeChangeOptions& opts = {});

struct ZeroOneOptions {
  double stabilization_tol = 0.05;
  double growth_factor = 1.5;
  std::size_t min_count = 100;
  /// Outer fraction of [x0, R] (resp. [L, x0]) in natural scale.
  double outer_fraction = 0.1;
};

VerificationSummary verify_zero_one_law(const feller::CoefficientSet& cs, const feller::ScaleProfile& profile,
                                        const expr::Expression& f, const SimConfig& cfg,
                                        const std::vector<double>& horizon_ladder, feller::Endpoint boundary,
                                        law::Functional verdict, const ZeroOneOptions& opts = {});

}  // namespace zeroone::mc
