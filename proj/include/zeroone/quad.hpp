#pragma once

// Adaptive quadrature and numerical integrability verdicts.
//
// Integrands signal failure by throwing expr::EvalError; an overflow of the
// integrand is treated as evidence of divergence by the improper-integral
// routines, any other evaluation error as a missing sample.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace zeroone::quad {

using Integrand = std::function<double(double)>;

class QuadratureFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by classify_endpoint when fewer than the minimum number of probe
/// points could be evaluated.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

struct IntegrateOptions {
  double rel_tol = 0.0;  // stop when error <= max(tol, rel_tol * |value|)
  int max_depth = 60;
  int max_intervals = 4000;
};

/// Adaptive Gauss-Kronrod (7/15) on a finite interval with global bisection.
/// Falls back to a tanh-sinh rule when bisection cannot reach `tol`, which
/// covers integrable endpoint singularities.
QuadResult integrate(const Integrand& g, double a, double b, double tol,
                     const IntegrateOptions& opts = {});

/// Double-exponential rule on [a, b]. The integrand receives the abscissa and
/// its distances to both ends so it can evaluate precisely near them.
using EndpointAwareIntegrand = std::function<double(double x, double from_a, double to_b)>;
QuadResult tanh_sinh(const EndpointAwareIntegrand& g, double a, double b, double tol,
                     int max_level = 9);

enum class Status { Finite, Infinite, Indeterminate };

const char* to_string(Status s);

struct IntegrabilityVerdict {
  Status status = Status::Indeterminate;
  std::optional<double> value;                // iff Finite
  std::optional<double> error_estimate;       // iff Finite
  std::optional<double> divergence_exponent;  // iff not Finite
  std::vector<std::pair<int, double>> evidence;  // (ladder level, partial sum)
};

/// Which side of the endpoint the integration neighbourhood lies on.
/// LeftOf: neighbourhood (e - d, e), i.e. a right boundary approached from below.
enum class Side { LeftOf, RightOf };

struct ClassifyOptions {
  double tol = 1e-9;
  double margin = 0.025;
  int ladder_length = 48;       // K
  int min_points = 8;
  double divergence_factor = 1e12;
  int stall_levels = 12;
  double stall_slack = 1e-6;    // a ratio >= 1 - slack counts as non-decaying
  /// Start of the ladder for infinite endpoints; unused for finite ones.
  double anchor = 0.0;
};

/// Local integrability of g at one endpoint.
///
/// Finite endpoint e: probe distances d_k = probe_base * 2^-k, k = 0..K.
/// Infinite endpoint: magnitudes m_k = probe_base * 2^k measured from
/// `opts.anchor`. The log-log slope over the last half of the ladder and the
/// annulus sums S_k decide the verdict. For infinite endpoints the exponent
/// is reported in the inverted coordinate t = 1/m so that the same rule
/// (integrable iff exponent > -1) applies to both cases.
IntegrabilityVerdict classify_endpoint(const Integrand& g, double endpoint, Side side,
                                       double probe_base, const ClassifyOptions& opts = {});

struct EndFlags {
  bool left_singular = false;
  bool right_singular = false;
};

/// Improper integral over (a, b); a and b may be infinite. Flagged or
/// infinite ends are classified with classify_endpoint; when all are
/// integrable the value comes from a double-exponential rule after mapping
/// infinite ends through y = c + t/(1-t).
IntegrabilityVerdict integrate_improper(const Integrand& g, double a, double b, EndFlags ends,
                                        double tol, const ClassifyOptions& opts = {});

}  // namespace zeroone::quad
