#pragma once

// Scale function, Feller test functions and explosion tests for
//   dY = mu(Y) dt + sigma(Y) dW   on J = (ell, r).

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zeroone/expr.hpp"
#include "zeroone/quad.hpp"
#include "zeroone/tri.hpp"

namespace zeroone::feller {

enum class Endpoint { Ell, R };

const char* to_string(Endpoint e);

struct CoefficientSet {
  expr::Expression mu;
  expr::Expression sigma;
  double ell;
  double r;
  double c;
  double x0;

  /// Checks ell < c < r and ell < x0 < r; c defaults to the midpoint of a
  /// bounded J and to x0 otherwise.
  static CoefficientSet make(expr::Expression mu, expr::Expression sigma, double ell, double r, double x0,
                             std::optional<double> c = std::nullopt);

  double endpoint(Endpoint e) const { return e == Endpoint::Ell ? ell : r; }
};

double default_reference_point(double ell, double r, double x0);

struct Tolerances {
  double tol = 1e-9;
  quad::ClassifyOptions classify{};
  int probe_points = 10000;
  int compact_levels = 20;
};

/// Dense probe grid of the open interval J, with c and x0 included. Infinite
/// ends are reached through a rational map so the grid covers many decades.
std::vector<double> probe_grid(const CoefficientSet& cs, int n);

/// True when grid[i..] is a run of zeros of e ending in a nonzero value below
/// 1e-100, i.e. the zeros are underflow of a decay toward the left end.
bool zeros_precede_underflow(const expr::Expression& e, const std::vector<double>& grid, std::size_t i);

enum class Check { Pass, Fail, Indeterminate };

const char* to_string(Check c);

struct ConditionEntry {
  std::string name;
  Check status = Check::Indeterminate;
  std::string detail;
  std::optional<double> location;
};

struct ValidationReport {
  std::vector<ConditionEntry> entries;
  bool all_pass() const;
  bool any_fail() const;
};

/// Non-vanishing of sigma (and b) and local integrability of 1/sigma^2,
/// mu/sigma^2 (and b^2/sigma^2) on a nested family of compacts of J.
ValidationReport validate_conditions(const CoefficientSet& cs, const std::optional<expr::Expression>& b,
                                     const Tolerances& tol = {});

/// Scale function s with s(c) = 0, s'(c) = 1.
///
/// The drift integral I(y) = int_c^y 2 mu / sigma^2 is tabulated on a knot
/// ladder that refines geometrically toward each endpoint; between knots the
/// remaining piece is integrated exactly from the nearest knot. The table
/// also carries the ratios (s(e) - s(y)) / s'(y) needed near a boundary with
/// finite scale, computed in the local frame so they stay representable when
/// s' itself under- or overflows. Immutable after construction.
class ScaleProfile {
 public:
  static ScaleProfile build(const CoefficientSet& cs, const Tolerances& tol = {});

  const CoefficientSet& coefficients() const;
  const Tolerances& tolerances() const;

  /// 2 mu / sigma^2 at y.
  double drift_rate(double y) const;
  /// int_c^y 2 mu / sigma^2.
  double drift_integral(double y) const;
  double s_prime(double y) const;
  double s(double y) const;

  const quad::IntegrabilityVerdict& s_at(Endpoint e) const;
  const quad::IntegrabilityVerdict& s_at_ell() const { return s_at(Endpoint::Ell); }
  const quad::IntegrabilityVerdict& s_at_r() const { return s_at(Endpoint::R); }

  /// |s(e) - s(y)| / s'(y); requires s_at(e) to be FINITE.
  double tail_ratio(Endpoint e, double y) const;

  /// int between c and y of w(u) exp(-int_u^y 2mu/sigma^2) du, i.e.
  /// s'(y) * |int_c^y w / s'|, tabulated for one weight w.
  class NestedTable;
  NestedTable nested(const expr::Expression& weight) const;

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
};

class ScaleProfile::NestedTable {
 public:
  double operator()(double y) const;

 private:
  friend class ScaleProfile;
  std::shared_ptr<const Impl> profile_;
  std::shared_ptr<const std::vector<double>> values_;
  expr::Expression weight_;
};

/// v(e) when b_squared is absent, v_X(e) otherwise.
quad::IntegrabilityVerdict test_function_limit(const CoefficientSet& cs, const ScaleProfile& profile,
                                               const std::optional<expr::Expression>& b_squared, Endpoint e);

enum class Explosion { NoExplosionAs, ExplodesWithPositiveProb, Indeterminate };

const char* to_string(Explosion e);

struct ExplosionReport {
  Explosion status = Explosion::Indeterminate;
  Tri ell_attainable = Tri::Indeterminate;
  Tri r_attainable = Tri::Indeterminate;
};

ExplosionReport feller_test(const ScaleProfile& profile, const quad::IntegrabilityVerdict& v_ell,
                            const quad::IntegrabilityVerdict& v_r);

enum class Certainty { Certain, NotCertain, Indeterminate };

const char* to_string(Certainty c);

/// P(zeta^X < infinity) = 1 test for the time-changed diffusion.
Certainty certain_explosion(const ScaleProfile& profile, const quad::IntegrabilityVerdict& vx_ell,
                            const quad::IntegrabilityVerdict& vx_r);

/// FINITE -> True, INFINITE -> False.
Tri is_finite(const quad::IntegrabilityVerdict& v);

}  // namespace zeroone::feller
