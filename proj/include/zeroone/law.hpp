#pragma once

// Zero-one law for the integral functional int_0^zeta f(Y_u) du on each
// boundary-limit event, and the event structure it rests on.

#include <optional>
#include <stdexcept>
#include <string>

#include "zeroone/expr.hpp"
#include "zeroone/feller.hpp"
#include "zeroone/quad.hpp"
#include "zeroone/tri.hpp"

namespace zeroone::law {

using feller::Endpoint;

/// Which limit events have positive probability at one boundary.
/// None: lim Y = e is a null event. BOnly: Y tends to e without reaching it.
/// COnly: Y reaches e in finite time.
enum class Events { None, BOnly, COnly, Indeterminate };

const char* to_string(Events e);

struct EventStructure {
  Tri s_r_finite = Tri::Indeterminate;
  Tri s_ell_finite = Tri::Indeterminate;
  Tri a_certain = Tri::Indeterminate;  // P(no limit in [ell, r]) = 1
  Events r_events = Events::Indeterminate;
  Events ell_events = Events::Indeterminate;

  Events at(Endpoint e) const { return e == Endpoint::Ell ? ell_events : r_events; }
};

/// v_ell, v_r are the plain test functions (b = 1).
EventStructure event_structure(const feller::ScaleProfile& profile, const quad::IntegrabilityVerdict& v_ell,
                               const quad::IntegrabilityVerdict& v_r);

enum class Probability { Zero, Positive, Indeterminate };
enum class Functional { ConvergesAs, DivergesAs, Vacuous, Indeterminate };

const char* to_string(Probability p);
const char* to_string(Functional f);

struct ZeroOneVerdict {
  Endpoint boundary = Endpoint::R;
  Probability event_probability = Probability::Indeterminate;
  Functional functional = Functional::Indeterminate;
  /// Absent when the event is null (nothing to classify).
  std::optional<quad::IntegrabilityVerdict> criterion;
};

/// f is not strictly positive somewhere on the probe grid.
class PreconditionError : public std::invalid_argument {
 public:
  PreconditionError(const std::string& what, std::optional<double> location)
      : std::invalid_argument(what), location_(location) {}
  std::optional<double> location() const { return location_; }

 private:
  std::optional<double> location_;
};

/// Throws PreconditionError naming the first probe point where f <= 0.
void require_positive(const feller::CoefficientSet& cs, const expr::Expression& f, const feller::Tolerances& tol);

/// Local integrability of (s(e) - s) f / (s' sigma^2) at e, given the event
/// structure. Does not re-check positivity of f.
ZeroOneVerdict classify_functional(const feller::CoefficientSet& cs, const feller::ScaleProfile& profile,
                                   const EventStructure& events, const expr::Expression& f, Endpoint boundary);

/// Self-contained form: builds the profile and event structure.
ZeroOneVerdict classify_functional(const feller::CoefficientSet& cs, const expr::Expression& f, Endpoint boundary,
                                   const feller::Tolerances& tol = {});

struct BoundaryReport {
  feller::ValidationReport validation;  // with b = sqrt(f)
  quad::IntegrabilityVerdict s_ell, s_r;
  quad::IntegrabilityVerdict v_ell, v_r;    // Y
  quad::IntegrabilityVerdict vx_ell, vx_r;  // X, b^2 = f
  feller::ExplosionReport explosion_y;
  feller::ExplosionReport explosion_x;
  feller::Certainty certain_explosion_x = feller::Certainty::Indeterminate;
  EventStructure events;
  ZeroOneVerdict ell;
  ZeroOneVerdict r;
  /// P(int_0^zeta f(Y) du < infinity) = 1 as read off the verdicts.
  Tri predicted_certain_finite = Tri::Indeterminate;
  /// False flags an internal contradiction with the certain-explosion test.
  Tri consistent = Tri::Indeterminate;
  std::string consistency_note;

  const ZeroOneVerdict& at(Endpoint e) const { return e == Endpoint::Ell ? ell : r; }
  bool any_indeterminate() const;
};

BoundaryReport full_report(const feller::CoefficientSet& cs, const expr::Expression& f,
                           const feller::Tolerances& tol = {});

}  // namespace zeroone::law
