#include "zeroone/law.hpp"

#include <cmath>
#include <sstream>

namespace zeroone::law {

using quad::IntegrabilityVerdict;
using quad::Status;

const char* to_string(Events e) {
  switch (e) {
    case Events::None: return "NONE";
    case Events::BOnly: return "B_ONLY";
    case Events::COnly: return "C_ONLY";
    case Events::Indeterminate: return "INDETERMINATE";
  }
  return "?";
}

const char* to_string(Probability p) {
  switch (p) {
    case Probability::Zero: return "ZERO";
    case Probability::Positive: return "POSITIVE";
    case Probability::Indeterminate: return "INDETERMINATE";
  }
  return "?";
}

const char* to_string(Functional f) {
  switch (f) {
    case Functional::ConvergesAs: return "CONVERGES_AS";
    case Functional::DivergesAs: return "DIVERGES_AS";
    case Functional::Vacuous: return "VACUOUS";
    case Functional::Indeterminate: return "INDETERMINATE";
  }
  return "?";
}

namespace {

Events side_events(Tri s_finite, const IntegrabilityVerdict& v) {
  if (s_finite == Tri::False) return Events::None;
  if (s_finite == Tri::Indeterminate) return Events::Indeterminate;
  switch (v.status) {
    case Status::Finite: return Events::COnly;
    case Status::Infinite: return Events::BOnly;
    case Status::Indeterminate: return Events::Indeterminate;
  }
  return Events::Indeterminate;
}

}  // namespace

EventStructure event_structure(const feller::ScaleProfile& profile, const IntegrabilityVerdict& v_ell,
                               const IntegrabilityVerdict& v_r) {
  EventStructure es;
  es.s_r_finite = feller::is_finite(profile.s_at_r());
  es.s_ell_finite = feller::is_finite(profile.s_at_ell());
  es.r_events = side_events(es.s_r_finite, v_r);
  es.ell_events = side_events(es.s_ell_finite, v_ell);
  // P(A) = 1 exactly when neither scale limit is finite.
  es.a_certain = tri_and(tri_not(es.s_r_finite), tri_not(es.s_ell_finite));
  return es;
}

void require_positive(const feller::CoefficientSet& cs, const expr::Expression& f, const feller::Tolerances& tol) {
  double prev = 0.0;
  bool have_prev = false, in_underflow = false;
  const auto grid = feller::probe_grid(cs, tol.probe_points);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    double v;
    try {
      v = f(x);
    } catch (const expr::EvalError& err) {
      if (err.kind() == expr::EvalErrorKind::Overflow) continue;  // f = +inf is admissible
      throw PreconditionError("f is undefined at x = " + std::to_string(x) + ": " + err.what(), x);
    }
    if (v == 0.0) {
      // underflow, approached from either side
      in_underflow = in_underflow || (have_prev && prev > 0.0 && prev < 1e-100) ||
                     feller::zeros_precede_underflow(f, grid, i);
      if (in_underflow) continue;
    } else {
      in_underflow = false;
    }
    if (!(v > 0.0)) {
      std::ostringstream os;
      os.precision(17);
      os << "f must be strictly positive on J; f(" << x << ") = " << v;
      throw PreconditionError(os.str(), x);
    }
    prev = v;
    have_prev = true;
  }
}

ZeroOneVerdict classify_functional(const feller::CoefficientSet& cs, const feller::ScaleProfile& profile,
                                   const EventStructure& events, const expr::Expression& f, Endpoint boundary) {
  ZeroOneVerdict out;
  out.boundary = boundary;
  const Events ev = events.at(boundary);
  if (ev == Events::Indeterminate) return out;
  if (ev == Events::None) {
    out.event_probability = Probability::Zero;
    out.functional = Functional::Vacuous;
    return out;
  }
  out.event_probability = Probability::Positive;

  const auto& tol = profile.tolerances();
  auto g = [&](double y) {
    const double sg = cs.sigma(y);
    const double v = profile.tail_ratio(boundary, y) * f(y) / (sg * sg);
    if (!std::isfinite(v)) throw expr::EvalError(expr::EvalErrorKind::Overflow, y, "criterion integrand");
    return v;
  };
  const double e = cs.endpoint(boundary);
  const double a = boundary == Endpoint::Ell ? e : cs.c;
  const double b = boundary == Endpoint::Ell ? cs.c : e;
  IntegrabilityVerdict v;
  try {
    v = quad::integrate_improper(g, a, b, {boundary == Endpoint::Ell, boundary == Endpoint::R}, tol.tol,
                                 tol.classify);
  } catch (const quad::InsufficientData&) {
    v.status = Status::Indeterminate;
  } catch (const quad::QuadratureFailure&) {
    v.status = Status::Indeterminate;
  }
  out.criterion = v;
  switch (v.status) {
    case Status::Finite: out.functional = Functional::ConvergesAs; break;
    case Status::Infinite: out.functional = Functional::DivergesAs; break;
    case Status::Indeterminate: out.functional = Functional::Indeterminate; break;
  }
  return out;
}

ZeroOneVerdict classify_functional(const feller::CoefficientSet& cs, const expr::Expression& f, Endpoint boundary,
                                   const feller::Tolerances& tol) {
  require_positive(cs, f, tol);
  const auto profile = feller::ScaleProfile::build(cs, tol);
  const auto v_ell = feller::test_function_limit(cs, profile, std::nullopt, Endpoint::Ell);
  const auto v_r = feller::test_function_limit(cs, profile, std::nullopt, Endpoint::R);
  return classify_functional(cs, profile, event_structure(profile, v_ell, v_r), f, boundary);
}

bool BoundaryReport::any_indeterminate() const {
  return ell.functional == Functional::Indeterminate || r.functional == Functional::Indeterminate;
}

BoundaryReport full_report(const feller::CoefficientSet& cs, const expr::Expression& f,
                           const feller::Tolerances& tol) {
  require_positive(cs, f, tol);
  BoundaryReport rep;
  rep.validation = feller::validate_conditions(cs, expr::sqrt(f), tol);
  const auto profile = feller::ScaleProfile::build(cs, tol);
  rep.s_ell = profile.s_at_ell();
  rep.s_r = profile.s_at_r();
  rep.v_ell = feller::test_function_limit(cs, profile, std::nullopt, Endpoint::Ell);
  rep.v_r = feller::test_function_limit(cs, profile, std::nullopt, Endpoint::R);
  rep.vx_ell = feller::test_function_limit(cs, profile, f, Endpoint::Ell);
  rep.vx_r = feller::test_function_limit(cs, profile, f, Endpoint::R);
  rep.explosion_y = feller::feller_test(profile, rep.v_ell, rep.v_r);
  rep.explosion_x = feller::feller_test(profile, rep.vx_ell, rep.vx_r);
  rep.certain_explosion_x = feller::certain_explosion(profile, rep.vx_ell, rep.vx_r);
  rep.events = event_structure(profile, rep.v_ell, rep.v_r);
  rep.ell = classify_functional(cs, profile, rep.events, f, Endpoint::Ell);
  rep.r = classify_functional(cs, profile, rep.events, f, Endpoint::R);

  // The functional equals the explosion time of X, so "finite a.s." read off
  // the zero-one verdicts must agree with the certain-explosion test for X.
  auto converges_or_vacuous = [](const ZeroOneVerdict& v) {
    switch (v.functional) {
      case Functional::ConvergesAs:
      case Functional::Vacuous: return Tri::True;
      case Functional::DivergesAs: return Tri::False;
      case Functional::Indeterminate: return Tri::Indeterminate;
    }
    return Tri::Indeterminate;
  };
  rep.predicted_certain_finite =
      tri_and(tri_not(rep.events.a_certain), tri_and(converges_or_vacuous(rep.ell), converges_or_vacuous(rep.r)));
  Tri tested = Tri::Indeterminate;
  if (rep.certain_explosion_x == feller::Certainty::Certain) tested = Tri::True;
  if (rep.certain_explosion_x == feller::Certainty::NotCertain) tested = Tri::False;
  if (rep.predicted_certain_finite == Tri::Indeterminate || tested == Tri::Indeterminate) {
    rep.consistent = Tri::Indeterminate;
    rep.consistency_note = "undecided: an input verdict is INDETERMINATE";
  } else if (rep.predicted_certain_finite == tested) {
    rep.consistent = Tri::True;
    rep.consistency_note = "zero-one verdicts agree with the certain-explosion test";
  } else {
    rep.consistent = Tri::False;
    rep.consistency_note = std::string("INTERNAL ERROR: verdicts predict P(functional finite) = 1 is ") +
                           to_string(rep.predicted_certain_finite) + " but the certain-explosion test says " +
                           feller::to_string(rep.certain_explosion_x);
  }
  return rep;
}

}  // namespace zeroone::law
