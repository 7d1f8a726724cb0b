#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>

#include "zeroone/law.hpp"

using namespace zeroone;
using namespace zeroone::law;
using expr::parse;
using feller::CoefficientSet;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

CoefficientSet make(const char* mu, const char* sigma, double ell, double r, double x0,
                    std::optional<double> c = std::nullopt) {
  return CoefficientSet::make(parse(mu), parse(sigma), ell, r, x0, c);
}
}  // namespace

TEST_CASE("event structure examples") {
  {
    const auto rep = full_report(make("0", "1", -kInf, kInf, 0.0), parse("1"));
    CHECK(rep.events.r_events == Events::None);
    CHECK(rep.events.ell_events == Events::None);
    CHECK(rep.events.a_certain == Tri::True);
    CHECK(rep.r.functional == Functional::Vacuous);
    CHECK(rep.ell.functional == Functional::Vacuous);
    CHECK(!rep.r.criterion);
    CHECK(rep.consistent == Tri::True);
  }
  {
    const auto rep = full_report(make("1", "1", -kInf, kInf, 0.0), parse("exp(-x)"));
    CHECK(rep.events.r_events == Events::BOnly);
    CHECK(rep.events.ell_events == Events::None);
    CHECK(rep.events.a_certain == Tri::False);
    CHECK(rep.r.event_probability == Probability::Positive);
    CHECK(rep.r.functional == Functional::ConvergesAs);
    CHECK(rep.ell.functional == Functional::Vacuous);
    CHECK(rep.certain_explosion_x == feller::Certainty::Certain);
    CHECK(rep.consistent == Tri::True);
  }
  {
    const auto rep = full_report(make("0", "1", 0.0, kInf, 1.0), parse("1"));
    CHECK(rep.events.ell_events == Events::COnly);
    CHECK(rep.events.r_events == Events::None);
    CHECK(rep.ell.functional == Functional::ConvergesAs);
    CHECK(rep.consistent == Tri::True);
  }
}

TEST_CASE("classify_functional: exact integrands") {
  const auto dbm = make("1", "1", -kInf, kInf, 0.0);
  auto v = classify_functional(dbm, parse("exp(-x)"), Endpoint::R);
  CHECK(v.functional == Functional::ConvergesAs);
  REQUIRE(v.criterion);
  // Criterion integrand e^{-y}/2 integrated over (0, inf).
  CHECK(*v.criterion->value == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(classify_functional(dbm, parse("1"), Endpoint::R).functional == Functional::DivergesAs);

  const auto half = make("0", "1", 0.0, kInf, 1.0);
  CHECK(classify_functional(half, parse("1/x^2"), Endpoint::Ell).functional == Functional::DivergesAs);
  for (double p : {-3.0, -2.5, -1.9, -1.0, 0.0}) {
    CAPTURE(p);
    const std::string f = "x^(" + std::to_string(p) + ")";
    const auto w = classify_functional(half, parse(f), Endpoint::Ell);
    CHECK(w.functional == (p > -2.0 ? Functional::ConvergesAs : Functional::DivergesAs));
  }
}

TEST_CASE("classify_functional: f must be positive") {
  const auto bm = make("0", "1", -kInf, kInf, 0.0);
  try {
    (void)classify_functional(bm, parse("x^2"), Endpoint::R);
    FAIL("expected precondition error");
  } catch (const PreconditionError& e) {
    REQUIRE(e.location());
    CHECK(*e.location() == 0.0);
  }
  CHECK_THROWS_AS((void)full_report(bm, parse("-1")), PreconditionError);
  // Underflow of a decaying f is not a zero.
  CHECK_NOTHROW((void)classify_functional(make("1", "1", -kInf, kInf, 0.0), parse("exp(-x)"), Endpoint::R));
  // Also when the underflowed zeros come first on the probe grid.
  CHECK_NOTHROW((void)classify_functional(make("-x", "1", -kInf, kInf, 0.0), parse("exp(-x^2)"), Endpoint::R));
  CHECK_THROWS_AS((void)classify_functional(bm, parse("0*x"), Endpoint::R), PreconditionError);
}

TEST_CASE("CIR: the zero boundary becomes reachable when 2 kappa theta < sigma^2") {
  const auto cs = make("1 - x", "sqrt(2.5*x)", 0.0, kInf, 1.0);
  const auto rep = full_report(cs, parse("1/x"));
  CHECK(rep.events.ell_events == Events::COnly);
  CHECK(rep.ell.event_probability == Probability::Positive);
  CHECK(rep.ell.functional != Functional::Vacuous);
  CHECK(rep.consistent != Tri::False);
}

TEST_CASE("properties: dichotomy, scaling and reference-point invariance") {
  struct Case {
    const char* mu;
    const char* sigma;
    double ell, r, x0, c_alt;
    const char* fs[3];
  };
  const Case cases[] = {
      {"0", "1", -kInf, kInf, 0.0, 2.0, {"1", "exp(-x)", "1/(1+x^2)"}},
      {"1", "1", -kInf, kInf, 0.0, -1.5, {"1", "exp(-x)", "1/(1+x^2)"}},
      {"1/x", "1", 0.0, kInf, 1.0, 3.0, {"1", "1/x", "x^2"}},
      {"0", "1", 0.0, kInf, 1.0, 0.25, {"1", "1/x^2", "x"}},
      {"1 - x", "sqrt(2.5*x)", 0.0, kInf, 1.0, 2.0, {"1", "1/x", "x"}},
  };
  for (const auto& k : cases) {
    for (const char* f : k.fs) {
      CAPTURE(k.mu);
      CAPTURE(k.sigma);
      CAPTURE(f);
      const auto cs = make(k.mu, k.sigma, k.ell, k.r, k.x0);
      const auto rep = full_report(cs, parse(f));
      for (Endpoint e : {Endpoint::Ell, Endpoint::R}) {
        const Tri fin = e == Endpoint::R ? rep.events.s_r_finite : rep.events.s_ell_finite;
        const Events ev = rep.events.at(e);
        if (fin == Tri::True) CHECK((ev == Events::BOnly || ev == Events::COnly));
        if (fin == Tri::False) CHECK(ev == Events::None);
      }
      CHECK(rep.consistent == Tri::True);
      const auto scaled = full_report(cs, parse(("7.3*(" + std::string(f) + ")").c_str()));
      CHECK(scaled.ell.functional == rep.ell.functional);
      CHECK(scaled.r.functional == rep.r.functional);
      const auto moved = full_report(make(k.mu, k.sigma, k.ell, k.r, k.x0, k.c_alt), parse(f));
      CHECK(moved.ell.functional == rep.ell.functional);
      CHECK(moved.r.functional == rep.r.functional);
      CHECK(moved.events.r_events == rep.events.r_events);
      CHECK(moved.events.ell_events == rep.events.ell_events);
    }
  }
}
