#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "zeroone/feller.hpp"

using namespace zeroone;
using namespace zeroone::feller;
using expr::parse;
using quad::Status;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

CoefficientSet make(const char* mu, const char* sigma, double ell, double r, double x0,
                    std::optional<double> c = std::nullopt) {
  return CoefficientSet::make(parse(mu), parse(sigma), ell, r, x0, c);
}

quad::IntegrabilityVerdict v_of(const CoefficientSet& cs, const ScaleProfile& p, Endpoint e,
                                std::optional<expr::Expression> b2 = std::nullopt) {
  return test_function_limit(cs, p, b2, e);
}
}  // namespace

TEST_CASE("scale: Brownian motion") {
  const auto cs = make("0", "1", -kInf, kInf, 0.0);
  const auto p = ScaleProfile::build(cs);
  for (double x : {-1e6, -3.5, 0.0, 0.25, 7.0, 1e5}) CHECK(p.s(x) == doctest::Approx(x).epsilon(1e-12));
  CHECK(p.s_at_ell().status == Status::Infinite);
  CHECK(p.s_at_r().status == Status::Infinite);
  CHECK(v_of(cs, p, Endpoint::R).status == Status::Infinite);
  CHECK(v_of(cs, p, Endpoint::Ell).status == Status::Infinite);
}

TEST_CASE("scale: drifted Brownian motion") {
  const auto cs = make("1", "1", -kInf, kInf, 0.0);
  const auto p = ScaleProfile::build(cs);
  // Oracle s(x) = (1 - e^{-2x}) / 2.
  for (double x : {-3.0, -0.5, 0.0, 0.7, 2.0, 10.0}) {
    CAPTURE(x);
    CHECK(p.s(x) == doctest::Approx(-0.5 * std::expm1(-2.0 * x)).epsilon(1e-11));
  }
  REQUIRE(p.s_at_r().status == Status::Finite);
  CHECK(*p.s_at_r().value == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(p.s_at_ell().status == Status::Infinite);
  // (s(r) - s(y)) / s'(y) = 1/2 everywhere, including where s' underflows.
  for (double y : {0.0, 3.0, 40.0, 500.0}) CHECK(p.tail_ratio(Endpoint::R, y) == doctest::Approx(0.5).epsilon(1e-9));

  CHECK(v_of(cs, p, Endpoint::R).status == Status::Infinite);
  const auto vx = v_of(cs, p, Endpoint::R, parse("exp(-x)"));
  REQUIRE(vx.status == Status::Finite);
  CHECK(*vx.value == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(v_of(cs, p, Endpoint::Ell).status == Status::Infinite);
}

TEST_CASE("scale: Bessel process of dimension 3") {
  const auto cs = make("1/x", "1", 0.0, kInf, 1.0, 1.0);
  const auto p = ScaleProfile::build(cs);
  // Oracle s(x) = 1 - 1/x.
  for (double x : {1e-3, 0.1, 0.5, 1.0, 4.0, 1e4}) {
    CAPTURE(x);
    CHECK(p.s(x) == doctest::Approx(1.0 - 1.0 / x).epsilon(1e-11));
  }
  CHECK(p.s_at_ell().status == Status::Infinite);
  REQUIRE(p.s_at_r().status == Status::Finite);
  CHECK(*p.s_at_r().value == doctest::Approx(1.0).epsilon(1e-9));
  for (double y : {0.5, 2.0, 1e3}) CHECK(p.tail_ratio(Endpoint::R, y) == doctest::Approx(y).epsilon(1e-9));

  const auto vl = v_of(cs, p, Endpoint::Ell);
  const auto vr = v_of(cs, p, Endpoint::R);
  CHECK(vl.status == Status::Infinite);
  CHECK(vr.status == Status::Infinite);
  CHECK(feller_test(p, vl, vr).status == Explosion::NoExplosionAs);
}

TEST_CASE("feller: CIR attainability of zero flips at sigma^2 = 2") {
  for (double s2 : {1.5, 1.9, 2.1, 2.5}) {
    CAPTURE(s2);
    const std::string sigma = "sqrt(" + std::to_string(s2) + "*x)";
    const auto cs = make("1 - x", sigma.c_str(), 0.0, kInf, 1.0);
    const auto p = ScaleProfile::build(cs);
    const auto vl = v_of(cs, p, Endpoint::Ell);
    const auto vr = v_of(cs, p, Endpoint::R);
    CHECK(vr.status == Status::Infinite);
    const auto rep = feller_test(p, vl, vr);
    if (s2 > 2.0) {
      CHECK(vl.status == Status::Finite);
      CHECK(rep.status == Explosion::ExplodesWithPositiveProb);
      CHECK(rep.ell_attainable == Tri::True);
    } else {
      CHECK(vl.status == Status::Infinite);
      CHECK(rep.status == Explosion::NoExplosionAs);
      CHECK(rep.ell_attainable == Tri::False);
    }
  }
}

TEST_CASE("feller_test and certain_explosion: tri-state combination") {
  quad::IntegrabilityVerdict fin{Status::Finite, 1.0, 0.0, std::nullopt, {}};
  quad::IntegrabilityVerdict inf{Status::Infinite, std::nullopt, std::nullopt, -1.0, {}};
  quad::IntegrabilityVerdict ind{Status::Indeterminate, std::nullopt, std::nullopt, std::nullopt, {}};
  const auto cs = make("1", "1", -kInf, kInf, 0.0);
  const auto p = ScaleProfile::build(cs);  // s(ell) infinite, s(r) finite
  CHECK(feller_test(p, inf, inf).status == Explosion::NoExplosionAs);
  CHECK(feller_test(p, inf, fin).status == Explosion::ExplodesWithPositiveProb);
  CHECK(feller_test(p, ind, fin).status == Explosion::Indeterminate);
  CHECK(certain_explosion(p, fin, fin) == Certainty::Certain);
  CHECK(certain_explosion(p, inf, fin) == Certainty::Certain);     // r reachable, s(ell) infinite
  CHECK(certain_explosion(p, fin, inf) == Certainty::NotCertain);  // s(r) finite
  CHECK(certain_explosion(p, inf, inf) == Certainty::NotCertain);
  CHECK(certain_explosion(p, ind, fin) == Certainty::Indeterminate);

  const auto vx_l = v_of(cs, p, Endpoint::Ell, parse("exp(-x)"));
  const auto vx_r = v_of(cs, p, Endpoint::R, parse("exp(-x)"));
  CHECK(vx_l.status == Status::Infinite);
  CHECK(certain_explosion(p, vx_l, vx_r) == Certainty::Certain);
}

TEST_CASE("validate_conditions") {
  auto rep = validate_conditions(make("0", "x", -1.0, 1.0, 0.5), std::nullopt);
  REQUIRE(!rep.entries.empty());
  CHECK(rep.entries[0].name == "sigma_nonzero");
  CHECK(rep.entries[0].status == Check::Fail);
  REQUIRE(rep.entries[0].location);
  CHECK(std::fabs(*rep.entries[0].location) < 1e-10);
  CHECK(rep.any_fail());

  rep = validate_conditions(make("1/x", "1", 0.0, kInf, 1.0), std::nullopt);
  for (const auto& e : rep.entries) {
    CAPTURE(e.name);
    CAPTURE(e.detail);
    CHECK(e.status == Check::Pass);
  }
  CHECK(rep.all_pass());

  rep = validate_conditions(make("0", "1", -kInf, kInf, 0.0), parse("exp(-x)"));
  CHECK(rep.entries.size() == 5);
  for (const auto& e : rep.entries) CHECK_MESSAGE(e.status == Check::Pass, e.name, ": ", e.detail);
  rep = validate_conditions(make("-x", "1", -kInf, kInf, 0.0), parse("exp(-x^2/2)"));
  CHECK(rep.entries[3].name == "b_nonzero");
  CHECK(rep.entries[3].status == Check::Pass);
  rep = validate_conditions(make("0", "1", -kInf, kInf, 0.0), parse("x"));
  CHECK(rep.any_fail());
}

TEST_CASE("property: scale normalisation, positivity and monotonicity") {
  std::mt19937_64 rng(7);
  const char* drifts[] = {"0", "1", "-0.5", "exp(-x^2)*sin(x)", "0.3*x/(1+x^2)", "-x/(1+abs(x))"};
  const char* diffusions[] = {"1", "2", "sqrt(1+x^2)", "1+0.5*cos(x)"};
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int trial = 0; trial < 12; ++trial) {
    const std::string mu = drifts[rng() % 6];
    const std::string sigma = diffusions[rng() % 4];
    const double c = u(rng);
    CAPTURE(mu);
    CAPTURE(sigma);
    CAPTURE(c);
    const auto cs = make(mu.c_str(), sigma.c_str(), -kInf, kInf, c, c);
    const auto p = ScaleProfile::build(cs);
    CHECK(std::fabs(p.s(c)) <= 1e-14);
    CHECK(std::fabs(p.s_prime(c) - 1.0) <= 1e-14);
    double prev = -kInf;
    for (double x = c - 6.0; x <= c + 6.0; x += 0.37) {
      CHECK(p.s_prime(x) > 0.0);
      const double sx = p.s(x);
      CHECK(sx > prev);
      prev = sx;
    }
  }
}

TEST_CASE("property: v equals v_X when b^2 is identically one") {
  for (const char* mu : {"0", "1", "-1", "1/x"}) {
    CAPTURE(mu);
    const bool half = std::string(mu) == "1/x";
    const auto cs = make(mu, "1", half ? 0.0 : -kInf, kInf, 1.0);
    const auto p = ScaleProfile::build(cs);
    for (Endpoint e : {Endpoint::Ell, Endpoint::R}) {
      const auto v = v_of(cs, p, e);
      const auto vx = v_of(cs, p, e, parse("1"));
      CHECK(v.status == vx.status);
      if (v.status == Status::Finite) CHECK(*v.value == doctest::Approx(*vx.value).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: verdicts do not depend on the reference point") {
  for (double c : {0.2, 1.0, 3.0}) {
    CAPTURE(c);
    const auto cs = make("1 - x", "sqrt(2.5*x)", 0.0, kInf, 1.0, c);
    const auto p = ScaleProfile::build(cs);
    CHECK(v_of(cs, p, Endpoint::Ell).status == Status::Finite);
    CHECK(v_of(cs, p, Endpoint::R).status == Status::Infinite);
    CHECK(p.s_at_ell().status == Status::Finite);
    CHECK(p.s_at_r().status == Status::Infinite);
  }
}
