#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "zeroone/expr.hpp"
#include "zeroone/quad.hpp"

using namespace zeroone::quad;
using zeroone::expr::parse;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Closed forms computed independently of the quadrature code.
double oracle_exp_m2x_01() { return (1.0 - std::exp(-2.0)) / 2.0; }
}  // namespace

TEST_CASE("integrate: smooth oracles") {
  auto r = integrate([](double x) { return x * x; }, 0.0, 1.0, 1e-10);
  CHECK(std::fabs(r.value - 1.0 / 3.0) <= 1e-10);
  CHECK(r.error <= 1e-10);

  r = integrate([](double x) { return std::exp(-2 * x); }, 0.0, 1.0, 1e-10);
  CHECK(std::fabs(r.value - oracle_exp_m2x_01()) <= 1e-10);
  CHECK(r.value == doctest::Approx(0.43233236).epsilon(1e-8));
}

TEST_CASE("integrate: integrable endpoint singularity") {
  const auto r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-8);
  CHECK(std::fabs(r.value - 2.0) <= 1e-8);
}

TEST_CASE("integrate: evaluation errors propagate with the abscissa") {
  const auto e = parse("1/(x - 0.5)");
  // The GK abscissae of [0,1] include the centre 0.5.
  try {
    (void)integrate([&](double x) { return e(x); }, 0.0, 1.0, 1e-10);
    FAIL("expected evaluation error");
  } catch (const zeroone::expr::EvalError& err) {
    CHECK(err.abscissa() == 0.5);
  }
  CHECK_THROWS_AS(integrate([](double x) { return x; }, 1.0, 0.0, 1e-9), std::invalid_argument);
}

TEST_CASE("integrate: additivity within summed error estimates") {
  const auto g = [](double x) { return std::exp(std::sin(3 * x)) / (1 + x * x); };
  for (double b : {0.3, 1.1, 2.7}) {
    const auto ab = integrate(g, -1.0, b, 1e-11);
    const auto bc = integrate(g, b, 4.0, 1e-11);
    const auto ac = integrate(g, -1.0, 4.0, 1e-11);
    CHECK(std::fabs(ab.value + bc.value - ac.value) <=
          2.0 * (ab.error + bc.error + ac.error) + 1e-15);
  }
}

TEST_CASE("integrate_improper: examples") {
  auto v = integrate_improper([](double y) { return 1.0 / y; }, 0.0, 1.0, {true, false}, 1e-9);
  CHECK(v.status == Status::Infinite);
  REQUIRE(v.divergence_exponent);
  CHECK(*v.divergence_exponent == doctest::Approx(-1.0).epsilon(1e-6));
  REQUIRE(!v.evidence.empty());
  // Oracle: partial sums of 1/y over [eps, 1] equal -log(eps); level k ends at 2^-(k+1).
  for (auto [k, s] : v.evidence) CHECK(s == doctest::Approx((k + 1) * std::log(2.0)).epsilon(1e-9));

  v = integrate_improper([](double y) { return 1.0 / std::sqrt(y); }, 0.0, 1.0, {true, false}, 1e-9);
  CHECK(v.status == Status::Finite);
  CHECK(*v.value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(*v.error_estimate <= 1e-9 * 2.0);

  v = integrate_improper([](double y) { return std::exp(-y); }, 1.0, kInf, {}, 1e-9);
  CHECK(v.status == Status::Finite);
  CHECK(*v.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));

  v = integrate_improper([](double y) { return std::exp(-y * y); }, -kInf, kInf, {}, 1e-9);
  CHECK(v.status == Status::Finite);
  CHECK(*v.value == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-9));

  v = integrate_improper([](double y) { return 1.0 / std::sqrt(y * (1 - y)); }, 0.0, 1.0, {true, true}, 1e-9);
  CHECK(v.status == Status::Finite);
  CHECK(*v.value == doctest::Approx(M_PI).epsilon(1e-8));

  v = integrate_improper([](double y) { return 1.0 / (1 + y); }, 0.0, kInf, {}, 1e-9);
  CHECK(v.status == Status::Infinite);
}

TEST_CASE("integrate_improper: interior evaluation error is a hard error") {
  const auto e = parse("1/(x - 0.75)");
  CHECK_THROWS_AS(integrate_improper([&](double x) { return e(x); }, 0.0, 1.0, {true, false}, 1e-9),
                  zeroone::expr::EvalError);
}

TEST_CASE("classify_endpoint: power laws at 0+") {
  auto power = [](double p) { return [p](double y) { return std::pow(y, p); }; };
  auto v = classify_endpoint(power(-0.5), 0.0, Side::RightOf, 1.0);
  CHECK(v.status == Status::Finite);
  CHECK(*v.value == doctest::Approx(2.0).epsilon(1e-9));

  v = classify_endpoint(power(-1.5), 0.0, Side::RightOf, 1.0);
  CHECK(v.status == Status::Infinite);
  CHECK(*v.divergence_exponent == doctest::Approx(-1.5).epsilon(1e-9));

  v = classify_endpoint(power(-1.0), 0.0, Side::RightOf, 1.0);
  CHECK(v.status == Status::Infinite);
  // Annulus sums of 1/y over [d_{k+1}, d_k] all equal log 2.
  double prev = 0.0;
  for (auto [k, s] : v.evidence) {
    CHECK(s - prev == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    prev = s;
  }
}

TEST_CASE("classify_endpoint: power family matches the analytic rule") {
  const ClassifyOptions opts;
  for (double p : {-2.0, -1.5, -1.1, -1.0, -0.9, -0.5, 0.0, 1.0}) {
    CAPTURE(p);
    const auto v = classify_endpoint([p](double y) { return std::pow(y, p); }, 0.0, Side::RightOf, 1.0, opts);
    if (p > -1.0 + opts.margin) {
      CHECK(v.status == Status::Finite);
      CHECK(*v.value == doctest::Approx(1.0 / (p + 1.0)).epsilon(1e-8));
    } else if (p == -1.0 || p < -1.0 - opts.margin) {
      CHECK(v.status == Status::Infinite);
    } else {
      CHECK(v.status != Status::Finite);
    }
  }
}

TEST_CASE("classify_endpoint: mirrored sides and infinite endpoints") {
  // (1 - y)^-0.5 at 1-
  auto v = classify_endpoint([](double y) { return 1.0 / std::sqrt(1.0 - y); }, 1.0, Side::LeftOf, 1.0);
  CHECK(v.status == Status::Finite);
  // y^-2 at +infinity from 1 integrates to 1.
  ClassifyOptions o;
  o.anchor = 1.0;
  v = classify_endpoint([](double y) { return 1.0 / (y * y); }, kInf, Side::LeftOf, 1.0, o);
  CHECK(v.status == Status::Finite);
  CHECK(*v.value == doctest::Approx(1.0).epsilon(1e-9));
  // 1/y at +infinity: log divergence.
  v = classify_endpoint([](double y) { return 1.0 / y; }, kInf, Side::LeftOf, 1.0, o);
  CHECK(v.status == Status::Infinite);
  // e^{2|y|} at -infinity overflows: divergence.
  o.anchor = 0.0;
  v = classify_endpoint(
      [](double y) {
        const double r = std::exp(-2 * y);
        if (!std::isfinite(r)) throw zeroone::expr::EvalError(zeroone::expr::EvalErrorKind::Overflow, y, "exp");
        return r;
      },
      -kInf, Side::RightOf, 1.0, o);
  CHECK(v.status == Status::Infinite);
  CHECK(!v.evidence.empty());
  CHECK_THROWS_AS(classify_endpoint([](double y) { return y; }, kInf, Side::RightOf, 1.0), std::invalid_argument);
}

TEST_CASE("classify_endpoint: too few probe points") {
  const auto e = parse("log(x - 0.999)");
  CHECK_THROWS_AS(classify_endpoint([&](double y) { return e(y); }, 0.0, Side::RightOf, 1.0),
                  InsufficientData);
}

TEST_CASE("property: verdict status invariant under positive scaling") {
  for (double p : {-1.7, -1.0, -0.6, 0.5}) {
    const auto base = classify_endpoint([p](double y) { return std::pow(y, p); }, 0.0, Side::RightOf, 0.5);
    for (double kappa : {1e-3, 0.37, 7.3, 1e4}) {
      CAPTURE(p);
      CAPTURE(kappa);
      const auto scaled =
          classify_endpoint([p, kappa](double y) { return kappa * std::pow(y, p); }, 0.0, Side::RightOf, 0.5);
      CHECK(scaled.status == base.status);
      if (base.status == Status::Finite) {
        CHECK(*scaled.value == doctest::Approx(kappa * *base.value).epsilon(1e-8));
      }
    }
  }
}
