#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "zeroone/expr.hpp"

using zeroone::expr::EvalError;
using zeroone::expr::EvalErrorKind;
using zeroone::expr::Expression;
using zeroone::expr::ParseError;
using zeroone::expr::parse;

TEST_CASE("identity and constants") {
  const Expression e = parse("x");
  CHECK(e(3.25) == 3.25);
  CHECK(e(-1e-300) == -1e-300);
  CHECK(parse("exp(-2*x)")(0.0) == 1.0);
  CHECK(parse("x^2")(3.0) == 9.0);
}

TEST_CASE("scalar oracle for exp(-2x) at 0.5") {
  CHECK(parse("exp(-2*x)")(0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(parse("exp(-2*x)")(0.5) == doctest::Approx(0.36787944).epsilon(1e-8));
}

TEST_CASE("precedence and associativity") {
  CHECK(parse("-x^2")(3.0) == -9.0);
  CHECK(parse("2^3^2")(0.0) == 512.0);
  CHECK(parse("x^-2")(2.0) == 0.25);
  CHECK(parse("1 - 2 - 3")(0.0) == -4.0);
  CHECK(parse("8 / 4 / 2")(0.0) == 1.0);
  CHECK(parse("2*-x")(3.0) == -6.0);
  CHECK(parse("1.5e2 + .5 + 2E-1")(0.0) == doctest::Approx(150.7));
  CHECK(parse("pow(x, 3)")(2.0) == 8.0);
  CHECK(parse("abs(sin(x)) + cos(0)")(0.0) == 1.0);
}

TEST_CASE("syntax errors carry positions") {
  try {
    parse("1/(x^2");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 6);
  }
  try {
    parse("2 * y");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
    CHECK(std::string(e.what()).find("unknown identifier") != std::string::npos);
  }
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("   "), ParseError);
  CHECK_THROWS_AS(parse("1 +"), ParseError);
  CHECK_THROWS_AS(parse("(1))"), ParseError);
  CHECK_THROWS_AS(parse("1e"), ParseError);
  CHECK_THROWS_AS(parse("exp 1"), ParseError);
  CHECK_THROWS_AS(parse("pow(1)"), ParseError);
}

TEST_CASE("evaluation errors are signalled, never silent") {
  auto kind_of = [](const char* src, double x) {
    try {
      (void)parse(src)(x);
    } catch (const EvalError& e) {
      CHECK(e.abscissa() == x);
      return e.kind();
    }
    FAIL("expected evaluation error for " << src);
    return EvalErrorKind::Domain;
  };
  CHECK(kind_of("log(x)", 0.0) == EvalErrorKind::Domain);
  CHECK(kind_of("log(x)", -1.0) == EvalErrorKind::Domain);
  CHECK(kind_of("sqrt(x)", -1e-9) == EvalErrorKind::Domain);
  CHECK(kind_of("1/x", 0.0) == EvalErrorKind::DivisionByZero);
  CHECK(kind_of("x^-1", 0.0) == EvalErrorKind::DivisionByZero);
  CHECK(kind_of("x^0.5", -2.0) == EvalErrorKind::Domain);
  CHECK(kind_of("exp(x)", 1000.0) == EvalErrorKind::Overflow);
  CHECK(kind_of("x*x", 1e200) == EvalErrorKind::Overflow);
  CHECK(parse("x^2")(-2.0) == 4.0);
}

TEST_CASE("symbolic composition") {
  const Expression mu = parse("1");
  const Expression b2 = parse("exp(-x)");
  const Expression drift = mu / b2;
  const Expression diff = parse("1") / zeroone::expr::sqrt(b2);
  CHECK(drift(2.0) == doctest::Approx(std::exp(2.0)).epsilon(1e-15));
  CHECK(diff(2.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
}

TEST_CASE("property: print then re-parse evaluates identically") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  const char* sources[] = {
      "x",
      "exp(-2*x)",
      "-x^2 + 3*x - 1/(1 + x^2)",
      "sqrt(abs(x)) * cos(x) - sin(2*x)^3",
      "pow(abs(x) + 1, -1.5) / (2 - -x)",
      "1e-3*x^3 - 2.5E+1",
      "(x - 1)*(x + 2)/(x^2 + 0.1)",
      "exp(sin(x)) - log(1 + x^2)",
  };
  for (const char* src : sources) {
    const Expression e = parse(src);
    const Expression again = parse(e.to_string());
    CHECK(again.to_string() == e.to_string());
    for (int i = 0; i < 100; ++i) {
      const double x = u(rng);
      const double a = e(x), b = again(x);
      CHECK(std::fabs(a - b) <= 1e-14 * std::max(1.0, std::fabs(a)));
    }
  }
}

TEST_CASE("property: a+b*c composes as a + (b*c)") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1.0, 3.0);
  char buf[256];
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng);
    std::snprintf(buf, sizeof buf, "%.17g+%.17g*%.17g", a, b, c);
    CHECK(parse(buf)(0.0) == a + (b * c));
  }
}

TEST_CASE("determinism") {
  const Expression e = parse("exp(sin(x))*log(2+x^2)");
  for (double x : {-3.0, 0.1, 7.5}) CHECK(e(x) == e(x));
}
