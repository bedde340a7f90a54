#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "projfinsler/hamel.hpp"
#include "projfinsler/metric_dsl.hpp"

#include <cmath>

using namespace projfinsler;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

double eval(const std::string& src, const Vec& x, const Vec& v) { return parse(src, 2).evaluate({x, v, {}, 0.0}); }

}  // namespace

TEST_CASE("parse and evaluate") {
  const MetricExpr e = parse("sqrt(v1^2 + 2*v2^2) + 0.1*pi*cos(2*pi*x1)*v1", 2);
  CHECK(e.evaluate({v2(0, 0), v2(1, 0), {}, 0.0}) == doctest::Approx(1 + 0.1 * kPi).epsilon(1e-15));
  CHECK(eval("norm2(v)", v2(0, 0), v2(3, 4)) == 5.0);
  CHECK(parse("norm2(u) * p", 3).evaluate({{}, {}, (Vec(3) << 1, 2, 2).finished(), 0.5}) == 1.5);
  CHECK(eval("e", v2(0, 0), v2(0, 0)) == doctest::Approx(std::exp(1.0)));
  CHECK(eval("abs(-2) + exp(0) + sin(0)", v2(0, 0), v2(0, 0)) == 3.0);
}

TEST_CASE("precedence and associativity") {
  const Vec z = v2(0, 0);
  CHECK(eval("-2^2", z, z) == -4.0);
  CHECK(eval("2^3^2", z, z) == 512.0);
  CHECK(eval("2^-1", z, z) == 0.5);
  CHECK(eval("1 - 2 - 3", z, z) == -4.0);
  CHECK(eval("8 / 4 / 2", z, z) == 1.0);
  CHECK(eval("1 + 2 * 3", z, z) == 7.0);
  CHECK(eval("(1 + 2) * 3", z, z) == 9.0);
  CHECK(eval("1.5e2 + 2E-1", z, z) == doctest::Approx(150.2));
  CHECK(eval("--3", z, z) == 3.0);
}

TEST_CASE("errors carry positions") {
  CHECK_THROWS_AS(parse("v3", 2), ParseError);
  try {
    parse("v1 +\n  v3", 2);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 3);
  }
  CHECK_THROWS_AS(parse("sin(v1", 2), ParseError);
  CHECK_THROWS_AS(parse("foo(v1)", 2), ParseError);
  CHECK_THROWS_AS(parse("v1 v2", 2), ParseError);
  CHECK_THROWS_AS(parse("norm2(x)", 2), ParseError);
  CHECK_THROWS_AS(parse("", 2), ParseError);
  CHECK_THROWS_AS(parse("x0", 2), ParseError);
  CHECK_THROWS_AS(parse("v1 # 2", 2), ParseError);
}

TEST_CASE("printing round trip") {
  for (const char* src : {"sqrt(v1^2 + 2*v2^2) + 0.1*pi*cos(2*pi*x1)*v1", "-2^2", "2^3^2", "abs(v1) + 0.5*sin(2*pi*x2)*v2",
                          "norm2(v) / (1 + x1*x1)", "1 - (2 - 3)", "0.1 + 1e-300*v1"}) {
    CAPTURE(src);
    const MetricExpr e = parse(src, 2);
    const MetricExpr again = parse(e.print(), 2);
    CHECK(e == again);
    CHECK(again.print() == e.print());
  }
}

TEST_CASE("homogeneity gate") {
  CHECK(check_homogeneity(parse("norm2(v)", 2), 100, 1e-12).pass());
  CHECK_FALSE(check_homogeneity(parse("v1^2", 2), 100, 1e-12).pass());
  CHECK(check_homogeneity(parse("abs(v1) + 0.5*sin(2*pi*x2)*v2", 2), 100, 1e-12).pass());
  CHECK_THROWS_AS(as_one_density(parse("v1^2 + 1", 2)), PreconditionError);
  CHECK_THROWS_AS(as_one_density(parse("norm2(v) + p", 2)), PreconditionError);
}

TEST_CASE("conversion to densities") {
  const OneDensity L = as_one_density(parse("abs(v1) + abs(v2)", 2));
  CHECK(L.smoothness() == Smoothness::C0);
  CHECK(L.translation_invariant());
  CHECK(as_one_density(parse("abs(v1) + abs(v2)", 2), {}, true).smoothness() == Smoothness::C2);

  const OneDensity R = as_one_density(parse("sqrt(v1^2 + 2*v2^2) + 0.1*pi*cos(2*pi*x1)*v1", 2));
  CHECK_FALSE(R.translation_invariant());
  CHECK(projectivity_report(R, make_residual_grid(R, 6, 8), 1e-5).pass());

  const auto m = as_measure_density(parse("0.5 + 0.1*u1*p", 2));
  CHECK(m(v2(1, 0), 2.0) == doctest::Approx(0.7));
  const auto f = as_scalar_field(parse("x1*x2", 2));
  CHECK(f(v2(3, 4)) == 12.0);
  CHECK_THROWS_AS(as_scalar_field(parse("x1*v2", 2)), PreconditionError);
}
