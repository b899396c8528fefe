#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "alab/error.hpp"
#include "alab/expr.hpp"

using alab::Expr;
using alab::parse_expression;

namespace {

Expr P(const char* s, int dim = 3) { return parse_expression(s, dim); }

}  // namespace

TEST_CASE("normal form merges like terms") {
  CHECK(P("x1*x2 + x2*x1") == P("2*x2*x1"));
  CHECK((P("x1 + 1") * P("x1 - 1")) == P("x1^2 - 1"));
  CHECK(P("x1 - x1").is_zero());
  CHECK(P("(x1+x2)/(x1+x2)") == Expr(1));
  CHECK(P("1/(2*x1+2)") == P("(1/2)/(x1+1)"));
}

TEST_CASE("exact derivatives") {
  double p[] = {2.0, 3.0, 0.0};
  CHECK(P("x1*x2").diff(0).eval(p) == doctest::Approx(3.0));
  double z[] = {0.0};
  CHECK(P("sin(x1)", 1).diff(0).diff(0).eval(z) == 0.0);
  double q[] = {1.0, 0.0};
  CHECK(P("x1^2*exp(x2)", 2).diff(0).diff(1).eval(q) == doctest::Approx(2.0));
  CHECK(P("1/x1", 1).diff(0) == P("-x1^-2", 1));
  CHECK(P("1/(x1+x2)").diff(0) == P("-(x1+x2)^-2"));
  CHECK(P("cos(x1*x2)").diff(1) == P("-x1*sin(x1*x2)"));
}

TEST_CASE("mixed partials commute") {
  Expr f = P("exp(x1*x2)*sin(x3+x1^2)/(1+x2^2) + x3^-2*x1");
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(f.diff(i).diff(j) == f.diff(j).diff(i));
  }
}

TEST_CASE("derivatives match finite differences") {
  Expr f = P("exp(x1*x2)*sin(x3+x1^2)/(2+x2^2) + cos(x3)*x1^3");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    double x[3] = {u(rng), u(rng), u(rng)};
    for (int i = 0; i < 3; ++i) {
      const double h = 1e-5;
      double xp[3] = {x[0], x[1], x[2]};
      double xm[3] = {x[0], x[1], x[2]};
      xp[i] += h;
      xm[i] -= h;
      double fd = (f.eval(xp) - f.eval(xm)) / (2 * h);
      CHECK(f.diff(i).eval(x) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("printing round-trips through the parser") {
  for (const char* s : {"x1^2*exp(x2) - 0.5", "-x1/(x2+3) + sin(x3)^2", "1/2*x1 - 3/7", "x1^-3*cos(2*x2)",
                        "1e-3*x1 + 2.5e2"}) {
    Expr e = P(s);
    CHECK(P(e.to_string().c_str()) == e);
  }
}

TEST_CASE("substitution composes") {
  Expr f = P("x1^2 + sin(x2)/(1+x1)", 2);
  std::vector<Expr> sub = {P("x1+x2", 2), P("2*x1", 2)};
  Expr g = f.substitute(sub);
  double p[] = {0.3, -0.2};
  double q[] = {0.1, 0.6};
  CHECK(g.eval(p) == doctest::Approx(f.eval(q)));
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(P("x1 +"), alab::ParseError);
  CHECK_THROWS_AS(P("x9"), alab::ParseError);
  CHECK_THROWS_AS(P("x1^x2"), alab::ParseError);
  CHECK_THROWS_AS(P("x1/0"), alab::ParseError);
  double p[] = {0.0, 0.0, 0.0};
  try {
    P("1/x1").eval(p);
    FAIL("expected pole");
  } catch (const alab::Error& e) {
    CHECK(e.kind() == alab::ErrorKind::EvaluationPole);
  }
  try {
    P("(1+x1)^200*(1+x2)^200*(1+x3)^200");
    FAIL("expected size guard");
  } catch (const alab::Error& e) {
    CHECK(e.kind() == alab::ErrorKind::ExpressionTooLarge);
  }
}

TEST_CASE("custom variable names") {
  std::vector<std::string> names = {"t"};
  Expr c = parse_expression("-t + t^2", names);
  CHECK(c.diff(0) == parse_expression("2*t - 1", names));
  CHECK(parse_expression(c.to_string(names), names) == c);
}
