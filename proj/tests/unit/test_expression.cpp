#include <cmath>
#include <numbers>
#include <string>

#include "doctest.h"
#include "heattrace/errors.hpp"
#include "heattrace/expression.hpp"

using namespace heattrace;
using std::numbers::pi;

namespace {

double eval(const std::string& text, Variables v = {}) { return Expression::parse(text)(v); }

}  // namespace

TEST_CASE("arithmetic precedence and associativity") {
  CHECK(eval("1 + 2 * 3") == 7.0);
  CHECK(eval("(1 + 2) * 3") == 9.0);
  CHECK(eval("2 ^ 3 ^ 2") == 512.0);
  CHECK(eval("-2 ^ 2") == -4.0);
  CHECK(eval("8 / 4 / 2") == 1.0);
  CHECK(eval("1 - 2 - 3") == -4.0);
  CHECK(eval("1.5e2") == 150.0);
  CHECK(eval("2*-3") == -6.0);
}

TEST_CASE("variables, constants and functions") {
  Variables v;
  v.x = 0.5;
  v.y = 2.0;
  v.t = 0.25;
  v.s = 3.0;
  v.delta = 0.125;
  CHECK(eval("x + y + t + s + delta", v) == doctest::Approx(5.875));
  CHECK(eval("pi") == doctest::Approx(pi));
  CHECK(eval("e") == doctest::Approx(std::exp(1.0)));
  CHECK(eval("sin(pi/2) + cos(0) + tan(0)") == doctest::Approx(2.0));
  CHECK(eval("exp(1) * log(e)") == doctest::Approx(std::exp(1.0)));
  CHECK(eval("sqrt(16) + abs(-3)") == doctest::Approx(7.0));
  CHECK(eval("step(-1) + step(2)") == 1.0);
  CHECK(eval("min(2, 3) + max(2, 3) + pow(2, 10)") == doctest::Approx(1029.0));
  CHECK(eval("delta^(-1)", v) == doctest::Approx(8.0));
}

TEST_CASE("smoothstep is a quintic ramp") {
  CHECK(eval("smoothstep(0, 1, -0.5)") == 0.0);
  CHECK(eval("smoothstep(0, 1, 1.5)") == 1.0);
  CHECK(eval("smoothstep(0, 1, 0.5)") == doctest::Approx(0.5));
  // 6u^5 - 15u^4 + 10u^3 at u = 0.25
  const double u = 0.25;
  CHECK(eval("smoothstep(1, 3, 1.5)") == doctest::Approx(u * u * u * (u * (6 * u - 15) + 10)));
}

TEST_CASE("syntax errors carry the column") {
  auto column_of = [](const std::string& text) {
    try {
      (void)Expression::parse(text);
    } catch (const SchemaError& e) {
      return std::string(e.what());
    }
    return std::string("accepted");
  };
  CHECK(column_of("1 +") != "accepted");
  CHECK(column_of("foo(1)").find("column 1") != std::string::npos);
  CHECK(column_of("1 + $").find("column 5") != std::string::npos);
  CHECK(column_of("sin(1, 2)") != "accepted");
  CHECK(column_of("(1 + 2") != "accepted");
  CHECK(column_of("") != "accepted");
}

TEST_CASE("deep nesting is rejected rather than overflowing") {
  std::string deep;
  for (int i = 0; i < 200; ++i) deep += "(1+";
  deep += "1";
  for (int i = 0; i < 200; ++i) deep += ")";
  CHECK_THROWS_AS((void)Expression::parse(deep), SchemaError);
}

TEST_CASE("constant expressions and equality") {
  const Expression c = Expression::constant(0.1);
  CHECK(c(Variables{}) == 0.1);
  CHECK(Expression::parse(c.text())(Variables{}) == 0.1);
  CHECK(Expression::parse("x*2") == Expression::parse("x*2"));
  CHECK_FALSE(Expression::parse("x*2") == Expression::parse("2*x"));
  CHECK(Expression()(Variables{}) == 0.0);
}
