#include "sspop/expression.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace sspop;

TEST_CASE("constants and exp") {
  const Expression one = parse_rate("1");
  CHECK(one(0.0, 0.0) == 1.0);
  CHECK(one(3.0, 17.0) == 1.0);
  CHECK(parse_rate("exp(-s)")(0.0, 5.0) == 1.0);
  CHECK_FALSE(parse_rate("exp(-s)").depends_on_P());
  CHECK(parse_rate("P*s").depends_on_P());
}

TEST_CASE("example fertility with a literal denominator") {
  const Expression beta = parse_rate("(P^2*exp(-P)*s*exp(-s)+0.5*P^2*exp(-P))/0.40407578");
  const double want = 0.5 * 4.0 * std::exp(-2.0) / 0.40407578;
  CHECK(beta(0.0, 2.0) == doctest::Approx(want).epsilon(1e-14));
  CHECK(std::abs(beta(0.0, 2.0) - 0.6699) < 1e-4);
}

TEST_CASE("precedence, associativity and unary minus") {
  CHECK(parse_rate("1+2*3")(0, 0) == 7.0);
  CHECK(parse_rate("2^3^2")(0, 0) == 512.0);
  CHECK(parse_rate("-2^2")(0, 0) == -4.0);
  CHECK(parse_rate("(1-s)/(1+P)")(3.0, 1.0) == -1.0);
  CHECK(parse_rate("1.5e-1*2")(0, 0) == doctest::Approx(0.3));
  CHECK(parse_rate(" s -  - P ")(1.0, 2.0) == 3.0);
}

TEST_CASE("syntax errors carry a byte offset") {
  try {
    parse_rate("1 + * s");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS_AS(parse_rate(""), ParseError);
  CHECK_THROWS_AS(parse_rate("(s"), ParseError);
  CHECK_THROWS_AS(parse_rate("s)"), ParseError);
  CHECK_THROWS_AS(parse_rate("exp s"), ParseError);
}

TEST_CASE("unknown identifiers are named") {
  try {
    parse_rate("s + sin(P)");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("sin") != std::string::npos);
    CHECK(e.offset() == 4);
  }
}

TEST_CASE("printing and reparsing gives the same tree") {
  for (const char* text : {"1", "exp(-s)", "-(s+P)*2^-3", "(P^2*exp(-P)*s*exp(-s)+0.5*P^2*exp(-P))/0.40407578",
                           "1/(1+s)/(2+P)", "s-(P-1)-2", "-exp(-(-s))^2", "3e-7*s^0.5"}) {
    const Expression e = parse_rate(text);
    const Expression again = parse_rate(e.to_string());
    CHECK(e == again);
    CHECK(again.to_string() == e.to_string());
    for (double s : {0.0, 1.3, 5.9})
      for (double P : {0.1, 2.0}) {
        const double a = e(s, P), b = again(s, P);
        CHECK(((std::isnan(a) && std::isnan(b)) || a == b));
      }
  }
}
