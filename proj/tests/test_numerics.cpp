#include "sspop/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

using namespace sspop;

TEST_CASE("integrate: constant, exponential and x e^{-2x}") {
  CHECK(integrate([](double) { return 1.0; }, 0.0, 6.0) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(std::abs(integrate([](double x) { return std::exp(-x); }, 0.0, 6.0) - (1.0 - std::exp(-6.0))) <= 1e-10);
  const double want = 0.25 - 3.25 * std::exp(-12.0);
  CHECK(std::abs(integrate([](double x) { return x * std::exp(-2.0 * x); }, 0.0, 6.0) - want) <= 1e-10);
}

TEST_CASE("integrate: exact on cubics for any panel count") {
  auto cubic = [](double x) { return 2.0 - 3.0 * x + 0.5 * x * x + 1.25 * x * x * x; };
  auto antideriv = [](double x) { return 2.0 * x - 1.5 * x * x + x * x * x / 6.0 + 1.25 * x * x * x * x / 4.0; };
  const double want = antideriv(3.5) - antideriv(-1.0);
  for (int panels : {2, 4, 10, 64, 4096}) {
    Quadrature q;
    q.panel_count = panels;
    CHECK(std::abs(integrate(cubic, -1.0, 3.5, q) - want) <= 1e-12 * std::abs(want));
  }
}

TEST_CASE("integrate: non-finite integrand names the abscissa") {
  try {
    integrate([](double x) { return x > 2.0 ? NAN : 1.0; }, 0.0, 4.0);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("at x =") != std::string::npos);
  }
}

TEST_CASE("integrate: invalid panel counts are rejected") {
  Quadrature q;
  q.panel_count = 3;
  CHECK_THROWS_AS(integrate([](double) { return 1.0; }, 0.0, 1.0, q), std::invalid_argument);
  q.panel_count = 0;
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}

TEST_CASE("cumulative rules converge at fourth order") {
  auto err_at = [](int n) {
    const double h = 3.0 / n;
    std::vector<double> y(n + 1);
    for (int i = 0; i <= n; ++i) y[i] = std::cos(i * h);
    const std::vector<double> c = cumulative_samples(y, h);
    double worst = 0.0;
    for (int i = 0; i <= n; ++i) worst = std::max(worst, std::abs(c[i] - std::sin(i * h)));
    return worst;
  };
  const double e1 = err_at(64), e2 = err_at(128);
  CHECK(std::log2(e1 / e2) > 3.5);

  const std::vector<double> c = cumulative_integral([](double x) { return std::exp(x); }, 0.0, 1.0, 50);
  CHECK(std::abs(c.back() - (std::exp(1.0) - 1.0)) <= 1e-9);
  CHECK(c.front() == 0.0);
}

TEST_CASE("integrate_samples: even and odd cell counts") {
  for (int n : {1, 2, 3, 7, 8, 101}) {
    const double h = 2.0 / n;
    std::vector<double> y(n + 1);
    for (int i = 0; i <= n; ++i) y[i] = std::pow(i * h, 3);
    const double tol = n == 1 ? 4.0 : 1e-12;
    CHECK(std::abs(integrate_samples(y, h) - 4.0) <= tol);
  }
}

TEST_CASE("find_roots: linear root") {
  const RootScan r = find_roots([](double x) { return x - 1.0; }, 0.0, 2.0);
  REQUIRE(r.roots.size() == 1);
  CHECK(r.roots[0].x == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_FALSE(r.roots[0].tangent);
}

TEST_CASE("find_roots: double root is flagged tangent") {
  const RootScan r = find_roots([](double x) { return (x - 2.0) * (x - 2.0); }, 0.0, 4.0);
  REQUIRE(r.roots.size() == 1);
  CHECK(r.roots[0].tangent);
  CHECK(std::abs(r.roots[0].x - 2.0) <= 1e-6);
}

TEST_CASE("find_roots: tangency of P^2 e^{2-P}/4 - 1") {
  auto g = [](double P) { return P * P * std::exp(2.0 - P) / 4.0 - 1.0; };
  const RootScan r = find_roots(g, 0.01, 10.0);
  REQUIRE(r.roots.size() == 1);
  CHECK(r.roots[0].tangent);
  CHECK(std::abs(r.roots[0].x - 2.0) <= 1e-6);
}

TEST_CASE("find_roots: skips non-finite nodes and accepts empty results") {
  const RootScan none = find_roots([](double x) { return x * x + 1.0; }, -3.0, 3.0);
  CHECK(none.roots.empty());
  const RootScan holes = find_roots([](double x) { return std::abs(x - 0.5) < 0.01 ? NAN : x - 2.0; }, 0.0, 3.0);
  CHECK_FALSE(holes.skipped.empty());
  REQUIRE(holes.roots.size() == 1);
  CHECK(holes.roots[0].x == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("find_roots: finds every separated sign change") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> want;
    double x = 0.1;
    for (int k = 0; k < 5; ++k) {
      x += 0.05 + 1.5 * u(rng);
      want.push_back(x);
    }
    auto g = [&](double t) {
      double v = 1.0;
      for (double r : want) v *= (t - r);
      return v;
    };
    RootScanConfig cfg;
    cfg.abs_tol = 1e-12;
    const RootScan r = find_roots(g, 0.0, x + 1.0, cfg);
    for (double w : want) {
      bool seen = false;
      for (const Root& root : r.roots) seen = seen || std::abs(root.x - w) <= 1e-8;
      CHECK(seen);
    }
  }
}

TEST_CASE("bisect requires a bracket") {
  CHECK_THROWS_AS(bisect([](double x) { return x * x + 1.0; }, 0.0, 1.0), NumericError);
  const Root r = bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0);
  CHECK(r.x == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("derivative examples") {
  CHECK(std::abs(derivative([](double x) { return x * x; }, 3.0) - 6.0) <= 1e-6);
  CHECK(std::abs(derivative([](double x) { return std::exp(x); }, 0.0) - 1.0) <= 1e-6);
  CHECK(std::abs(derivative([](double P) { return P * P * std::exp(2.0 - P) / 4.0; }, 2.0)) <= 1e-6);
  CHECK_THROWS_AS(derivative([](double x) { return x > 1.0 ? NAN : x; }, 1.0), NumericError);
}

TEST_CASE("derivative matches analytic slopes within 1e-5 relative") {
  for (double x : {-2.0, -0.3, 0.7, 1.9, 4.0}) {
    const double d1 = derivative([](double t) { return std::exp(0.7 * t); }, x);
    CHECK(std::abs(d1 - 0.7 * std::exp(0.7 * x)) <= 1e-5 * std::abs(0.7 * std::exp(0.7 * x)));
    const double d2 = derivative([](double t) { return t * t * t - 2.0 * t; }, x);
    const double want = 3.0 * x * x - 2.0;
    CHECK(std::abs(d2 - want) <= 1e-5 * std::max(1.0, std::abs(want)));
  }
}
