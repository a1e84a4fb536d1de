#include "sspop/equilibrium.hpp"
#include "sspop/survival.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>

using namespace sspop;

namespace {

const double kLife = 1.0 - std::exp(-6.0);

double closed_R(double P) { return P * P * std::exp(2.0 - P) / 4.0; }

// Sign-change roots of the closed-form Q_C - 1, refined by bisection.
std::vector<double> oracle_roots(double C, double lo, double hi, int points) {
  auto g = [C](double P) { return closed_R(P) + C * kLife / P - 1.0; };
  std::vector<double> roots;
  double a = lo, ga = g(lo);
  for (int k = 1; k < points; ++k) {
    const double b = lo + (hi - lo) * k / (points - 1);
    const double gb = g(b);
    if ((ga < 0.0) != (gb < 0.0)) {
      double x0 = a, x1 = b, g0 = ga;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (x0 + x1), gm = g(mid);
        if ((gm < 0.0) == (g0 < 0.0)) x0 = mid, g0 = gm;
        else x1 = mid;
      }
      roots.push_back(0.5 * (x0 + x1));
    }
    a = b;
    ga = gb;
  }
  return roots;
}

}  // namespace

TEST_CASE("survival examples") {
  const ModelIngredients ex = builtin_example();
  CHECK(survival_pi(ex, 0.0, 3.0) == 1.0);
  for (double s : {0.5, 2.0, 6.0}) CHECK(std::abs(survival_pi(ex, s, 1.0) - std::exp(-s)) <= 1e-12);

  const ModelIngredients nodeath = from_expressions(6.0, "1", "0", "(1+s)*(1+0.1*P)");
  for (double s : {1.0, 3.0, 6.0})
    CHECK(survival_pi(nodeath, s, 2.0) == doctest::Approx(nodeath.gamma(0.0, 2.0) / nodeath.gamma(s, 2.0)).epsilon(1e-9));

  CHECK_THROWS_AS(survival_pi(from_expressions(6.0, "1", "1", "s-3"), 5.0, 1.0), ModelViolation);
}

TEST_CASE("survival is positive and starts at one") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const SurvivalTable t = survival_table(random_smooth_model(seed), 0.3 * seed, 512);
    CHECK(t.pi.front() == 1.0);
    for (double v : t.pi) CHECK(v > 0.0);
  }
}

TEST_CASE("net reproduction and lifetime examples") {
  const ModelIngredients ex = builtin_example();
  CHECK(std::abs(net_reproduction(ex, 2.0) - 1.0) <= 1e-8);
  CHECK(std::abs(net_reproduction(ex, 4.0) - 4.0 * std::exp(-2.0)) <= 1e-8);
  CHECK(net_reproduction(from_expressions(6.0, "0", "1", "1"), 1.0) == 0.0);
  for (double P : {0.1, 2.0, 9.0}) CHECK(std::abs(expected_lifetime(ex, P) - kLife) <= 1e-10);
  CHECK(expected_lifetime(from_expressions(6.0, "1", "0", "2.5"), 1.0) == doctest::Approx(6.0 / 2.5).epsilon(1e-12));
  CHECK(expected_lifetime(from_expressions(6.0, "1", "5", "1"), 1.0) ==
        doctest::Approx((1.0 - std::exp(-30.0)) / 5.0).epsilon(1e-10));
}

TEST_CASE("net growth examples") {
  const ModelIngredients ex = builtin_example();
  for (double P : {0.3, 1.0, 2.0, 6.0}) CHECK(net_growth(ex, 0.0, P) == net_reproduction(ex, P));
  CHECK(std::abs(net_growth(ex, 0.2, 2.0) - (1.0 + 0.2 * kLife / 2.0)) <= 1e-9);
  CHECK(std::abs(net_growth(ex, 0.2, 0.01) - (closed_R(0.01) + 0.2 * kLife / 0.01)) <= 1e-8);
  CHECK(net_growth(ex, 0.2, 0.01) == doctest::Approx(19.95).epsilon(1e-3));
  CHECK_THROWS_AS(net_growth(ex, 0.2, 0.0), DomainError);
  CHECK_THROWS_AS(net_growth(ex, -0.1, 1.0), DomainError);
}

TEST_CASE("Q_C = R + C L / P") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ModelIngredients m = random_smooth_model(seed);
    for (double P : {0.2, 1.0, 4.0})
      for (double C : {0.0, 0.3, 2.0}) {
        const GrowthTerms g = growth_terms(m, P);
        CHECK(std::abs(net_growth(m, C, P) - (g.R + C * g.L / P)) <= 1e-10);
      }
  }
}

TEST_CASE("Q_C increases in C with slope L/P") {
  const ModelIngredients m = random_smooth_model(11);
  for (double P : {0.5, 2.0, 7.0}) {
    const double dC = 1e-3;
    const double q0 = net_growth(m, 0.4, P), q1 = net_growth(m, 0.4 + dC, P);
    CHECK(q1 > q0);
    CHECK((q1 - q0) / dC == doctest::Approx(expected_lifetime(m, P) / P).epsilon(1e-9));
  }
}

TEST_CASE("analytic Q' matches a difference quotient") {
  const ModelIngredients ex = builtin_example();
  for (double P : {0.5, 1.3, 2.0, 3.7})
    for (double C : {0.0, 0.2}) {
      const double h = 1e-5;
      const double fd = (net_growth(ex, C, P + h) - net_growth(ex, C, P - h)) / (2 * h);
      CHECK(std::abs(net_growth_derivative(ex, C, P) - fd) <= 1e-7);
    }
  CHECK(std::abs(net_growth_derivative(ex, 0.0, 2.0)) <= 1e-9);
}

TEST_CASE("equilibria of the example at C = 0") {
  const EquilibriumSet set = find_equilibria(builtin_example(), 0.0, 1e-4, 50.0);
  CHECK(set.trivial);
  REQUIRE(set.positive.size() == 1);
  const EquilibriumPoint& eq = set.positive[0];
  CHECK(eq.tangent);
  CHECK(std::abs(eq.P_star - 2.0) <= 1e-8);
  CHECK(std::abs(eq.dQ) <= 1e-6);
}

TEST_CASE("equilibria of the example at C = 0.2 against a dense scan") {
  const EquilibriumSet set = find_equilibria(builtin_example(), 0.2, 1e-4, 50.0);
  CHECK_FALSE(set.trivial);
  const std::vector<double> want = oracle_roots(0.2, 0.01, 10.0, 200000);
  REQUIRE(want.size() == 3);
  REQUIRE(set.positive.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(set.positive[i].P_star - want[i]) <= 1e-8);
  CHECK(set.positive[0].dQ < 0.0);
  CHECK(set.positive[1].dQ > 0.0);
  CHECK(set.positive[2].dQ < 0.0);
}

TEST_CASE("above the fold only the upper branch remains") {
  const EquilibriumSet set = find_equilibria(builtin_example(), 1.0, 1e-4, 50.0);
  const std::vector<double> want = oracle_roots(1.0, 0.01, 10.0, 200000);
  REQUIRE(want.size() == 1);
  REQUIRE(set.positive.size() == 1);
  CHECK(std::abs(set.positive[0].P_star - want[0]) <= 1e-8);
}

TEST_CASE("every equilibrium solves Q_C = 1 and carries its own mass") {
  const ModelIngredients m = random_smooth_model(3);
  for (double C : {0.05, 0.5}) {
    const EquilibriumSet set = find_equilibria(m, C, 1e-4, 200.0);
    REQUIRE_FALSE(set.positive.empty());
    for (const EquilibriumPoint& eq : set.positive) {
      CHECK(std::abs(net_growth(m, C, eq.P_star) - 1.0) <= 1e-8);
      const double h = m.m / (eq.profile.size() - 1);
      CHECK(integrate_samples(eq.profile, h) == doctest::Approx(eq.P_star).epsilon(1e-6));
    }
  }
}

TEST_CASE("profiles") {
  const ModelIngredients ex = builtin_example();
  SizeGrid grid;
  const std::vector<double> p = equilibrium_profile(ex, 2.0, grid);
  const std::vector<double> s = grid.nodes(6.0);
  REQUIRE(p.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(p[i] - 2.0 * std::exp(-s[i]) / kLife) <= 1e-8);

  const std::vector<double> flat = equilibrium_profile(from_expressions(6.0, "1", "0", "1"), 3.0, grid);
  for (double v : flat) CHECK(std::abs(v - 0.5) <= 1e-12);
}

TEST_CASE("size and age forms of R") {
  const AgeFormCheck ex = age_form_crosscheck(builtin_example(), 2.0);
  CHECK(std::abs(ex.R_size - 1.0) <= 1e-8);
  CHECK(std::abs(ex.R_size - ex.R_age) <= 1e-6);
  CHECK(ex.age_at_max_size == doctest::Approx(6.0));

  const AgeFormCheck fast = age_form_crosscheck(from_expressions(6.0, "1", "0", "2"), 1.0);
  CHECK(fast.R_size == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(fast.R_age == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(fast.age_at_max_size == doctest::Approx(3.0).epsilon(1e-10));

  const AgeFormCheck zero = age_form_crosscheck(from_expressions(6.0, "0", "1", "1+s"), 1.0);
  CHECK(zero.R_size == 0.0);
  CHECK(zero.R_age == 0.0);
}

TEST_CASE("size and age forms agree on random models") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ModelIngredients m = random_smooth_model(seed);
    const double P = 0.2 + 0.4 * static_cast<double>(seed % 7);
    const AgeFormCheck c = age_form_crosscheck(m, P);
    CHECK(std::abs(c.R_size - c.R_age) <= 1e-6 * std::abs(c.R_size));
    CHECK(std::abs(c.L_size - c.L_age) <= 1e-6 * std::abs(c.L_size));
    CHECK(net_growth_age_form(m, 0.3, P) == doctest::Approx(net_growth(m, 0.3, P)).epsilon(1e-6));
  }
}

TEST_CASE("growth memo reuses terms") {
  const ModelIngredients ex = builtin_example();
  Quadrature q;
  GrowthMemo memo(ex, q);
  const EquilibriumSet a = find_equilibria(ex, 0.1, 1e-4, 50.0, {}, &memo);
  const std::size_t after_first = memo.size();
  const EquilibriumSet b = find_equilibria(ex, 0.2, 1e-4, 50.0, {}, &memo);
  CHECK(memo.size() < 2 * after_first);
  const EquilibriumSet plain = find_equilibria(ex, 0.2, 1e-4, 50.0);
  REQUIRE(b.positive.size() == plain.positive.size());
  for (std::size_t i = 0; i < b.positive.size(); ++i) CHECK(b.positive[i].P_star == plain.positive[i].P_star);
  CHECK(a.positive.size() == 3);
}

TEST_CASE("argument checks") {
  const ModelIngredients ex = builtin_example();
  SizeGrid bad;
  bad.N = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(find_equilibria(ex, -1.0, 1e-4, 50.0), DomainError);
  const EquilibriumSet none = find_equilibria(from_expressions(6.0, "0.1", "1", "1"), 0.0, 1e-4, 50.0);
  CHECK(none.positive.empty());
  CHECK(none.R_at_P_hi < 1.0);
}
