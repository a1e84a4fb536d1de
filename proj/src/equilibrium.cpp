#include "sspop/equilibrium.hpp"

#include "sspop/survival.hpp"

#include <fmt/format.h>

#include <array>
#include <cmath>
#include <limits>

namespace sspop {

void SizeGrid::validate() const {
  if (N < 1) throw std::invalid_argument("SizeGrid: N must be >= 1");
}

std::vector<double> SizeGrid::nodes(double m) const {
  validate();
  std::vector<double> s(static_cast<std::size_t>(N) + 1);
  for (int i = 0; i <= N; ++i) s[i] = (i == N) ? m : i * (m / N);
  return s;
}

namespace {

double gamma_at_zero(const ModelIngredients& model, double P) {
  const double g0 = model.gamma(0.0, P);
  if (!(g0 > 0.0)) throw ModelViolation(fmt::format("gamma(0, P) <= 0 at P = {}", P));
  return g0;
}

void require_nonnegative_P(double P) {
  if (!(P >= 0.0) || !std::isfinite(P)) throw DomainError(fmt::format("population P must be >= 0, got {}", P));
}

}  // namespace

double survival_pi(const ModelIngredients& model, double s, double P, const Quadrature& quad) {
  require_nonnegative_P(P);
  if (!(s >= 0.0 && s <= model.m)) throw DomainError(fmt::format("size s = {} outside [0, m]", s));
  const double e = integrate([&](double r) { return survival_hazard(model, r, P); }, 0.0, s, quad);
  return std::exp(-e);
}

GrowthTerms growth_terms(const ModelIngredients& model, double P, const Quadrature& quad) {
  require_nonnegative_P(P);
  quad.validate();
  const SurvivalTable table = survival_table(model, P, quad.panel_count);
  std::vector<double> beta_pi(table.pi.size());
  for (std::size_t k = 0; k < beta_pi.size(); ++k) {
    const double b = model.beta(table.s[k], P);
    if (!std::isfinite(b)) detail::throw_non_finite("beta", table.s[k], b);
    beta_pi[k] = b * table.pi[k];
  }
  const double g0 = gamma_at_zero(model, P);
  GrowthTerms terms;
  terms.pi_integral = table.pi_integral();
  terms.beta_pi_integral = integrate_samples(beta_pi, table.h);
  terms.R = terms.beta_pi_integral / g0;
  terms.L = terms.pi_integral / g0;
  return terms;
}

double net_reproduction(const ModelIngredients& model, double P, const Quadrature& quad) {
  return growth_terms(model, P, quad).R;
}

double expected_lifetime(const ModelIngredients& model, double P, const Quadrature& quad) {
  return growth_terms(model, P, quad).L;
}

double net_growth(const ModelIngredients& model, double C, double P, const Quadrature& quad) {
  checked_inflow(C);
  if (!(P > 0.0) || !std::isfinite(P))
    throw DomainError(fmt::format("net growth needs P > 0 (per-capita inflow C/P), got {}", P));
  const GrowthTerms t = growth_terms(model, P, quad);
  return t.R + C * t.L / P;
}

GrowthSlopes growth_slopes(const ModelIngredients& model, double P, const Quadrature& quad) {
  require_nonnegative_P(P);
  quad.validate();
  const int n = quad.panel_count;
  const SurvivalTable table = survival_table(model, P, n);
  // d/dP of the hazard (gamma_s + mu)/gamma
  std::vector<double> dhazard(table.s.size());
  for (std::size_t k = 0; k < dhazard.size(); ++k) {
    const double s = table.s[k];
    const double g = model.gamma(s, P);
    dhazard[k] = (model.gamma_sP(s, P) + model.mu_P(s, P)) / g -
                 (model.gamma_s(s, P) + model.mu(s, P)) * model.gamma_P(s, P) / (g * g);
    if (!std::isfinite(dhazard[k])) detail::throw_non_finite("d/dP hazard", s, dhazard[k]);
  }
  const std::vector<double> dexp = cumulative_samples(dhazard, table.h);

  std::vector<double> pi_P(table.pi.size());
  std::vector<double> beta_pi(table.pi.size());
  std::vector<double> dbeta_pi(table.pi.size());
  for (std::size_t k = 0; k < pi_P.size(); ++k) {
    const double s = table.s[k];
    pi_P[k] = -table.pi[k] * dexp[k];
    beta_pi[k] = model.beta(s, P) * table.pi[k];
    dbeta_pi[k] = model.beta_P(s, P) * table.pi[k] + model.beta(s, P) * pi_P[k];
  }
  const double g0 = gamma_at_zero(model, P);
  const double g0_P = model.gamma_P(0.0, P);
  const double R = integrate_samples(beta_pi, table.h) / g0;
  const double L = table.pi_integral() / g0;
  GrowthSlopes out;
  out.R_prime = integrate_samples(dbeta_pi, table.h) / g0 - R * g0_P / g0;
  out.L_prime = integrate_samples(pi_P, table.h) / g0 - L * g0_P / g0;
  return out;
}

double net_growth_derivative(const ModelIngredients& model, double C, double P, const Quadrature& quad) {
  checked_inflow(C);
  if (!(P > 0.0)) throw DomainError(fmt::format("net growth needs P > 0, got {}", P));
  if (!model.analytic_partials)
    return derivative([&](double x) { return net_growth(model, C, x, quad); }, P);
  const GrowthSlopes d = growth_slopes(model, P, quad);
  const double L = expected_lifetime(model, P, quad);
  return d.R_prime + C * (d.L_prime * P - L) / (P * P);
}

std::vector<double> equilibrium_profile(const ModelIngredients& model, double P_star,
                                        const SizeGrid& grid, const Quadrature& quad) {
  if (!(P_star > 0.0)) throw DomainError(fmt::format("equilibrium profile needs P* > 0, got {}", P_star));
  grid.validate();
  quad.validate();
  const SurvivalTable on_grid = survival_table(model, P_star, grid.N);
  const double norm = survival_table(model, P_star, quad.panel_count).pi_integral();
  std::vector<double> profile(on_grid.pi.size());
  for (std::size_t i = 0; i < profile.size(); ++i) profile[i] = P_star * on_grid.pi[i] / norm;
  return profile;
}

EquilibriumPoint make_equilibrium(const ModelIngredients& model, double C, double P_star,
                                  const EquilibriumOptions& options) {
  EquilibriumPoint eq;
  eq.P_star = P_star;
  eq.C = C;
  const GrowthTerms t = growth_terms(model, P_star, options.quad);
  eq.p0 = P_star / t.pi_integral;
  eq.profile = equilibrium_profile(model, P_star, options.grid, options.quad);
  eq.dQ = net_growth_derivative(model, C, P_star, options.quad);
  eq.residual = std::abs(t.R + C * t.L / P_star - 1.0);
  return eq;
}

const GrowthTerms& GrowthMemo::at(double P) {
  auto it = table_.find(P);
  if (it == table_.end()) it = table_.emplace(P, growth_terms(*model_, P, quad_)).first;
  return it->second;
}

EquilibriumSet find_equilibria(const ModelIngredients& model, double C, double P_lo, double P_hi,
                               const EquilibriumOptions& options, GrowthMemo* memo) {
  checked_inflow(C);
  if (!(P_lo > 0.0 && P_lo < P_hi))
    throw DomainError(fmt::format("equilibrium window needs 0 < P_lo < P_hi, got [{}, {}]", P_lo, P_hi));

  const Quadrature& quad = options.quad;
  auto g = [&](double P) {
    try {
      if (memo) {
        const GrowthTerms& t = memo->at(P);
        return t.R + C * t.L / P - 1.0;
      }
      return net_growth(model, C, P, quad) - 1.0;
    } catch (const NumericError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  ScalarFunction slope = nullptr;
  if (model.analytic_partials)
    slope = [&](double P) { return net_growth_derivative(model, C, P, quad); };

  const RootScan scan = find_roots(g, P_lo, P_hi, options.scan, slope);

  EquilibriumSet set;
  set.C = C;
  set.trivial = (C == 0.0);
  set.skipped = scan.skipped;
  set.R_at_P_hi = net_reproduction(model, P_hi, quad);

  for (const Root& root : scan.roots) {
    double P = root.x;
    if (!root.tangent && root.lo < root.hi) {
      // Polish the bracket to rounding level so |Q_C(P*) - 1| is tiny even where Q_C is steep.
      double a = root.lo, b = root.hi;
      double ga = g(a);
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        const double gm = g(mid);
        if (gm == 0.0) {
          a = b = mid;
          break;
        }
        if ((gm > 0.0) == (ga > 0.0)) {
          a = mid;
          ga = gm;
        } else {
          b = mid;
        }
      }
      P = 0.5 * (a + b);
    }
    EquilibriumPoint eq = make_equilibrium(model, C, P, options);
    eq.tangent = root.tangent;
    set.positive.push_back(std::move(eq));
  }
  return set;
}

namespace {

struct AgeState {
  double s = 0.0;
  double mortality = 0.0;  // int_0^a mu
  double births = 0.0;     // int_0^a beta e^{-int mu}
  double lifetime = 0.0;   // int_0^a e^{-int mu}
};

AgeState age_rhs(const ModelIngredients& model, double P, const AgeState& y) {
  const double g = model.gamma(y.s, P);
  if (!(g > 0.0)) throw ModelViolation(fmt::format("gamma <= 0 at s = {}, P = {} (age form)", y.s, P));
  const double survive = std::exp(-y.mortality);
  return {g, model.mu(y.s, P), model.beta(y.s, P) * survive, survive};
}

AgeState rk4_step(const ModelIngredients& model, double P, const AgeState& y, double da) {
  auto axpy = [](const AgeState& a, double t, const AgeState& k) {
    return AgeState{a.s + t * k.s, a.mortality + t * k.mortality, a.births + t * k.births,
                    a.lifetime + t * k.lifetime};
  };
  const AgeState k1 = age_rhs(model, P, y);
  const AgeState k2 = age_rhs(model, P, axpy(y, 0.5 * da, k1));
  const AgeState k3 = age_rhs(model, P, axpy(y, 0.5 * da, k2));
  const AgeState k4 = age_rhs(model, P, axpy(y, da, k3));
  const double w = da / 6.0;
  return {y.s + w * (k1.s + 2 * k2.s + 2 * k3.s + k4.s),
          y.mortality + w * (k1.mortality + 2 * k2.mortality + 2 * k3.mortality + k4.mortality),
          y.births + w * (k1.births + 2 * k2.births + 2 * k3.births + k4.births),
          y.lifetime + w * (k1.lifetime + 2 * k2.lifetime + 2 * k3.lifetime + k4.lifetime)};
}

}  // namespace

AgeFormCheck age_form_crosscheck(const ModelIngredients& model, double P, const Quadrature& quad,
                                 int rk_steps) {
  require_nonnegative_P(P);
  if (rk_steps < 1) throw std::invalid_argument("age_form_crosscheck: rk_steps must be >= 1");
  AgeFormCheck out;
  const GrowthTerms t = growth_terms(model, P, quad);
  out.R_size = t.R;
  out.L_size = t.L;

  const double age_span = integrate([&](double s) { return inverse_growth(model, s, P); }, 0.0, model.m, quad);
  const double da = age_span / rk_steps;
  if (!(da > 0.0) || !std::isfinite(da) || da < 1e-300)
    throw NumericError(fmt::format("age form: step size underflow (da = {})", da));

  AgeState y;
  double a = 0.0;
  const long max_steps = 16L * rk_steps + 16;
  for (long k = 0;; ++k) {
    if (k > max_steps) throw NumericError("age form: size-age map did not reach m");
    const AgeState next = rk4_step(model, P, y, da);
    if (next.s >= model.m) break;
    y = next;
    a += da;
  }
  // Last partial step: s(a + delta) = m.
  double lo = 0.0, hi = da;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, a); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (rk4_step(model, P, y, mid).s < model.m) lo = mid;
    else hi = mid;
  }
  const double delta = 0.5 * (lo + hi);
  const AgeState last = rk4_step(model, P, y, delta);
  out.R_age = last.births;
  out.L_age = last.lifetime;
  out.age_at_max_size = a + delta;
  return out;
}

double net_growth_age_form(const ModelIngredients& model, double C, double P, const Quadrature& quad) {
  checked_inflow(C);
  if (!(P > 0.0)) throw DomainError(fmt::format("net growth needs P > 0, got {}", P));
  const AgeFormCheck c = age_form_crosscheck(model, P, quad);
  return c.R_age + C * c.L_age / P;
}

}  // namespace sspop
