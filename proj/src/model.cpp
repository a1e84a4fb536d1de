#include "sspop/model.hpp"

#include "sspop/expression.hpp"
#include "sspop/numerics.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

namespace sspop {

double checked_inflow(double C) {
  if (!(C >= 0.0) || !std::isfinite(C))
    throw DomainError("inflow C must satisfy 0 <= C < inf, got " + std::to_string(C));
  return C;
}

double example_fertility_scale() {
  return 3.0 * std::exp(-2.0) - 2.0 * std::exp(-8.0) - 13.0 * std::exp(-14.0);
}

ModelIngredients builtin_example() {
  const double scale = example_fertility_scale();
  auto shape = [](double s) { return s * std::exp(-s) + 0.5; };

  ModelIngredients model;
  model.m = 6.0;
  model.beta = [=](double s, double P) { return P * P * std::exp(-P) * shape(s) / scale; };
  model.beta_P = [=](double s, double P) { return (2.0 * P - P * P) * std::exp(-P) * shape(s) / scale; };
  model.beta_PP = [=](double s, double P) {
    return (2.0 - 4.0 * P + P * P) * std::exp(-P) * shape(s) / scale;
  };
  auto one = [](double, double) { return 1.0; };
  auto zero = [](double, double) { return 0.0; };
  model.mu = one;
  model.gamma = one;
  model.mu_P = zero;
  model.gamma_s = zero;
  model.gamma_P = zero;
  model.gamma_sP = zero;
  model.analytic_partials = true;
  model.family = "example";
  model.beta_text = "(P^2*exp(-P)*s*exp(-s)+0.5*P^2*exp(-P))/(3*exp(-2)-2*exp(-8)-13*exp(-14))";
  model.mu_text = "1";
  model.gamma_text = "1";
  return model;
}

namespace {

RateFunction d_ds(RateFunction f) {
  return [f = std::move(f)](double s, double P) {
    return derivative([&](double x) { return f(x, P); }, s);
  };
}

RateFunction d_dP(RateFunction f) {
  return [f = std::move(f)](double s, double P) {
    return derivative([&](double x) { return f(s, x); }, P);
  };
}

RateFunction d2_dP2(RateFunction f) {
  return [f = std::move(f)](double s, double P) {
    const double k = 1e-4 * std::max(1.0, std::abs(P));
    return (f(s, P + k) - 2.0 * f(s, P) + f(s, P - k)) / (k * k);
  };
}

RateFunction d2_dsdP(RateFunction f) {
  return [f = std::move(f)](double s, double P) {
    const double hs = 1e-4 * std::max(1.0, std::abs(s));
    const double hp = 1e-4 * std::max(1.0, std::abs(P));
    return (f(s + hs, P + hp) - f(s + hs, P - hp) - f(s - hs, P + hp) + f(s - hs, P - hp)) /
           (4.0 * hs * hp);
  };
}

RateFunction zero_rate() {
  return [](double, double) { return 0.0; };
}

}  // namespace

ModelIngredients with_difference_partials(double m, RateFunction beta, RateFunction mu,
                                          RateFunction gamma) {
  ModelIngredients model;
  model.m = m;
  model.beta = std::move(beta);
  model.mu = std::move(mu);
  model.gamma = std::move(gamma);
  model.beta_P = d_dP(model.beta);
  model.beta_PP = d2_dP2(model.beta);
  model.mu_P = d_dP(model.mu);
  model.gamma_s = d_ds(model.gamma);
  model.gamma_P = d_dP(model.gamma);
  model.gamma_sP = d2_dsdP(model.gamma);
  model.analytic_partials = false;
  return model;
}

ModelIngredients from_expressions(double m, std::string_view beta, std::string_view mu,
                                  std::string_view gamma) {
  auto wrap = [](const Expression& e) -> RateFunction {
    auto shared = std::make_shared<const Expression>(e);
    return [shared](double s, double P) { return (*shared)(s, P); };
  };
  const Expression eb = parse_rate(beta);
  const Expression em = parse_rate(mu);
  const Expression eg = parse_rate(gamma);
  ModelIngredients model = with_difference_partials(m, wrap(eb), wrap(em), wrap(eg));
  // Rates without P have identically zero P-partials; skip the differencing.
  if (!eb.depends_on_P()) {
    model.beta_P = zero_rate();
    model.beta_PP = zero_rate();
  }
  if (!em.depends_on_P()) model.mu_P = zero_rate();
  if (!eg.depends_on_P()) {
    model.gamma_P = zero_rate();
    model.gamma_sP = zero_rate();
  }
  model.family = "expression";
  model.beta_text = std::string(beta);
  model.mu_text = std::string(mu);
  model.gamma_text = std::string(gamma);
  return model;
}

ModelIngredients random_smooth_model(std::uint64_t seed, const RandomModelOptions& options) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  const double m = uniform(3.0, 8.0);
  const double g0 = uniform(0.5, 2.0);
  const double a = uniform(0.0, 0.4);
  const double w = uniform(0.2, 1.5);
  const double phi = uniform(0.0, 2.0 * std::numbers::pi);
  const double gP = options.gamma_depends_on_P ? uniform(-0.3, 0.3) : 0.0;
  const double m0 = uniform(0.1, 1.0);
  const double m1 = uniform(0.0, 0.5);
  const double mP = options.mu_depends_on_P ? uniform(0.0, 0.6) : 0.0;
  const double b0 = uniform(0.5, 4.0);
  const double b1 = uniform(0.0, 1.0);
  const double d = uniform(0.0, 1.5);
  const double c = uniform(0.1, 0.6);

  ModelIngredients model;
  model.m = m;
  // gamma = g0 * S(s) * Y(P)
  auto S = [=](double s) { return 1.0 + a * std::sin(w * s + phi); };
  auto S_s = [=](double s) { return a * w * std::cos(w * s + phi); };
  auto Y = [=](double P) { return 1.0 + gP * P / (1.0 + P); };
  auto Y_P = [=](double P) { return gP / ((1.0 + P) * (1.0 + P)); };
  model.gamma = [=](double s, double P) { return g0 * S(s) * Y(P); };
  model.gamma_s = [=](double s, double P) { return g0 * S_s(s) * Y(P); };
  model.gamma_P = [=](double s, double P) { return g0 * S(s) * Y_P(P); };
  model.gamma_sP = [=](double s, double P) { return g0 * S_s(s) * Y_P(P); };

  model.mu = [=](double s, double P) { return m0 + m1 * s / m + mP * P / (1.0 + P); };
  model.mu_P = [=](double, double P) { return mP / ((1.0 + P) * (1.0 + P)); };

  // beta = b0 * A(s) * B(P), B = (1 + dP) e^{-cP}
  auto A = [=](double s) { return b0 * (1.0 + b1 * s / m); };
  model.beta = [=](double s, double P) { return A(s) * (1.0 + d * P) * std::exp(-c * P); };
  model.beta_P = [=](double s, double P) {
    return A(s) * (d - c * (1.0 + d * P)) * std::exp(-c * P);
  };
  model.beta_PP = [=](double s, double P) {
    return A(s) * (c * c * (1.0 + d * P) - 2.0 * c * d) * std::exp(-c * P);
  };
  model.analytic_partials = true;
  model.family = "random";
  return model;
}

ValidationReport validate(const ModelIngredients& model, double P_max, int s_samples,
                          int P_samples) {
  if (!(P_max > 0.0)) throw DomainError("validate: P_max must be > 0");
  if (s_samples < 2 || P_samples < 2) throw std::invalid_argument("validate: need >= 2 samples per axis");
  ValidationReport report;
  if (!(model.m > 0.0) || !std::isfinite(model.m)) {
    report.violations.push_back({"m must be finite and > 0", 0.0, 0.0, model.m});
    return report;
  }
  for (int i = 0; i < s_samples; ++i) {
    const double s = model.m * i / (s_samples - 1);
    for (int j = 0; j < P_samples; ++j) {
      const double P = P_max * j / (P_samples - 1);
      ++report.samples;
      const double b = model.beta(s, P);
      const double d = model.mu(s, P);
      const double g = model.gamma(s, P);
      if (!std::isfinite(b)) report.violations.push_back({"non-finite beta", s, P, b});
      else if (b < 0.0) report.violations.push_back({"beta < 0", s, P, b});
      if (!std::isfinite(d)) report.violations.push_back({"non-finite mu", s, P, d});
      else if (d < 0.0) report.violations.push_back({"mu < 0", s, P, d});
      if (!std::isfinite(g)) report.violations.push_back({"non-finite gamma", s, P, g});
      else if (g <= 0.0) report.violations.push_back({"gamma <= 0", s, P, g});
    }
  }
  return report;
}

}  // namespace sspop
