#include "sspop/survival.hpp"

#include "sspop/numerics.hpp"

#include <fmt/format.h>

#include <cmath>

namespace sspop {

namespace {

double checked_gamma(const ModelIngredients& model, double s, double P) {
  const double g = model.gamma(s, P);
  if (!(g > 0.0))
    throw ModelViolation(fmt::format("gamma <= 0 (value {}) at s = {}, P = {}", g, s, P));
  return g;
}

}  // namespace

double survival_hazard(const ModelIngredients& model, double s, double P) {
  const double g = checked_gamma(model, s, P);
  return (model.gamma_s(s, P) + model.mu(s, P)) / g;
}

double inverse_growth(const ModelIngredients& model, double s, double P) {
  return 1.0 / checked_gamma(model, s, P);
}

double SurvivalTable::pi_integral() const { return integrate_samples(pi, h); }

SurvivalTable survival_table(const ModelIngredients& model, double P, int cells) {
  if (cells < 1) throw std::invalid_argument("survival_table: cells must be >= 1");
  if (!(model.m > 0.0) || !std::isfinite(model.m))
    throw ModelViolation("maximal size m must be finite and > 0");
  SurvivalTable t;
  t.m = model.m;
  t.P = P;
  t.cells = cells;
  t.h = model.m / cells;
  const std::size_t n = static_cast<std::size_t>(cells) + 1;
  t.s.resize(n);
  std::vector<double> hazard(n);
  for (std::size_t k = 0; k < n; ++k) {
    t.s[k] = (k + 1 == n) ? model.m : k * t.h;
    hazard[k] = survival_hazard(model, t.s[k], P);
    if (!std::isfinite(hazard[k])) detail::throw_non_finite("survival hazard", t.s[k], hazard[k]);
  }
  t.exponent = cumulative_samples(hazard, t.h);
  t.pi.resize(n);
  for (std::size_t k = 0; k < n; ++k) t.pi[k] = std::exp(-t.exponent[k]);
  return t;
}

}  // namespace sspop
