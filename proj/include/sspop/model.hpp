#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sspop {

/// A vital rate or one of its partial derivatives, as a function of size s
/// and total population P.
using RateFunction = std::function<double(double s, double P)>;

/// A vital rate violates the model assumptions (gamma <= 0, ...).
class ModelViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument outside the mathematical domain (P <= 0 where C/P is needed, C < 0, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Vital rates on [0, m] x [0, inf) together with the partial derivatives
/// the linearisation needs. Treated as immutable once built.
struct ModelIngredients {
  double m = 0.0;

  RateFunction beta;   ///< fertility, births per individual per time
  RateFunction mu;     ///< mortality, per time
  RateFunction gamma;  ///< growth, length per time

  RateFunction beta_P;
  RateFunction beta_PP;
  RateFunction mu_P;
  RateFunction gamma_s;
  RateFunction gamma_P;
  RateFunction gamma_sP;

  /// True when every partial above is a closed form rather than a finite difference.
  bool analytic_partials = false;

  /// "example", "expression", "random" or "custom"; plus the rate texts when known.
  std::string family = "custom";
  std::string beta_text;
  std::string mu_text;
  std::string gamma_text;
};

/// Throws DomainError unless 0 <= C < inf.
double checked_inflow(double C);

/// Denominator 3e^-2 - 2e^-8 - 13e^-14 of the worked example's fertility.
double example_fertility_scale();

/// mu = 1, gamma = 1, m = 6 and
/// beta = (P^2 e^-P s e^-s + 0.5 P^2 e^-P) / (3e^-2 - 2e^-8 - 13e^-14),
/// with every partial in closed form.
ModelIngredients builtin_example();

/// Model from three rate texts. Partials are central finite differences:
/// step 1e-6 * max(1, |x|) for first derivatives, 1e-4 * max(1, |x|) for
/// beta_PP and gamma_sP.
ModelIngredients from_expressions(double m, std::string_view beta, std::string_view mu,
                                  std::string_view gamma);

/// Same partial synthesis as from_expressions, for arbitrary callables.
ModelIngredients with_difference_partials(double m, RateFunction beta, RateFunction mu,
                                          RateFunction gamma);

struct RandomModelOptions {
  bool gamma_depends_on_P = true;
  bool mu_depends_on_P = true;
};

/// Smooth positive model with closed-form partials and random coefficients:
///   gamma = g0 (1 + a sin(w s + phi)) (1 + gP P/(1+P))
///   mu    = m0 + m1 s/m + mP P/(1+P)
///   beta  = b0 (1 + b1 s/m) (1 + d P) e^{-c P}
/// Deterministic in the seed.
ModelIngredients random_smooth_model(std::uint64_t seed, const RandomModelOptions& options = {});

struct Violation {
  std::string kind;  ///< "gamma <= 0", "beta < 0", "mu < 0", "non-finite beta", ...
  double s = 0.0;
  double P = 0.0;
  double value = 0.0;
};

struct ValidationReport {
  std::vector<Violation> violations;
  int samples = 0;
  bool ok() const { return violations.empty(); }
};

/// Samples the rates on an s_samples x P_samples lattice over [0, m] x [0, P_max].
ValidationReport validate(const ModelIngredients& model, double P_max, int s_samples = 200,
                          int P_samples = 200);

}  // namespace sspop
