#pragma once

// Survival, net reproduction R(P), expected lifetime L(P), net growth
// Q_C(P) = R(P) + C L(P) / P, and the positive equilibria Q_C(P*) = 1.

#include "sspop/model.hpp"
#include "sspop/numerics.hpp"

#include <unordered_map>
#include <vector>

namespace sspop {

/// Uniform size grid s_i = i m / N, i = 0..N.
struct SizeGrid {
  int N = 1024;

  void validate() const;
  double spacing(double m) const { return m / N; }
  std::vector<double> nodes(double m) const;
};

struct EquilibriumOptions {
  Quadrature quad;
  RootScanConfig scan;
  SizeGrid grid;
};

/// Stationary solution with positive total population.
struct EquilibriumPoint {
  double P_star = 0.0;
  double C = 0.0;
  double p0 = 0.0;              ///< p*(0), individuals per length
  std::vector<double> profile;  ///< p*(s) on the SizeGrid nodes
  double dQ = 0.0;              ///< Q'_C(P*)
  bool tangent = false;         ///< double root of Q_C = 1
  double residual = 0.0;        ///< |Q_C(P*) - 1|
};

struct EquilibriumSet {
  double C = 0.0;
  std::vector<EquilibriumPoint> positive;  ///< increasing P*
  bool trivial = false;                    ///< P = 0 is an equilibrium iff C = 0
  double R_at_P_hi = 0.0;                  ///< existence heuristic: R at the scan boundary
  std::vector<double> skipped;             ///< scan nodes where Q_C was not finite
};

/// pi(s, P) by direct quadrature of the hazard over [0, s].
double survival_pi(const ModelIngredients& model, double s, double P, const Quadrature& quad = {});

/// Integrals entering Q_C at one P, all from a single survival table.
struct GrowthTerms {
  double R = 0.0;                 ///< (1/gamma(0,P)) int beta pi ds
  double L = 0.0;                 ///< (1/gamma(0,P)) int pi ds
  double pi_integral = 0.0;       ///< int pi ds
  double beta_pi_integral = 0.0;  ///< int beta pi ds
};

GrowthTerms growth_terms(const ModelIngredients& model, double P, const Quadrature& quad = {});

double net_reproduction(const ModelIngredients& model, double P, const Quadrature& quad = {});
double expected_lifetime(const ModelIngredients& model, double P, const Quadrature& quad = {});

/// Q_C(P); throws DomainError for P <= 0 or C < 0.
double net_growth(const ModelIngredients& model, double C, double P, const Quadrature& quad = {});

struct GrowthSlopes {
  double R_prime = 0.0;
  double L_prime = 0.0;
};

/// R'(P) and L'(P) through the model's partial derivatives
/// (pi_P = -pi int_0^s d/dP[(gamma_s + mu)/gamma] dr).
GrowthSlopes growth_slopes(const ModelIngredients& model, double P, const Quadrature& quad = {});

/// Q'_C(P): through growth_slopes when the model's partials are analytic,
/// otherwise a central difference of Q_C.
double net_growth_derivative(const ModelIngredients& model, double C, double P,
                             const Quadrature& quad = {});

/// growth_terms remembered per P. R and L do not depend on C, so repeated
/// scans over the same nodes (parameter sweeps) reuse them. One per thread.
class GrowthMemo {
 public:
  GrowthMemo(const ModelIngredients& model, const Quadrature& quad) : model_(&model), quad_(quad) {}
  const GrowthTerms& at(double P);
  std::size_t size() const { return table_.size(); }

 private:
  const ModelIngredients* model_;
  Quadrature quad_;
  std::unordered_map<double, GrowthTerms> table_;
};

/// Roots of Q_C(P) = 1 in [P_lo, P_hi] with their profiles and slopes.
EquilibriumSet find_equilibria(const ModelIngredients& model, double C, double P_lo, double P_hi,
                               const EquilibriumOptions& options = {}, GrowthMemo* memo = nullptr);

/// p*(s) = P* pi(s, P*) / int pi on the grid nodes.
std::vector<double> equilibrium_profile(const ModelIngredients& model, double P_star,
                                        const SizeGrid& grid = {}, const Quadrature& quad = {});

/// Builds the EquilibriumPoint at a known root (no root search).
EquilibriumPoint make_equilibrium(const ModelIngredients& model, double C, double P_star,
                                  const EquilibriumOptions& options = {});

/// R(P) and L(P) computed in size and, independently, in age: the size-age
/// map ds/da = gamma(s, P) is integrated with classical Runge-Kutta up to the
/// age a_m where s(a_m) = m, together with int mu da and int beta e^{-int mu} da.
struct AgeFormCheck {
  double R_size = 0.0;
  double R_age = 0.0;
  double L_size = 0.0;
  double L_age = 0.0;
  double age_at_max_size = 0.0;
};

AgeFormCheck age_form_crosscheck(const ModelIngredients& model, double P,
                                 const Quadrature& quad = {}, int rk_steps = 4096);

/// Q_C(P) from the age form int (C/P + beta) e^{-int mu} da.
double net_growth_age_form(const ModelIngredients& model, double C, double P,
                           const Quadrature& quad = {});

}  // namespace sspop
