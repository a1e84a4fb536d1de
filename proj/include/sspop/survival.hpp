#pragma once

// Tabulated survival pi(s, P) = exp(-int_0^s (gamma_s + mu)/gamma dr) at a
// fixed P. Shared by the equilibrium and spectral computations.

#include "sspop/model.hpp"

#include <vector>

namespace sspop {

/// (gamma_s + mu) / gamma at (s, P); throws ModelViolation when gamma <= 0.
double survival_hazard(const ModelIngredients& model, double s, double P);

/// 1 / gamma at (s, P); throws ModelViolation when gamma <= 0.
double inverse_growth(const ModelIngredients& model, double s, double P);

struct SurvivalTable {
  double m = 0.0;
  double P = 0.0;
  int cells = 0;
  double h = 0.0;
  std::vector<double> s;         ///< cells + 1 uniform nodes on [0, m]
  std::vector<double> exponent;  ///< int_0^s (gamma_s + mu)/gamma
  std::vector<double> pi;        ///< exp(-exponent)

  /// int_0^m pi ds on the tabulated nodes.
  double pi_integral() const;
};

SurvivalTable survival_table(const ModelIngredients& model, double P, int cells);

}  // namespace sspop
