#pragma once

// Explicit first-order upwind integration of the size-structured PDE with the
// nonlocal birth boundary condition and constant inflow C.

#include "sspop/equilibrium.hpp"
#include "sspop/model.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace sspop {

/// Discretisation of the death term in the upwind update.
enum class MortalityScheme {
  CellAverage,  ///< dt (mu_i p_i + mu_{i-1} p_{i-1}) / 2
  Node,         ///< dt mu_i p_i
};

struct SimulationConfig {
  ModelIngredients model;
  double C = 0.0;
  SizeGrid grid;
  double T_final = 100.0;
  double cfl = 0.9;
  double output_every = 1.0;
  bool record_density = false;
  MortalityScheme mortality = MortalityScheme::CellAverage;

  void validate() const;
};

struct SimulationState {
  double t = 0.0;
  std::vector<double> density;  ///< p(s_i, t) on the grid nodes
  double P = 0.0;               ///< trapezoid integral of density
};

struct StepResult {
  SimulationState state;
  double dt = 0.0;
  double balance_rhs = 0.0;       ///< C + int (beta - mu) p - gamma(m) p(m) at the step start
  double balance_residual = 0.0;  ///< |(P_new - P) / dt - balance_rhs|
};

/// CFL step cfl * h / max_i gamma(s_i, P).
double stable_dt(const SimulationState& state, const SimulationConfig& config);

/// One upwind step of length min(stable_dt, max_dt).
StepResult step(const SimulationState& state, const SimulationConfig& config,
                double max_dt = std::numeric_limits<double>::infinity());

struct TrajectorySample {
  double t = 0.0;
  double P = 0.0;
  std::optional<std::vector<double>> density;
};

struct Trajectory {
  std::vector<double> s;
  std::vector<TrajectorySample> samples;
  /// Per sample: |P(t_k) - P(t_{k-1}) - sum of balance_rhs dt| / (t_k - t_{k-1}); 0 for the first.
  std::vector<double> balance_residuals;
  SimulationState final_state;
  long steps = 0;
  double min_density = 0.0;

  double max_balance_residual() const;
};

SimulationState initial_state(const SimulationConfig& config, std::vector<double> density);

Trajectory simulate(const SimulationConfig& config, const std::vector<double>& initial);

}  // namespace sspop
