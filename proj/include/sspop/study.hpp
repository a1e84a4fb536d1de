#pragma once

// The complete worked-example study: equilibria, stability, marginal case,
// folds and the two reference simulations, checked criterion by criterion.

#include "sspop/bifurcation.hpp"
#include "sspop/equilibrium.hpp"
#include "sspop/simulator.hpp"
#include "sspop/spectral.hpp"

#include <string>
#include <vector>

namespace sspop {

struct StudyOptions {
  int N = 1024;
  Quadrature quad;
  RootScanConfig scan;
  double cfl = 0.9;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double limit_seconds = 0.0;
};

struct StudyResult {
  std::vector<CriterionResult> criteria;

  EquilibriumSet equilibria_C0;
  EquilibriumSet equilibria_C02;
  std::vector<StabilityReport> stability_C0;
  std::vector<StabilityReport> stability_C02;
  MarginalDiagnosis marginal;
  Fold fold;
  BifurcationDiagram diagram;
  Trajectory decline;     ///< C = 0 from 1.9 e^{-s}/(1 - e^{-6})
  Trajectory bistable;    ///< C = 0.2 from 0.7 e^{-0.4 s}/(1 - e^{-6})
  Trajectory persistence; ///< C = 0.2 from the upper equilibrium
  std::vector<int> convergence_N;
  std::vector<double> convergence_residual;

  bool all_passed() const;
};

StudyResult run_study(const StudyOptions& options = {});

}  // namespace sspop
