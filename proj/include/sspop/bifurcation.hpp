#pragma once

// Equilibrium branches over the inflow C and their folds.

#include "sspop/equilibrium.hpp"
#include "sspop/model.hpp"
#include "sspop/spectral.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace sspop {

class NoFoldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BifurcationOptions {
  EquilibriumOptions equilibrium;
  SpectralOptions spectral;
  double P_lo = 1e-4;
  double P_hi = 50.0;
  int fold_scan_points = 400;
};

struct BranchPoint {
  double P_star = 0.0;
  Stability classification = Stability::IndeterminatePositivityFails;
  bool tangent = false;
  bool trivial = false;
  double dQ = 0.0;
  std::string error;  ///< non-empty when classification failed
};

struct DiagramEntry {
  double C = 0.0;
  std::vector<BranchPoint> points;  ///< increasing P*, the trivial point first
  std::string error;                ///< non-empty when the root scan failed

  int positive_count() const;
};

struct Fold {
  double C_star = 0.0;
  double P_fold = 0.0;
  double residual = 0.0;  ///< |Q_{C*}(P_fold) - 1|
  double slope = 0.0;     ///< Q'_{C*}(P_fold)
};

struct BranchTrace {
  std::vector<double> C;
  std::vector<double> P;
  std::vector<Stability> classification;
};

struct BifurcationDiagram {
  std::vector<DiagramEntry> entries;
  std::vector<Fold> folds;
  std::vector<BranchTrace> branches;
};

/// C on the equilibrium curve through P: P (1 - R(P)) / L(P).
double inflow_on_curve(const ModelIngredients& model, double P, const Quadrature& quad = {});

/// All folds with C* in [C_lo, C_hi] and P_fold in [P_lo, P_hi], by increasing C*.
/// A fold is an extremum of inflow_on_curve, which is where Q_C = 1 and
/// Q'_C = 0 hold together.
std::vector<Fold> locate_folds(const ModelIngredients& model, double C_lo, double C_hi, double P_lo,
                               double P_hi, const BifurcationOptions& options = {});

/// The fold in the window; interior C* are preferred over C* on the window
/// edge. Throws NoFoldError("no fold in window") when there is none.
Fold locate_fold(const ModelIngredients& model, double C_lo, double C_hi, double P_lo, double P_hi,
                 const BifurcationOptions& options = {});

/// Equilibria and their classification for each C (increasing, nonnegative),
/// with folds refined between consecutive C whose root counts differ.
BifurcationDiagram sweep(const ModelIngredients& model, const std::vector<double>& C_values,
                         const BifurcationOptions& options = {});

/// Joins entries into branches by nearest P, rejecting jumps above max_jump.
std::vector<BranchTrace> assemble_branches(const std::vector<DiagramEntry>& entries, double max_jump = 0.5);

}  // namespace sspop
