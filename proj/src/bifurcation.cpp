#include "sspop/bifurcation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sspop {

int DiagramEntry::positive_count() const {
  return static_cast<int>(std::count_if(points.begin(), points.end(), [](const BranchPoint& p) { return !p.trivial; }));
}

double inflow_on_curve(const ModelIngredients& model, double P, const Quadrature& quad) {
  const GrowthTerms t = growth_terms(model, P, quad);
  return P * (1.0 - t.R) / t.L;
}

namespace {

double inflow_slope(const ModelIngredients& model, double P, const Quadrature& quad) {
  const GrowthTerms t = growth_terms(model, P, quad);
  const GrowthSlopes d = growth_slopes(model, P, quad);
  return ((1.0 - t.R - P * d.R_prime) * t.L - P * (1.0 - t.R) * d.L_prime) / (t.L * t.L);
}

Stability trivial_classification(const ModelIngredients& model, const Quadrature& quad, double tol) {
  const double R0 = net_reproduction(model, 0.0, quad);
  if (R0 < 1.0 - tol) return Stability::LinearlyStable;
  if (R0 > 1.0 + tol) return Stability::LinearlyUnstable;
  return Stability::MarginalZeroEigenvalue;
}

}  // namespace

std::vector<Fold> locate_folds(const ModelIngredients& model, double C_lo, double C_hi, double P_lo, double P_hi,
                               const BifurcationOptions& options) {
  if (!(C_lo <= C_hi)) throw std::invalid_argument(fmt::format("fold window needs C_lo <= C_hi, got [{}, {}]", C_lo, C_hi));
  if (!(P_lo > 0.0 && P_lo < P_hi))
    throw DomainError(fmt::format("fold window needs 0 < P_lo < P_hi, got [{}, {}]", P_lo, P_hi));
  const Quadrature& quad = options.equilibrium.quad;
  auto g = [&](double P) {
    try {
      return inflow_slope(model, P, quad);
    } catch (const NumericError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  RootScanConfig cfg = options.equilibrium.scan;
  cfg.scan_points = options.fold_scan_points;
  cfg.abs_tol = 1e-12;
  const RootScan scan = find_roots(g, P_lo, P_hi, cfg);

  std::vector<Fold> folds;
  const double slack = 1e-9;
  for (const Root& root : scan.roots) {
    if (root.tangent) continue;  // inflection of C(P), not a turning point
    Fold f;
    f.P_fold = root.x;
    f.C_star = inflow_on_curve(model, f.P_fold, quad);
    if (f.C_star < C_lo - slack || f.C_star > C_hi + slack || f.C_star < -slack) continue;
    f.C_star = std::max(f.C_star, 0.0);
    f.residual = std::abs(net_growth(model, f.C_star, f.P_fold, quad) - 1.0);
    f.slope = net_growth_derivative(model, f.C_star, f.P_fold, quad);
    folds.push_back(f);
  }
  std::sort(folds.begin(), folds.end(), [](const Fold& a, const Fold& b) { return a.C_star < b.C_star; });
  return folds;
}

Fold locate_fold(const ModelIngredients& model, double C_lo, double C_hi, double P_lo, double P_hi,
                 const BifurcationOptions& options) {
  const std::vector<Fold> folds = locate_folds(model, C_lo, C_hi, P_lo, P_hi, options);
  if (folds.empty()) throw NoFoldError("no fold in window");
  const double slack = 1e-9;
  for (const Fold& f : folds)
    if (f.C_star > C_lo + slack && f.C_star < C_hi - slack) return f;
  return folds.front();
}

BifurcationDiagram sweep(const ModelIngredients& model, const std::vector<double>& C_values,
                         const BifurcationOptions& options) {
  for (std::size_t k = 0; k < C_values.size(); ++k) {
    checked_inflow(C_values[k]);
    if (k > 0 && !(C_values[k] > C_values[k - 1]))
      throw std::invalid_argument("sweep: C values must be strictly increasing");
  }
  BifurcationDiagram diagram;
  GrowthMemo memo(model, options.equilibrium.quad);
  const double tol = options.spectral.tol_margin;

  for (double C : C_values) {
    DiagramEntry entry;
    entry.C = C;
    try {
      const EquilibriumSet set = find_equilibria(model, C, options.P_lo, options.P_hi, options.equilibrium, &memo);
      if (set.trivial) {
        BranchPoint p;
        p.trivial = true;
        try {
          p.classification = trivial_classification(model, options.equilibrium.quad, tol);
        } catch (const std::exception& e) {
          p.error = e.what();
        }
        entry.points.push_back(p);
      }
      for (const EquilibriumPoint& eq : set.positive) {
        BranchPoint p;
        p.P_star = eq.P_star;
        p.tangent = eq.tangent;
        p.dQ = eq.dQ;
        try {
          const LinearisationData lin = linearise(model, eq, options.spectral.quad.panel_count);
          p.classification = classify_by_slope(eq.dQ, check_positivity(lin), tol);
        } catch (const std::exception& e) {
          p.error = e.what();
        }
        entry.points.push_back(p);
      }
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    diagram.entries.push_back(std::move(entry));
  }

  for (std::size_t k = 0; k + 1 < diagram.entries.size(); ++k) {
    const DiagramEntry& a = diagram.entries[k];
    const DiagramEntry& b = diagram.entries[k + 1];
    if (!a.error.empty() || !b.error.empty() || a.positive_count() == b.positive_count()) continue;
    std::vector<Fold> found;
    try {
      found = locate_folds(model, a.C, b.C, options.P_lo, options.P_hi, options);
    } catch (const std::exception&) {
      continue;
    }
    for (const Fold& f : found) {
      const bool seen = std::any_of(diagram.folds.begin(), diagram.folds.end(), [&](const Fold& g) {
        return std::abs(g.C_star - f.C_star) <= 1e-9 && std::abs(g.P_fold - f.P_fold) <= 1e-6;
      });
      if (!seen) diagram.folds.push_back(f);
    }
  }
  diagram.branches = assemble_branches(diagram.entries);
  return diagram;
}

std::vector<BranchTrace> assemble_branches(const std::vector<DiagramEntry>& entries, double max_jump) {
  std::vector<BranchTrace> traces;
  std::vector<std::size_t> open;  // trace indices continued by the previous entry
  for (const DiagramEntry& entry : entries) {
    struct Link {
      double distance;
      std::size_t open_slot;
      std::size_t point;
    };
    std::vector<Link> links;
    for (std::size_t o = 0; o < open.size(); ++o)
      for (std::size_t i = 0; i < entry.points.size(); ++i) {
        const double d = std::abs(traces[open[o]].P.back() - entry.points[i].P_star);
        if (d <= max_jump) links.push_back({d, o, i});
      }
    std::stable_sort(links.begin(), links.end(), [](const Link& x, const Link& y) { return x.distance < y.distance; });

    std::vector<bool> slot_used(open.size(), false);
    std::vector<long> assigned(entry.points.size(), -1);
    for (const Link& l : links) {
      if (slot_used[l.open_slot] || assigned[l.point] >= 0) continue;
      slot_used[l.open_slot] = true;
      assigned[l.point] = static_cast<long>(open[l.open_slot]);
    }
    std::vector<std::size_t> next_open;
    for (std::size_t i = 0; i < entry.points.size(); ++i) {
      std::size_t t;
      if (assigned[i] >= 0) {
        t = static_cast<std::size_t>(assigned[i]);
      } else {
        t = traces.size();
        traces.emplace_back();
      }
      traces[t].C.push_back(entry.C);
      traces[t].P.push_back(entry.points[i].P_star);
      traces[t].classification.push_back(entry.points[i].classification);
      next_open.push_back(t);
    }
    open = std::move(next_open);
  }
  return traces;
}

}  // namespace sspop
