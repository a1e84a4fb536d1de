#pragma once

// Linearisation about a positive equilibrium, the real characteristic
// function K(lambda), positivity conditions and the stability classifier.

#include "sspop/equilibrium.hpp"
#include "sspop/model.hpp"
#include "sspop/numerics.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sspop {

class UnsupportedCase : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpectralOptions {
  Quadrature quad;
  RootScanConfig scan;
  double tol_margin = 1e-7;
  double lambda_lo = -5.0;
  double lambda_hi = 20.0;
  bool compute_eigenvalue = true;
};

/// Kernels of the linearised problem sampled on 2 * cells + 1 uniform nodes.
/// Even-indexed nodes carry the outer Simpson sums; odd ones are the cell
/// midpoints used by the running inner integrals.
struct LinearisationData {
  double m = 0.0;
  double P_star = 0.0;
  double C = 0.0;
  int cells = 0;
  double h = 0.0;  ///< fine spacing m / (2 cells)

  std::vector<double> s;
  std::vector<double> exponent;  ///< int_0^s (gamma_s + mu)/gamma
  std::vector<double> age;       ///< int_0^s 1/gamma
  std::vector<double> pi;
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> p_star;
  std::vector<double> p_star_prime;
  std::vector<double> b;
  std::vector<double> rho_star;
  std::vector<double> hazard_P;  ///< int_0^s d/dP[(gamma_s + mu)/gamma]

  double gamma0 = 0.0;
  double p0 = 0.0;
  double boundary_shift = 0.0;  ///< -gamma_P(0) p0 + int beta_P p*
};

LinearisationData linearise(const ModelIngredients& model, const EquilibriumPoint& eq, int cells = 4096);

struct PositivityCheck {
  bool poscond1 = false;
  bool poscond2 = false;
  bool posstrict3 = false;
  double margin1 = 0.0;  ///< min_s of beta - gamma_P(0) p0 + int beta_P p*
  double margin2 = 0.0;  ///< min_s rho*
  double margin3 = 0.0;  ///< left side of the nested condition, plus 1
};

PositivityCheck check_positivity(const LinearisationData& lin);

/// K(lambda) for real lambda. Throws NumericError if f(lambda, .) overflows.
double characteristic_K(const LinearisationData& lin, double lambda);

/// Largest real root of K(lambda) = 1 in [lambda_lo, lambda_hi], if any.
std::optional<double> dominant_real_eigenvalue(const LinearisationData& lin,
                                               const SpectralOptions& options = {});

enum class Stability { LinearlyStable, LinearlyUnstable, MarginalZeroEigenvalue, IndeterminatePositivityFails };

std::string to_string(Stability s);

struct StabilityReport {
  PositivityCheck positivity;
  double K0 = 0.0;
  double dQ = 0.0;
  double identity_residual = 0.0;  ///< |K(0) - (P* dQ + 1)|
  std::optional<double> dominant_real_eigenvalue;
  Stability classification = Stability::IndeterminatePositivityFails;
};

/// Classification rule shared by classify and the bifurcation sweep.
Stability classify_by_slope(double dQ, const PositivityCheck& positivity, double tol_margin);

StabilityReport classify(const ModelIngredients& model, const EquilibriumPoint& eq,
                         const SpectralOptions& options = {});

struct CenterEigenfunction {
  std::vector<double> s;
  std::vector<double> u;    ///< unit L1 norm
  double residual = 0.0;    ///< relative L1 defect of the lambda = 0 eigen relation
  bool marginal = true;
  std::string warning;
};

/// Spanning function of the kernel of the linearised operator, on the
/// equilibrium's size grid.
CenterEigenfunction center_eigenfunction(const ModelIngredients& model, const EquilibriumPoint& eq,
                                         const SpectralOptions& options = {});

/// Divides v by its L1 norm on a grid of spacing h.
std::vector<double> normalize_l1(std::vector<double> v, double h);

struct MarginalDiagnosis {
  double Rpp = 0.0;
  double R_prime = 0.0;
  double growth_integral = 0.0;     ///< int beta F int_0^s 1/F
  double curvature_integral = 0.0;  ///< int beta_PP p*
  int one_sided_sign = 0;           ///< sign of epsilon admitting real solutions; 0 if degenerate
  std::string verdict;
  std::string warning;
};

/// Quadratic boundary analysis for mu = mu(s), gamma = gamma(s). Throws
/// UnsupportedCase when mu or gamma depend on P.
MarginalDiagnosis marginal_diagnosis(const ModelIngredients& model, const EquilibriumPoint& eq,
                                     const SpectralOptions& options = {});

}  // namespace sspop
