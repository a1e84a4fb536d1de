#include "sspop/spectral.hpp"

#include "sspop/survival.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sspop {

namespace {

// Running integral int_0^{s_k} exp(-(Phi(s_k) - Phi(y))) w(y) dy at the even
// nodes, advanced cell by cell so that no factor exp(+Phi) is ever formed.
std::vector<double> damped_cumulative(const std::vector<double>& phi, const std::vector<double>& w,
                                      double h) {
  const std::size_t coarse = (phi.size() - 1) / 2;
  std::vector<double> out(coarse + 1, 0.0);
  for (std::size_t k = 0; k < coarse; ++k) {
    const std::size_t a = 2 * k;
    const double d2 = std::exp(-(phi[a + 2] - phi[a]));
    const double d1 = std::exp(-(phi[a + 2] - phi[a + 1]));
    out[k + 1] = d2 * out[k] + (2.0 * h / 6.0) * (d2 * w[a] + 4.0 * d1 * w[a + 1] + w[a + 2]);
  }
  return out;
}

std::vector<double> even_nodes(const std::vector<double>& v) {
  std::vector<double> out((v.size() + 1) / 2);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = v[2 * k];
  return out;
}

double coarse_integral(const std::vector<double>& v, double h) { return integrate_samples(v, 2.0 * h); }

void require_finite(const std::vector<double>& v, const char* what, const std::vector<double>& s) {
  for (std::size_t j = 0; j < v.size(); ++j)
    if (!std::isfinite(v[j])) detail::throw_non_finite(what, s[j], v[j]);
}

}  // namespace

LinearisationData linearise(const ModelIngredients& model, const EquilibriumPoint& eq, int cells) {
  if (cells < 1) throw std::invalid_argument("linearise: cells must be >= 1");
  if (!(eq.P_star > 0.0)) throw DomainError(fmt::format("linearise needs P* > 0, got {}", eq.P_star));
  const double P = eq.P_star;
  const int fine = 2 * cells;

  LinearisationData lin;
  lin.m = model.m;
  lin.P_star = P;
  lin.C = eq.C;
  lin.cells = cells;
  lin.h = model.m / fine;

  lin.exponent = cumulative_integral([&](double s) { return survival_hazard(model, s, P); }, 0.0, model.m, fine);
  lin.age = cumulative_integral([&](double s) { return inverse_growth(model, s, P); }, 0.0, model.m, fine);
  lin.hazard_P = cumulative_integral(
      [&](double s) {
        const double g = model.gamma(s, P);
        return (model.gamma_sP(s, P) + model.mu_P(s, P)) / g -
               (model.gamma_s(s, P) + model.mu(s, P)) * model.gamma_P(s, P) / (g * g);
      },
      0.0, model.m, fine);

  const std::size_t n = static_cast<std::size_t>(fine) + 1;
  lin.s.resize(n);
  lin.pi.resize(n);
  lin.gamma.resize(n);
  lin.beta.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = (j + 1 == n) ? model.m : j * lin.h;
    lin.s[j] = s;
    lin.pi[j] = std::exp(-lin.exponent[j]);
    lin.gamma[j] = model.gamma(s, P);
    lin.beta[j] = model.beta(s, P);
  }
  lin.gamma0 = lin.gamma[0];
  lin.p0 = P / integrate_samples(lin.pi, lin.h);

  lin.p_star.resize(n);
  lin.p_star_prime.resize(n);
  std::vector<double> beta_P_p(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = lin.s[j];
    lin.p_star[j] = lin.p0 * lin.pi[j];
    lin.p_star_prime[j] = -lin.p_star[j] * survival_hazard(model, s, P);
    beta_P_p[j] = model.beta_P(s, P) * lin.p_star[j];
  }
  lin.boundary_shift = -model.gamma_P(0.0, P) * lin.p0 + integrate_samples(beta_P_p, lin.h);

  lin.b.resize(n);
  lin.rho_star.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = lin.s[j];
    lin.b[j] = (lin.beta[j] + lin.boundary_shift) / lin.gamma0;
    lin.rho_star[j] = -(model.gamma_sP(s, P) * lin.p_star[j] + model.mu_P(s, P) * lin.p_star[j] +
                        model.gamma_P(s, P) * lin.p_star_prime[j]);
  }
  require_finite(lin.b, "b", lin.s);
  require_finite(lin.rho_star, "rho*", lin.s);
  return lin;
}

PositivityCheck check_positivity(const LinearisationData& lin) {
  PositivityCheck out;
  out.margin1 = std::numeric_limits<double>::infinity();
  out.margin2 = std::numeric_limits<double>::infinity();
  std::vector<double> nested(lin.s.size());
  for (std::size_t j = 0; j < lin.s.size(); ++j) {
    out.margin1 = std::min(out.margin1, lin.beta[j] + lin.boundary_shift);
    out.margin2 = std::min(out.margin2, lin.rho_star[j]);
    nested[j] = lin.p_star[j] * lin.hazard_P[j];
  }
  out.margin3 = integrate_samples(nested, lin.h) + 1.0;
  out.poscond1 = out.margin1 >= -1e-12;
  out.poscond2 = out.margin2 >= -1e-12;
  out.posstrict3 = out.margin3 >= 0.0;
  return out;
}

double characteristic_K(const LinearisationData& lin, double lambda) {
  if (!std::isfinite(lambda)) throw DomainError(fmt::format("characteristic_K: lambda = {} is not finite", lambda));
  const std::size_t n = lin.s.size();
  std::vector<double> phi(n);
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    phi[j] = lin.exponent[j] + lambda * lin.age[j];
    w[j] = lin.rho_star[j] / lin.gamma[j];
  }
  const std::size_t coarse = static_cast<std::size_t>(lin.cells) + 1;
  std::vector<double> f(coarse);
  std::vector<double> fb(coarse);
  for (std::size_t k = 0; k < coarse; ++k) {
    f[k] = std::exp(-phi[2 * k]);
    if (!std::isfinite(f[k]))
      throw NumericError(fmt::format("f(lambda, s) exceeds the representable range at lambda = {} (s = {})",
                                     lambda, lin.s[2 * k]));
    fb[k] = f[k] * lin.b[2 * k];
  }
  const std::vector<double> H = damped_cumulative(phi, w, lin.h);
  std::vector<double> bH(coarse);
  for (std::size_t k = 0; k < coarse; ++k) bH[k] = lin.b[2 * k] * H[k];

  const double A = coarse_integral(f, lin.h);
  const double B = coarse_integral(fb, lin.h);
  const double J = coarse_integral(H, lin.h);
  const double M = coarse_integral(bH, lin.h);
  const double K = B * (1.0 - J) + J + A * M;
  if (!std::isfinite(K)) throw NumericError(fmt::format("K({}) is not finite", lambda));
  return K;
}

std::optional<double> dominant_real_eigenvalue(const LinearisationData& lin, const SpectralOptions& options) {
  if (!(options.lambda_lo < options.lambda_hi))
    throw std::invalid_argument("dominant_real_eigenvalue: lambda_lo must be < lambda_hi");
  auto g = [&](double lambda) {
    try {
      return characteristic_K(lin, lambda) - 1.0;
    } catch (const NumericError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  const RootScan scan = find_roots(g, options.lambda_lo, options.lambda_hi, options.scan);
  if (scan.roots.empty()) return std::nullopt;
  return scan.roots.back().x;
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::LinearlyStable: return "LinearlyStable";
    case Stability::LinearlyUnstable: return "LinearlyUnstable";
    case Stability::MarginalZeroEigenvalue: return "MarginalZeroEigenvalue";
    case Stability::IndeterminatePositivityFails: return "IndeterminatePositivityFails";
  }
  return "unknown";
}

Stability classify_by_slope(double dQ, const PositivityCheck& positivity, double tol_margin) {
  if (dQ > tol_margin) return Stability::LinearlyUnstable;
  if (std::abs(dQ) <= tol_margin) return Stability::MarginalZeroEigenvalue;
  if (positivity.poscond1 && positivity.poscond2 && positivity.posstrict3) return Stability::LinearlyStable;
  return Stability::IndeterminatePositivityFails;
}

StabilityReport classify(const ModelIngredients& model, const EquilibriumPoint& eq, const SpectralOptions& options) {
  options.quad.validate();
  const LinearisationData lin = linearise(model, eq, options.quad.panel_count);
  StabilityReport report;
  report.positivity = check_positivity(lin);
  report.K0 = characteristic_K(lin, 0.0);
  report.dQ = eq.dQ;
  report.identity_residual = std::abs(report.K0 - (eq.P_star * eq.dQ + 1.0));
  if (options.compute_eigenvalue) report.dominant_real_eigenvalue = dominant_real_eigenvalue(lin, options);
  report.classification = classify_by_slope(eq.dQ, report.positivity, options.tol_margin);
  return report;
}

std::vector<double> normalize_l1(std::vector<double> v, double h) {
  std::vector<double> mag(v.size());
  std::transform(v.begin(), v.end(), mag.begin(), [](double x) { return std::abs(x); });
  const double norm = integrate_samples(mag, h);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericError("normalize_l1: zero or non-finite norm");
  for (double& x : v) x /= norm;
  return v;
}

CenterEigenfunction center_eigenfunction(const ModelIngredients& model, const EquilibriumPoint& eq,
                                         const SpectralOptions& options) {
  const int cells = eq.profile.size() > 1 ? static_cast<int>(eq.profile.size()) - 1 : options.quad.panel_count;
  const LinearisationData lin = linearise(model, eq, cells);
  const double h2 = 2.0 * lin.h;

  std::vector<double> w(lin.s.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = lin.rho_star[j] / lin.gamma[j];
  // F int_0^s G/(gamma F) with G = -rho*
  const std::vector<double> H = damped_cumulative(lin.exponent, w, lin.h);
  const std::vector<double> F = even_nodes(lin.pi);
  const std::vector<double> b = even_nodes(lin.b);

  const double c = (1.0 - coarse_integral(H, lin.h)) / coarse_integral(F, lin.h);
  std::vector<double> u(F.size());
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = c * F[k] + H[k];

  std::vector<double> bu(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) bu[k] = b[k] * u[k];
  const double boundary = integrate_samples(bu, h2);
  const double total = integrate_samples(u, h2);
  std::vector<double> defect(u.size());
  std::vector<double> mag(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    defect[k] = std::abs(u[k] - (boundary * F[k] + total * H[k]));
    mag[k] = std::abs(u[k]);
  }

  CenterEigenfunction out;
  out.s = even_nodes(lin.s);
  out.residual = integrate_samples(defect, h2) / integrate_samples(mag, h2);
  out.u = normalize_l1(std::move(u), h2);
  out.marginal = std::abs(eq.dQ) <= options.tol_margin;
  if (!out.marginal)
    out.warning = fmt::format("Q'_C(P*) = {} is not marginal; zero is not an eigenvalue and the function is formal",
                              eq.dQ);
  return out;
}

MarginalDiagnosis marginal_diagnosis(const ModelIngredients& model, const EquilibriumPoint& eq,
                                     const SpectralOptions& options) {
  options.quad.validate();
  const LinearisationData lin = linearise(model, eq, options.quad.panel_count);
  const double P = eq.P_star;
  const std::size_t n = lin.s.size();
  std::vector<double> beta_PP_pi(n), beta_P_pi(n), beta_PP_p(n), ones(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = lin.s[j];
    const double scale = 1e-12 * std::max(1.0, std::abs(lin.gamma[j]));
    if (std::abs(model.mu_P(s, P)) > 1e-12 || std::abs(model.gamma_P(s, P)) > scale ||
        std::abs(model.gamma_sP(s, P)) > scale)
      throw UnsupportedCase(
          fmt::format("marginal diagnosis needs mu and gamma independent of P (violated at s = {})", s));
    beta_PP_pi[j] = model.beta_PP(s, P) * lin.pi[j];
    beta_P_pi[j] = model.beta_P(s, P) * lin.pi[j];
    beta_PP_p[j] = model.beta_PP(s, P) * lin.p_star[j];
  }

  MarginalDiagnosis out;
  out.Rpp = integrate_samples(beta_PP_pi, lin.h) / lin.gamma0;
  out.R_prime = integrate_samples(beta_P_pi, lin.h) / lin.gamma0;
  const std::vector<double> D = damped_cumulative(lin.exponent, ones, lin.h);
  std::vector<double> beta_D(D.size());
  for (std::size_t k = 0; k < D.size(); ++k) beta_D[k] = lin.beta[2 * k] * D[k];
  out.growth_integral = coarse_integral(beta_D, lin.h);
  out.curvature_integral = integrate_samples(beta_PP_p, lin.h);

  const double product = out.growth_integral * out.curvature_integral;
  if (std::abs(out.Rpp) <= 1e-12 || product == 0.0) {
    out.one_sided_sign = 0;
    out.verdict = "inconclusive (degenerate)";
  } else {
    out.one_sided_sign = product > 0.0 ? -1 : 1;
    out.verdict = "nonlinearly unstable";
  }
  if (std::abs(out.R_prime) > options.tol_margin)
    out.warning = fmt::format("R'(P*) = {} exceeds tol_margin; the equilibrium is not marginal", out.R_prime);
  return out;
}

}  // namespace sspop
