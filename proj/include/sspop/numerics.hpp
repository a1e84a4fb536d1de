#pragma once

// Quadrature, bracketing root search and finite differences shared by the
// analysis modules. Everything here is a pure function of its arguments.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sspop {

/// Raised when a numerical kernel meets a non-finite value or cannot proceed.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Composite Simpson rule with a fixed number of panels.
struct Quadrature {
  int panel_count = 4096;

  /// Throws std::invalid_argument unless panel_count is even and >= 2.
  void validate() const;
};

struct RootScanConfig {
  int scan_points = 2000;
  double abs_tol = 1e-10;
  int max_bisect_iters = 200;

  void validate() const;
};

struct Root {
  double x = 0.0;
  /// Set when g touches zero without changing sign (double root).
  bool tangent = false;
  /// Final bracket around x.
  double lo = 0.0;
  double hi = 0.0;
};

struct RootScan {
  std::vector<Root> roots;
  /// Scan nodes where g was not finite; they are skipped, not fatal.
  std::vector<double> skipped;
};

using ScalarFunction = std::function<double(double)>;

namespace detail {
[[noreturn]] void throw_non_finite(const char* what, double x, double value);
}  // namespace detail

/// Composite Simpson approximation of the integral of f over [a, b].
template <class F>
double integrate(F&& f, double a, double b, const Quadrature& q = {}) {
  q.validate();
  if (!(a <= b)) throw std::invalid_argument("integrate: requires a <= b");
  if (a == b) return 0.0;
  const int n = q.panel_count;
  const double h = (b - a) / n;
  auto eval = [&](double x) {
    const double v = f(x);
    if (!std::isfinite(v)) detail::throw_non_finite("integrand", x, v);
    return v;
  };
  double odd = 0.0;
  double even = 0.0;
  for (int k = 1; k < n; ++k) {
    const double v = eval(a + k * h);
    if (k % 2) odd += v;
    else even += v;
  }
  return h / 3.0 * (eval(a) + eval(b) + 4.0 * odd + 2.0 * even);
}

/// Running integral of f from a, sampled at the cells + 1 uniform nodes of
/// [a, b]. Each cell is integrated by Simpson's rule through its midpoint, so
/// f is evaluated at 2 * cells + 1 points and every node value is O(h^4).
template <class F>
std::vector<double> cumulative_integral(F&& f, double a, double b, int cells) {
  if (cells < 1) throw std::invalid_argument("cumulative_integral: cells must be >= 1");
  if (!(a <= b)) throw std::invalid_argument("cumulative_integral: requires a <= b");
  const double h = (b - a) / cells;
  std::vector<double> out(static_cast<std::size_t>(cells) + 1, 0.0);
  auto eval = [&](double x) {
    const double v = f(x);
    if (!std::isfinite(v)) detail::throw_non_finite("integrand", x, v);
    return v;
  };
  double left = eval(a);
  for (int k = 0; k < cells; ++k) {
    const double x0 = a + k * h;
    const double x1 = (k + 1 == cells) ? b : a + (k + 1) * h;
    const double mid = eval(0.5 * (x0 + x1));
    const double right = eval(x1);
    out[k + 1] = out[k] + (x1 - x0) / 6.0 * (left + 4.0 * mid + right);
    left = right;
  }
  return out;
}

/// Integral of uniformly spaced samples: Simpson for an even cell count,
/// Simpson plus a closing 3/8 panel for an odd count, trapezoid for one cell.
double integrate_samples(std::span<const double> y, double h);

/// Running integral of uniformly spaced samples from the first node, O(h^4):
/// cubic interpolation through four neighbouring nodes on every cell, one-sided
/// at both ends. Fewer than four samples fall back to the trapezoid rule.
std::vector<double> cumulative_samples(std::span<const double> y, double h);

/// Trapezoid rule on uniformly spaced samples.
double trapezoid_samples(std::span<const double> y, double h);

/// All real roots of g in [lo, hi].
///
/// g is sampled on scan_points uniform nodes. Sign changes are refined by
/// bisection to abs_tol. Local minima of |g| whose node value or parabolic
/// vertex lies below sqrt(abs_tol) are treated as tangency candidates: the
/// extremum of g is located by bisection on g' (dg when given, else a central
/// difference), and reported as a tangent root when |g| <= abs_tol there, or
/// split into two crossing roots when g changes sign at the extremum.
/// Roots are sorted and deduplicated within 10 * abs_tol.
RootScan find_roots(const ScalarFunction& g, double lo, double hi,
                    const RootScanConfig& cfg = {}, const ScalarFunction& dg = nullptr);

/// Bisection on [a, b] with g(a), g(b) of opposite sign.
Root bisect(const ScalarFunction& g, double a, double b, const RootScanConfig& cfg = {});

/// Central difference with step 1e-6 * max(1, |x|).
double derivative(const ScalarFunction& f, double x);

}  // namespace sspop
