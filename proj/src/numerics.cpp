#include "sspop/numerics.hpp"

#include <algorithm>
#include <cstdio>

namespace sspop {

namespace detail {

void throw_non_finite(const char* what, double x, double value) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "non-finite %s value %g at x = %.17g", what, value, x);
  throw NumericError(buf);
}

}  // namespace detail

void Quadrature::validate() const {
  if (panel_count < 2 || panel_count % 2 != 0)
    throw std::invalid_argument("Quadrature: panel_count must be even and >= 2, got " +
                                std::to_string(panel_count));
}

void RootScanConfig::validate() const {
  if (scan_points < 2) throw std::invalid_argument("RootScanConfig: scan_points must be >= 2");
  if (!(abs_tol > 0.0)) throw std::invalid_argument("RootScanConfig: abs_tol must be > 0");
  if (max_bisect_iters < 1) throw std::invalid_argument("RootScanConfig: max_bisect_iters must be >= 1");
}

double integrate_samples(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  if (n < 2) return 0.0;
  const std::size_t cells = n - 1;
  if (cells == 1) return 0.5 * h * (y[0] + y[1]);

  auto simpson = [&](std::size_t first, std::size_t last) {
    // last - first is even
    double s = y[first] + y[last];
    for (std::size_t k = first + 1; k < last; ++k) s += ((k - first) % 2 ? 4.0 : 2.0) * y[k];
    return h / 3.0 * s;
  };
  if (cells % 2 == 0) return simpson(0, cells);
  // odd: Simpson up to cells - 3, then the 3/8 rule on the last three cells
  const std::size_t k = cells - 3;
  const double tail = 3.0 * h / 8.0 * (y[k] + 3.0 * y[k + 1] + 3.0 * y[k + 2] + y[k + 3]);
  return (k > 0 ? simpson(0, k) : 0.0) + tail;
}

std::vector<double> cumulative_samples(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  if (n < 4) {
    for (std::size_t k = 1; k < n; ++k) out[k] = out[k - 1] + 0.5 * h * (y[k - 1] + y[k]);
    return out;
  }
  const double w = h / 24.0;
  out[1] = w * (9.0 * y[0] + 19.0 * y[1] - 5.0 * y[2] + y[3]);
  for (std::size_t k = 1; k + 2 < n; ++k)
    out[k + 1] = out[k] + w * (-y[k - 1] + 13.0 * y[k] + 13.0 * y[k + 1] - y[k + 2]);
  out[n - 1] = out[n - 2] + w * (y[n - 4] - 5.0 * y[n - 3] + 19.0 * y[n - 2] + 9.0 * y[n - 1]);
  return out;
}

double trapezoid_samples(std::span<const double> y, double h) {
  if (y.size() < 2) return 0.0;
  double s = 0.5 * (y.front() + y.back());
  for (std::size_t k = 1; k + 1 < y.size(); ++k) s += y[k];
  return h * s;
}

double derivative(const ScalarFunction& f, double x) {
  const double h = 1e-6 * std::max(1.0, std::abs(x));
  const double fp = f(x + h);
  if (!std::isfinite(fp)) detail::throw_non_finite("derivative sample (x+h)", x + h, fp);
  const double fm = f(x - h);
  if (!std::isfinite(fm)) detail::throw_non_finite("derivative sample (x-h)", x - h, fm);
  return (fp - fm) / (2.0 * h);
}

namespace {

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

Root bisect_bracket(const ScalarFunction& g, double a, double ga, double b,
                    const RootScanConfig& cfg) {
  for (int it = 0; it < cfg.max_bisect_iters && (b - a) > cfg.abs_tol; ++it) {
    const double mid = 0.5 * (a + b);
    const double gm = g(mid);
    if (!std::isfinite(gm)) detail::throw_non_finite("function (bisection)", mid, gm);
    if (gm == 0.0) return {mid, false, mid, mid};
    if (sign_of(gm) == sign_of(ga)) {
      a = mid;
      ga = gm;
    } else {
      b = mid;
    }
  }
  return {0.5 * (a + b), false, a, b};
}

// Extremum of g inside [a, b], located as a sign change of the derivative.
// Falls back to golden-section search on s * g when g' does not straddle zero.
double locate_extremum(const ScalarFunction& g, const ScalarFunction& dg, double a, double b,
                       int s, const RootScanConfig& cfg) {
  auto slope = [&](double x) { return dg ? dg(x) : derivative(g, x); };
  double da = slope(a);
  const double db = slope(b);
  if (sign_of(da) != 0 && sign_of(db) != 0 && sign_of(da) != sign_of(db)) {
    for (int it = 0; it < cfg.max_bisect_iters && (b - a) > cfg.abs_tol; ++it) {
      const double mid = 0.5 * (a + b);
      const double dm = slope(mid);
      if (dm == 0.0) return mid;
      if (sign_of(dm) == sign_of(da)) {
        a = mid;
        da = dm;
      } else {
        b = mid;
      }
    }
    return 0.5 * (a + b);
  }
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = s * g(c);
  double fd = s * g(d);
  for (int it = 0; it < cfg.max_bisect_iters && (b - a) > cfg.abs_tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = s * g(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = s * g(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

Root bisect(const ScalarFunction& g, double a, double b, const RootScanConfig& cfg) {
  cfg.validate();
  if (a > b) std::swap(a, b);
  const double ga = g(a);
  const double gb = g(b);
  if (!std::isfinite(ga)) detail::throw_non_finite("function (bracket)", a, ga);
  if (!std::isfinite(gb)) detail::throw_non_finite("function (bracket)", b, gb);
  if (ga == 0.0) return {a, false, a, a};
  if (gb == 0.0) return {b, false, b, b};
  if (sign_of(ga) == sign_of(gb)) throw NumericError("bisect: interval does not bracket a root");
  return bisect_bracket(g, a, ga, b, cfg);
}

RootScan find_roots(const ScalarFunction& g, double lo, double hi, const RootScanConfig& cfg,
                    const ScalarFunction& dg) {
  cfg.validate();
  if (!(lo < hi)) throw std::invalid_argument("find_roots: requires lo < hi");

  const int n = cfg.scan_points;
  std::vector<double> xs(n);
  std::vector<double> gs(n);
  std::vector<char> finite(n);
  RootScan out;
  for (int k = 0; k < n; ++k) {
    xs[k] = (k == n - 1) ? hi : lo + (hi - lo) * k / (n - 1);
    gs[k] = g(xs[k]);
    finite[k] = std::isfinite(gs[k]);
    if (!finite[k]) out.skipped.push_back(xs[k]);
  }

  std::vector<Root>& roots = out.roots;

  // Exact zeros at nodes and sign changes between consecutive finite nodes.
  int prev = -1;
  for (int k = 0; k < n; ++k) {
    if (!finite[k]) continue;
    if (gs[k] == 0.0) {
      int left = k - 1;
      while (left >= 0 && !finite[left]) --left;
      int right = k + 1;
      while (right < n && !finite[right]) ++right;
      const bool touch = left >= 0 && right < n && sign_of(gs[left]) != 0 &&
                         sign_of(gs[left]) == sign_of(gs[right]);
      roots.push_back({xs[k], touch, xs[k], xs[k]});
    } else if (prev >= 0 && gs[prev] != 0.0 && sign_of(gs[prev]) != sign_of(gs[k])) {
      roots.push_back(bisect_bracket(g, xs[prev], gs[prev], xs[k], cfg));
    }
    prev = k;
  }

  // Tangency candidates: local minima of |g| without a sign change.
  const double near = std::sqrt(cfg.abs_tol);
  for (int k = 1; k + 1 < n; ++k) {
    if (!finite[k - 1] || !finite[k] || !finite[k + 1]) continue;
    const double gl = gs[k - 1], gc = gs[k], gr = gs[k + 1];
    const int s = sign_of(gc);
    if (s == 0 || sign_of(gl) != s || sign_of(gr) != s) continue;
    if (!(std::abs(gc) <= std::abs(gl) && std::abs(gc) < std::abs(gr))) continue;
    const double curvature = gr - 2.0 * gc + gl;
    double vertex = gc;
    if (curvature != 0.0) vertex = gc - (gr - gl) * (gr - gl) / (8.0 * curvature);
    if (!(std::abs(gc) < near || std::abs(vertex) < near || sign_of(vertex) != s)) continue;

    const double xe = locate_extremum(g, dg, xs[k - 1], xs[k + 1], s, cfg);
    const double ge = g(xe);
    if (!std::isfinite(ge)) detail::throw_non_finite("function (extremum)", xe, ge);
    if (sign_of(ge) == -s) {
      roots.push_back(bisect_bracket(g, xs[k - 1], gl, xe, cfg));
      roots.push_back(bisect_bracket(g, xe, ge, xs[k + 1], cfg));
    } else if (std::abs(ge) <= cfg.abs_tol) {
      roots.push_back({xe, true, xe, xe});
    }
  }

  std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) { return a.x < b.x; });
  std::vector<Root> unique;
  for (const Root& r : roots) {
    if (!unique.empty() && std::abs(r.x - unique.back().x) <= 10.0 * cfg.abs_tol) {
      unique.back().tangent = unique.back().tangent || r.tangent;
      continue;
    }
    unique.push_back(r);
  }
  roots = std::move(unique);
  return out;
}

}  // namespace sspop
