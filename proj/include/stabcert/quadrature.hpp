#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "stabcert/types.hpp"

namespace stabcert {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on (-1, 1), ascending
  std::vector<double> weights;  // sum to 2
};

/// Gauss-Legendre nodes/weights by Newton iteration on P_n. Nodes are
/// strictly interior to [-1,1].
inline GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw InvalidInputError("gauss_legendre: n must be >= 1");
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence for P_n(x) and P_n'(x).
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

struct QuadratureResult {
  double value = 0.0;
  bool converged = true;
  long evaluations = 0;
};

namespace detail {

inline double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

inline void adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                 double fa, double fm, double fb, double whole, double tol,
                                 int depth, QuadratureResult& out) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  out.evaluations += 2;
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double delta = left + right - whole;
  if (depth <= 0) {
    out.converged = false;
    out.value += left + right + delta / 15.0;
    return;
  }
  if (std::abs(delta) <= 15.0 * tol) {
    out.value += left + right + delta / 15.0;
    return;
  }
  adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
  adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}

}  // namespace detail

/// Adaptive Simpson quadrature on [a,b] with absolute tolerance.
inline QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a,
                                         double b, double abs_tol, int max_depth = 40) {
  QuadratureResult out;
  if (a == b) return out;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  out.evaluations = 3;
  const double whole = detail::simpson(fa, fm, fb, b - a);
  detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, abs_tol, max_depth, out);
  return out;
}

struct LineIntegralSpec {
  double rel_tol = 1e-7;          // per-panel tolerance relative to running total
  double tail_threshold = 1e-14;  // stop extending when |f| < threshold * peak
  int max_doublings = 64;
  int max_depth = 36;
};

/// Integral of a nonnegative integrand over the whole real line.
/// `breakpoints` seed the core panels (callers put them at known peaks so
/// adaptive refinement cannot step over narrow features); tails are covered
/// by dyadically growing panels until the integrand falls below
/// tail_threshold * peak and panel contributions become negligible.
inline QuadratureResult real_line_integral(const std::function<double(double)>& f,
                                           std::vector<double> breakpoints,
                                           const LineIntegralSpec& spec = {}) {
  QuadratureResult out;
  if (breakpoints.size() < 2) breakpoints = {-1.0, 1.0};
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());

  double peak = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    peak = std::max(peak, f(breakpoints[i]));
    peak = std::max(peak, f(0.5 * (breakpoints[i] + breakpoints[i + 1])));
    out.evaluations += 2;
  }
  peak = std::max(peak, f(breakpoints.back()));
  ++out.evaluations;
  if (peak <= 0.0) return out;

  double total = 0.0;
  bool converged = true;
  const double panel_tol_scale = spec.rel_tol * peak;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i], b = breakpoints[i + 1];
    auto r = adaptive_simpson(f, a, b, panel_tol_scale * std::max(1.0, b - a), spec.max_depth);
    total += r.value;
    converged = converged && r.converged;
    out.evaluations += r.evaluations;
  }

  // Dyadic tail panels on both sides.
  for (int side = 0; side < 2; ++side) {
    double edge = (side == 0) ? breakpoints.back() : breakpoints.front();
    double h = std::max(1.0, std::abs(edge));
    for (int k = 0; k < spec.max_doublings; ++k) {
      const double a = edge, b = (side == 0) ? edge + h : edge - h;
      auto r = adaptive_simpson(f, std::min(a, b), std::max(a, b),
                                panel_tol_scale * std::max(1.0, h), spec.max_depth);
      total += r.value;
      converged = converged && r.converged;
      out.evaluations += r.evaluations;
      edge = b;
      h *= 2.0;
      const double fe = f(edge);
      ++out.evaluations;
      if (fe < spec.tail_threshold * peak && r.value < spec.rel_tol * std::max(total, 1e-300)) {
        break;
      }
      if (k + 1 == spec.max_doublings) converged = false;
    }
  }

  out.value = total;
  out.converged = converged;
  return out;
}

}  // namespace stabcert
