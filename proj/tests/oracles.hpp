// Independent reference computations used only by the test suites. Nothing
// here shares code paths with the library's integrator or eigensolver.
#ifndef NHYP_TESTS_ORACLES_HPP
#define NHYP_TESTS_ORACLES_HPP

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace oracle {

using Fn = std::function<double(double)>;

/// Fixed-step classical RK4 for u' = p/a(x), p' = -f(u) from u(0) = u0,
/// p(0) = 0. Returns u'(1) or nullopt if |u| passes 1e6.
inline std::optional<double> rk4_miss(const Fn& a, const Fn& f, double u0, int steps) {
  const double h = 1.0 / steps;
  double u = u0, p = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double x = i * h;
    const double k1u = p / a(x), k1p = -f(u);
    const double k2u = (p + 0.5 * h * k1p) / a(x + 0.5 * h), k2p = -f(u + 0.5 * h * k1u);
    const double k3u = (p + 0.5 * h * k2p) / a(x + 0.5 * h), k3p = -f(u + 0.5 * h * k2u);
    const double k4u = (p + h * k3p) / a(x + h), k4p = -f(u + h * k3u);
    u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
    p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    if (!std::isfinite(u) || std::abs(u) > 1e6) return std::nullopt;
  }
  return p / a(1.0);
}

/// Counts sign changes of the RK4 shooting miss on a uniform u0 grid.
/// Cells whose integration escapes are skipped (no bracket across them).
inline int dense_scan_sign_changes(const Fn& a, const Fn& f, double bound, int points,
                                   int steps = 1000) {
  int changes = 0;
  std::optional<double> prev;
  for (int i = 0; i < points; ++i) {
    const double u0 = -bound + 2.0 * bound * i / (points - 1);
    const auto m = rk4_miss(a, f, u0, steps);
    if (m && prev && ((*m > 0) != (*prev > 0)) && *m != 0.0) ++changes;
    if (m && *m == 0.0) ++changes;
    prev = m;
  }
  return changes;
}

/// Roots of the RK4 shooting miss on a uniform grid refined by bisection.
inline std::vector<double> dense_scan_roots(const Fn& a, const Fn& f, double bound, int points,
                                            int steps = 1000) {
  std::vector<double> roots;
  std::optional<double> prev;
  double prev_u = 0.0;
  for (int i = 0; i < points; ++i) {
    const double u0 = -bound + 2.0 * bound * i / (points - 1);
    const auto m = rk4_miss(a, f, u0, steps);
    if (m && prev && (*m > 0) != (*prev > 0)) {
      double lo = prev_u, hi = u0, mlo = *prev;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto mm = rk4_miss(a, f, mid, steps);
        if (!mm) break;
        if ((*mm > 0) == (mlo > 0)) lo = mid, mlo = *mm;
        else hi = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev = m;
    prev_u = u0;
  }
  return roots;
}

/// Composite Simpson rule on [lo, hi].
inline double simpson(const Fn& g, double lo, double hi, int n = 20000) {
  if (n % 2) ++n;
  const double h = (hi - lo) / n;
  double s = g(lo) + g(hi);
  for (int i = 1; i < n; ++i) s += g(lo + i * h) * ((i % 2) ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace oracle

#endif  // NHYP_TESTS_ORACLES_HPP
