#ifndef NHYP_LEVELSETS_HPP
#define NHYP_LEVELSETS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "nhyp/error.hpp"
#include "nhyp/problem.hpp"
#include "nhyp/profile.hpp"

namespace nhyp {

/// A function of x sampled on demand (phi, Phi in the level-set identities).
using SampledFunction = std::function<double(double)>;

struct CriticalPoint {
  double x = 0.0;
  double value = 0.0;
  double second_deriv = 0.0;
  bool on_boundary = false;
  bool degenerate = false;
};

struct CriticalSet {
  std::vector<CriticalPoint> points;
  /// Set when u' vanishes identically; `points` is then empty.
  bool all_critical = false;
};

struct RegularPoint {
  double x = 0.0;
  double du = 0.0;
};

struct LevelSetReport {
  double q = 0.0;
  std::vector<RegularPoint> regular_points;  // interior only, sorted by x
  std::vector<CriticalPoint> critical_points;
  /// Boundary points with u(p) = q and u'(p) != 0; never part of the sums.
  int boundary_regular = 0;
  double regular_sum = 0.0;
  double signed_sum = 0.0;
  std::optional<double> critical_sum;
};

namespace detail {

inline double polish_root(const std::function<double(double)>& g, double lo, double hi) {
  double glo = g(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm > 0.0) == (glo > 0.0)) lo = mid, glo = gm;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Critical points of u: interior sign changes of u' located on a grid of four
/// samples per step and polished by bisection, plus x = 0 and x = 1 when
/// |u'| <= crit_tol * max|u'| there.
inline CriticalSet critical_points(const Profile& profile, double crit_tol) {
  CriticalSet out;
  const double max_du = profile.max_abs_du();
  if (max_du <= crit_tol * std::max(1.0, profile.max_abs_u())) {
    out.all_critical = true;
    return out;
  }
  const double thresh = crit_tol * max_du;
  auto make = [&](double x, bool boundary) {
    CriticalPoint c;
    c.x = x;
    const ProfileSample s = profile.eval(x);
    c.value = s.u;
    c.second_deriv = s.d2u;
    if (boundary) {
      const auto& j = x == profile.x_begin() ? profile.jets().front() : profile.jets().back();
      c.value = j.u;
      c.second_deriv = j.d2u;
    }
    c.on_boundary = boundary;
    c.degenerate = std::abs(c.second_deriv) <= crit_tol;
    return c;
  };

  const auto& nodes = profile.nodes();
  std::vector<double> xs, ds;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    xs.push_back(nodes[i]);
    ds.push_back(profile.jets()[i].du);
    for (int k = 1; k < 4; ++k) {
      const double x = nodes[i] + 0.25 * k * (nodes[i + 1] - nodes[i]);
      xs.push_back(x);
      ds.push_back(profile.du(x));
    }
  }
  xs.push_back(nodes.back());
  ds.push_back(profile.jets().back().du);

  const bool left = std::abs(ds.front()) <= thresh;
  const bool right = std::abs(ds.back()) <= thresh;
  std::vector<double> interior;
  const auto du = [&](double x) { return profile.du(x); };
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (i > 0 && ds[i] == 0.0 && ds[i - 1] != 0.0) interior.push_back(xs[i]);
    if (ds[i] != 0.0 && ds[i + 1] != 0.0 && (ds[i] > 0.0) != (ds[i + 1] > 0.0))
      interior.push_back(detail::polish_root(du, xs[i], xs[i + 1]));
  }
  // Roots that collapse onto an included boundary point belong to it.
  constexpr double merge = 1e-9;
  if (left) out.points.push_back(make(nodes.front(), true));
  for (double x : interior) {
    if (x >= nodes.back() || x <= nodes.front()) continue;
    if (left && x - nodes.front() <= merge) continue;
    if (right && nodes.back() - x <= merge) continue;
    if (!out.points.empty() && x - out.points.back().x <= merge) continue;
    out.points.push_back(make(x, false));
  }
  if (right) out.points.push_back(make(nodes.back(), true));
  return out;
}

inline CriticalSet critical_points(const Profile& profile, const ProblemSpec& spec) {
  return critical_points(profile, spec.tol().crit_tol);
}

struct LevelOptions {
  double crit_tol = 1e-8;
  /// Levels closer than margin * (value range) to a critical value are refused.
  double margin = 1e-4;
};

namespace detail {

struct LevelGeometry {
  CriticalSet crit;
  double lo = 0.0, hi = 0.0;
  double margin = 0.0;
  double eq_tol = 0.0;
};

inline LevelGeometry level_geometry(const Profile& p, const LevelOptions& opt) {
  LevelGeometry g;
  g.crit = critical_points(p, opt.crit_tol);
  if (g.crit.all_critical)
    throw Error(ErrorKind::InvalidArgument, "level sets of a constant profile are degenerate");
  std::tie(g.lo, g.hi) = p.value_range();
  for (const auto& c : g.crit.points) g.lo = std::min(g.lo, c.value), g.hi = std::max(g.hi, c.value);
  const double range = g.hi - g.lo;
  g.margin = opt.margin * range;
  g.eq_tol = 1e-12 * std::max(range, std::max(std::abs(g.lo), std::abs(g.hi)));
  return g;
}

inline LevelSetReport level_set(const Profile& p, double q, const LevelGeometry& g) {
  LevelSetReport r;
  r.q = q;
  for (const auto& c : g.crit.points) {
    const double d = std::abs(q - c.value);
    if (d <= g.eq_tol) {
      r.critical_points.push_back(c);
    } else if (d < g.margin) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "level %.12g is %.3g from critical value at x = %.9g", q, d, c.x);
      throw Error(ErrorKind::LevelTooCloseToCritical, buf);
    }
  }
  // Monotone pieces between consecutive critical points (and the domain ends).
  std::vector<double> cuts{p.x_begin()};
  for (const auto& c : g.crit.points)
    if (c.x > cuts.back()) cuts.push_back(c.x);
  if (cuts.back() < p.x_end()) cuts.push_back(p.x_end());
  auto is_critical_x = [&](double x) {
    return std::any_of(g.crit.points.begin(), g.crit.points.end(),
                       [&](const CriticalPoint& c) { return c.x == x; });
  };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const double ua = p.u(a) - q, ub = p.u(b) - q;
    const bool a_on = std::abs(ua) <= g.eq_tol, b_on = std::abs(ub) <= g.eq_tol;
    if (!a_on && !b_on && (ua > 0.0) != (ub > 0.0)) {
      const double x = polish_root([&](double t) { return p.u(t) - q; }, a, b);
      r.regular_points.push_back({x, p.du(x)});
    }
  }
  for (double e : {p.x_begin(), p.x_end()})
    if (!is_critical_x(e) && std::abs(p.u(e) - q) <= g.eq_tol) ++r.boundary_regular;
  return r;
}

inline const std::array<std::pair<double, double>, 7>& gauss_legendre7() {
  static const std::array<std::pair<double, double>, 7> nodes{{
      {0.0, 0.417959183673469387755},
      {0.405845151377397166907, 0.381830050505118944950},
      {-0.405845151377397166907, 0.381830050505118944950},
      {0.741531185599394439864, 0.279705391489276667901},
      {-0.741531185599394439864, 0.279705391489276667901},
      {0.949107912342758524526, 0.129484966168869693271},
      {-0.949107912342758524526, 0.129484966168869693271},
  }};
  return nodes;
}

}  // namespace detail

/// Integral of g over [lo, hi] by 7-point Gauss-Legendre on each profile step.
template <class G>
double integrate_over_steps(const Profile& p, G&& g, double lo, double hi) {
  double total = 0.0;
  const auto& nodes = p.nodes();
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double a = std::max(lo, nodes[i]), b = std::min(hi, nodes[i + 1]);
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (const auto& [t, w] : detail::gauss_legendre7()) s += w * g(mid + half * t);
    total += half * s;
  }
  return total;
}

/// Solutions of u(x) = q, split into regular and critical preimages.
inline LevelSetReport level_set_at(const Profile& profile, double q, const LevelOptions& opt = {}) {
  return detail::level_set(profile, q, detail::level_geometry(profile, opt));
}

namespace detail {

inline void require_regular(const LevelSetReport& r) {
  if (!r.critical_points.empty()) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "level %.12g is a critical value", r.q);
    throw Error(ErrorKind::LevelTooCloseToCritical, buf);
  }
}

inline void fill_regular_sums(LevelSetReport& r, const SampledFunction& phi) {
  r.regular_sum = 0.0;
  r.signed_sum = 0.0;
  for (const auto& p : r.regular_points) {
    const double v = phi(p.x);
    r.regular_sum += v / std::abs(p.du);
    r.signed_sum += p.du > 0.0 ? v : -v;
  }
}

inline double critical_sum_of(const LevelSetReport& r, const SampledFunction& phi) {
  if (r.critical_points.empty())
    throw Error(ErrorKind::InvalidArgument, "level has no critical preimages");
  double s = 0.0;
  for (const auto& c : r.critical_points) {
    if (c.degenerate) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "degenerate critical point at x = %.9g", c.x);
      throw Error(ErrorKind::DegenerateCritical, buf);
    }
    s += (c.on_boundary ? 0.5 : 1.0) * phi(c.x) / std::sqrt(std::abs(c.second_deriv));
  }
  return s;
}

}  // namespace detail

/// Sum of phi(p)/|u'(p)| over interior regular preimages of a regular level q.
inline double regular_sum(const Profile& profile, const SampledFunction& phi, double q,
                          const LevelOptions& opt = {}) {
  LevelSetReport r = level_set_at(profile, q, opt);
  detail::require_regular(r);
  detail::fill_regular_sums(r, phi);
  return r.regular_sum;
}

/// Sum of phi(p) sign(u'(p)) over interior regular preimages of q.
inline double signed_sum(const Profile& profile, const SampledFunction& phi, double q,
                         const LevelOptions& opt = {}) {
  LevelSetReport r = level_set_at(profile, q, opt);
  detail::require_regular(r);
  detail::fill_regular_sums(r, phi);
  return r.signed_sum;
}

/// Interior critical preimages weigh phi(p)/sqrt|u''(p)|, boundary ones half that.
inline double critical_sum(const Profile& profile, const SampledFunction& phi, double q,
                           const LevelOptions& opt = {}) {
  return detail::critical_sum_of(level_set_at(profile, q, opt), phi);
}

/// Full report for q: preimages, both regular sums and, when q is a
/// critical value, the critical sum.
inline LevelSetReport level_sums(const Profile& profile, const SampledFunction& phi, double q,
                                 const LevelOptions& opt = {}) {
  LevelSetReport r = level_set_at(profile, q, opt);
  detail::fill_regular_sums(r, phi);
  if (!r.critical_points.empty()) r.critical_sum = detail::critical_sum_of(r, phi);
  return r;
}

/// Integrals of u^k phi over [0,1] for k = 0..max_degree.
inline std::vector<double> orthogonality_residuals(const Profile& profile, const SampledFunction& phi,
                                                   int max_degree) {
  std::vector<double> out(static_cast<std::size_t>(std::max(0, max_degree + 1)), 0.0);
  const auto& nodes = profile.nodes();
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double mid = 0.5 * (nodes[i] + nodes[i + 1]), half = 0.5 * (nodes[i + 1] - nodes[i]);
    for (const auto& [t, w] : detail::gauss_legendre7()) {
      const double x = mid + half * t;
      const double u = profile.u(x);
      double term = half * w * phi(x);
      for (auto& o : out) {
        o += term;
        term *= u;
      }
    }
  }
  return out;
}

struct OrbitWitness {
  double q = 0.0;
  double p_i = 0.0;
  double p_j = 0.0;
};

struct OrbitTestResult {
  bool member = true;
  std::optional<OrbitWitness> witness;
  int levels_checked = 0;
};

/// Van der Corput radical inverse in base 2.
inline double van_der_corput(unsigned n) {
  double v = 0.0, denom = 1.0;
  while (n) {
    denom *= 2.0;
    v += (n & 1u) / denom;
    n >>= 1u;
  }
  return v;
}

/// Checks whether Phi is constant on every level set of u: for regular levels
/// q taken from a van der Corput sequence over the value range, all preimages
/// must satisfy |Phi(p_i) - Phi(p_j)| <= tol * max(1, max|Phi|). Levels near
/// critical values are skipped.
inline OrbitTestResult q_orbit_test(const Profile& profile, const SampledFunction& Phi, double tol,
                                    int levels = 64, const LevelOptions& opt = {}) {
  const auto g = detail::level_geometry(profile, opt);
  double scale = 1.0;
  for (std::size_t i = 0; i < profile.nodes().size(); ++i)
    scale = std::max(scale, std::abs(Phi(profile.nodes()[i])));
  OrbitTestResult res;
  for (unsigned n = 1; res.levels_checked < levels && n < 64u * static_cast<unsigned>(levels); ++n) {
    const double q = g.lo + van_der_corput(n) * (g.hi - g.lo);
    LevelSetReport r;
    try {
      r = detail::level_set(profile, q, g);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::LevelTooCloseToCritical) continue;
      throw;
    }
    if (!r.critical_points.empty()) continue;
    ++res.levels_checked;
    const auto& pts = r.regular_points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        if (std::abs(Phi(pts[i].x) - Phi(pts[j].x)) > tol * scale) {
          res.member = false;
          res.witness = OrbitWitness{q, pts[i].x, pts[j].x};
          return res;
        }
      }
    }
  }
  return res;
}

inline std::string levelset_csv_header() {
  return "q,n_regular,n_critical,regular_sum,signed_sum,critical_sum";
}

inline std::string to_csv_row(const LevelSetReport& r) {
  auto f = [](double v) { return detail::fmt17(v); };
  std::string row = f(r.q) + "," + std::to_string(r.regular_points.size()) + "," +
                    std::to_string(r.critical_points.size()) + "," + f(r.regular_sum) + "," +
                    f(r.signed_sum) + ",";
  if (r.critical_sum) row += f(*r.critical_sum);
  return row;
}

}  // namespace nhyp

#endif  // NHYP_LEVELSETS_HPP
