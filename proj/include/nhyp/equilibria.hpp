#ifndef NHYP_EQUILIBRIA_HPP
#define NHYP_EQUILIBRIA_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nhyp/error.hpp"
#include "nhyp/integrate.hpp"
#include "nhyp/levelsets.hpp"
#include "nhyp/parallel.hpp"
#include "nhyp/problem.hpp"
#include "nhyp/profile.hpp"
#include "nhyp/spectrum.hpp"

namespace nhyp {

enum class ExceptionalFlag { unclassified, exceptional, nonexceptional, undecided };

inline constexpr const char* to_string(ExceptionalFlag e) {
  switch (e) {
    case ExceptionalFlag::unclassified: return "unclassified";
    case ExceptionalFlag::exceptional: return "exceptional";
    case ExceptionalFlag::nonexceptional: return "nonexceptional";
    case ExceptionalFlag::undecided: return "undecided";
  }
  return "unknown";
}

struct EquilibriumRecord {
  double u0 = 0.0;
  Profile profile;
  Profile variational;
  bool is_constant = false;
  int multiplicity = 1;
  double miss = 0.0;        // u'(1)
  double miss_slope = 0.0;  // v'(1)
  /// Found as a dip of |m| without a sign change; not certified by a bracket.
  bool tangency = false;
  CriticalSet critical;
  std::optional<SpectrumReport> spectrum;
  std::string spectrum_error;
  Hyperbolicity hyperbolic = Hyperbolicity::undecided;
  ExceptionalFlag exceptional = ExceptionalFlag::unclassified;
  nlohmann::json exceptional_detail;
};

struct ConstantRoot {
  double u0 = 0.0;
  int multiplicity = 1;
};

struct ConstantEquilibria {
  std::vector<ConstantRoot> roots;
  /// f is the zero polynomial: every constant is an equilibrium.
  bool zero_polynomial = false;
  std::vector<std::string> warnings;
};

/// Real roots of f in [-scan_bound, scan_bound] with multiplicity.
inline ConstantEquilibria constant_equilibria(const ProblemSpec& spec) {
  ConstantEquilibria out;
  if (spec.f().is_zero()) {
    out.zero_polynomial = true;
    out.warnings.push_back("ZeroPolynomial: f is identically zero (continuum of equilibria)");
    return out;
  }
  for (const auto& r : spec.f().real_roots(-spec.scan_bound(), spec.scan_bound())) {
    out.roots.push_back({r.x, r.multiplicity});
    if (r.multiplicity > 1) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "constant equilibrium u = %.12g is a root of multiplicity %d",
                    r.x, r.multiplicity);
      out.warnings.push_back(buf);
    }
  }
  return out;
}

struct ShootingMiss {
  double m = 0.0;
  double m_slope = 0.0;
};

/// m = u'(1; u0) and its derivative v'(1) with respect to u0.
inline ShootingMiss shooting_miss(const ProblemSpec& spec, double u0) {
  if (!(std::abs(u0) <= spec.scan_bound())) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "u0 = %.12g outside the scan range", u0);
    throw Error(ErrorKind::DomainError, buf);
  }
  const Profile base = integrate_ivp(spec, u0);
  const Profile v = integrate_variational(spec, base);
  return {end_slope(spec, base), end_slope(spec, v)};
}

struct ShootingScan {
  std::vector<double> grid;
  std::vector<double> misses;  // NaN where the trajectory escaped
  std::vector<std::pair<double, double>> brackets;
  std::vector<std::pair<double, double>> tangencies;
  int refinements = 0;
  int sign_changes = 0;
  int escaped = 0;
  bool stabilized = false;
};

struct FindOptions {
  int threads = 1;
  int min_grid = 512;
  int max_grid = 512 * 64;
  /// Fill critical points and spectra of the returned records.
  bool analyze = true;
};

struct EquilibriumSet {
  std::vector<EquilibriumRecord> records;
  ShootingScan scan;
  std::vector<std::string> warnings;
};

namespace detail {

inline double scan_miss(const ProblemSpec& spec, double u0) {
  try {
    const State2 y = shoot_endpoint(spec, u0);
    return y[1] / spec.a()(1.0);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::BlowUp || e.kind() == ErrorKind::StepUnderflow)
      return std::numeric_limits<double>::quiet_NaN();
    throw;
  }
}

inline bool opposite(double a, double b) {
  return std::isfinite(a) && std::isfinite(b) && a != 0.0 && b != 0.0 && ((a > 0.0) != (b > 0.0));
}

inline int count_sign_changes(const std::vector<double>& m) {
  int n = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0.0) ++n;
    if (i + 1 < m.size() && opposite(m[i], m[i + 1])) ++n;
  }
  return n;
}

/// Uniform scan of the shooting map, doubled until the number of sign changes
/// is unchanged across two consecutive refinements.
inline ShootingScan scan_shooting_map(const ProblemSpec& spec, const FindOptions& opt) {
  ShootingScan s;
  const double U = spec.scan_bound();
  int n = std::max(opt.min_grid, 512);
  s.grid.resize(n);
  for (int i = 0; i < n; ++i) s.grid[i] = -U + 2.0 * U * i / (n - 1);
  s.misses.resize(n);
  parallel_for(n, opt.threads, [&](std::size_t i) { s.misses[i] = scan_miss(spec, s.grid[i]); });
  std::vector<int> counts{count_sign_changes(s.misses)};
  while (2 * n - 1 <= opt.max_grid) {
    const int m = 2 * n - 1;
    std::vector<double> g(m), v(m);
    for (int i = 0; i < n; ++i) g[2 * i] = s.grid[i], v[2 * i] = s.misses[i];
    for (int i = 0; i + 1 < n; ++i) g[2 * i + 1] = 0.5 * (s.grid[i] + s.grid[i + 1]);
    parallel_for(n - 1, opt.threads,
                 [&](std::size_t i) { v[2 * i + 1] = scan_miss(spec, g[2 * i + 1]); });
    s.grid = std::move(g);
    s.misses = std::move(v);
    n = m;
    ++s.refinements;
    counts.push_back(count_sign_changes(s.misses));
    const std::size_t c = counts.size();
    if (c >= 3 && counts[c - 1] == counts[c - 2] && counts[c - 2] == counts[c - 3]) {
      s.stabilized = true;
      break;
    }
  }
  s.sign_changes = counts.back();
  for (double m : s.misses) s.escaped += !std::isfinite(m);
  for (std::size_t i = 0; i + 1 < s.grid.size(); ++i) {
    if (opposite(s.misses[i], s.misses[i + 1])) s.brackets.emplace_back(s.grid[i], s.grid[i + 1]);
    else if (s.misses[i] == 0.0) s.brackets.emplace_back(s.grid[i], s.grid[i]);
  }
  if (s.misses.back() == 0.0) s.brackets.emplace_back(s.grid.back(), s.grid.back());
  // Local minima of |m| with no sign change around them.
  double max_abs = 0.0;
  for (double m : s.misses)
    if (std::isfinite(m)) max_abs = std::max(max_abs, std::abs(m));
  for (std::size_t i = 1; i + 1 < s.grid.size(); ++i) {
    const double a = s.misses[i - 1], b = s.misses[i], c = s.misses[i + 1];
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || b == 0.0) continue;
    if (opposite(a, b) || opposite(b, c) || a == 0.0 || c == 0.0) continue;
    if (std::abs(b) < std::abs(a) && std::abs(b) < std::abs(c) && std::abs(b) < 1e-3 * max_abs)
      s.tangencies.emplace_back(s.grid[i - 1], s.grid[i + 1]);
  }
  return s;
}

inline EquilibriumRecord make_record(const ProblemSpec& spec, double u0) {
  EquilibriumRecord r;
  r.u0 = u0;
  r.profile = integrate_ivp(spec, u0);
  r.variational = integrate_variational(spec, r.profile);
  r.miss = end_slope(spec, r.profile);
  r.miss_slope = end_slope(spec, r.variational);
  return r;
}

/// Hybrid Newton/bisection on a sign-change bracket of the shooting map.
inline EquilibriumRecord refine_bracket(const ProblemSpec& spec, double lo, double hi) {
  if (lo == hi) return make_record(spec, lo);
  const double tol = spec.tol().root_tol;
  double mlo = scan_miss(spec, lo);
  double x = 0.5 * (lo + hi);
  EquilibriumRecord best = make_record(spec, x);
  EquilibriumRecord cur = best;
  for (int it = 0; it < 200; ++it) {
    if (cur.miss == 0.0) break;
    if ((cur.miss > 0.0) == (mlo > 0.0)) lo = x, mlo = cur.miss;
    else hi = x;
    double next = cur.miss_slope != 0.0 ? x - cur.miss / cur.miss_slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    cur = make_record(spec, x);
    if (std::abs(cur.miss) <= std::abs(best.miss)) best = cur;
    if (step <= 0.1 * tol || hi - lo <= tol) break;
  }
  return best;
}

/// Golden-section search for the minimum of |m| on [lo, hi].
inline double golden_min(const ProblemSpec& spec, double lo, double hi) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = std::abs(scan_miss(spec, c)), fd = std::abs(scan_miss(spec, d));
  for (int it = 0; it < 80 && b - a > spec.tol().root_tol; ++it) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - g * (b - a);
      fc = std::abs(scan_miss(spec, c));
    } else {
      a = c, c = d, fc = fd;
      d = a + g * (b - a);
      fd = std::abs(scan_miss(spec, d));
    }
  }
  return fc < fd ? c : d;
}

inline double miss_tolerance(const ProblemSpec& spec, const EquilibriumRecord& r) {
  return spec.tol().root_tol * std::max(1.0, r.profile.max_abs_du());
}

}  // namespace detail

/// Critical points, spectrum and hyperbolicity of a record.
inline void analyze_record(const ProblemSpec& spec, EquilibriumRecord& r) {
  r.critical = r.is_constant ? CriticalSet{{}, true} : critical_points(r.profile, spec);
  try {
    if (r.is_constant) {
      SpectrumReport rep;
      r.hyperbolic = check_constant_hyperbolic(spec, r.u0, &rep);
      r.spectrum = rep;
    } else {
      r.spectrum = eigenvalues_sl(spec, r.profile);
      r.hyperbolic = classify_hyperbolic(*r.spectrum, spec.tol());
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::GridTooCoarse) throw;
    r.spectrum_error = e.what();
    r.hyperbolic = Hyperbolicity::undecided;
  }
}

/// All equilibria with |u(0)| <= scan_bound: sign changes of the shooting map
/// refined by Newton/bisection, unresolved dips of |m|, and the roots of f.
inline EquilibriumSet find_equilibria(const ProblemSpec& spec, const FindOptions& opt = {}) {
  if (spec.f().is_zero())
    throw Error(ErrorKind::ZeroPolynomial, "f is identically zero (continuum of equilibria)");
  EquilibriumSet out;
  const auto constants = constant_equilibria(spec);
  out.warnings = constants.warnings;
  out.scan = detail::scan_shooting_map(spec, opt);
  const auto& scan = out.scan;
  if (!scan.stabilized) out.warnings.push_back("sign-change count did not stabilize at the finest grid");
  if (scan.escaped > 0) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "BlowUp: %d of %zu scan points escaped and were excluded",
                  scan.escaped, scan.grid.size());
    out.warnings.push_back(buf);
  }

  double max_abs = 0.0;
  for (double m : scan.misses)
    if (std::isfinite(m)) max_abs = std::max(max_abs, std::abs(m));
  const bool flat = max_abs <= spec.tol().root_tol * std::max(1.0, spec.scan_bound());
  if (flat)
    out.warnings.push_back("shooting map vanishes on the whole scan grid; only constants reported");

  std::vector<EquilibriumRecord> found;
  if (!flat) {
    std::vector<EquilibriumRecord> from_brackets(scan.brackets.size());
    parallel_for(scan.brackets.size(), opt.threads, [&](std::size_t i) {
      from_brackets[i] = detail::refine_bracket(spec, scan.brackets[i].first, scan.brackets[i].second);
    });
    std::vector<std::optional<EquilibriumRecord>> from_dips(scan.tangencies.size());
    parallel_for(scan.tangencies.size(), opt.threads, [&](std::size_t i) {
      const auto [lo, hi] = scan.tangencies[i];
      const double x = detail::golden_min(spec, lo, hi);
      EquilibriumRecord r = detail::make_record(spec, x);
      if (std::abs(r.miss) <= detail::miss_tolerance(spec, r)) {
        r.tangency = true;
        from_dips[i] = std::move(r);
      }
    });
    for (auto& r : from_brackets) found.push_back(std::move(r));
    for (auto& r : from_dips)
      if (r) found.push_back(std::move(*r));
  }
  for (const auto& c : constants.roots) {
    EquilibriumRecord r = detail::make_record(spec, c.u0);
    r.is_constant = true;
    r.multiplicity = c.multiplicity;
    found.push_back(std::move(r));
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const auto& a, const auto& b) { return a.u0 < b.u0; });

  const double dedup = 10.0 * spec.tol().root_tol;
  for (auto& r : found) {
    if (!out.records.empty() && r.u0 - out.records.back().u0 <= dedup) {
      EquilibriumRecord& prev = out.records.back();
      const bool constant = prev.is_constant || r.is_constant;
      const int mult = std::max(prev.multiplicity, r.multiplicity);
      const bool tangency = prev.tangency && r.tangency;
      if (r.is_constant != prev.is_constant ? r.is_constant : std::abs(r.miss) < std::abs(prev.miss))
        prev = std::move(r);
      prev.is_constant = constant;
      prev.multiplicity = mult;
      prev.tangency = prev.is_constant ? false : tangency;
      continue;
    }
    out.records.push_back(std::move(r));
  }
  for (const auto& r : out.records) {
    if (r.tangency) {
      char buf[128];
      std::snprintf(buf, sizeof buf,
                    "TangencyUnresolved: |m| dips to %.3g near u0 = %.12g without a sign change",
                    std::abs(r.miss), r.u0);
      out.warnings.push_back(buf);
    }
  }
  if (opt.analyze) {
    parallel_for(out.records.size(), opt.threads,
                 [&](std::size_t i) { analyze_record(spec, out.records[i]); });
  }
  return out;
}

inline nlohmann::json to_json(const CriticalPoint& c) {
  return nlohmann::json{{"x", c.x},
                        {"value", c.value},
                        {"second_deriv", c.second_deriv},
                        {"on_boundary", c.on_boundary},
                        {"degenerate", c.degenerate}};
}

/// Record as JSON; the profile itself is referenced by `profile_ref`.
inline nlohmann::json to_json(const EquilibriumRecord& r, const std::string& profile_ref = "") {
  nlohmann::json crit = nlohmann::json::array();
  for (const auto& c : r.critical.points) crit.push_back(to_json(c));
  nlohmann::json j{{"u0", r.u0},
                   {"is_constant", r.is_constant},
                   {"multiplicity", r.multiplicity},
                   {"miss", r.miss},
                   {"miss_slope", r.miss_slope},
                   {"tangency_unresolved", r.tangency},
                   {"profile_steps", r.profile.steps()},
                   {"all_critical", r.critical.all_critical},
                   {"critical_points", std::move(crit)},
                   {"hyperbolic", to_string(r.hyperbolic)},
                   {"exceptional", to_string(r.exceptional)}};
  if (!profile_ref.empty()) j["profile_ref"] = profile_ref;
  if (r.spectrum) j["spectrum"] = to_json(*r.spectrum);
  if (!r.spectrum_error.empty()) j["spectrum_error"] = r.spectrum_error;
  if (!r.exceptional_detail.is_null()) j["exceptional_detail"] = r.exceptional_detail;
  return j;
}

}  // namespace nhyp

#endif  // NHYP_EQUILIBRIA_HPP
