#ifndef NHYP_EXCEPTIONAL_HPP
#define NHYP_EXCEPTIONAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nhyp/equilibria.hpp"
#include "nhyp/error.hpp"
#include "nhyp/integrate.hpp"
#include "nhyp/levelsets.hpp"
#include "nhyp/problem.hpp"
#include "nhyp/profile.hpp"

namespace nhyp {

/// 1/2 * integral over [p, pbar] of a'(x) u'(x)^2.
inline double intzero_integral(const Polynomial& a, const Profile& profile, double p, double pbar) {
  if (!(p < pbar) || p < profile.x_begin() || pbar > profile.x_end())
    throw Error(ErrorKind::InvalidArgument, "intzero_integral needs p < pbar inside the profile");
  const Polynomial da = a.derivative();
  if (da.is_zero()) return 0.0;
  return 0.5 * integrate_over_steps(
                   profile,
                   [&](double x) {
                     const double d = profile.du(x);
                     return da(x) * d * d;
                   },
                   p, pbar);
}

inline double intzero_integral(const ProblemSpec& spec, const Profile& profile, double p, double pbar) {
  return intzero_integral(spec.a(), profile, p, pbar);
}

/// 1/2 * integral over [p, pbar] of |a'(x)| u'(x)^2, the natural size of intzero_integral.
inline double intzero_scale(const Polynomial& a, const Profile& profile, double p, double pbar) {
  const Polynomial da = a.derivative();
  if (da.is_zero()) return 0.0;
  return 0.5 * integrate_over_steps(
                   profile,
                   [&](double x) {
                     const double d = profile.du(x);
                     return std::abs(da(x)) * d * d;
                   },
                   p, pbar);
}

enum class Condition { holds, fails, undecided, not_evaluated };

inline constexpr const char* to_string(Condition c) {
  switch (c) {
    case Condition::holds: return "holds";
    case Condition::fails: return "fails";
    case Condition::undecided: return "undecided";
    case Condition::not_evaluated: return "not_evaluated";
  }
  return "unknown";
}

struct CriticalPair {
  double p = 0.0;
  double pbar = 0.0;
};

struct ExceptionalVerdict {
  Condition condition1 = Condition::not_evaluated;  // not hyperbolic
  Condition condition2 = Condition::not_evaluated;  // every critical point has a partner
  Condition condition3 = Condition::not_evaluated;  // phi separates partners of 0 and 1
  ExceptionalFlag overall = ExceptionalFlag::unclassified;
  std::string reason;
  /// Same-value partner of each critical point, when one exists.
  std::vector<CriticalPair> partners;
  std::optional<CriticalPair> witness_left;   // (0, p) with phi(p) != phi(0)
  std::optional<CriticalPair> witness_right;  // (q, 1) with phi(q) != phi(1)
};

namespace detail {

inline Condition from_hyperbolicity(Hyperbolicity h) {
  switch (h) {
    case Hyperbolicity::non_hyperbolic: return Condition::holds;
    case Hyperbolicity::hyperbolic: return Condition::fails;
    case Hyperbolicity::undecided: return Condition::undecided;
  }
  return Condition::undecided;
}

/// Partner search among critical points with |u(p) - u(pbar)| <= tol.
inline std::vector<std::size_t> same_value_partners(const std::vector<CriticalPoint>& pts,
                                                    std::size_t i, double tol) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < pts.size(); ++j)
    if (j != i && std::abs(pts[j].value - pts[i].value) <= tol) out.push_back(j);
  return out;
}

/// Separation of phi at the partners of the critical point `end`: holds when
/// some partner differs by more than 10 tol, fails when all differ by at
/// most tol, undecided in between.
inline Condition separation(const std::vector<CriticalPoint>& pts, std::size_t end,
                            const std::vector<std::size_t>& partners, const Profile& phi, double tol,
                            std::optional<CriticalPair>& witness) {
  const double phi_end = phi.u(pts[end].x);
  double best = -1.0;
  for (std::size_t j : partners) {
    const double d = std::abs(phi.u(pts[j].x) - phi_end);
    if (d > best) {
      best = d;
      witness = CriticalPair{std::min(pts[end].x, pts[j].x), std::max(pts[end].x, pts[j].x)};
    }
  }
  if (best > 10.0 * tol) return Condition::holds;
  if (best <= tol) return Condition::fails;
  return Condition::undecided;
}

}  // namespace detail

/// Conditions of exceptionality evaluated in the order 1, 2, 3; a failed
/// condition ends the evaluation. Constant records are nonexceptional.
inline ExceptionalVerdict classify_exceptional(const ProblemSpec& spec, const EquilibriumRecord& record) {
  ExceptionalVerdict v;
  const auto& tol = spec.tol();
  if (record.is_constant || record.critical.all_critical) {
    v.overall = ExceptionalFlag::nonexceptional;
    v.reason = "constant equilibrium";
    return v;
  }
  const auto& pts = record.critical.points;
  for (const auto& c : pts) {
    if (c.degenerate) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "degenerate critical point at x = %.12g", c.x);
      throw Error(ErrorKind::DegenerateCritical, buf);
    }
  }

  v.condition1 = detail::from_hyperbolicity(record.hyperbolic);
  if (v.condition1 == Condition::fails) {
    v.overall = ExceptionalFlag::nonexceptional;
    v.reason = "hyperbolic";
    return v;
  }

  const auto [umin, umax] = record.profile.value_range();
  const double match_tol = tol.sum_tol * std::max(umax - umin, 1e-300);
  std::vector<std::vector<std::size_t>> partners(pts.size());
  v.condition2 = Condition::holds;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    partners[i] = detail::same_value_partners(pts, i, match_tol);
    if (partners[i].empty()) {
      v.condition2 = Condition::fails;
      char buf[128];
      std::snprintf(buf, sizeof buf, "critical point x = %.12g has no same-value partner", pts[i].x);
      v.reason = buf;
    } else {
      const double x = pts[i].x, y = pts[partners[i].front()].x;
      v.partners.push_back({std::min(x, y), std::max(x, y)});
    }
  }
  if (v.condition2 == Condition::fails) {
    v.overall = ExceptionalFlag::nonexceptional;
    return v;
  }

  std::size_t left = pts.size(), right = pts.size();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].on_boundary && pts[i].x <= record.profile.x_begin()) left = i;
    if (pts[i].on_boundary && pts[i].x >= record.profile.x_end()) right = i;
  }
  if (left == pts.size() || right == pts.size())
    throw Error(ErrorKind::DegenerateCritical, "an endpoint is missing from the critical set");
  const double sep_tol = tol.sum_tol * record.variational.max_abs_u();
  const Condition c3l =
      detail::separation(pts, left, partners[left], record.variational, sep_tol, v.witness_left);
  const Condition c3r =
      detail::separation(pts, right, partners[right], record.variational, sep_tol, v.witness_right);
  if (c3l == Condition::fails || c3r == Condition::fails) v.condition3 = Condition::fails;
  else if (c3l == Condition::holds && c3r == Condition::holds) v.condition3 = Condition::holds;
  else v.condition3 = Condition::undecided;

  if (v.condition3 == Condition::fails) {
    v.overall = ExceptionalFlag::nonexceptional;
    v.reason = "phi does not separate the partners of an endpoint";
  } else if (v.condition1 == Condition::holds && v.condition3 == Condition::holds) {
    v.overall = ExceptionalFlag::exceptional;
    v.reason = "all conditions hold";
  } else {
    v.overall = ExceptionalFlag::undecided;
    v.reason = v.condition1 == Condition::undecided ? "hyperbolicity undecided"
                                                    : "separation of phi undecided";
  }
  return v;
}

inline nlohmann::json to_json(const CriticalPair& c) { return nlohmann::json::array({c.p, c.pbar}); }

inline nlohmann::json to_json(const ExceptionalVerdict& v) {
  nlohmann::json partners = nlohmann::json::array();
  for (const auto& p : v.partners) partners.push_back(to_json(p));
  nlohmann::json j{{"condition1", to_string(v.condition1)},
                   {"condition2", to_string(v.condition2)},
                   {"condition3", to_string(v.condition3)},
                   {"overall", to_string(v.overall)},
                   {"reason", v.reason},
                   {"partners", std::move(partners)}};
  if (v.witness_left) j["witness_left"] = to_json(*v.witness_left);
  if (v.witness_right) j["witness_right"] = to_json(*v.witness_right);
  return j;
}

/// Classifies the record and stores the verdict in it.
inline ExceptionalVerdict classify_and_store(const ProblemSpec& spec, EquilibriumRecord& record) {
  ExceptionalVerdict v = classify_exceptional(spec, record);
  record.exceptional = v.overall;
  record.exceptional_detail = to_json(v);
  return v;
}

struct TurningPointSensitivity {
  double lhs = 0.0;  // centered difference of u(u0, p(u0))
  double rhs = 0.0;  // v(p)
  double p_minus = 0.0;
  double p_plus = 0.0;
};

namespace detail {

/// Newton on u'(x) = 0 from x0; boundary points stay fixed.
inline double relocate_critical(const Profile& u, double x0, double crit_tol) {
  if (x0 <= u.x_begin() || x0 >= u.x_end()) return x0;
  double x = x0;
  const double scale = std::max(1.0, u.max_abs_du());
  for (int it = 0; it < 50; ++it) {
    const auto s = u.eval(x);
    if (std::abs(s.du) <= 1e-15 * scale) return x;
    if (s.d2u == 0.0) break;
    const double step = s.du / s.d2u;
    x -= step;
    if (!(x > u.x_begin() && x < u.x_end()) || std::abs(x - x0) > 0.1) break;
    if (std::abs(step) <= 1e-15) return x;
  }
  const double res = std::abs(u.du(x));
  if (x > u.x_begin() && x < u.x_end() && std::abs(x - x0) <= 0.1 && res <= crit_tol * scale)
    return x;
  char buf[128];
  std::snprintf(buf, sizeof buf, "Newton relocation of the critical point near x = %.12g diverged", x0);
  throw Error(ErrorKind::CriticalPointLost, buf);
}

}  // namespace detail

/// d/du0 of u(u0, p(u0)) by a centered difference with step h, against v(p).
inline TurningPointSensitivity turning_point_sensitivity(const ProblemSpec& spec,
                                                         const EquilibriumRecord& record, double p,
                                                         double h = 1e-4) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "step h must be positive");
  if (p < 0.0 || p > 1.0) throw Error(ErrorKind::DomainError, "p outside [0, 1]");
  TurningPointSensitivity out;
  const Profile plus = integrate_ivp(spec, record.u0 + h);
  const Profile minus = integrate_ivp(spec, record.u0 - h);
  out.p_plus = detail::relocate_critical(plus, p, spec.tol().crit_tol);
  out.p_minus = detail::relocate_critical(minus, p, spec.tol().crit_tol);
  out.lhs = (plus.u(out.p_plus) - minus.u(out.p_minus)) / (2.0 * h);
  out.rhs = record.variational.u(p);
  return out;
}

}  // namespace nhyp

#endif  // NHYP_EXCEPTIONAL_HPP
