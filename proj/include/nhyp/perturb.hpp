#ifndef NHYP_PERTURB_HPP
#define NHYP_PERTURB_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nhyp/equilibria.hpp"
#include "nhyp/error.hpp"
#include "nhyp/parallel.hpp"
#include "nhyp/polynomial.hpp"
#include "nhyp/problem.hpp"
#include "nhyp/spectrum.hpp"

namespace nhyp {

/// One equilibrium at one parameter value.
struct SweepEntry {
  int id = 0;
  double u0 = std::numeric_limits<double>::quiet_NaN();
  bool is_constant = false;
  double min_abs = std::numeric_limits<double>::quiet_NaN();
  double nearest = std::numeric_limits<double>::quiet_NaN();
  Hyperbolicity hyperbolic = Hyperbolicity::undecided;
  std::string status = "ok";
};

struct SweepPoint {
  double parameter = 0.0;
  int count = 0;
  std::vector<SweepEntry> entries;
  std::vector<std::string> warnings;
};

/// Parameter interval where the Morse index of a tracked branch changes.
struct Crossing {
  std::string branch;
  double lo = 0.0;
  double hi = 0.0;
  std::optional<double> location;
  int index_before = 0;
  int index_after = 0;
};

struct SweepResult {
  std::string kind;    // "perturbation" or "bifurcation"
  std::string family;  // human-readable description of the parameterized f
  std::vector<SweepPoint> points;
  std::vector<Crossing> crossings;
};

struct SweepOptions {
  int threads = 1;
  double crossing_tol = 1e-6;
};

namespace detail {

inline std::string coeff_list(const std::vector<double>& c) {
  std::string s = "[";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) s += ", ";
    s += fmt17(c[i]);
  }
  return s + "]";
}

inline std::vector<double> add_scaled(std::vector<double> f, const std::vector<double>& g, double s) {
  if (f.size() < g.size()) f.resize(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] += s * g[i];
  return f;
}

inline void require_direction(const std::vector<double>& g) {
  if (!g.empty() && g.front() != 0.0)
    throw Error(ErrorKind::NonzeroConstantTerm, "perturbation direction must have zero constant term");
}

inline void fill_spectrum(SweepEntry& e, const ProblemSpec& spec, const Profile* profile) {
  try {
    SpectrumReport rep;
    if (e.is_constant) {
      e.hyperbolic = check_constant_hyperbolic(spec, e.u0, &rep);
    } else {
      rep = eigenvalues_sl(spec, *profile);
      e.hyperbolic = classify_hyperbolic(rep, spec.tol());
    }
    e.min_abs = rep.min_abs;
    e.nearest = rep.nearest;
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::GridTooCoarse) throw;
    e.hyperbolic = Hyperbolicity::undecided;
    e.status = err.what();
  }
}

/// Newton on the shooting map of `spec` starting from u0.
inline std::optional<EquilibriumRecord> continue_root(const ProblemSpec& spec, double u0) {
  double x = u0;
  for (int it = 0; it < 30; ++it) {
    if (std::abs(x) > spec.scan_bound()) return std::nullopt;
    EquilibriumRecord r;
    try {
      r = make_record(spec, x);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::BlowUp || e.kind() == ErrorKind::StepUnderflow) return std::nullopt;
      throw;
    }
    if (std::abs(r.miss) <= miss_tolerance(spec, r)) return r;
    if (r.miss_slope == 0.0 || !std::isfinite(r.miss_slope)) return std::nullopt;
    x -= r.miss / r.miss_slope;
  }
  return std::nullopt;
}

/// Root of f nearest to u0 within the scan range.
inline std::optional<double> reroot_constant(const ProblemSpec& spec, double u0) {
  std::optional<double> best;
  for (const auto& r : spec.f().real_roots(-spec.scan_bound(), spec.scan_bound()))
    if (!best || std::abs(r.x - u0) < std::abs(*best - u0)) best = r.x;
  return best;
}

inline std::vector<double> family_coeffs(const ProblemSpec& spec, double lambda) {
  if (spec.f_param().empty()) {
    std::vector<double> f = spec.f_coeffs();
    for (double& c : f) c *= lambda;
    return f;
  }
  return add_scaled(spec.f_coeffs(), spec.f_param(), lambda);
}

inline std::string family_name(const ProblemSpec& spec) {
  if (spec.f_param().empty()) return "lambda * " + coeff_list(spec.f_coeffs());
  return coeff_list(spec.f_coeffs()) + " + lambda * " + coeff_list(spec.f_param());
}

/// Number of positive eigenvalues of the linearization at u = 0.
inline int trivial_morse_index(const ProblemSpec& spec) {
  const double df = spec.f().jet(0.0).d1;
  const double floor = -1.0 - std::abs(df);
  const auto mu = extrapolated_spectrum(spec, Potential::constant(0.0), 0,
                                        [&](double low) { return df + low >= floor; });
  return static_cast<int>(
      std::count_if(mu.fine.begin(), mu.fine.end(), [&](double l) { return l + df > 0.0; }));
}

}  // namespace detail

/// Continues a non-hyperbolic or undecided equilibrium to f + eps g for each
/// eps and reports the spectral gap of the continued equilibrium.
inline SweepResult perturbation_scan(const ProblemSpec& spec, const EquilibriumRecord& record,
                                     const std::vector<double>& g_coeffs, std::vector<double> eps_list,
                                     const SweepOptions& opt = {}) {
  detail::require_direction(g_coeffs);
  if (record.hyperbolic == Hyperbolicity::hyperbolic)
    throw Error(ErrorKind::InvalidArgument, "perturbation_scan needs a non-hyperbolic or undecided record");
  if (eps_list.empty()) throw Error(ErrorKind::InvalidArgument, "empty eps list");
  std::sort(eps_list.begin(), eps_list.end());
  if (std::adjacent_find(eps_list.begin(), eps_list.end()) != eps_list.end())
    throw Error(ErrorKind::InvalidArgument, "eps values must be distinct");

  SweepResult out;
  out.kind = "perturbation";
  out.family = detail::coeff_list(spec.f_coeffs()) + " + eps * " + detail::coeff_list(g_coeffs);
  out.points.resize(eps_list.size());
  parallel_for(eps_list.size(), opt.threads, [&](std::size_t i) {
    SweepPoint& pt = out.points[i];
    pt.parameter = eps_list[i];
    const ProblemSpec s = spec.with_f(detail::add_scaled(spec.f_coeffs(), g_coeffs, eps_list[i]));
    SweepEntry e;
    e.is_constant = record.is_constant;
    std::optional<EquilibriumRecord> cont;
    if (record.is_constant) {
      if (auto r = detail::reroot_constant(s, record.u0)) e.u0 = *r;
    } else if ((cont = detail::continue_root(s, record.u0))) {
      e.u0 = cont->u0;
    }
    if (std::isnan(e.u0)) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "ContinuationLost: no equilibrium continued from u0 = %.12g",
                    record.u0);
      e.status = buf;
      pt.warnings.push_back(buf);
    } else {
      detail::fill_spectrum(e, s, cont ? &cont->profile : nullptr);
      pt.count = 1;
    }
    pt.entries.push_back(std::move(e));
  });
  return out;
}

/// Parameter in [lo, hi] where the Morse index of u = 0 changes, by bisection.
inline double locate_trivial_crossing(const ProblemSpec& spec, double lo, double hi, double tol = 1e-6) {
  auto at = [&](double l) { return detail::trivial_morse_index(spec.with_f(detail::family_coeffs(spec, l))); };
  const int ilo = at(lo);
  if (at(hi) == ilo) throw Error(ErrorKind::InvalidArgument, "no Morse index change in the interval");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (at(mid) == ilo) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Equilibria and spectra along the family f_lambda at n_steps equally
/// spaced parameters; Morse index changes of u = 0 are refined by bisection.
inline SweepResult bifurcation_sweep(const ProblemSpec& spec, double lo, double hi, int n_steps,
                                     const SweepOptions& opt = {}) {
  if (n_steps < 2) throw Error(ErrorKind::InvalidArgument, "n_steps must be >= 2");
  if (!(lo < hi)) throw Error(ErrorKind::InvalidArgument, "lambda range must satisfy lo < hi");
  SweepResult out;
  out.kind = "bifurcation";
  out.family = detail::family_name(spec);
  std::vector<int> morse(static_cast<std::size_t>(n_steps));
  FindOptions fo;
  fo.threads = opt.threads;
  for (int i = 0; i < n_steps; ++i) {
    const double lambda = i + 1 == n_steps ? hi : lo + (hi - lo) * i / (n_steps - 1);
    const ProblemSpec s = spec.with_f(detail::family_coeffs(spec, lambda));
    SweepPoint pt;
    pt.parameter = lambda;
    morse[i] = detail::trivial_morse_index(s);
    if (s.f().is_zero()) {
      pt.warnings.push_back("f vanishes identically at this parameter");
      out.points.push_back(std::move(pt));
      continue;
    }
    EquilibriumSet set = find_equilibria(s, fo);
    pt.warnings = set.warnings;
    pt.count = static_cast<int>(set.records.size());
    int id = 0;
    for (const auto& r : set.records) {
      SweepEntry e;
      e.id = id++;
      e.u0 = r.u0;
      e.is_constant = r.is_constant;
      e.hyperbolic = r.hyperbolic;
      if (r.spectrum) {
        e.min_abs = r.spectrum->min_abs;
        e.nearest = r.spectrum->nearest;
      }
      if (!r.spectrum_error.empty()) e.status = r.spectrum_error;
      else if (r.tangency) e.status = "TangencyUnresolved";
      pt.entries.push_back(std::move(e));
    }
    out.points.push_back(std::move(pt));
  }
  for (int i = 1; i < n_steps; ++i) {
    const auto& a = out.points[i - 1];
    const auto& b = out.points[i];
    if (morse[i] != morse[i - 1]) {
      Crossing c{"trivial", a.parameter, b.parameter, std::nullopt, morse[i - 1], morse[i]};
      // One bisection per unit change of the index.
      double from = a.parameter;
      for (int k = 0; k < std::abs(morse[i] - morse[i - 1]); ++k) {
        Crossing ck = c;
        ck.location = locate_trivial_crossing(spec, from, b.parameter, opt.crossing_tol);
        ck.lo = ck.location.value() - opt.crossing_tol;
        ck.hi = ck.location.value() + opt.crossing_tol;
        ck.index_before = detail::trivial_morse_index(spec.with_f(detail::family_coeffs(spec, ck.lo)));
        ck.index_after = detail::trivial_morse_index(spec.with_f(detail::family_coeffs(spec, ck.hi)));
        out.crossings.push_back(ck);
        from = ck.hi;
        if (detail::trivial_morse_index(spec.with_f(detail::family_coeffs(spec, from))) == morse[i]) break;
      }
    }
    if (a.count != b.count)
      out.crossings.push_back({"count", a.parameter, b.parameter, std::nullopt, a.count, b.count});
  }
  return out;
}

inline std::string sweep_csv_header() {
  return "parameter,id,u0,is_constant,min_abs_eig,nearest_eig,hyperbolic,status";
}

/// One CSV line per (parameter, equilibrium); parameters without equilibria
/// get a single line with empty fields.
inline std::string to_csv(const SweepResult& r) {
  std::string out = sweep_csv_header() + "\n";
  auto num = [](double v) { return std::isnan(v) ? std::string() : detail::fmt17(v); };
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  for (const auto& p : r.points) {
    if (p.entries.empty()) out += detail::fmt17(p.parameter) + ",,,,,,,\n";
    for (const auto& e : p.entries) {
      out += detail::fmt17(p.parameter) + "," + std::to_string(e.id) + "," + num(e.u0) + "," +
             (e.is_constant ? "1" : "0") + "," + num(e.min_abs) + "," + num(e.nearest) + "," +
             to_string(e.hyperbolic) + "," + quote(e.status) + "\n";
    }
  }
  return out;
}

inline nlohmann::json to_json(const SweepResult& r) {
  auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : r.points) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : p.entries)
      entries.push_back({{"id", e.id},
                         {"u0", num(e.u0)},
                         {"is_constant", e.is_constant},
                         {"min_abs_eig", num(e.min_abs)},
                         {"nearest_eig", num(e.nearest)},
                         {"hyperbolic", to_string(e.hyperbolic)},
                         {"status", e.status}});
    points.push_back({{"parameter", p.parameter},
                      {"count", p.count},
                      {"entries", std::move(entries)},
                      {"warnings", p.warnings}});
  }
  nlohmann::json crossings = nlohmann::json::array();
  for (const auto& c : r.crossings) {
    nlohmann::json j{{"branch", c.branch},
                     {"lo", c.lo},
                     {"hi", c.hi},
                     {"before", c.index_before},
                     {"after", c.index_after}};
    if (c.location) j["location"] = *c.location;
    crossings.push_back(std::move(j));
  }
  return {{"kind", r.kind}, {"family", r.family}, {"points", std::move(points)},
          {"crossings", std::move(crossings)}};
}

}  // namespace nhyp

#endif  // NHYP_PERTURB_HPP
