#ifndef NHYP_VERIFY_HPP
#define NHYP_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nhyp/equilibria.hpp"
#include "nhyp/exceptional.hpp"
#include "nhyp/levelsets.hpp"
#include "nhyp/perturb.hpp"
#include "nhyp/problem.hpp"
#include "nhyp/spectrum.hpp"

namespace nhyp {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;  // observed error or count
  double limit = 0.0;  // threshold the value is compared against
  std::string detail;
};

inline nlohmann::json to_json(const CheckResult& c) {
  return {{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"limit", c.limit},
          {"detail", c.detail}};
}

/// "PASS name value=... limit=..." with fixed formatting.
inline std::string format_check(const CheckResult& c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s %-28s value=%.6e limit=%.6e", c.passed ? "PASS" : "FAIL",
                c.name.c_str(), c.value, c.limit);
  std::string line = buf;
  if (!c.detail.empty()) line += " (" + c.detail + ")";
  return line;
}

namespace detail {

inline ProblemSpec reference_spec(std::vector<double> a, std::vector<double> f) {
  SpecOptions o;
  o.scan_bound = 2.0;
  return ProblemSpec::create(std::move(a), std::move(f), o);
}

inline CheckResult at_most(std::string name, double value, double limit, std::string detail = "") {
  return {std::move(name), value <= limit, value, limit, std::move(detail)};
}

inline CheckResult equals(std::string name, double value, double expected) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "expected %.17g", expected);
  return {std::move(name), value == expected, value, expected, buf};
}

inline Profile cosine_profile(double w) {
  return Profile::synthetic(
      [w](double x) {
        return NodeJet{std::cos(w * x), -w * std::sin(w * x), -w * w * std::cos(w * x),
                       w * w * w * std::sin(w * x)};
      },
      2000);
}

}  // namespace detail

/// Specs exercised by the verification suite.
inline std::vector<ProblemSpec> reference_specs() {
  using std::numbers::pi;
  return {detail::reference_spec({1}, {0, 0}), detail::reference_spec({1.25, -1, 1}, {0, 0}),
          detail::reference_spec({1}, {0, 1, 0, -1}), detail::reference_spec({1}, {0, 15, 0, -15}),
          detail::reference_spec({1}, {0, pi * pi})};
}

/// Hash over the canonical texts of all reference specs.
inline std::string reference_hash() {
  std::string text;
  for (const auto& s : reference_specs()) text += canonical_text(s) + "---\n";
  return detail::fnv1a_hex(text);
}

/// Invariant suite on the reference specs. Deterministic for fixed tolerances.
inline std::vector<CheckResult> run_verification(int threads = 1) {
  using std::numbers::pi;
  std::vector<CheckResult> out;
  const auto specs = reference_specs();
  const ProblemSpec& flat = specs[0];
  const ProblemSpec& convex = specs[1];
  const ProblemSpec& chafee1 = specs[2];
  const ProblemSpec& chafee15 = specs[3];
  const ProblemSpec& resonant = specs[4];

  {
    const auto r = eigenvalues_sl(flat, Potential::constant(0.0), 5);
    double err = std::abs(r.eigenvalues[0]);
    for (int n = 1; n < 5; ++n)
      err = std::max(err, std::abs(r.eigenvalues[n] + n * n * pi * pi) / (n * n * pi * pi));
    out.push_back(detail::at_most("neumann_laplacian_spectrum", err, 1e-3));
    const auto p = prufer_eigenvalues(flat, Potential::constant(0.0), 5);
    double d = 0.0;
    for (int n = 0; n < 5; ++n)
      d = std::max(d, std::abs(p.eigenvalues[n] - r.eigenvalues[n]) / std::max(1.0, std::abs(p.eigenvalues[n])));
    out.push_back(detail::at_most("prufer_agreement_laplacian", d, 1e-5));
  }
  {
    const auto fd = eigenvalues_sl(convex, Potential::constant(0.0), 5);
    const auto pr = prufer_eigenvalues(convex, Potential::constant(0.0), 5);
    double d = 0.0;
    for (int n = 0; n < 5; ++n)
      d = std::max(d, std::abs(fd.eigenvalues[n] - pr.eigenvalues[n]) / std::max(1.0, std::abs(pr.eigenvalues[n])));
    out.push_back(detail::at_most("prufer_agreement_variable_a", d, 1e-5));
  }

  FindOptions fo;
  fo.threads = threads;
  const auto set1 = find_equilibria(chafee1, fo);
  out.push_back(detail::equals("equilibrium_count_lambda1", static_cast<double>(set1.records.size()), 3));
  const auto set15 = find_equilibria(chafee15, fo);
  out.push_back(detail::equals("equilibrium_count_lambda15", static_cast<double>(set15.records.size()), 5));

  {
    double worst_miss = 0.0, worst_res = 0.0, worst_mirror = 0.0;
    const auto& recs = set15.records;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const auto& r = recs[i];
      worst_miss = std::max(worst_miss, std::abs(r.miss) / detail::miss_tolerance(chafee15, r));
      worst_mirror = std::max(worst_mirror, std::abs(r.u0 + recs[recs.size() - 1 - i].u0));
      if (r.is_constant) continue;
      double scale = 1.0;
      for (int k = 1; k <= 100; ++k) scale = std::max(scale, std::abs(chafee15.f()(r.profile.u(k / 101.0))));
      for (int k = 1; k <= 100; ++k) {
        const auto s = r.profile.eval(k / 101.0);
        worst_res = std::max(worst_res, std::abs(s.d2u + chafee15.f()(s.u)) / scale);
      }
    }
    out.push_back(detail::at_most("miss_invariant", worst_miss, 1.0, "|miss| / tolerance"));
    out.push_back(detail::at_most("strong_form_residual", worst_res, 1e-6));
    out.push_back(detail::at_most("mirror_symmetry", worst_mirror, chafee15.tol().root_tol * 10));
  }
  {
    double var = 0.0, prod = 0.0;
    for (const auto& r : set15.records) {
      if (r.is_constant) continue;
      std::vector<double> xs;
      for (const auto& c : r.critical.points) xs.push_back(c.x);
      const auto w = wronskian_constancy(r.profile, r.variational, chafee15, xs);
      var = std::max(var, w.max_rel_variation);
      for (const auto& [p, k] : w.critical_products) prod = std::max(prod, std::abs(k - w.k) / std::abs(w.k));
    }
    out.push_back(detail::at_most("wronskian_constancy", var, 1e-6));
    out.push_back(detail::at_most("wronskian_critical_products", prod, 1e-5));
  }
  {
    double worst = 0.0;
    const double h = 1e-4;
    for (int i = 0; i < 5; ++i) {
      const double u0 = -0.9 + 0.45 * i;
      const auto m = shooting_miss(chafee15, u0);
      const double fd = (shooting_miss(chafee15, u0 + h).m - shooting_miss(chafee15, u0 - h).m) / (2 * h);
      worst = std::max(worst, std::abs(fd - m.m_slope) / std::max(1.0, std::abs(m.m_slope)));
    }
    out.push_back(detail::at_most("variational_gradient", worst, 1e-5));
  }
  {
    const Profile u = detail::cosine_profile(2 * pi);
    const SampledFunction phi = [&](double x) {
      const auto s = u.eval(x);
      return s.du * (1.0 + s.u - 0.5 * s.u * s.u * s.u);
    };
    double orth = 0.0;
    for (double r : orthogonality_residuals(u, phi, 10)) orth = std::max(orth, std::abs(r));
    out.push_back(detail::at_most("sumzero_orthogonality", orth, 1e-8));
    double sums = 0.0;
    for (int i = 1; i <= 10; ++i) sums = std::max(sums, std::abs(regular_sum(u, phi, -0.95 + 0.17 * i)));
    out.push_back(detail::at_most("sumzero_regular_sums", sums, 1e-6));
    const SampledFunction one = [](double) { return 1.0; };
    const double expect = 1.0 / (2.0 * pi);
    const double cs = std::max(std::abs(critical_sum(u, one, 1.0) - expect),
                               std::abs(critical_sum(u, one, -1.0) - expect));
    out.push_back(detail::at_most("critical_sum_cosine", cs, 1e-8));
  }
  {
    double worst = 0.0;
    int nonexceptional = 0, total = 0;
    for (const auto& r : set15.records) {
      ++total;
      if (classify_exceptional(chafee15, r).overall == ExceptionalFlag::nonexceptional) ++nonexceptional;
      if (r.is_constant) continue;
      worst = std::max(worst, std::abs(intzero_integral(chafee15, r.profile, 0.0, 1.0)));
    }
    out.push_back(detail::equals("intzero_constant_a", worst, 0.0));
    out.push_back(detail::equals("nonexceptional_lambda15", nonexceptional, total));
  }
  {
    const auto set = find_equilibria(resonant, fo);
    const auto& zero = set.records.at(0);
    out.push_back(detail::equals("resonant_zero_non_hyperbolic",
                                 zero.hyperbolic == Hyperbolicity::non_hyperbolic ? 1.0 : 0.0, 1.0));
    const auto shift = perturbation_scan(resonant, zero, {0, 1}, {1e-3});
    out.push_back(detail::at_most("shift_law", std::abs(shift.points[0].entries[0].min_abs - 1e-3), 1e-8));
    const auto quad = perturbation_scan(resonant, zero, {0, 0, 1}, {1e-2});
    out.push_back(detail::at_most("shift_negative_control", quad.points[0].entries[0].min_abs,
                                  resonant.tol().hyp_tol));
  }
  {
    const double l = locate_trivial_crossing(chafee1, 5.0, 15.0);
    out.push_back(detail::at_most("resonance_pi_squared", std::abs(l - pi * pi), 1e-4));
  }
  return out;
}

}  // namespace nhyp

#endif  // NHYP_VERIFY_HPP
