// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nhyp/nhyp.hpp"
#include "oracles.hpp"

using namespace nhyp;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4)));
};

void Outcome::require(bool ok, const char* fmt, ...) {
  char buf[256];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  if (!detail.empty()) detail += "; ";
  detail += ok ? buf : std::string("FAILED ") + buf;
  passed = passed && ok;
}

ProblemSpec make_spec(std::vector<double> a, std::vector<double> f, double bound = 2.0) {
  SpecOptions o;
  o.scan_bound = bound;
  return ProblemSpec::create(std::move(a), std::move(f), o);
}

oracle::Fn poly(const Polynomial& p) {
  return [p](double x) { return p(x); };
}

Profile cosine(double w) {
  return Profile::synthetic(
      [w](double x) {
        return NodeJet{std::cos(w * x), -w * std::sin(w * x), -w * w * std::cos(w * x),
                       w * w * w * std::sin(w * x)};
      },
      2000);
}

Outcome ac1() {
  Outcome o;
  const auto s = make_spec({1}, {0, 0});
  const auto fd = eigenvalues_sl(s, Potential::constant(0.0), 5);
  double rel = std::abs(fd.eigenvalues[0]);
  for (int n = 1; n < 5; ++n)
    rel = std::max(rel, std::abs(fd.eigenvalues[n] + n * n * pi * pi) / (n * n * pi * pi));
  o.require(rel <= 1e-3, "max rel err vs -n^2 pi^2 = %.2e (<= 1e-3)", rel);
  const auto pr = prufer_eigenvalues(s, Potential::constant(0.0), 5);
  double d = 0.0;
  for (int n = 0; n < 5; ++n) d = std::max(d, std::abs(pr.eigenvalues[n] - fd.eigenvalues[n]));
  o.require(d <= 1e-5, "Prufer vs grid = %.2e (<= 1e-5)", d);
  return o;
}

Outcome ac2() {
  Outcome o;
  const auto s = make_spec({1}, {0, 1, 0, -1});
  const auto sweep = bifurcation_sweep(s, 1.0, 45.0, 6);
  std::vector<double> at;
  for (const auto& c : sweep.crossings)
    if (c.branch == "trivial" && c.location) at.push_back(*c.location);
  o.require(at.size() == 2, "%zu trivial-branch crossings in [1, 45] (expected 2)", at.size());
  if (at.size() == 2) {
    o.require(std::abs(at[0] - pi * pi) <= 1e-4, "|lambda_1 - pi^2| = %.2e (<= 1e-4)",
              std::abs(at[0] - pi * pi));
    o.require(std::abs(at[1] - 4 * pi * pi) <= 4e-4, "|lambda_2 - 4 pi^2| = %.2e (<= 4e-4)",
              std::abs(at[1] - 4 * pi * pi));
  }
  return o;
}

Outcome ac3() {
  Outcome o;
  for (const auto& [lambda, expect] : {std::pair{1.0, 3}, std::pair{15.0, 5}}) {
    const auto s = make_spec({1}, {0, lambda, 0, -lambda});
    const int n = static_cast<int>(find_equilibria(s).records.size());
    const int oracle_n = oracle::dense_scan_sign_changes(poly(s.a()), poly(s.f()), 2.0, 10000);
    o.require(n == expect && n == oracle_n, "lambda=%g: %d equilibria, oracle %d, expected %d", lambda,
              n, oracle_n, expect);
  }
  return o;
}

Outcome ac4() {
  Outcome o;
  const Profile u = cosine(2 * pi);
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), level(-0.98, 0.98);
  double worst_orth = 0.0, worst_sum = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int degree = static_cast<int>(rng() % 6);
    std::vector<double> h(static_cast<std::size_t>(degree) + 1);
    for (double& c : h) c = coef(rng);
    const Polynomial hp(h);
    const SampledFunction phi = [&](double x) {
      const auto s = u.eval(x);
      return s.du * hp(s.u);
    };
    for (double r : orthogonality_residuals(u, phi, 10)) worst_orth = std::max(worst_orth, std::abs(r));
    for (int i = 0; i < 50; ++i) worst_sum = std::max(worst_sum, std::abs(regular_sum(u, phi, level(rng))));
  }
  o.require(worst_orth < 1e-8, "forward: max orthogonality residual %.2e (< 1e-8)", worst_orth);
  o.require(worst_sum < 1e-6, "forward: max regular sum %.2e (< 1e-6)", worst_sum);

  // Converse: phi = g(u) u' has vanishing regular sums; its residuals must vanish too.
  double conv_sum = 0.0, conv_orth = 0.0;
  const std::vector<std::function<double(double)>> gs{
      [](double v) { return std::exp(v); }, [](double v) { return std::sin(3 * v); },
      [](double v) { return 1.0 / (2.0 + v); }};
  for (const auto& g : gs) {
    const SampledFunction phi = [&](double x) {
      const auto s = u.eval(x);
      return s.du * g(s.u);
    };
    for (int i = 0; i < 50; ++i) conv_sum = std::max(conv_sum, std::abs(regular_sum(u, phi, level(rng))));
    for (double r : orthogonality_residuals(u, phi, 10)) conv_orth = std::max(conv_orth, std::abs(r));
  }
  o.require(conv_sum < 1e-6 && conv_orth < 1e-8, "converse: sums %.2e, residuals %.2e", conv_sum,
            conv_orth);
  return o;
}

Outcome ac5() {
  Outcome o;
  const Profile u = cosine(2 * pi);
  const SampledFunction one = [](double) { return 1.0; };
  const double expect = 1.0 / (2.0 * pi);
  const double top = critical_sum(u, one, 1.0), bottom = critical_sum(u, one, -1.0);
  o.require(std::abs(top - expect) <= 1e-8, "q=1: %.12f", top);
  o.require(std::abs(bottom - expect) <= 1e-8, "q=-1: %.12f (1/(2 pi) = %.12f)", bottom, expect);
  return o;
}

Outcome ac6() {
  Outcome o;
  const auto s = make_spec({1}, {0, 15, 0, -15});
  int checked = 0;
  for (const auto& r : find_equilibria(s).records) {
    if (r.is_constant) continue;
    ++checked;
    std::vector<double> xs;
    for (const auto& c : r.critical.points) xs.push_back(c.x);
    const auto w = wronskian_constancy(r.profile, r.variational, s, xs);
    double prod = 0.0;
    for (const auto& [p, k] : w.critical_products) prod = std::max(prod, std::abs(k - w.k) / std::abs(w.k));
    o.require(w.max_rel_variation < 1e-6 && prod <= 1e-5 && w.critical_products.size() == 2,
              "u0=%.6f: W variation %.2e, phi u'' spread %.2e", r.u0, w.max_rel_variation, prod);
  }
  o.require(checked == 2, "%d nonconstant equilibria", checked);
  return o;
}

Outcome ac7() {
  Outcome o;
  const auto s = make_spec({1}, {0, 15, 0, -15});
  auto fd = [&](double u0, double h) {
    return (shooting_miss(s, u0 + h).m - shooting_miss(s, u0 - h).m) / (2 * h);
  };
  double worst = 0.0;
  std::vector<double> ratios;
  for (int i = 0; i < 20; ++i) {
    const double u0 = -0.95 + 1.9 * i / 19.0;
    const double slope = shooting_miss(s, u0).m_slope;
    const double scale = std::max(1.0, std::abs(slope));
    worst = std::max(worst, std::abs(fd(u0, 1e-4) - slope) / scale);
    const double e1 = std::abs(fd(u0, 2e-2) - slope), e2 = std::abs(fd(u0, 1e-2) - slope);
    if (e2 > 1e-8 * scale) ratios.push_back(e1 / e2);
  }
  std::sort(ratios.begin(), ratios.end());
  const double median = ratios.empty() ? 0.0 : ratios[ratios.size() / 2];
  o.require(worst <= 1e-5, "max rel err %.2e over 20 points (<= 1e-5)", worst);
  o.require(median > 3.5 && median < 4.5, "median error ratio for h halving %.3f (second order: 4)",
            median);
  return o;
}

Outcome ac8() {
  Outcome o;
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> c0d(0.5, 2.0), xsd(0.25, 0.75), up(0.2, 2.0), down(0.1, 0.9),
      lin(5.0, 80.0), quad(-5.0, 5.0), cub(-80.0, -5.0);
  int records = 0, pairs = 0, exceptional = 0;
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double c0 = c0d(rng);
    const double xs = k % 2 == 0 ? 0.5 : xsd(rng);
    const double reach = std::max(xs * xs, (1 - xs) * (1 - xs));
    const double c2 = rng() % 2 ? up(rng) : -down(rng) * c0 / reach;
    const auto s = make_spec({c0 + c2 * xs * xs, -2 * c2 * xs, c2}, {0, lin(rng), quad(rng), cub(rng)});
    if (monotonicity_intervals(s).intervals() != 2) {
      o.require(false, "spec %d does not have two monotonicity intervals", k);
      continue;
    }
    for (const auto& r : find_equilibria(s).records) {
      ++records;
      if (classify_exceptional(s, r).overall != ExceptionalFlag::nonexceptional) ++exceptional;
      if (r.is_constant) continue;
      const auto& pts = r.critical.points;
      const auto [lo, hi] = r.profile.value_range();
      for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
          if (std::abs(pts[i].value - pts[j].value) > s.tol().sum_tol * (hi - lo)) continue;
          ++pairs;
          const double scale = intzero_scale(s.a(), r.profile, pts[i].x, pts[j].x);
          worst = std::max(worst, std::abs(intzero_integral(s, r.profile, pts[i].x, pts[j].x)) /
                                      std::max(scale, 1e-300));
        }
    }
  }
  o.require(exceptional == 0, "%d of %d records not classified nonexceptional", exceptional, records);
  o.require(pairs > 0 && worst < 1e-6, "%d same-value pairs, max |intzero|/scale %.2e (< 1e-6)", pairs,
            worst);
  return o;
}

Outcome ac9() {
  Outcome o;
  const auto s = make_spec({1}, {0, pi * pi});
  const auto set = find_equilibria(s);
  const auto& zero = set.records.at(0);
  o.require(zero.is_constant && zero.u0 == 0.0 && zero.hyperbolic == Hyperbolicity::non_hyperbolic,
            "u=0 non-hyperbolic at f = pi^2 u");
  const std::vector<double> eps{1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
  const auto shift = perturbation_scan(s, zero, {0, 1}, eps);
  double worst = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i)
    worst = std::max(worst, std::abs(shift.points[i].entries.at(0).min_abs - eps[i]));
  o.require(worst <= 1e-8, "g=u: max |min|eig| - eps| = %.2e (<= 1e-8)", worst);
  const auto quad = perturbation_scan(s, zero, {0, 0, 1}, eps);
  double largest = 0.0;
  for (const auto& p : quad.points) largest = std::max(largest, p.entries.at(0).min_abs);
  o.require(largest < s.tol().hyp_tol, "g=u^2: max min|eig| = %.2e (< hyp_tol)", largest);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome ac10() {
  Outcome o;
  const auto base = fs::temp_directory_path() / "nhyp_acceptance_verify";
  fs::remove_all(base);
  std::vector<std::string> outs;
  for (const char* run_name : {"a", "b"}) {
    CliOptions opt;
    opt.command = "verify";
    opt.out_dir = (base / run_name).string();
    std::ostringstream out, err;
    const int code = run(opt, out, err);
    o.require(code == 0, "verify run %s exit %d", run_name, code);
    outs.push_back(out.str());
  }
  int files = 0, same = 0;
  for (const auto& e : fs::recursive_directory_iterator(base / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto other = base / "b" / fs::relative(e.path(), base / "a");
    if (fs::exists(other) && slurp(e.path()) == slurp(other)) ++same;
  }
  o.require(files > 0 && same == files && outs[0] == outs[1], "%d of %d report files byte-identical",
            same, files);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    Outcome (*fn)();
    double budget;  // seconds; 0 means no limit
  };
  const Criterion all[] = {
      {"AC1", "Neumann spectrum, analytic case", ac1, 1.0},
      {"AC2", "resonance localization on the trivial branch", ac2, 30.0},
      {"AC3", "Chafee-Infante equilibrium counts", ac3, 30.0},
      {"AC4", "level-set sum identities", ac4, 10.0},
      {"AC5", "critical sums with boundary half-weights", ac5, 0.0},
      {"AC6", "Wronskian constancy", ac6, 0.0},
      {"AC7", "variational gradient check", ac7, 0.0},
      {"AC8", "two monotonicity intervals: no exceptional equilibria", ac8, 120.0},
      {"AC9", "genericity shift experiment", ac9, 0.0},
      {"AC10", "verify determinism", ac10, 0.0},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.require(false, "exception: %s", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget > 0.0) o.require(secs < c.budget, "runtime %.2f s (< %.0f s)", secs, c.budget);
    std::printf("%-4s %s  %s [%.2f s]: %s\n", c.id, o.passed ? "PASS" : "FAIL", c.title, secs,
                o.detail.c_str());
    std::fflush(stdout);
    failed += o.passed ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(all)) - failed, std::size(all));
  return failed == 0 ? 0 : 1;
}
