#ifndef NHYP_SPECTRUM_HPP
#define NHYP_SPECTRUM_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nhyp/error.hpp"
#include "nhyp/problem.hpp"
#include "nhyp/profile.hpp"

namespace nhyp {

enum class Hyperbolicity { hyperbolic, non_hyperbolic, undecided };
enum class SpectralMethod { fd_tridiag, prufer };

inline constexpr const char* to_string(Hyperbolicity h) {
  switch (h) {
    case Hyperbolicity::hyperbolic: return "hyperbolic";
    case Hyperbolicity::non_hyperbolic: return "non_hyperbolic";
    case Hyperbolicity::undecided: return "undecided";
  }
  return "unknown";
}

inline constexpr const char* to_string(SpectralMethod m) {
  return m == SpectralMethod::fd_tridiag ? "fd_tridiag" : "prufer";
}

/// Potential Q(x) of the linearization (a w')' + Q w = lambda w.
class Potential {
 public:
  static Potential constant(double q) {
    Potential p;
    p.constant_ = true;
    p.value_ = q;
    p.fn_ = [q](double) { return q; };
    return p;
  }

  /// Q(x) = f'(u(x)) along a solution profile.
  static Potential along(const ProblemSpec& spec, const Profile& base) {
    Potential p;
    auto df = std::make_shared<Polynomial>(spec.f().derivative());
    auto prof = std::make_shared<Profile>(base);
    p.fn_ = [df, prof](double x) { return (*df)(prof->u(x)); };
    return p;
  }

  static Potential from_function(std::function<double(double)> q) {
    Potential p;
    p.fn_ = std::move(q);
    return p;
  }

  double operator()(double x) const { return fn_(x); }
  bool is_constant() const noexcept { return constant_; }
  double constant_value() const noexcept { return value_; }

 private:
  std::function<double(double)> fn_;
  bool constant_ = false;
  double value_ = 0.0;
};

struct SpectrumReport {
  std::vector<double> eigenvalues;  // descending
  double min_abs = 0.0;
  double nearest = 0.0;  // eigenvalue closest to 0, signed
  double error_estimate = 0.0;
  int grid_n = 0;
  int k = 0;
  SpectralMethod method = SpectralMethod::fd_tridiag;
  /// True when the smallest computed eigenvalue lies below -hyp_tol, so no
  /// eigenvalue near 0 can be missing from the window.
  bool window_ok = false;
};

namespace detail {

/// Symmetric tridiagonal matrix: diagonal d, off-diagonal e (size n-1).
struct SymTridiag {
  std::vector<double> d;
  std::vector<double> e;

  std::size_t size() const noexcept { return d.size(); }

  /// Number of eigenvalues strictly less than x (Sturm count via LDL^T).
  int count_below(double x) const noexcept {
    int count = 0;
    double q = 1.0;
    const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    for (std::size_t i = 0; i < d.size(); ++i) {
      q = d[i] - x - (i ? e[i - 1] * e[i - 1] / q : 0.0);
      if (q == 0.0) q = -tiny;
      if (q < 0.0) ++count;
    }
    return count;
  }

  std::pair<double, double> gershgorin() const noexcept {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double r = (i ? std::abs(e[i - 1]) : 0.0) + (i + 1 < d.size() ? std::abs(e[i]) : 0.0);
      lo = std::min(lo, d[i] - r);
      hi = std::max(hi, d[i] + r);
    }
    return {lo, hi};
  }

  /// The j-th largest eigenvalue (j = 0 is the top) by bisection.
  double eigenvalue_from_top(int j) const {
    auto [lo, hi] = gershgorin();
    const int target = static_cast<int>(d.size()) - 1 - j;  // ascending index
    const double scale = std::max(std::abs(lo), std::abs(hi));
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi || hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * scale)
        break;
      if (count_below(mid) > target) hi = mid;
      else lo = mid;
    }
    return 0.5 * (lo + hi);
  }
};

/// Cell-centered conservative discretization of w -> (a w')' + Q w with
/// Neumann conditions by reflection. a is sampled at faces, Q at centers.
inline SymTridiag assemble_operator(const Polynomial& a, const Potential& q, int n) {
  SymTridiag t;
  t.d.assign(n, 0.0);
  t.e.assign(n - 1, 0.0);
  const double h = 1.0 / n;
  const double inv_h2 = 1.0 / (h * h);
  for (int i = 0; i + 1 < n; ++i) {
    const double af = a((i + 1) * h) * inv_h2;
    t.e[i] = af;
    t.d[i] -= af;
    t.d[i + 1] -= af;
  }
  for (int i = 0; i < n; ++i) t.d[i] += q((i + 0.5) * h);
  return t;
}

inline std::vector<double> top_eigenvalues(const SymTridiag& t, int k) {
  std::vector<double> out(k);
  for (int j = 0; j < k; ++j) out[j] = t.eigenvalue_from_top(j);
  return out;
}

inline double richardson(double fine, double coarse, int n_fine, int n_coarse) {
  const double r2 = static_cast<double>(n_fine) * n_fine / (static_cast<double>(n_coarse) * n_coarse);
  return (r2 * fine - coarse) / (r2 - 1.0);
}

inline double max_abs_potential(const Potential& q, int n) {
  double m = 0.0;
  for (int i = 0; i < n; ++i) m = std::max(m, std::abs(q((i + 0.5) / n)));
  return m;
}

inline void fill_summary(SpectrumReport& r, double hyp_tol) {
  r.min_abs = std::numeric_limits<double>::infinity();
  for (double l : r.eigenvalues) {
    if (std::abs(l) < r.min_abs) {
      r.min_abs = std::abs(l);
      r.nearest = l;
    }
  }
  r.k = static_cast<int>(r.eigenvalues.size());
  r.window_ok = !r.eigenvalues.empty() && r.eigenvalues.back() < -std::abs(hyp_tol);
}

/// Richardson-extrapolated top eigenvalues from grids n, n/2 and n/4:
/// `fine` pairs (n, n/2), `coarse` pairs (n/2, n/4).
struct ExtrapolatedSpectrum {
  std::vector<double> fine;
  std::vector<double> coarse;
};

/// Grows k from 8 (doubling) while `keep_going(smallest)` holds, or uses the
/// fixed k when k > 0.
template <class KeepGoing>
ExtrapolatedSpectrum extrapolated_spectrum(const ProblemSpec& spec, const Potential& q, int k,
                                           KeepGoing&& keep_going) {
  const int n = spec.grid_n();
  if (n < 16) throw Error(ErrorKind::InvalidArgument, "grid_n must be >= 16");
  const int n2 = n / 2, n4 = n / 4;
  const int k_cap = std::max(1, n4 / 4);
  const auto t1 = assemble_operator(spec.a(), q, n);
  const auto t2 = assemble_operator(spec.a(), q, n2);
  const auto t4 = assemble_operator(spec.a(), q, n4);
  const bool auto_k = k <= 0;
  int kk = auto_k ? 8 : k;
  ExtrapolatedSpectrum out;
  while (true) {
    kk = std::min(kk, k_cap);
    const auto l1 = top_eigenvalues(t1, kk);
    const auto l2 = top_eigenvalues(t2, kk);
    const auto l4 = top_eigenvalues(t4, kk);
    out.fine.resize(kk);
    out.coarse.resize(kk);
    for (int j = 0; j < kk; ++j) {
      out.fine[j] = richardson(l1[j], l2[j], n, n2);
      out.coarse[j] = richardson(l2[j], l4[j], n2, n4);
    }
    if (!auto_k || kk == k_cap || !keep_going(out.fine.back())) break;
    kk *= 2;
  }
  return out;
}

inline SpectrumReport finish_report(const ProblemSpec& spec, const ExtrapolatedSpectrum& s) {
  SpectrumReport r;
  r.method = SpectralMethod::fd_tridiag;
  r.grid_n = spec.grid_n();
  r.eigenvalues = s.fine;
  fill_summary(r, spec.tol().hyp_tol);
  const auto j = std::find(r.eigenvalues.begin(), r.eigenvalues.end(), r.nearest) - r.eigenvalues.begin();
  r.error_estimate = std::abs(r.nearest - s.coarse[j]);
  if (r.error_estimate > spec.tol().hyp_tol / 10.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "eigenvalue %.9g has Richardson error estimate %.3g > hyp_tol/10 at grid_n=%d",
                  r.nearest, r.error_estimate, r.grid_n);
    throw Error(ErrorKind::GridTooCoarse, buf);
  }
  return r;
}

}  // namespace detail

/// Largest eigenvalues of (a w')' + Q w = lambda w with Neumann conditions.
///
/// Eigenvalues are computed on grids N, N/2 and N/4. The reported values are
/// the Richardson extrapolation of the N and N/2 results; the error estimate
/// is the change of the extrapolated eigenvalue nearest 0 when the coarser
/// pair (N/2, N/4) is used instead. k <= 0 selects the default window: start
/// at 8 and double until the smallest eigenvalue is below -1 - max|Q|.
inline SpectrumReport eigenvalues_sl(const ProblemSpec& spec, const Potential& q, int k = 0) {
  const double floor = -1.0 - detail::max_abs_potential(q, spec.grid_n());
  return detail::finish_report(
      spec, detail::extrapolated_spectrum(spec, q, k, [&](double low) { return low >= floor; }));
}

inline SpectrumReport eigenvalues_sl(const ProblemSpec& spec, const Profile& base, int k = 0) {
  if (base.kind() != ProfileKind::solution)
    throw Error(ErrorKind::InvalidArgument, "spectrum needs a solution profile");
  return eigenvalues_sl(spec, Potential::along(spec, base), k);
}

/// Spectrum of the linearization at the constant equilibrium u = u0.
inline SpectrumReport eigenvalues_sl(const ProblemSpec& spec, double u0, int k = 0) {
  return eigenvalues_sl(spec, Potential::constant(spec.f().jet(u0).d1), k);
}

namespace detail {

/// Prufer angle at x = 1 for theta' = cos^2/a + (Q - lambda) sin^2, theta(0) = pi/2.
class PruferShooter {
 public:
  PruferShooter(const Polynomial& a, const Potential& q, int steps) : steps_(steps) {
    const int m = 2 * steps + 1;
    inv_a_.resize(m);
    q_.resize(m);
    for (int i = 0; i < m; ++i) {
      const double x = 0.5 * i / steps;
      inv_a_[i] = 1.0 / a(x);
      q_[i] = q(x);
    }
  }

  double theta1(double lambda) const {
    const double h = 1.0 / steps_;
    double th = 0.5 * std::numbers::pi;
    auto rhs = [&](int idx, double t) {
      const double c2 = std::cos(2.0 * t);
      return 0.5 * (1.0 + c2) * inv_a_[idx] + 0.5 * (1.0 - c2) * (q_[idx] - lambda);
    };
    for (int i = 0; i < steps_; ++i) {
      const int j = 2 * i;
      const double k1 = rhs(j, th);
      const double k2 = rhs(j + 1, th + 0.5 * h * k1);
      const double k3 = rhs(j + 1, th + 0.5 * h * k2);
      const double k4 = rhs(j + 2, th + h * k3);
      th += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return th;
  }

  double q_max() const noexcept {
    return *std::max_element(q_.begin(), q_.end());
  }

  /// The n-th eigenvalue from the top: theta(1) = pi/2 + n pi.
  double eigenvalue(int n) const {
    const double target = 0.5 * std::numbers::pi + n * std::numbers::pi;
    double hi = q_max() + 1.0;
    double lo = hi - 1.0;
    double step = 1.0;
    while (theta1(lo) < target) {
      hi = lo;
      step *= 2.0;
      lo -= step;
    }
    // Illinois iteration on g = theta(1) - target, which decreases in lambda.
    double glo = theta1(lo) - target, ghi = theta1(hi) - target;
    int side = 0;
    for (int it = 0; it < 200; ++it) {
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(hi)))
        break;
      double mid = (lo * ghi - hi * glo) / (ghi - glo);
      if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
      const double gm = theta1(mid) - target;
      if (gm == 0.0) return mid;
      if (gm > 0.0) {
        lo = mid, glo = gm;
        if (side == 1) ghi *= 0.5;
        side = 1;
      } else {
        hi = mid, ghi = gm;
        if (side == -1) glo *= 0.5;
        side = -1;
      }
    }
    return std::abs(glo) < std::abs(ghi) ? lo : hi;
  }

 private:
  int steps_;
  std::vector<double> inv_a_;
  std::vector<double> q_;
};

}  // namespace detail

/// Top k eigenvalues by Prufer phase shooting (fixed-step RK4). The error
/// estimate compares the eigenvalue nearest 0 with a half-resolution run.
inline SpectrumReport prufer_eigenvalues(const ProblemSpec& spec, const Potential& q, int k,
                                         int steps = 5000) {
  if (k <= 0) throw Error(ErrorKind::InvalidArgument, "k must be positive");
  const detail::PruferShooter fine(spec.a(), q, steps);
  SpectrumReport r;
  r.method = SpectralMethod::prufer;
  r.grid_n = steps;
  for (int j = 0; j < k; ++j) r.eigenvalues.push_back(fine.eigenvalue(j));
  detail::fill_summary(r, spec.tol().hyp_tol);
  const int j0 = static_cast<int>(
      std::find(r.eigenvalues.begin(), r.eigenvalues.end(), r.nearest) - r.eigenvalues.begin());
  const detail::PruferShooter coarse(spec.a(), q, steps / 2);
  r.error_estimate = std::abs(coarse.eigenvalue(j0) - r.nearest);
  return r;
}

/// Tri-state hyperbolicity with the discretization estimate as a guard band.
inline Hyperbolicity classify_hyperbolic(const SpectrumReport& r, const ToleranceSet& tol) {
  if (!r.window_ok) return Hyperbolicity::undecided;
  if (r.min_abs > tol.hyp_tol + r.error_estimate) return Hyperbolicity::hyperbolic;
  if (r.min_abs < tol.hyp_tol - r.error_estimate) return Hyperbolicity::non_hyperbolic;
  return Hyperbolicity::undecided;
}

/// Refinement hint for an undecided classification.
inline std::string refinement_suggestion(const SpectrumReport& r, const ToleranceSet& tol) {
  char buf[200];
  if (!r.window_ok)
    std::snprintf(buf, sizeof buf, "request more eigenvalues (k > %d)", r.k);
  else
    std::snprintf(buf, sizeof buf,
                  "min|eig| = %.3g is within %.3g of hyp_tol = %.3g; increase grid_n beyond %d",
                  r.min_abs, r.error_estimate, tol.hyp_tol, r.grid_n);
  return buf;
}

/// Hyperbolicity of the constant equilibrium u0 from the Neumann spectrum mu_n
/// of (a phi')': the linearization has eigenvalues f'(u0) + mu_n.
inline Hyperbolicity check_constant_hyperbolic(const ProblemSpec& spec, double u0,
                                               SpectrumReport* out = nullptr) {
  const double df = spec.f().jet(u0).d1;
  const double floor = -1.0 - std::abs(df);
  auto mu = detail::extrapolated_spectrum(spec, Potential::constant(0.0), 0,
                                          [&](double low) { return df + low >= floor; });
  for (double& l : mu.fine) l += df;
  for (double& l : mu.coarse) l += df;
  const SpectrumReport r = detail::finish_report(spec, mu);
  if (out) *out = r;
  return classify_hyperbolic(r, spec.tol());
}

namespace detail {

/// Solves (T - sigma I) x = b for a symmetric tridiagonal T by Gaussian
/// elimination with partial pivoting.
inline std::vector<double> shifted_solve(const SymTridiag& t, double sigma, std::vector<double> b) {
  const std::size_t n = t.size();
  std::vector<double> dl(n > 1 ? n - 1 : 0), dd(n), du(n > 1 ? n - 1 : 0), du2(n > 2 ? n - 2 : 0, 0.0);
  for (std::size_t i = 0; i < n; ++i) dd[i] = t.d[i] - sigma;
  for (std::size_t i = 0; i + 1 < n; ++i) dl[i] = du[i] = t.e[i];
  const double tiny = std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(sigma));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(dd[i]) >= std::abs(dl[i])) {
      if (dd[i] == 0.0) dd[i] = tiny;
      const double m = dl[i] / dd[i];
      dl[i] = m;
      dd[i + 1] -= m * du[i];
      b[i + 1] -= m * b[i];
    } else {
      const double m = dd[i] / dl[i];
      dd[i] = dl[i];
      dl[i] = m;
      const double tmp = du[i];
      du[i] = dd[i + 1];
      dd[i + 1] = tmp - m * dd[i + 1];
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -m * du[i + 1];
      }
      std::swap(b[i], b[i + 1]);
      b[i + 1] -= m * b[i];
    }
  }
  if (dd[n - 1] == 0.0) dd[n - 1] = tiny;
  std::vector<double> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    if (ii + 1 < n) s -= du[ii] * x[ii + 1];
    if (ii + 2 < n) s -= du2[ii] * x[ii + 2];
    x[ii] = s / dd[ii];
  }
  return x;
}

}  // namespace detail

/// Grid eigenvector (cell centers, unit 2-norm, first component positive) for
/// the j-th largest eigenvalue of the grid_n discretization.
inline std::vector<double> eigenvector(const ProblemSpec& spec, const Potential& q, int j) {
  const int n = spec.grid_n();
  const auto t = detail::assemble_operator(spec.a(), q, n);
  const double lambda = t.eigenvalue_from_top(j);
  const auto [glo, ghi] = t.gershgorin();
  const double sigma = lambda + 1e-10 * std::max(1.0, std::max(std::abs(glo), std::abs(ghi)));
  std::vector<double> x(n, 1.0);
  for (int i = 0; i < n; ++i) x[i] += 1e-3 * std::sin(1.0 + 7.0 * i);
  for (int it = 0; it < 3; ++it) {
    x = detail::shifted_solve(t, sigma, std::move(x));
    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : x) v /= norm;
  }
  if (x.front() < 0.0)
    for (double& v : x) v = -v;
  return x;
}

/// W(x) = a (u' phi' - u'' phi) for constant a, with u'' = -f(u)/a.
struct WronskianTrace {
  std::vector<double> x;
  std::vector<double> samples;
  double mean = 0.0;
  double max_rel_variation = 0.0;
  /// k = u''(p) phi(p) implied by the trace (k = -W/a).
  double k = 0.0;
  /// Per critical point: (p, u''(p) phi(p)) with u''(p) = -f(u(p))/a.
  std::vector<std::pair<double, double>> critical_products;
};

inline WronskianTrace wronskian_constancy(const Profile& base, const Profile& phi,
                                          const ProblemSpec& spec,
                                          const std::vector<double>& critical_x) {
  if (!spec.a_is_constant())
    throw Error(ErrorKind::NotConstantA, "the Wronskian identity is stated for constant a");
  if (spec.f().is_zero()) throw Error(ErrorKind::ZeroPolynomial, "f is identically zero");
  const double a = spec.a().coeff(0);
  WronskianTrace w;
  constexpr int samples = 1000;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double x = static_cast<double>(i) / (samples - 1);
    const ProfileSample u = base.eval(x);
    const ProfileSample v = phi.eval(x);
    const double d2u = -spec.f()(u.u) / a;
    const double val = a * (u.du * v.du - d2u * v.u);
    w.x.push_back(x);
    w.samples.push_back(val);
    lo = std::min(lo, val), hi = std::max(hi, val);
    sum += val;
  }
  w.mean = sum / samples;
  w.max_rel_variation = w.mean == 0.0 ? std::numeric_limits<double>::infinity()
                                      : (hi - lo) / std::abs(w.mean);
  w.k = -w.mean / a;
  const double fscale = std::max(1.0, spec.f().l1_norm());
  for (double p : critical_x) {
    const double fu = spec.f()(base.u(p));
    if (std::abs(fu) <= spec.tol().crit_tol * fscale) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "f(u(p)) = %.3g at critical point p = %.9g", fu, p);
      throw Error(ErrorKind::DegenerateCritical, buf);
    }
    w.critical_products.emplace_back(p, (-fu / a) * phi.u(p));
  }
  return w;
}

inline nlohmann::json to_json(const SpectrumReport& r) {
  return nlohmann::json{{"method", to_string(r.method)},
                        {"grid_n", r.grid_n},
                        {"k", r.k},
                        {"eigenvalues", r.eigenvalues},
                        {"min_abs", r.min_abs},
                        {"nearest", r.nearest},
                        {"error_estimate", r.error_estimate},
                        {"window_ok", r.window_ok}};
}

inline SpectrumReport spectrum_from_json(const nlohmann::json& j) {
  SpectrumReport r;
  r.method = j.at("method").get<std::string>() == "prufer" ? SpectralMethod::prufer
                                                           : SpectralMethod::fd_tridiag;
  r.grid_n = j.at("grid_n").get<int>();
  r.k = j.at("k").get<int>();
  r.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
  r.min_abs = j.at("min_abs").get<double>();
  r.nearest = j.at("nearest").get<double>();
  r.error_estimate = j.at("error_estimate").get<double>();
  r.window_ok = j.at("window_ok").get<bool>();
  return r;
}

}  // namespace nhyp

#endif  // NHYP_SPECTRUM_HPP
