#ifndef NHYP_INTEGRATE_HPP
#define NHYP_INTEGRATE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "nhyp/error.hpp"
#include "nhyp/problem.hpp"
#include "nhyp/profile.hpp"

namespace nhyp {

using State2 = std::array<double, 2>;

struct StepperConfig {
  double rel = 1e-10;
  double abs = 1e-12;
  double h_max = 1.0 / 64.0;
  double h_min = 1e-14;
  double h_init = 1e-2;
  double blowup = 1e6;  // cap on |y[0]|
  long max_steps = 2'000'000;
};

inline StepperConfig stepper_config(const ToleranceSet& tol) {
  StepperConfig c;
  c.rel = tol.ode_rel;
  c.abs = tol.ode_abs;
  return c;
}

/// Dormand-Prince 5(4) on a two-component system from x0 to x1.
///
/// `observe(x, y)` is called at x0 and after every accepted step; the last
/// call is at exactly x1. Throws BlowUpError when |y[0]| exceeds cfg.blowup
/// and StepUnderflow when the controller asks for h < cfg.h_min.
template <class Rhs, class Observer>
State2 dopri5(Rhs&& rhs, double x0, double x1, State2 y, const StepperConfig& cfg,
              Observer&& observe) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  double x = x0;
  double h = std::min(cfg.h_init, cfg.h_max);
  observe(x, y);
  State2 k1 = rhs(x, y);
  bool last_rejected = false;
  long steps = 0;
  while (x < x1) {
    if (++steps > cfg.max_steps) throw Error(ErrorKind::StepUnderflow, "step budget exhausted");
    bool final_step = false;
    if (x + h >= x1 || x1 - (x + h) < 1e-3 * h) {
      h = x1 - x;
      final_step = true;
    }
    State2 yt, k2, k3, k4, k5, k6, k7, y5;
    for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * a21 * k1[i];
    k2 = rhs(x + c2 * h, yt);
    for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = rhs(x + c3 * h, yt);
    for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = rhs(x + c4 * h, yt);
    for (int i = 0; i < 2; ++i)
      yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = rhs(x + c5 * h, yt);
    for (int i = 0; i < 2; ++i)
      yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = rhs(x + h, yt);
    for (int i = 0; i < 2; ++i)
      y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    const double xn = final_step ? x1 : x + h;
    k7 = rhs(xn, y5);

    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * k7[i]);
      const double sc = cfg.abs + cfg.rel * std::max(std::abs(y[i]), std::abs(y5[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(0.5 * err);
    if (!std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      x = xn;
      y = y5;
      k1 = k7;
      if (!std::isfinite(y[0]) || !std::isfinite(y[1]) || std::abs(y[0]) > cfg.blowup) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "|y| exceeded %.3g at x = %.9g", cfg.blowup, x);
        throw BlowUpError(x, buf);
      }
      observe(x, y);
      if (final_step) break;
      double fac = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
      h = std::min(h * fac, cfg.h_max);
      last_rejected = false;
    } else {
      const double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
      h *= fac;
      last_rejected = true;
    }
    if (h < cfg.h_min) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "step size %.3g below %.3g at x = %.9g", h, cfg.h_min, x);
      throw Error(ErrorKind::StepUnderflow, buf);
    }
  }
  return y;
}

// ---------------------------------------------------------------------------

inline void check_initial_value(const ProblemSpec& spec, double u0) {
  if (!(std::abs(u0) <= 10.0 * spec.scan_bound())) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "|u0| = %.6g exceeds 10 x scan_bound", std::abs(u0));
    throw Error(ErrorKind::DomainError, buf);
  }
}

/// Right-hand side of the momentum form u' = p/a, p' = -f(u).
inline auto solution_rhs(const ProblemSpec& spec) {
  return [&spec](double x, const State2& y) -> State2 {
    return {y[1] / spec.a()(x), -spec.f()(y[0])};
  };
}

/// (u(1), p(1)) for the initial value problem u(0) = u0, u'(0) = 0, without
/// storing the trajectory. Same step sequence as integrate_ivp.
inline State2 shoot_endpoint(const ProblemSpec& spec, double u0) {
  check_initial_value(spec, u0);
  return dopri5(solution_rhs(spec), 0.0, 1.0, State2{u0, 0.0}, stepper_config(spec.tol()),
                [](double, const State2&) {});
}

/// Solution of (a u')' + f(u) = 0, u(0) = u0, u'(0) = 0 with dense output.
inline Profile integrate_ivp(const ProblemSpec& spec, double u0) {
  check_initial_value(spec, u0);
  std::vector<double> xs;
  std::vector<State2> ys;
  dopri5(solution_rhs(spec), 0.0, 1.0, State2{u0, 0.0}, stepper_config(spec.tol()),
         [&](double x, const State2& y) {
           xs.push_back(x);
           ys.push_back(y);
         });
  std::vector<NodeJet> jets(xs.size());
  std::vector<double> mom(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Jet2 a = spec.a().jet(xs[i]);
    const Jet2 f = spec.f().jet(ys[i][0]);
    NodeJet& j = jets[i];
    j.u = ys[i][0];
    j.du = ys[i][1] / a.value;
    j.d2u = (-f.value - a.d1 * j.du) / a.value;
    j.d3u = -(f.d1 * j.du + a.d2 * j.du + 2.0 * a.d1 * j.d2u) / a.value;
    mom[i] = ys[i][1];
  }
  return Profile::from_jets(ProfileKind::solution, std::move(xs), std::move(jets), std::move(mom));
}

/// v = du/du0 along `base`: (a v')' + f'(u(x)) v = 0, v(0) = 1, v'(0) = 0.
inline Profile integrate_variational(const ProblemSpec& spec, const Profile& base) {
  if (base.kind() != ProfileKind::solution)
    throw Error(ErrorKind::InvalidArgument, "variational pass needs a solution profile");
  auto rhs = [&](double x, const State2& y) -> State2 {
    return {y[1] / spec.a()(x), -spec.f().jet(base.u(x)).d1 * y[0]};
  };
  StepperConfig cfg = stepper_config(spec.tol());
  cfg.blowup = std::numeric_limits<double>::infinity();
  std::vector<double> xs;
  std::vector<State2> ys;
  dopri5(rhs, 0.0, 1.0, State2{1.0, 0.0}, cfg,
         [&](double x, const State2& y) {
           xs.push_back(x);
           ys.push_back(y);
         });
  std::vector<NodeJet> jets(xs.size());
  std::vector<double> mom(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Jet2 a = spec.a().jet(xs[i]);
    const ProfileSample b = base.eval(xs[i]);
    const Jet2 f = spec.f().jet(b.u);
    const double q = f.d1;
    const double dq = f.d2 * b.du;
    NodeJet& j = jets[i];
    j.u = ys[i][0];
    j.du = ys[i][1] / a.value;
    j.d2u = (-q * j.u - a.d1 * j.du) / a.value;
    j.d3u = -(dq * j.u + q * j.du + a.d2 * j.du + 2.0 * a.d1 * j.d2u) / a.value;
    mom[i] = ys[i][1];
  }
  return Profile::from_jets(ProfileKind::variational, std::move(xs), std::move(jets),
                            std::move(mom));
}

/// u'(1) of a profile: the Neumann miss at the right end.
inline double end_slope(const ProblemSpec& spec, const Profile& p) {
  return p.momentum().back() / spec.a()(1.0);
}

}  // namespace nhyp

#endif  // NHYP_INTEGRATE_HPP
