#include <gtest/gtest.h>

#include <cmath>

#include "nhyp/integrate.hpp"
#include "oracles.hpp"

using namespace nhyp;

namespace {

ProblemSpec spec(std::vector<double> a, std::vector<double> f, double bound = 10.0) {
  ProblemSpec::Options o;
  o.scan_bound = bound;
  return ProblemSpec::create(std::move(a), std::move(f), o);
}

double miss(const ProblemSpec& s, double u0) {
  const auto y = shoot_endpoint(s, u0);
  return y[1] / s.a()(1.0);
}

}  // namespace

TEST(IntegrateIvp, LinearOscillator) {
  const auto p = integrate_ivp(spec({1}, {0, 1}), 1.0);
  EXPECT_EQ(p.kind(), ProfileKind::solution);
  EXPECT_EQ(p.nodes().front(), 0.0);
  EXPECT_EQ(p.nodes().back(), 1.0);
  EXPECT_NEAR(p.u(1.0), std::cos(1.0), 1e-8);
  EXPECT_NEAR(p.du(1.0), -std::sin(1.0), 1e-8);
  for (double x = 0.0; x <= 1.0; x += 0.013) {
    EXPECT_NEAR(p.u(x), std::cos(x), 1e-9);
    EXPECT_NEAR(p.du(x), -std::sin(x), 1e-9);
    EXPECT_NEAR(p.d2u(x), -std::cos(x), 1e-7);
  }
}

TEST(IntegrateIvp, HyperbolicCosine) {
  const auto p = integrate_ivp(spec({1}, {0, -1}), 1.0);
  EXPECT_NEAR(p.u(1.0), std::cosh(1.0), 1e-8);
}

TEST(IntegrateIvp, ZeroNonlinearityGivesConstant) {
  const auto p = integrate_ivp(spec({1}, {0, 0}), 3.0);
  for (const auto& j : p.jets()) {
    EXPECT_EQ(j.u, 3.0);
    EXPECT_EQ(j.du, 0.0);
  }
  EXPECT_EQ(p.du(0.7), 0.0);
}

TEST(IntegrateIvp, NeumannAtOriginIsExact) {
  const auto s = spec({1.25, -1, 1}, {0, 15, 0, -15}, 2.0);
  const auto p = integrate_ivp(s, 0.4);
  EXPECT_EQ(p.jets().front().du, 0.0);
  EXPECT_EQ(p.momentum().front(), 0.0);
}

TEST(IntegrateIvp, GuardsAndBlowUp) {
  const auto s = spec({1}, {0, 15, 0, -15}, 2.0);
  EXPECT_THROW(integrate_ivp(s, 25.0), Error);
  try {
    integrate_ivp(s, 19.0);
    FAIL() << "expected blow-up";
  } catch (const BlowUpError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BlowUp);
    EXPECT_GT(e.location(), 0.0);
    EXPECT_LT(e.location(), 1.0);
  }
}

TEST(IntegrateIvp, MomentumMatchesDenseSlopeAtNodes) {
  const auto s = spec({1, 0.5, 0.25}, {0, 20, 0, -20}, 2.0);
  const auto p = integrate_ivp(s, 0.7);
  for (std::size_t i = 0; i < p.nodes().size(); ++i) {
    const double x = p.nodes()[i];
    EXPECT_NEAR(p.du(x), p.momentum()[i] / s.a()(x), 1e-12);
  }
}

TEST(IntegrateIvp, StrongFormResidualBetweenNodes) {
  const auto s = spec({1, 0.5, 0.25}, {0, 20, 0, -20}, 2.0);
  const auto p = integrate_ivp(s, 0.7);
  double worst = 0.0;
  for (int i = 1; i < 100; ++i) {
    const double x = i / 100.0;
    const auto a = s.a().jet(x);
    const auto v = p.eval(x);
    worst = std::max(worst, std::abs(a.d1 * v.du + a.value * v.d2u + s.f()(v.u)));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(IntegrateIvp, EnergyConservedForConstantDiffusion) {
  const ProblemSpec s = spec({2.0}, {0, 15, 0, -15}, 2.0);
  const auto F = [](double u) { return 7.5 * u * u - 3.75 * u * u * u * u; };
  for (double u0 : {-0.9, 0.3, 0.95}) {
    const auto p = integrate_ivp(s, u0);
    const double e0 = F(u0);
    for (double x = 0.0; x <= 1.0; x += 0.01) {
      const auto v = p.eval(x);
      const double e = 0.5 * 2.0 * v.du * v.du + F(v.u);
      EXPECT_LE(std::abs(e - e0), 100 * s.tol().ode_rel * std::abs(e0) + s.tol().ode_abs)
          << "u0=" << u0 << " x=" << x;
    }
  }
}

TEST(IntegrateIvp, ReflectedProblemReproducesReflectedProfile) {
  const auto s = spec({1, 1}, {0, 4}, 2.0);
  const auto r = spec({2, -1}, {0, 4}, 2.0);
  const auto fwd = integrate_ivp(s, 1.0);
  const double uend = fwd.u(1.0);
  const double pend = fwd.momentum().back();
  std::vector<double> xs;
  std::vector<State2> ys;
  dopri5([&](double x, const State2& y) -> State2 { return {y[1] / r.a()(x), -r.f()(y[0])}; }, 0.0,
         1.0, State2{uend, -pend}, stepper_config(r.tol()), [&](double x, const State2& y) {
           xs.push_back(x);
           ys.push_back(y);
         });
  EXPECT_NEAR(ys.back()[0], 1.0, 1e-8);
  EXPECT_NEAR(ys.back()[1], 0.0, 1e-8);
  for (std::size_t i = 0; i < xs.size(); i += 5) EXPECT_NEAR(ys[i][0], fwd.u(1.0 - xs[i]), 1e-8);
}

TEST(IntegrateVariational, LinearCases) {
  const auto s = spec({1}, {0, 1});
  const auto base = integrate_ivp(s, 1.0);
  const auto v = integrate_variational(s, base);
  EXPECT_EQ(v.kind(), ProfileKind::variational);
  EXPECT_EQ(v.jets().front().u, 1.0);
  EXPECT_EQ(v.jets().front().du, 0.0);
  EXPECT_NEAR(v.du(1.0), -std::sin(1.0), 1e-8);

  const auto z = spec({1}, {0, 0});
  const auto vz = integrate_variational(z, integrate_ivp(z, 2.0));
  for (const auto& j : vz.jets()) {
    EXPECT_EQ(j.u, 1.0);
    EXPECT_EQ(j.du, 0.0);
  }
}

TEST(IntegrateVariational, LargeLinearGrowthIsNotBlowUp) {
  const auto s = spec({1}, {0, -400}, 2.0);
  const auto v = integrate_variational(s, integrate_ivp(s, 0.0));
  EXPECT_NEAR(v.u(1.0) / std::cosh(20.0), 1.0, 1e-8);
}

TEST(IntegrateVariational, RequiresSolutionProfile) {
  const auto s = spec({1}, {0, 1});
  const auto v = integrate_variational(s, integrate_ivp(s, 1.0));
  EXPECT_THROW(integrate_variational(s, v), Error);
}

TEST(IntegrateVariational, MatchesFiniteDifferenceOfShootingMap) {
  const auto s = spec({1}, {0, 1, 0, -1}, 2.0);
  const double h = 1e-5;
  const double u0 = 0.1;
  const double fd = (miss(s, u0 + h) - miss(s, u0 - h)) / (2 * h);
  const auto v = integrate_variational(s, integrate_ivp(s, u0));
  const double slope = v.momentum().back() / s.a()(1.0);
  EXPECT_LE(std::abs(slope - fd), 1e-5 * std::abs(fd));
}

TEST(IntegrateVariational, GradientCheckOverGrid) {
  const auto s = spec({1, 0.5}, {0, 4, 0, -2}, 2.0);
  for (int i = 0; i < 10; ++i) {
    const double u0 = -1.3 + 0.29 * i;
    const double h = 1e-5;
    const double fd = (miss(s, u0 + h) - miss(s, u0 - h)) / (2 * h);
    const auto v = integrate_variational(s, integrate_ivp(s, u0));
    const double slope = v.momentum().back() / s.a()(1.0);
    EXPECT_LE(std::abs(slope - fd), 1e-5 * std::max(1.0, std::abs(fd))) << "u0=" << u0;
  }
}

TEST(Profile, SyntheticCosine) {
  constexpr double w = 2.0 * M_PI;
  const auto p = Profile::synthetic([](double x) {
    return NodeJet{std::cos(w * x), -w * std::sin(w * x), -w * w * std::cos(w * x),
                   w * w * w * std::sin(w * x)};
  });
  for (int i = 0; i <= 997; ++i) {
    const double x = i / 997.0;
    EXPECT_NEAR(p.u(x), std::cos(w * x), 1e-13);
    EXPECT_NEAR(p.du(x), -w * std::sin(w * x), 1e-12);
    EXPECT_NEAR(p.d2u(x), -w * w * std::cos(w * x), 1e-8);
  }
}

TEST(Profile, JsonRoundTripIsExact) {
  const auto s = spec({1, 0.5}, {0, 4, 0, -2}, 2.0);
  const auto p = integrate_ivp(s, 0.8);
  const auto j = profile_to_json(p);
  EXPECT_EQ(j.at("version"), 1);
  const auto q = profile_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(p, q);
  EXPECT_EQ(j.dump(), profile_to_json(q).dump());
}

TEST(Profile, RejectsBadNodes) {
  EXPECT_THROW(Profile::from_jets(ProfileKind::synthetic, {0.0, 0.0}, {{}, {}}, {0, 0}), Error);
  EXPECT_THROW(Profile::from_jets(ProfileKind::synthetic, {0.0}, {{}}, {0}), Error);
}

TEST(ShootingMiss, AgreesWithIndependentRk4) {
  const auto s = spec({1}, {0, 1, 0, -1}, 2.0);
  const auto m_ref = oracle::rk4_miss([](double) { return 1.0; },
                                      [](double u) { return u - u * u * u; }, 0.5, 100000);
  ASSERT_TRUE(m_ref);
  EXPECT_NEAR(miss(s, 0.5), *m_ref, 1e-6);
}
