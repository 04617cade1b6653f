#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nhyp/problem.hpp"

using namespace nhyp;

namespace {

ErrorKind kind_of(std::string_view text) {
  try {
    parse_spec(text);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error for: " << text;
  return ErrorKind::IoError;
}

}  // namespace

TEST(ParseSpec, MinimalDocumentUsesDefaults) {
  const auto s = parse_spec("a_coeffs=[1]; f_coeffs=[0,1]");
  EXPECT_EQ(s.a_coeffs(), std::vector<double>{1.0});
  EXPECT_EQ(s.f_coeffs(), (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(s.scan_bound(), 10.0);
  EXPECT_EQ(s.grid_n(), 2000);
  EXPECT_EQ(s.tol(), ToleranceSet{});
  EXPECT_DOUBLE_EQ(s.tol().hyp_tol, 1e-6);
  EXPECT_DOUBLE_EQ(evaluate_f(s, 3.0).value, 3.0);
}

TEST(ParseSpec, MultiLineWithOverridesAndComments) {
  const auto s = parse_spec(
      "# Chafee-Infante\n"
      "a_coeffs = [1.25, -1, 1]\n"
      "f_coeffs = [0, 15, 0, -15]   # lambda = 15\n"
      "scan_bound = 2\n"
      "grid_n = 400\n"
      "hyp_tol = 1e-7\n");
  EXPECT_EQ(s.grid_n(), 400);
  EXPECT_EQ(s.scan_bound(), 2.0);
  EXPECT_EQ(s.tol().hyp_tol, 1e-7);
  EXPECT_EQ(s.f_coeffs().size(), 4u);
}

TEST(ParseSpec, ErrorKinds) {
  EXPECT_EQ(kind_of("a_coeffs=[0,1]; f_coeffs=[0,1]"), ErrorKind::NonPositiveDiffusion);
  EXPECT_EQ(kind_of("a_coeffs=[1]; f_coeffs=[1,1]"), ErrorKind::NonzeroConstantTerm);
  EXPECT_EQ(kind_of("a_coeffs=[1]"), ErrorKind::MissingKey);
  EXPECT_EQ(kind_of("a_coeffs=[1]; f_coeffs=[0,x]"), ErrorKind::MalformedNumber);
  EXPECT_EQ(kind_of("a_coeffs=[1]; f_coeffs=[0,1]; colour=blue"), ErrorKind::UnknownKey);
  EXPECT_EQ(kind_of("a_coeffs=[1]; f_coeffs=[0,1]; grid_n=2.5"), ErrorKind::MalformedNumber);
  EXPECT_EQ(kind_of("a_coeffs=[1]; f_coeffs=[0,1]; grid_n=8"), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of("a_coeffs=[1]; f_coeffs=[0,1]; scan_bound=-1"), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of("a_coeffs=[1]; f_coeffs=[0,1]; sum_tol=0"), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of("a_coeffs=1; f_coeffs=[0,1]"), ErrorKind::MalformedNumber);
  // a = 1 - 4x(1-x)... vanishes at x = 1/2
  EXPECT_EQ(kind_of("a_coeffs=[1,-4,4]; f_coeffs=[0,1]"), ErrorKind::NonPositiveDiffusion);
}

TEST(EvaluateA, PolynomialJets) {
  const auto lin = ProblemSpec::create({1, 1}, {0, 1});
  const auto j = evaluate_a(lin, 0.5);
  EXPECT_DOUBLE_EQ(j.value, 1.5);
  EXPECT_DOUBLE_EQ(j.d1, 1.0);
  EXPECT_DOUBLE_EQ(j.d2, 0.0);

  const auto c = ProblemSpec::create({1}, {0, 1});
  for (double x : {0.0, 0.3, 1.0}) {
    const auto jc = evaluate_a(c, x);
    EXPECT_EQ(jc.value, 1.0);
    EXPECT_EQ(jc.d1, 0.0);
    EXPECT_EQ(jc.d2, 0.0);
  }

  const auto par = ProblemSpec::create({1.25, -1, 1}, {0, 1});
  const auto jp = evaluate_a(par, 0.5);
  EXPECT_DOUBLE_EQ(jp.value, 1.0);
  EXPECT_DOUBLE_EQ(jp.d1, 0.0);
  EXPECT_DOUBLE_EQ(jp.d2, 2.0);
}

TEST(EvaluateA, OutsideDomainThrows) {
  const auto s = ProblemSpec::create({1}, {0, 1});
  EXPECT_THROW(evaluate_a(s, 1.5), Error);
  EXPECT_THROW(evaluate_a(s, -1e-3), Error);
}

TEST(EvaluateF, ZeroFunction) {
  const auto s = ProblemSpec::create({1}, {0, 0});
  const auto j = evaluate_f(s, 5.0);
  EXPECT_EQ(j.value, 0.0);
  EXPECT_EQ(j.d1, 0.0);
  EXPECT_EQ(j.d2, 0.0);
}

TEST(Monotonicity, Cases) {
  const auto inc = monotonicity_intervals(ProblemSpec::create({1, 1}, {0, 1}));
  EXPECT_FALSE(inc.constant_flag);
  ASSERT_EQ(inc.signs.size(), 1u);
  EXPECT_EQ(inc.signs[0], 1);

  const auto par = monotonicity_intervals(ProblemSpec::create({1.25, -1, 1}, {0, 1}));
  ASSERT_EQ(par.signs, (std::vector<int>{-1, 1}));
  ASSERT_EQ(par.breakpoints.size(), 3u);
  EXPECT_NEAR(par.breakpoints[1], 0.5, 1e-14);

  const auto cst = monotonicity_intervals(ProblemSpec::create({1}, {0, 1}));
  EXPECT_TRUE(cst.constant_flag);
  EXPECT_EQ(cst.intervals(), 0u);
}

TEST(Monotonicity, TouchingDerivativeIsReported) {
  // a = 1 + (x - 1/2)^3: a' = 3 (x - 1/2)^2 touches zero at 1/2
  const auto s = ProblemSpec::create({0.875, 0.75, -1.5, 1.0}, {0, 1});
  try {
    monotonicity_intervals(s);
    FAIL() << "expected DegenerateSignChange";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateSignChange);
  }
}

TEST(Symmetry, Cases) {
  EXPECT_TRUE(symmetry_check_a(ProblemSpec::create({1.25, -1, 1}, {0, 1}), 1e-12));
  EXPECT_FALSE(symmetry_check_a(ProblemSpec::create({1, 1}, {0, 1}), 1e-12));
  EXPECT_TRUE(symmetry_check_a(ProblemSpec::create({3}, {0, 1}), 1e-12));
}

// Property checks over random valid specs.
TEST(ProblemProperties, RandomSpecs) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  int accepted = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> a{1.0 + 2.0 * std::abs(uni(rng)), uni(rng), uni(rng), uni(rng)};
    std::vector<double> f{0.0, 3 * uni(rng), uni(rng), -std::abs(uni(rng))};
    std::optional<ProblemSpec> s;
    try {
      s = ProblemSpec::create(a, f);
    } catch (const Error&) {
      continue;
    }
    ++accepted;
    double amin = 1e300;
    for (int i = 0; i <= 10000; ++i) amin = std::min(amin, s->a()(i / 10000.0));
    EXPECT_GT(amin, 0.0);
    EXPECT_EQ(evaluate_f(*s, 0.0).value, 0.0);

    try {
      const auto part = monotonicity_intervals(*s);
      const auto da = s->a().derivative();
      const double rt = s->tol().root_tol;
      for (std::size_t i = 1; i + 1 < part.breakpoints.size(); ++i) {
        const double x = part.breakpoints[i];
        EXPECT_LE(std::abs(da(x)), rt);
        EXPECT_LT(da(x - 1e-6) * da(x + 1e-6), 0.0);
      }
      for (std::size_t i = 1; i < part.breakpoints.size(); ++i)
        EXPECT_GT(part.breakpoints[i], part.breakpoints[i - 1]);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::DegenerateSignChange);
    }

    // reflection x -> 1 - x
    const Polynomial& p = s->a();
    std::vector<double> refl(p.coeffs().size(), 0.0);
    std::vector<double> binom{1.0};
    for (std::size_t k = 0; k < p.coeffs().size(); ++k) {
      // (1 - x)^k expanded
      std::vector<double> term(k + 1, 0.0);
      double c = 1.0;
      for (std::size_t j = 0; j <= k; ++j) {
        term[j] = c * ((j % 2) ? -1.0 : 1.0);
        c = c * static_cast<double>(k - j) / static_cast<double>(j + 1);
      }
      for (std::size_t j = 0; j <= k; ++j) refl[j] += p.coeffs()[k] * term[j];
    }
    const Polynomial r(refl);
    for (double tol : {1e-12, 1e-3, 0.1, 0.5})
      EXPECT_EQ(symmetry_check_a(p, tol), symmetry_check_a(r, tol));
  }
  EXPECT_GT(accepted, 100);
}

TEST(SpecHash, StableAndSensitive) {
  const auto a = parse_spec("a_coeffs=[1]; f_coeffs=[0,1]");
  const auto b = parse_spec("f_coeffs=[0, 1.0]\na_coeffs=[1.0]");
  const auto c = parse_spec("a_coeffs=[1]; f_coeffs=[0,1]; grid_n=400");
  EXPECT_EQ(spec_hash(a), spec_hash(b));
  EXPECT_NE(spec_hash(a), spec_hash(c));
  EXPECT_EQ(spec_hash(a).size(), 16u);
  EXPECT_EQ(spec_hash(parse_spec(canonical_text(c))), spec_hash(c));
}
