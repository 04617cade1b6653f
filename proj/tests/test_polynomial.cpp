#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nhyp/polynomial.hpp"

using nhyp::Polynomial;

TEST(Polynomial, JetMatchesHandDerivatives) {
  const Polynomial f{0.0, 1.0, 0.0, -1.0};  // u - u^3
  const auto j = f.jet(1.0);
  EXPECT_DOUBLE_EQ(j.value, 0.0);
  EXPECT_DOUBLE_EQ(j.d1, -2.0);
  EXPECT_DOUBLE_EQ(j.d2, -6.0);
  const auto j2 = Polynomial{0.0, 1.0}.jet(2.0);
  EXPECT_DOUBLE_EQ(j2.value, 2.0);
  EXPECT_DOUBLE_EQ(j2.d1, 1.0);
  EXPECT_DOUBLE_EQ(j2.d2, 0.0);
}

TEST(Polynomial, TrailingZerosAreTrimmed) {
  const Polynomial z{0.0, 0.0};
  EXPECT_TRUE(z.is_zero());
  EXPECT_EQ(z.degree(), -1);
  EXPECT_EQ((Polynomial{1.0, 2.0, 0.0}.degree()), 1);
}

TEST(Polynomial, RootsOfFactoredCubic) {
  const auto r = Polynomial{0.0, 1.0, 0.0, -1.0}.real_roots(-2.0, 2.0);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_NEAR(r[0].x, -1.0, 1e-14);
  EXPECT_EQ(r[1].x, 0.0);
  EXPECT_NEAR(r[2].x, 1.0, 1e-14);
  for (const auto& root : r) EXPECT_EQ(root.multiplicity, 1);
}

TEST(Polynomial, DoubleRootReportsMultiplicity) {
  const auto r = Polynomial{0.0, 0.0, 1.0}.real_roots(-5.0, 5.0);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].x, 0.0);
  EXPECT_EQ(r[0].multiplicity, 2);

  // (x - 0.5)^2 (x + 0.25)
  const Polynomial p{0.0625, 0.0, -0.75, 1.0};
  const auto q = p.real_roots(-1.0, 1.0);
  ASSERT_EQ(q.size(), 2u);
  EXPECT_NEAR(q[0].x, -0.25, 1e-12);
  EXPECT_EQ(q[0].multiplicity, 1);
  EXPECT_NEAR(q[1].x, 0.5, 1e-7);
  EXPECT_EQ(q[1].multiplicity, 2);
}

TEST(Polynomial, NoRealRoots) {
  EXPECT_TRUE((Polynomial{1.0, 0.0, 1.0}.real_roots(-10, 10).empty()));
  EXPECT_TRUE((Polynomial{3.0}.real_roots(-10, 10).empty()));
}

TEST(Polynomial, RootsRespectInterval) {
  const auto r = Polynomial{0.0, 1.0, 0.0, -1.0}.real_roots(0.5, 2.0);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0].x, 1.0, 1e-14);
}

// Property: roots of random products of distinct linear factors are recovered.
TEST(Polynomial, RandomFactoredPolynomialsRecoverRoots) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int deg = 1 + trial % 5;
    std::vector<double> roots;
    while (static_cast<int>(roots.size()) < deg) {
      const double r = uni(rng);
      bool far = true;
      for (double s : roots) far = far && std::abs(s - r) > 0.05;
      if (far) roots.push_back(r);
    }
    Polynomial p{1.0};
    for (double r : roots) {
      std::vector<double> c(p.coeffs().size() + 1, 0.0);
      for (std::size_t k = 0; k < p.coeffs().size(); ++k) {
        c[k] -= r * p.coeffs()[k];
        c[k + 1] += p.coeffs()[k];
      }
      p = Polynomial(c);
    }
    std::sort(roots.begin(), roots.end());
    const auto found = p.real_roots(-4.0, 4.0);
    ASSERT_EQ(found.size(), roots.size()) << "trial " << trial;
    for (std::size_t i = 0; i < roots.size(); ++i) EXPECT_NEAR(found[i].x, roots[i], 1e-9);
  }
}
