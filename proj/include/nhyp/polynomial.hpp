#ifndef NHYP_POLYNOMIAL_HPP
#define NHYP_POLYNOMIAL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <utility>
#include <vector>

namespace nhyp {

/// Value and first two derivatives of a scalar function at one point.
struct Jet2 {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// A real root together with its estimated multiplicity.
struct PolynomialRoot {
  double x = 0.0;
  int multiplicity = 1;
};

/// Dense univariate polynomial, coefficients in ascending degree.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::initializer_list<double> coeffs) : c_(coeffs) { trim_exact(); }
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim_exact(); }

  const std::vector<double>& coeffs() const noexcept { return c_; }

  /// Degree of the polynomial; -1 for the zero polynomial.
  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const noexcept { return c_.empty(); }

  double coeff(std::size_t k) const noexcept { return k < c_.size() ? c_[k] : 0.0; }

  double operator()(double x) const noexcept {
    double r = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
    return r;
  }

  /// Horner evaluation of p, p', p'' in one sweep.
  Jet2 jet(double x) const noexcept {
    double p = 0.0, dp = 0.0, ddp = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
      ddp = ddp * x + 2.0 * dp;
      dp = dp * x + p;
      p = p * x + *it;
    }
    return {p, dp, ddp};
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return Polynomial{};
    std::vector<double> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
    return Polynomial(std::move(d));
  }

  Polynomial derivative(int order) const {
    Polynomial p = *this;
    for (int i = 0; i < order; ++i) p = p.derivative();
    return p;
  }

  /// Sum of absolute coefficient values; a cheap scale for tolerances.
  double l1_norm() const noexcept {
    double s = 0.0;
    for (double v : c_) s += std::abs(v);
    return s;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> r(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = a.coeff(k) + b.coeff(k);
    return Polynomial(std::move(r));
  }

  friend Polynomial operator*(double s, const Polynomial& p) {
    std::vector<double> r = p.c_;
    for (double& v : r) v *= s;
    return Polynomial(std::move(r));
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

  /// Distinct real roots in [lo, hi], ascending, with multiplicities.
  std::vector<PolynomialRoot> real_roots(double lo, double hi) const;

 private:
  void trim_exact() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
  }

  std::vector<double> c_;
};

namespace detail {

inline std::vector<double> trimmed(std::vector<double> v, double abs_tol) {
  while (!v.empty() && std::abs(v.back()) <= abs_tol) v.pop_back();
  return v;
}

/// Remainder of num / den (den nonzero, trimmed).
inline std::vector<double> poly_rem(std::vector<double> num, const std::vector<double>& den) {
  const std::size_t dn = den.size();
  const double lead = den.back();
  while (num.size() >= dn) {
    const double q = num.back() / lead;
    const std::size_t shift = num.size() - dn;
    for (std::size_t k = 0; k < dn; ++k) num[shift + k] -= q * den[k];
    num.pop_back();
  }
  return num;
}

inline double eval(const std::vector<double>& c, double x) {
  double r = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
  return r;
}

/// Sturm chain p, p', -rem(p, p'), ... terminated at the (approximate) gcd.
class SturmChain {
 public:
  explicit SturmChain(const Polynomial& p) {
    const double scale = std::max(p.l1_norm(), std::numeric_limits<double>::min());
    constexpr double rel = 1e-11;
    chain_.push_back(p.coeffs());
    std::vector<double> d = p.derivative().coeffs();
    if (d.empty()) return;
    chain_.push_back(std::move(d));
    while (chain_.back().size() > 1) {
      const auto& prev = chain_[chain_.size() - 2];
      const auto& cur = chain_.back();
      double prev_scale = 0.0;
      for (double v : prev) prev_scale += std::abs(v);
      auto r = trimmed(poly_rem(prev, cur), rel * std::max(prev_scale, rel * scale));
      if (r.empty()) break;
      for (double& v : r) v = -v;
      chain_.push_back(std::move(r));
    }
  }

  /// Number of sign variations along the chain at x (zeros skipped).
  int variations(double x) const {
    int count = 0;
    int last = 0;
    for (const auto& c : chain_) {
      const double v = eval(c, x);
      const int s = (v > 0.0) - (v < 0.0);
      if (s == 0) continue;
      if (last != 0 && s != last) ++count;
      last = s;
    }
    return count;
  }

 private:
  std::vector<std::vector<double>> chain_;
};

inline int estimate_multiplicity(const Polynomial& p, double x) {
  int m = 1;
  Polynomial d = p.derivative();
  const double xs = std::max(1.0, std::abs(x));
  while (!d.is_zero()) {
    const double tol = 1e-8 * d.l1_norm() * std::pow(xs, d.degree());
    if (std::abs(d(x)) > tol) break;
    ++m;
    d = d.derivative();
  }
  return m;
}

}  // namespace detail

inline std::vector<PolynomialRoot> Polynomial::real_roots(double lo, double hi) const {
  std::vector<PolynomialRoot> out;
  if (c_.size() <= 1 || !(lo <= hi)) return out;
  const detail::SturmChain chain(*this);
  const double pad = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  const double a0 = lo - pad;
  const double b0 = hi + pad;

  struct Frame {
    double a, b;
    int va, vb;
  };
  std::vector<Frame> stack{{a0, b0, chain.variations(a0), chain.variations(b0)}};
  std::vector<double> roots;
  while (!stack.empty()) {
    Frame fr = stack.back();
    stack.pop_back();
    const int n = fr.va - fr.vb;
    if (n <= 0) continue;
    const double width = fr.b - fr.a;
    const double floor_w = 4.0 * std::numeric_limits<double>::epsilon() *
                           std::max({1.0, std::abs(fr.a), std::abs(fr.b)});
    if (n == 1 || width <= floor_w) {
      // Shrink the isolating interval by counting bisection.
      double a = fr.a, b = fr.b;
      int va = fr.va;
      for (int it = 0; it < 200 && (b - a) > 2.0 * std::numeric_limits<double>::epsilon() *
                                                   std::max(std::abs(a), std::abs(b)) +
                                               std::numeric_limits<double>::min();
           ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        const int vm = chain.variations(mid);
        if (va - vm >= 1) {
          b = mid;
        } else {
          a = mid;
          va = vm;
        }
      }
      roots.push_back(0.5 * (a + b));
      continue;
    }
    const double mid = 0.5 * (fr.a + fr.b);
    const int vm = chain.variations(mid);
    stack.push_back({mid, fr.b, vm, fr.vb});
    stack.push_back({fr.a, mid, fr.va, vm});
  }
  std::sort(roots.begin(), roots.end());
  for (double r : roots) {
    if (c_[0] == 0.0 && std::abs(r) <= pad) r = 0.0;  // exact root at the origin
    const double x = std::clamp(r, lo, hi);
    if (std::abs(x - r) > pad) continue;
    out.push_back({x, detail::estimate_multiplicity(*this, x)});
  }
  return out;
}

}  // namespace nhyp

#endif  // NHYP_POLYNOMIAL_HPP
