#ifndef NHYP_PROBLEM_HPP
#define NHYP_PROBLEM_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "nhyp/error.hpp"
#include "nhyp/polynomial.hpp"

namespace nhyp {

/// Numerical tolerances shared by every stage of the pipeline.
///
/// hyp_tol should stay at least ten times the eigensolver's discretization
/// error; the spectrum module enforces this through its Richardson estimate.
struct ToleranceSet {
  double ode_rel = 1e-10;
  double ode_abs = 1e-12;
  double root_tol = 1e-10;
  double hyp_tol = 1e-6;
  double crit_tol = 1e-8;
  double sum_tol = 1e-6;

  void validate() const {
    const std::pair<const char*, double> all[] = {{"ode_rel", ode_rel},   {"ode_abs", ode_abs},
                                                  {"root_tol", root_tol}, {"hyp_tol", hyp_tol},
                                                  {"crit_tol", crit_tol}, {"sum_tol", sum_tol}};
    for (const auto& [name, v] : all) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be strictly positive");
    }
  }

  friend bool operator==(const ToleranceSet&, const ToleranceSet&) = default;
};

/// Scan, grid and tolerance settings of a problem.
struct SpecOptions {
  double scan_bound = 10.0;
  int grid_n = 2000;
  ToleranceSet tol{};
  /// Direction of the sweep parameter: f_lambda = f + lambda * f_param.
  /// Empty means "scale f itself".
  std::vector<double> f_param{};
};

/// Diffusion coefficient a and nonlinearity f of (a u')' + f(u) = 0 with
/// Neumann conditions, both as polynomials, plus scan and grid settings.
///
/// Construction validates: a > 0 on [0,1] (dense sampling refined at the
/// roots of a'), f(0) = 0 exactly, scan_bound > 0 and grid_n >= 16.
class ProblemSpec {
 public:
  using Options = SpecOptions;

  static ProblemSpec create(std::vector<double> a_coeffs, std::vector<double> f_coeffs,
                            Options opt = {}) {
    ProblemSpec s;
    s.a_coeffs_ = std::move(a_coeffs);
    s.f_coeffs_ = std::move(f_coeffs);
    s.opt_ = std::move(opt);
    s.a_ = Polynomial(s.a_coeffs_);
    s.f_ = Polynomial(s.f_coeffs_);
    s.validate();
    return s;
  }

  const Polynomial& a() const noexcept { return a_; }
  const Polynomial& f() const noexcept { return f_; }
  const std::vector<double>& a_coeffs() const noexcept { return a_coeffs_; }
  const std::vector<double>& f_coeffs() const noexcept { return f_coeffs_; }
  const std::vector<double>& f_param() const noexcept { return opt_.f_param; }
  double scan_bound() const noexcept { return opt_.scan_bound; }
  int grid_n() const noexcept { return opt_.grid_n; }
  const ToleranceSet& tol() const noexcept { return opt_.tol; }
  const Options& options() const noexcept { return opt_; }
  /// Minimum of a over [0,1] found during validation.
  double a_min() const noexcept { return a_min_; }
  bool a_is_constant() const noexcept { return a_.degree() <= 0; }

  ProblemSpec with_f(std::vector<double> f_coeffs) const {
    return create(a_coeffs_, std::move(f_coeffs), opt_);
  }
  ProblemSpec with_options(Options opt) const { return create(a_coeffs_, f_coeffs_, std::move(opt)); }

 private:
  ProblemSpec() = default;

  void validate() {
    if (a_.is_zero())
      throw Error(ErrorKind::NonPositiveDiffusion, "a is the zero polynomial");
    if (f_.coeff(0) != 0.0) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "f(0) = %.17g, expected exactly 0", f_.coeff(0));
      throw Error(ErrorKind::NonzeroConstantTerm, buf);
    }
    if (!(opt_.scan_bound > 0.0) || !std::isfinite(opt_.scan_bound))
      throw Error(ErrorKind::InvalidArgument, "scan_bound must be > 0");
    if (opt_.grid_n < 16) throw Error(ErrorKind::InvalidArgument, "grid_n must be >= 16");
    if (!opt_.f_param.empty() && opt_.f_param.front() != 0.0)
      throw Error(ErrorKind::NonzeroConstantTerm, "f_param must have zero constant term");
    for (double c : a_coeffs_)
      if (!std::isfinite(c)) throw Error(ErrorKind::MalformedNumber, "non-finite a coefficient");
    for (double c : f_coeffs_)
      if (!std::isfinite(c)) throw Error(ErrorKind::MalformedNumber, "non-finite f coefficient");
    opt_.tol.validate();

    constexpr int samples = 10000;
    double amin = a_(0.0);
    double xmin = 0.0;
    for (int i = 1; i <= samples; ++i) {
      const double x = static_cast<double>(i) / samples;
      const double v = a_(x);
      if (v < amin) amin = v, xmin = x;
    }
    for (const auto& r : a_.derivative().real_roots(0.0, 1.0)) {
      const double v = a_(r.x);
      if (v < amin) amin = v, xmin = r.x;
    }
    a_min_ = amin;
    if (!(amin > 0.0)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "a(%.6g) = %.6g is not positive", xmin, amin);
      throw Error(ErrorKind::NonPositiveDiffusion, buf);
    }
  }

  std::vector<double> a_coeffs_;
  std::vector<double> f_coeffs_;
  Options opt_;
  Polynomial a_;
  Polynomial f_;
  double a_min_ = 0.0;
};

/// (a, a', a'') at x; x must lie in [0,1].
inline Jet2 evaluate_a(const ProblemSpec& spec, double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "x = %.17g outside [0,1]", x);
    throw Error(ErrorKind::DomainError, buf);
  }
  return spec.a().jet(x);
}

inline Jet2 evaluate_f(const ProblemSpec& spec, double u) { return spec.f().jet(u); }

// ---------------------------------------------------------------------------
// Structural analysis of a

struct MonotonicityPartition {
  std::vector<double> breakpoints;  // 0 = x0 < ... < xn = 1; empty when constant
  std::vector<int> signs;           // sign of a' per interval
  bool constant_flag = false;

  std::size_t intervals() const noexcept { return signs.size(); }
};

inline MonotonicityPartition monotonicity_intervals(const Polynomial& a) {
  MonotonicityPartition out;
  const Polynomial da = a.derivative();
  if (da.is_zero()) {
    out.constant_flag = true;
    return out;
  }
  out.breakpoints.push_back(0.0);
  for (const auto& r : da.real_roots(0.0, 1.0)) {
    if (r.x <= 0.0 || r.x >= 1.0) continue;
    if (r.multiplicity % 2 == 0) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "a' vanishes at x = %.12g without changing sign", r.x);
      throw Error(ErrorKind::DegenerateSignChange, buf);
    }
    out.breakpoints.push_back(r.x);
  }
  out.breakpoints.push_back(1.0);
  for (std::size_t i = 0; i + 1 < out.breakpoints.size(); ++i) {
    const double mid = 0.5 * (out.breakpoints[i] + out.breakpoints[i + 1]);
    out.signs.push_back(da(mid) > 0.0 ? 1 : -1);
  }
  return out;
}

inline MonotonicityPartition monotonicity_intervals(const ProblemSpec& spec) {
  return monotonicity_intervals(spec.a());
}

/// True when a is even about x = 1/2 up to tol relative to max|a|.
inline bool symmetry_check_a(const Polynomial& a, double tol) {
  constexpr int samples = 1000;
  double max_diff = 0.0;
  double max_abs = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double x = static_cast<double>(i) / samples;
    const double ax = a(x);
    max_abs = std::max(max_abs, std::abs(ax));
    max_diff = std::max(max_diff, std::abs(ax - a(1.0 - x)));
  }
  return max_diff <= tol * max_abs;
}

inline bool symmetry_check_a(const ProblemSpec& spec, double tol) {
  return symmetry_check_a(spec.a(), tol);
}

// ---------------------------------------------------------------------------
// Spec file format

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view key, std::string_view tok) {
  tok = trim(tok);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw Error(ErrorKind::MalformedNumber,
                std::string(key) + ": cannot parse '" + std::string(tok) + "'");
  return v;
}

inline std::vector<double> parse_list(std::string_view key, std::string_view val) {
  val = trim(val);
  if (val.size() < 2 || val.front() != '[' || val.back() != ']')
    throw Error(ErrorKind::MalformedNumber, std::string(key) + ": expected [c0, c1, ...]");
  val = trim(val.substr(1, val.size() - 2));
  std::vector<double> out;
  if (val.empty()) return out;
  while (true) {
    const auto comma = val.find(',');
    out.push_back(parse_double(key, val.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    val.remove_prefix(comma + 1);
  }
  return out;
}

inline std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Parses the key=value spec format. Entries are separated by newlines or
/// ';'; '#' starts a comment. Unknown keys are rejected.
inline ProblemSpec parse_spec(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto end = rest.find_first_of("\n;");
    std::string_view line = rest.substr(0, end);
    rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::MalformedNumber, "expected key=value, got '" + std::string(line) + "'");
    const std::string key(detail::trim(line.substr(0, eq)));
    if (kv.count(key)) throw Error(ErrorKind::InvalidArgument, "duplicate key '" + key + "'");
    kv.emplace(key, std::string(detail::trim(line.substr(eq + 1))));
  }

  static constexpr std::string_view known[] = {"a_coeffs", "f_coeffs", "f_param",  "scan_bound",
                                               "grid_n",   "ode_rel",  "ode_abs",  "root_tol",
                                               "hyp_tol",  "crit_tol", "sum_tol"};
  for (const auto& [k, v] : kv) {
    if (std::find(std::begin(known), std::end(known), k) == std::end(known))
      throw Error(ErrorKind::UnknownKey, "unknown key '" + k + "'");
  }
  for (const char* required : {"a_coeffs", "f_coeffs"}) {
    if (!kv.count(required)) throw Error(ErrorKind::MissingKey, std::string("missing ") + required);
  }

  ProblemSpec::Options opt;
  auto scalar = [&](const char* key, double& dst) {
    if (auto it = kv.find(key); it != kv.end()) dst = detail::parse_double(key, it->second);
  };
  scalar("scan_bound", opt.scan_bound);
  scalar("ode_rel", opt.tol.ode_rel);
  scalar("ode_abs", opt.tol.ode_abs);
  scalar("root_tol", opt.tol.root_tol);
  scalar("hyp_tol", opt.tol.hyp_tol);
  scalar("crit_tol", opt.tol.crit_tol);
  scalar("sum_tol", opt.tol.sum_tol);
  if (auto it = kv.find("grid_n"); it != kv.end()) {
    std::string_view tok = detail::trim(it->second);
    int n = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), n);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size())
      throw Error(ErrorKind::MalformedNumber, "grid_n: expected an integer");
    opt.grid_n = n;
  }
  if (auto it = kv.find("f_param"); it != kv.end()) opt.f_param = detail::parse_list("f_param", it->second);

  return ProblemSpec::create(detail::parse_list("a_coeffs", kv.at("a_coeffs")),
                             detail::parse_list("f_coeffs", kv.at("f_coeffs")), std::move(opt));
}

inline ProblemSpec read_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open spec file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

/// Canonical text form: fixed key order, 17 significant digits.
inline std::string canonical_text(const ProblemSpec& s) {
  auto list = [](const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + detail::fmt17(v[i]);
    return out + "]";
  };
  const auto& t = s.tol();
  std::string out;
  out += "a_coeffs=" + list(s.a_coeffs()) + "\n";
  out += "f_coeffs=" + list(s.f_coeffs()) + "\n";
  if (!s.f_param().empty()) out += "f_param=" + list(s.f_param()) + "\n";
  out += "scan_bound=" + detail::fmt17(s.scan_bound()) + "\n";
  out += "grid_n=" + std::to_string(s.grid_n()) + "\n";
  out += "ode_rel=" + detail::fmt17(t.ode_rel) + "\n";
  out += "ode_abs=" + detail::fmt17(t.ode_abs) + "\n";
  out += "root_tol=" + detail::fmt17(t.root_tol) + "\n";
  out += "hyp_tol=" + detail::fmt17(t.hyp_tol) + "\n";
  out += "crit_tol=" + detail::fmt17(t.crit_tol) + "\n";
  out += "sum_tol=" + detail::fmt17(t.sum_tol) + "\n";
  return out;
}

namespace detail {

/// 64-bit FNV-1a as 16 hex digits.
inline std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace detail

/// FNV-1a of the canonical text.
inline std::string spec_hash(const ProblemSpec& s) { return detail::fnv1a_hex(canonical_text(s)); }

}  // namespace nhyp

#endif  // NHYP_PROBLEM_HPP
