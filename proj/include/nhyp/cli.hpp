#ifndef NHYP_CLI_HPP
#define NHYP_CLI_HPP

#include <chrono>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nhyp/equilibria.hpp"
#include "nhyp/error.hpp"
#include "nhyp/exceptional.hpp"
#include "nhyp/levelsets.hpp"
#include "nhyp/perturb.hpp"
#include "nhyp/problem.hpp"
#include "nhyp/report.hpp"
#include "nhyp/spectrum.hpp"
#include "nhyp/verify.hpp"

namespace nhyp {

enum ExitCode : int { exit_ok = 0, exit_input = 2, exit_numerical = 3, exit_verify = 4 };

struct LambdaRange {
  double lo = 0.0;
  double hi = 0.0;
  int n = 0;
};

struct CliOptions {
  std::string command;
  std::string spec_path;
  std::string out_dir = "nhyp_out";
  std::string format = "json";
  int q_grid = 32;
  std::vector<double> eps_list{1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
  std::optional<LambdaRange> lambda_range;
  std::vector<double> g_coeffs{0.0, 1.0};
  int threads = 1;
};

inline const std::vector<std::string>& cli_commands() {
  static const std::vector<std::string> c{"solve", "spectrum", "levelsums", "exceptional",
                                          "perturb", "sweep",    "verify"};
  return c;
}

/// Comma-separated numbers.
inline std::vector<double> parse_number_list(const std::string& key, const std::string& text) {
  return detail::parse_list(key, "[" + text + "]");
}

/// "LO:HI:N".
inline LambdaRange parse_lambda_range(const std::string& text) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? a : text.find(':', a + 1);
  if (b == std::string::npos)
    throw Error(ErrorKind::MalformedNumber, "--lambda-range expects LO:HI:N");
  LambdaRange r;
  r.lo = detail::parse_double("lambda-range", text.substr(0, a));
  r.hi = detail::parse_double("lambda-range", text.substr(a + 1, b - a - 1));
  const double n = detail::parse_double("lambda-range", text.substr(b + 1));
  if (n != std::floor(n) || n < 2 || n > 1e6)
    throw Error(ErrorKind::InvalidArgument, "--lambda-range N must be an integer >= 2");
  r.n = static_cast<int>(n);
  return r;
}

namespace detail {

inline int exit_code_for(ErrorKind k) {
  if (is_input_error(k) || k == ErrorKind::IoError) return exit_input;
  return exit_numerical;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline EquilibriumSet solve_spec(const ProblemSpec& spec, const CliOptions& opt) {
  FindOptions fo;
  fo.threads = opt.threads;
  return find_equilibria(spec, fo);
}

inline int cmd_solve(const ProblemSpec& spec, const CliOptions& opt, ReportWriter& w, std::ostream& out) {
  const auto set = solve_spec(spec, opt);
  emit_report(w, spec, set, parse_format(opt.format));
  out << set.records.size() << " equilibria\n";
  for (const auto& warning : set.warnings) out << "warning: " << warning << "\n";
  return exit_ok;
}

inline int cmd_spectrum(const ProblemSpec& spec, const CliOptions& opt, ReportWriter& w, std::ostream& out) {
  const auto set = solve_spec(spec, opt);
  if (set.records.empty()) throw Error(ErrorKind::EmptyReport, "no equilibria to report");
  bool failed = false;
  if (parse_format(opt.format) == ReportFormat::csv) {
    std::string csv = "id,u0,index,eigenvalue,error_estimate\n";
    for (std::size_t i = 0; i < set.records.size(); ++i) {
      const auto& r = set.records[i];
      failed = failed || !r.spectrum;
      if (!r.spectrum) continue;
      for (std::size_t j = 0; j < r.spectrum->eigenvalues.size(); ++j)
        csv += std::to_string(i) + "," + fmt17(r.u0) + "," + std::to_string(j) + "," +
               fmt17(r.spectrum->eigenvalues[j]) + "," + fmt17(r.spectrum->error_estimate) + "\n";
    }
    w.write_csv("spectrum.csv", csv);
  } else {
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t i = 0; i < set.records.size(); ++i) {
      const auto& r = set.records[i];
      nlohmann::json j{{"id", i}, {"u0", r.u0}, {"is_constant", r.is_constant},
                       {"hyperbolic", to_string(r.hyperbolic)}};
      if (r.spectrum) j["spectrum"] = to_json(*r.spectrum);
      else j["error"] = r.spectrum_error, failed = true;
      list.push_back(std::move(j));
    }
    w.write_json("spectrum.json", {{"spectra", std::move(list)}});
  }
  for (const auto& r : set.records) {
    char buf[160];
    if (r.spectrum)
      std::snprintf(buf, sizeof buf, "u0=%.12g min|eig|=%.6e %s\n", r.u0, r.spectrum->min_abs,
                    to_string(r.hyperbolic));
    else
      std::snprintf(buf, sizeof buf, "u0=%.12g spectrum unresolved\n", r.u0);
    out << buf;
  }
  return failed ? exit_numerical : exit_ok;
}

inline int cmd_levelsums(const ProblemSpec& spec, const CliOptions& opt, ReportWriter& w, std::ostream& out) {
  if (opt.q_grid < 1) throw Error(ErrorKind::InvalidArgument, "--q-grid must be >= 1");
  const auto set = solve_spec(spec, opt);
  std::string csv = "record,u0," + levelset_csv_header() + ",status\n";
  nlohmann::json list = nlohmann::json::array();
  int rows = 0;
  for (std::size_t i = 0; i < set.records.size(); ++i) {
    const auto& r = set.records[i];
    if (r.is_constant) continue;
    const auto [lo, hi] = r.profile.value_range();
    const SampledFunction phi = [&r](double x) { return r.variational.u(x); };
    for (int k = 0; k < opt.q_grid; ++k) {
      const double q = lo + (k + 0.5) * (hi - lo) / opt.q_grid;
      const std::string prefix = std::to_string(i) + "," + fmt17(r.u0) + ",";
      nlohmann::json j{{"record", i}, {"u0", r.u0}, {"q", q}};
      try {
        const auto rep = level_sums(r.profile, phi, q);
        csv += prefix + to_csv_row(rep) + ",ok\n";
        j["n_regular"] = rep.regular_points.size();
        j["n_critical"] = rep.critical_points.size();
        j["regular_sum"] = rep.regular_sum;
        j["signed_sum"] = rep.signed_sum;
        if (rep.critical_sum) j["critical_sum"] = *rep.critical_sum;
        j["status"] = "ok";
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::LevelTooCloseToCritical && e.kind() != ErrorKind::DegenerateCritical)
          throw;
        csv += prefix + fmt17(q) + ",,,,,," + csv_quote(e.what()) + "\n";
        j["status"] = e.what();
      }
      list.push_back(std::move(j));
      ++rows;
    }
  }
  if (rows == 0) throw Error(ErrorKind::EmptyReport, "no nonconstant equilibria: no level sets to report");
  if (parse_format(opt.format) == ReportFormat::csv) w.write_csv("levelsums.csv", csv);
  else w.write_json("levelsums.json", {{"phi", "variational"}, {"levels", std::move(list)}});
  out << rows << " level rows\n";
  return exit_ok;
}

inline int cmd_exceptional(const ProblemSpec& spec, const CliOptions& opt, ReportWriter& w, std::ostream& out) {
  auto set = solve_spec(spec, opt);
  if (set.records.empty()) throw Error(ErrorKind::EmptyReport, "no equilibria to report");
  std::string csv = "id,u0,condition1,condition2,condition3,overall,reason\n";
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t i = 0; i < set.records.size(); ++i) {
    auto& r = set.records[i];
    nlohmann::json j{{"id", i}, {"u0", r.u0}};
    try {
      const auto v = classify_and_store(spec, r);
      j["verdict"] = to_json(v);
      csv += std::to_string(i) + "," + fmt17(r.u0) + "," + to_string(v.condition1) + "," +
             to_string(v.condition2) + "," + to_string(v.condition3) + "," + to_string(v.overall) +
             "," + csv_quote(v.reason) + "\n";
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateCritical) throw;
      r.exceptional = ExceptionalFlag::undecided;
      j["error"] = e.what();
      csv += std::to_string(i) + "," + fmt17(r.u0) + ",,,,undecided," + csv_quote(e.what()) + "\n";
    }
    out << "u0=" << fmt17(r.u0) << " " << to_string(r.exceptional) << "\n";
    list.push_back(std::move(j));
  }
  if (parse_format(opt.format) == ReportFormat::csv) w.write_csv("exceptional.csv", csv);
  else w.write_json("exceptional.json", {{"verdicts", std::move(list)}});
  return exit_ok;
}

inline int cmd_perturb(const ProblemSpec& spec, const CliOptions& opt, ReportWriter& w, std::ostream& out) {
  const auto set = solve_spec(spec, opt);
  std::string csv = "record,record_u0," + sweep_csv_header() + "\n";
  nlohmann::json scans = nlohmann::json::array();
  SweepOptions so;
  so.threads = opt.threads;
  for (std::size_t i = 0; i < set.records.size(); ++i) {
    const auto& r = set.records[i];
    if (r.hyperbolic == Hyperbolicity::hyperbolic) continue;
    const auto res = perturbation_scan(spec, r, opt.g_coeffs, opt.eps_list, so);
    const std::string body = to_csv(res);
    std::istringstream lines(body.substr(body.find('\n') + 1));
    for (std::string line; std::getline(lines, line);)
      csv += std::to_string(i) + "," + fmt17(r.u0) + "," + line + "\n";
    scans.push_back({{"record", i}, {"u0", r.u0}, {"sweep", to_json(res)}});
    for (const auto& p : res.points) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "u0=%.12g eps=%.6g min|eig|=%.6e\n", r.u0, p.parameter,
                    p.entries.empty() ? std::nan("") : p.entries[0].min_abs);
      out << buf;
    }
  }
  if (scans.empty())
    throw Error(ErrorKind::EmptyReport, "no non-hyperbolic or undecided equilibria to perturb");
  if (parse_format(opt.format) == ReportFormat::csv) w.write_csv("perturb.csv", csv);
  else w.write_json("perturb.json", {{"g_coeffs", opt.g_coeffs}, {"scans", std::move(scans)}});
  return exit_ok;
}

inline int cmd_sweep(const ProblemSpec& spec, const CliOptions& opt, ReportWriter& w, std::ostream& out) {
  if (!opt.lambda_range) throw Error(ErrorKind::InvalidArgument, "sweep needs --lambda-range LO:HI:N");
  SweepOptions so;
  so.threads = opt.threads;
  const auto res = bifurcation_sweep(spec, opt.lambda_range->lo, opt.lambda_range->hi,
                                     opt.lambda_range->n, so);
  if (parse_format(opt.format) == ReportFormat::csv) w.write_csv("sweep.csv", to_csv(res));
  else w.write_json("sweep.json", to_json(res));
  for (const auto& p : res.points) out << "lambda=" << fmt17(p.parameter) << " count=" << p.count << "\n";
  for (const auto& c : res.crossings) {
    out << "crossing " << c.branch << " [" << fmt17(c.lo) << ", " << fmt17(c.hi) << "]";
    if (c.location) out << " at " << fmt17(*c.location);
    out << "\n";
  }
  return exit_ok;
}

inline int cmd_verify(const CliOptions& opt, ReportWriter& w, std::ostream& out) {
  const auto checks = run_verification(opt.threads);
  nlohmann::json list = nlohmann::json::array();
  bool ok = true;
  for (const auto& c : checks) {
    out << format_check(c) << "\n";
    list.push_back(to_json(c));
    ok = ok && c.passed;
  }
  nlohmann::json specs = nlohmann::json::array();
  for (const auto& s : reference_specs()) specs.push_back(canonical_text(s));
  w.write_json("verify.json", {{"reference_specs", std::move(specs)},
                               {"checks", std::move(list)},
                               {"passed", ok}});
  out << (ok ? "all checks passed" : "verification FAILED") << "\n";
  return ok ? exit_ok : exit_verify;
}

}  // namespace detail

/// Runs one command and writes its reports into opt.out_dir. Returns the exit code.
inline int run(const CliOptions& opt, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  try {
    const auto& cmds = cli_commands();
    if (std::find(cmds.begin(), cmds.end(), opt.command) == cmds.end())
      throw Error(ErrorKind::InvalidArgument, "unknown command '" + opt.command + "'");
    parse_format(opt.format);
    if (opt.threads < 1) throw Error(ErrorKind::InvalidArgument, "--threads must be >= 1");
    if (opt.command == "verify") {
      ReportWriter w(opt.out_dir, reference_hash());
      const int code = detail::cmd_verify(opt, w, out);
      w.write_manifest({"", "verify", nlohmann::json::object(), tool_version(), {}, std::nullopt});
      return code;
    }
    if (opt.spec_path.empty()) throw Error(ErrorKind::MissingKey, "--spec is required for " + opt.command);
    const ProblemSpec spec = read_spec_file(opt.spec_path);
    ReportWriter w(opt.out_dir, spec_hash(spec));
    int code = exit_ok;
    if (opt.command == "solve") code = detail::cmd_solve(spec, opt, w, out);
    else if (opt.command == "spectrum") code = detail::cmd_spectrum(spec, opt, w, out);
    else if (opt.command == "levelsums") code = detail::cmd_levelsums(spec, opt, w, out);
    else if (opt.command == "exceptional") code = detail::cmd_exceptional(spec, opt, w, out);
    else if (opt.command == "perturb") code = detail::cmd_perturb(spec, opt, w, out);
    else code = detail::cmd_sweep(spec, opt, w, out);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    w.write_manifest({"", opt.command, tolerances_json(spec), tool_version(), {}, secs});
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return detail::exit_code_for(e.kind());
  }
}

}  // namespace nhyp

#endif  // NHYP_CLI_HPP
