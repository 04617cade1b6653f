#ifndef NHYP_REPORT_HPP
#define NHYP_REPORT_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nhyp/equilibria.hpp"
#include "nhyp/error.hpp"
#include "nhyp/problem.hpp"

#ifndef NHYP_VERSION
#define NHYP_VERSION "0.0.0"
#endif

namespace nhyp {

enum class ReportFormat { json, csv };

inline ReportFormat parse_format(const std::string& s) {
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  throw Error(ErrorKind::InvalidArgument, "unknown format '" + s + "' (expected json or csv)");
}

inline constexpr const char* tool_version() { return NHYP_VERSION; }

struct RunManifest {
  std::string spec_hash;
  std::string command;
  nlohmann::json tolerances;
  std::string version = tool_version();
  std::vector<std::string> outputs;
  std::optional<double> wall_time;
};

inline nlohmann::json tolerances_json(const ProblemSpec& spec) {
  const auto& t = spec.tol();
  return {{"ode_rel", t.ode_rel},   {"ode_abs", t.ode_abs}, {"root_tol", t.root_tol},
          {"hyp_tol", t.hyp_tol},   {"crit_tol", t.crit_tol}, {"sum_tol", t.sum_tol},
          {"grid_n", spec.grid_n()}, {"scan_bound", spec.scan_bound()}};
}

inline nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json j{{"spec_hash", m.spec_hash}, {"command", m.command}, {"tolerances", m.tolerances},
                   {"version", m.version},     {"outputs", m.outputs}};
  if (m.wall_time) j["wall_time_s"] = *m.wall_time;
  return j;
}

/// Writes report files into one directory and keeps the manifest list.
class ReportWriter {
 public:
  ReportWriter(std::filesystem::path dir, std::string spec_hash)
      : dir_(std::move(dir)), hash_(std::move(spec_hash)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create '" + dir_.string() + "': " + ec.message());
  }

  const std::string& spec_hash() const noexcept { return hash_; }
  const std::vector<std::string>& outputs() const noexcept { return outputs_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }

  /// JSON object with "spec_hash" inserted first.
  void write_json(const std::string& name, const nlohmann::json& body) {
    nlohmann::ordered_json j;
    j["spec_hash"] = hash_;
    for (const auto& [k, v] : body.items()) j[k] = v;
    write_text(name, j.dump(2) + "\n");
  }

  /// CSV text preceded by a "# spec_hash=" comment line.
  void write_csv(const std::string& name, const std::string& csv) {
    write_text(name, "# spec_hash=" + hash_ + "\n" + csv);
  }

  void write_manifest(RunManifest m) {
    m.spec_hash = hash_;
    m.outputs = outputs_;
    write_file("manifest.json", to_json(m).dump(2) + "\n");
  }

 private:
  void write_text(const std::string& name, const std::string& text) {
    write_file(name, text);
    outputs_.push_back(name);
  }

  void write_file(const std::string& name, const std::string& text) {
    const auto path = dir_ / name;
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
    out << text;
    out.close();
    if (!out) throw Error(ErrorKind::IoError, "write failed for '" + path.string() + "'");
  }

  std::filesystem::path dir_;
  std::string hash_;
  std::vector<std::string> outputs_;
};

inline std::string records_csv_header() {
  return "id,u0,is_constant,multiplicity,miss,miss_slope,n_critical,min_abs_eig,nearest_eig,"
         "hyperbolic,exceptional";
}

inline std::string records_csv(const std::vector<EquilibriumRecord>& records) {
  std::string out = records_csv_header() + "\n";
  const auto f = [](double v) { return detail::fmt17(v); };
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    out += std::to_string(i) + "," + f(r.u0) + "," + (r.is_constant ? "1" : "0") + "," +
           std::to_string(r.multiplicity) + "," + f(r.miss) + "," + f(r.miss_slope) + "," +
           std::to_string(r.critical.points.size()) + ",";
    out += r.spectrum ? f(r.spectrum->min_abs) + "," + f(r.spectrum->nearest) : std::string(",");
    out += std::string(",") + to_string(r.hyperbolic) + "," + to_string(r.exceptional) + "\n";
  }
  return out;
}

/// Equilibrium set as report files: JSON with one profile file per record,
/// or a single CSV table.
inline void emit_report(ReportWriter& w, const ProblemSpec& spec, const EquilibriumSet& set,
                        ReportFormat fmt, const std::string& stem = "equilibria") {
  if (set.records.empty()) throw Error(ErrorKind::EmptyReport, "no equilibria to report");
  if (fmt == ReportFormat::csv) {
    w.write_csv(stem + ".csv", records_csv(set.records));
    return;
  }
  nlohmann::json records = nlohmann::json::array();
  for (std::size_t i = 0; i < set.records.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "profiles/eq_%03zu.json", i);
    w.write_json(name, {{"record", i}, {"profile", profile_to_json(set.records[i].profile)}});
    records.push_back(to_json(set.records[i], name));
  }
  nlohmann::json scan{{"grid_points", set.scan.grid.size()},
                      {"brackets", set.scan.brackets.size()},
                      {"tangencies", set.scan.tangencies.size()},
                      {"refinements", set.scan.refinements},
                      {"sign_changes", set.scan.sign_changes},
                      {"escaped", set.scan.escaped},
                      {"stabilized", set.scan.stabilized}};
  w.write_json(stem + ".json", {{"spec", canonical_text(spec)},
                                {"scan", std::move(scan)},
                                {"records", std::move(records)},
                                {"warnings", set.warnings}});
}

}  // namespace nhyp

#endif  // NHYP_REPORT_HPP
