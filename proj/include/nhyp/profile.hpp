#ifndef NHYP_PROFILE_HPP
#define NHYP_PROFILE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nhyp/error.hpp"

namespace nhyp {

enum class ProfileKind { solution, variational, synthetic };

inline constexpr const char* to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::solution: return "solution";
    case ProfileKind::variational: return "variational";
    case ProfileKind::synthetic: return "synthetic";
  }
  return "unknown";
}

/// u and its first three x-derivatives at a node.
struct NodeJet {
  double u = 0.0;
  double du = 0.0;
  double d2u = 0.0;
  double d3u = 0.0;

  friend bool operator==(const NodeJet&, const NodeJet&) = default;
};

struct ProfileSample {
  double u = 0.0;
  double du = 0.0;
  double d2u = 0.0;
};

/// Dense representation of a function on [0,1] built from node jets.
///
/// On each step u is the quintic Hermite interpolant of (u, u', u'') and u'
/// is the quintic Hermite interpolant of (u', u'', u'''), so both match the
/// integrator's node data exactly and u'' comes from differentiating the u'
/// piece. `momentum` holds p = a u' at nodes (equal to u' for synthetic data).
class Profile {
 public:
  static constexpr int format_version = 1;
  using StepCoeffs = std::array<double, 12>;  // 6 for u, 6 for u', in t = (x - x_i)/h

  Profile() = default;

  static Profile from_jets(ProfileKind kind, std::vector<double> nodes, std::vector<NodeJet> jets,
                           std::vector<double> momentum) {
    if (nodes.size() < 2 || jets.size() != nodes.size() || momentum.size() != nodes.size())
      throw Error(ErrorKind::InvalidArgument, "profile needs >= 2 nodes with matching jets");
    for (std::size_t i = 1; i < nodes.size(); ++i)
      if (!(nodes[i] > nodes[i - 1]))
        throw Error(ErrorKind::InvalidArgument, "profile nodes must be strictly increasing");
    Profile p;
    p.kind_ = kind;
    p.nodes_ = std::move(nodes);
    p.jets_ = std::move(jets);
    p.momentum_ = std::move(momentum);
    p.build_coefficients();
    return p;
  }

  /// Samples an analytic function given by its jet on a uniform grid.
  template <class JetFn>
  static Profile synthetic(JetFn&& fn, int steps = 2000) {
    std::vector<double> xs(static_cast<std::size_t>(steps) + 1);
    std::vector<NodeJet> js(xs.size());
    std::vector<double> mom(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      xs[i] = static_cast<double>(i) / steps;
      js[i] = fn(xs[i]);
      mom[i] = js[i].du;
    }
    return from_jets(ProfileKind::synthetic, std::move(xs), std::move(js), std::move(mom));
  }

  ProfileKind kind() const noexcept { return kind_; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<NodeJet>& jets() const noexcept { return jets_; }
  const std::vector<double>& momentum() const noexcept { return momentum_; }
  const std::vector<StepCoeffs>& coefficients() const noexcept { return coeffs_; }
  std::size_t steps() const noexcept { return coeffs_.size(); }
  double x_begin() const noexcept { return nodes_.front(); }
  double x_end() const noexcept { return nodes_.back(); }

  /// Index of the step containing x (clamped to the domain).
  std::size_t locate(double x) const noexcept {
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    std::size_t i = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
    return std::min(i, coeffs_.size() - 1);
  }

  ProfileSample eval(double x) const noexcept {
    const std::size_t i = locate(x);
    const double h = nodes_[i + 1] - nodes_[i];
    const double t = (x - nodes_[i]) / h;
    const auto& c = coeffs_[i];
    double u = 0.0, du = 0.0, ddu = 0.0;
    for (int k = 5; k >= 0; --k) {
      u = u * t + c[k];
      ddu = ddu * t + du;
      du = du * t + c[6 + k];
    }
    return {u, du, ddu / h};
  }

  double u(double x) const noexcept { return eval(x).u; }
  double du(double x) const noexcept { return eval(x).du; }
  double d2u(double x) const noexcept { return eval(x).d2u; }

  /// max |u'| over nodes and step midpoints.
  double max_abs_du() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      m = std::max(m, std::abs(jets_[i].du));
      if (i + 1 < nodes_.size()) m = std::max(m, std::abs(du(0.5 * (nodes_[i] + nodes_[i + 1]))));
    }
    return m;
  }

  /// (min u, max u) over nodes and step midpoints.
  std::pair<double, double> value_range() const noexcept {
    double lo = jets_.front().u, hi = lo;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const double a = jets_[i].u;
      lo = std::min(lo, a), hi = std::max(hi, a);
      if (i + 1 < nodes_.size()) {
        const double b = u(0.5 * (nodes_[i] + nodes_[i + 1]));
        lo = std::min(lo, b), hi = std::max(hi, b);
      }
    }
    return {lo, hi};
  }

  double max_abs_u() const noexcept {
    const auto [lo, hi] = value_range();
    return std::max(std::abs(lo), std::abs(hi));
  }

  friend bool operator==(const Profile&, const Profile&) = default;

 private:
  /// Quintic through (y, h y', h^2 y'') at t = 0 and t = 1.
  static std::array<double, 6> quintic(double y0, double d0, double s0, double y1, double d1,
                                       double s1) {
    const double c0 = y0, c1 = d0, c2 = 0.5 * s0;
    const double A = y1 - (c0 + c1 + c2);
    const double B = d1 - (c1 + 2.0 * c2);
    const double C = s1 - 2.0 * c2;
    return {c0, c1, c2, 10.0 * A - 4.0 * B + 0.5 * C, -15.0 * A + 7.0 * B - C,
            6.0 * A - 3.0 * B + 0.5 * C};
  }

  void build_coefficients() {
    coeffs_.resize(nodes_.size() - 1);
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
      const double h = nodes_[i + 1] - nodes_[i];
      const double h2 = h * h;
      const NodeJet& a = jets_[i];
      const NodeJet& b = jets_[i + 1];
      const auto cu = quintic(a.u, h * a.du, h2 * a.d2u, b.u, h * b.du, h2 * b.d2u);
      const auto cd = quintic(a.du, h * a.d2u, h2 * a.d3u, b.du, h * b.d2u, h2 * b.d3u);
      std::copy(cu.begin(), cu.end(), coeffs_[i].begin());
      std::copy(cd.begin(), cd.end(), coeffs_[i].begin() + 6);
    }
  }

  ProfileKind kind_ = ProfileKind::solution;
  std::vector<double> nodes_;
  std::vector<NodeJet> jets_;
  std::vector<double> momentum_;
  std::vector<StepCoeffs> coeffs_;
};

// JSON document: {"format":"nhyp.profile","version":1,"kind",...}
inline nlohmann::json profile_to_json(const Profile& p) {
  nlohmann::json states = nlohmann::json::array();
  nlohmann::json jets = nlohmann::json::array();
  for (std::size_t i = 0; i < p.nodes().size(); ++i) {
    const auto& j = p.jets()[i];
    states.push_back({j.u, p.momentum()[i]});
    jets.push_back({j.u, j.du, j.d2u, j.d3u});
  }
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& c : p.coefficients()) coeffs.push_back(c);
  return nlohmann::json{{"format", "nhyp.profile"},
                        {"version", Profile::format_version},
                        {"kind", to_string(p.kind())},
                        {"interpolant", "quintic_hermite"},
                        {"nodes", p.nodes()},
                        {"states", std::move(states)},
                        {"jets", std::move(jets)},
                        {"coefficients", std::move(coeffs)}};
}

inline Profile profile_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "nhyp.profile" || j.value("version", 0) != Profile::format_version)
    throw Error(ErrorKind::InvalidArgument, "not a version-1 nhyp.profile document");
  const std::string kind = j.at("kind").get<std::string>();
  ProfileKind k = ProfileKind::solution;
  if (kind == "variational") k = ProfileKind::variational;
  else if (kind == "synthetic") k = ProfileKind::synthetic;
  else if (kind != "solution") throw Error(ErrorKind::InvalidArgument, "unknown profile kind " + kind);
  std::vector<double> nodes = j.at("nodes").get<std::vector<double>>();
  std::vector<NodeJet> jets;
  std::vector<double> mom;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& jj = j.at("jets").at(i);
    jets.push_back({jj.at(0).get<double>(), jj.at(1).get<double>(), jj.at(2).get<double>(),
                    jj.at(3).get<double>()});
    mom.push_back(j.at("states").at(i).at(1).get<double>());
  }
  return Profile::from_jets(k, std::move(nodes), std::move(jets), std::move(mom));
}

}  // namespace nhyp

#endif  // NHYP_PROFILE_HPP
