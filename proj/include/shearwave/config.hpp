#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "shearwave/errors.hpp"
#include "shearwave/fields.hpp"
#include "shearwave/profile.hpp"
#include "shearwave/spectral.hpp"

namespace shearwave {

using nlohmann::json;

/// One run-configuration file drives every subcommand. Numbers and node
/// layouts are fixed by the config, so identical configs give identical
/// outputs.
struct RunConfig {
  // profile
  bool profile_is_poly = true;
  std::vector<double> poly_coeffs{1.0};
  double depth = 1.0;
  std::vector<double> sample_x3, sample_values;

  // params
  double g = 1.0;
  double sigma = 1.0;
  std::vector<double> dynamic_poly;  // empty: capillary-gravity

  LatticeSpec lattice{two_pi, two_pi};

  std::size_t n1 = 32, n2 = 32, n3 = 33;

  double ode_tol = 1e-10;
  double membership_tol = 1e-8;
  double uniform_tol = 1e-10;

  double a0 = 0.0;
  std::vector<std::pair<std::array<int, 2>, double>> amplitudes;
  std::vector<std::pair<int, std::vector<double>>> w_modes;  // (j, poly coeffs in x3)

  double epsilon = 1e-2;
  std::vector<double> eps_list{1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4};

  std::optional<std::array<int, 2>> calibrate_target;
  std::string out_dir = "out";

  ShearProfile make_profile() const {
    if (profile_is_poly) return ShearProfile::polynomial(poly_coeffs, depth);
    return ShearProfile::sampled(sample_x3, sample_values);
  }

  WaveParams make_params() const {
    DynamicCondition cond;
    cond.poly = dynamic_poly;
    return WaveParams(g, sigma, std::move(cond));
  }

  VerticalGrid make_vgrid() const { return VerticalGrid::chebyshev(n3, depth); }

  KernelModeSet make_mode_set(const LatticeSpec& lat, const VerticalGrid& vg) const {
    KernelModeSet kset;
    kset.a0 = a0;
    kset.modes = amplitudes;
    kset.w = SpectralField(lat, vg);
    for (const auto& [j, coeffs] : w_modes) {
      std::vector<double> prof(vg.size(), 0.0);
      for (std::size_t l = 0; l < vg.size(); ++l) {
        double v = 0.0;
        for (std::size_t c = coeffs.size(); c-- > 0;) v = v * vg.nodes[l] + coeffs[c];
        prof[l] = v;
      }
      kset.w.set_mode(0, j, std::move(prof));
    }
    return kset;
  }
};

namespace detail {

inline const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path + "." + key, "missing field");
  return j.at(key);
}

inline double require_number(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
  return v.get<double>();
}

inline std::vector<double> require_doubles(const json& j, const std::string& key,
                                           const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_array()) throw ConfigError(path + "." + key, "expected an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(path + "." + key, "expected numeric entries");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
  RunConfig cfg;
  const json& prof = detail::require(j, "profile", "config");
  const std::string type = detail::require(prof, "type", "config.profile").get<std::string>();
  if (type == "poly") {
    cfg.profile_is_poly = true;
    cfg.poly_coeffs = detail::require_doubles(prof, "coeffs", "config.profile");
    cfg.depth = detail::require_number(prof, "depth", "config.profile");
    if (!(cfg.depth > 0.0)) throw ConfigError("config.profile.depth", "must be > 0");
  } else if (type == "samples") {
    cfg.profile_is_poly = false;
    cfg.sample_x3 = detail::require_doubles(prof, "x3", "config.profile");
    cfg.sample_values = detail::require_doubles(prof, "U", "config.profile");
    if (cfg.sample_x3.size() != cfg.sample_values.size())
      throw ConfigError("config.profile.U", "length must match x3");
    if (cfg.sample_x3.size() < 4)
      throw ConfigError("config.profile.x3", "need at least 4 nodes");
    for (std::size_t n = 1; n < cfg.sample_x3.size(); ++n)
      if (!(cfg.sample_x3[n] > cfg.sample_x3[n - 1]))
        throw ConfigError("config.profile.x3", "nodes must be strictly increasing");
    cfg.depth = -cfg.sample_x3.front();
    if (!(cfg.depth > 0.0)) throw ConfigError("config.profile.x3", "first node must be -d < 0");
  } else {
    throw ConfigError("config.profile.type", "expected \"poly\" or \"samples\"");
  }

  const json& params = detail::require(j, "params", "config");
  cfg.g = detail::require_number(params, "g", "config.params");
  if (!(cfg.g > 0.0)) throw ConfigError("config.params.g", "must be > 0");
  cfg.sigma = detail::require_number(params, "sigma", "config.params");
  if (params.contains("dynamic_condition")) {
    const json& dc = params.at("dynamic_condition");
    const std::string dt =
        detail::require(dc, "type", "config.params.dynamic_condition").get<std::string>();
    if (dt == "poly")
      cfg.dynamic_poly = detail::require_doubles(dc, "coeffs", "config.params.dynamic_condition");
    else if (dt != "capillary-gravity")
      throw ConfigError("config.params.dynamic_condition.type",
                        "expected \"capillary-gravity\" or \"poly\"");
  }
  if (cfg.dynamic_poly.empty() && !(cfg.sigma > 0.0))
    throw ConfigError("config.params.sigma", "must be > 0 for the capillary-gravity condition");

  const json& lat = detail::require(j, "lattice", "config");
  const double l1 = detail::require_number(lat, "lambda1", "config.lattice");
  const double l2 = detail::require_number(lat, "lambda2", "config.lattice");
  if (!(l1 > 0.0) || !(l2 > 0.0)) throw ConfigError("config.lattice", "wavelengths must be > 0");
  cfg.lattice = LatticeSpec(l1, l2);

  if (j.contains("grid")) {
    const json& grid = j.at("grid");
    cfg.n1 = static_cast<std::size_t>(detail::require_number(grid, "n1", "config.grid"));
    cfg.n2 = static_cast<std::size_t>(detail::require_number(grid, "n2", "config.grid"));
    cfg.n3 = static_cast<std::size_t>(detail::require_number(grid, "n3", "config.grid"));
    if (cfg.n1 % 2 != 0 || cfg.n2 % 2 != 0)
      throw ConfigError("config.grid", "n1 and n2 must be even");
    if (cfg.n3 < 3) throw ConfigError("config.grid.n3", "need at least 3 vertical nodes");
  }

  if (j.contains("tolerances")) {
    const json& tols = j.at("tolerances");
    if (tols.contains("ode")) cfg.ode_tol = tols.at("ode").get<double>();
    if (tols.contains("membership")) cfg.membership_tol = tols.at("membership").get<double>();
    if (tols.contains("uniform")) cfg.uniform_tol = tols.at("uniform").get<double>();
    for (double t : {cfg.ode_tol, cfg.membership_tol, cfg.uniform_tol})
      if (!(t > 0.0)) throw ConfigError("config.tolerances", "all tolerances must be > 0");
  }

  if (j.contains("amplitudes")) {
    const json& amp = j.at("amplitudes");
    if (amp.contains("a0")) cfg.a0 = amp.at("a0").get<double>();
    if (amp.contains("modes")) {
      for (std::size_t n = 0; n < amp.at("modes").size(); ++n) {
        const json& m = amp.at("modes")[n];
        const std::string path = "config.amplitudes.modes[" + std::to_string(n) + "]";
        const json& k = detail::require(m, "k", path);
        if (!k.is_array() || k.size() != 2) throw ConfigError(path + ".k", "expected [i, j]");
        cfg.amplitudes.push_back(
            {{k[0].get<int>(), k[1].get<int>()}, detail::require_number(m, "a", path)});
      }
    }
    if (amp.contains("w")) {
      for (std::size_t n = 0; n < amp.at("w").size(); ++n) {
        const json& m = amp.at("w")[n];
        const std::string path = "config.amplitudes.w[" + std::to_string(n) + "]";
        cfg.w_modes.push_back({static_cast<int>(detail::require_number(m, "j", path)),
                               detail::require_doubles(m, "coeffs", path)});
      }
    }
  }

  if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
  if (j.contains("eps_list")) cfg.eps_list = detail::require_doubles(j, "eps_list", "config");
  if (j.contains("calibrate_target")) {
    const json& t = j.at("calibrate_target");
    if (!t.is_array() || t.size() != 2)
      throw ConfigError("config.calibrate_target", "expected [i, j]");
    cfg.calibrate_target = std::array<int, 2>{t[0].get<int>(), t[1].get<int>()};
  }
  if (j.contains("output")) {
    const json& outp = j.at("output");
    if (outp.contains("dir")) cfg.out_dir = outp.at("dir").get<std::string>();
  }
  return cfg;
}

inline json emit_config(const RunConfig& cfg) {
  json j;
  if (cfg.profile_is_poly)
    j["profile"] = {{"type", "poly"}, {"coeffs", cfg.poly_coeffs}, {"depth", cfg.depth}};
  else
    j["profile"] = {{"type", "samples"}, {"x3", cfg.sample_x3}, {"U", cfg.sample_values}};
  j["params"] = {{"g", cfg.g}, {"sigma", cfg.sigma}};
  if (!cfg.dynamic_poly.empty())
    j["params"]["dynamic_condition"] = {{"type", "poly"}, {"coeffs", cfg.dynamic_poly}};
  j["lattice"] = {{"lambda1", cfg.lattice.lambda1}, {"lambda2", cfg.lattice.lambda2}};
  j["grid"] = {{"n1", cfg.n1}, {"n2", cfg.n2}, {"n3", cfg.n3}};
  j["tolerances"] = {
      {"ode", cfg.ode_tol}, {"membership", cfg.membership_tol}, {"uniform", cfg.uniform_tol}};
  json modes = json::array();
  for (const auto& [k, a] : cfg.amplitudes)
    modes.push_back({{"k", {k[0], k[1]}}, {"a", a}});
  json wm = json::array();
  for (const auto& [jj, coeffs] : cfg.w_modes) wm.push_back({{"j", jj}, {"coeffs", coeffs}});
  j["amplitudes"] = {{"a0", cfg.a0}, {"modes", modes}, {"w", wm}};
  j["epsilon"] = cfg.epsilon;
  j["eps_list"] = cfg.eps_list;
  if (cfg.calibrate_target)
    j["calibrate_target"] = {(*cfg.calibrate_target)[0], (*cfg.calibrate_target)[1]};
  j["output"] = {{"dir", cfg.out_dir}};
  return j;
}

}  // namespace shearwave
