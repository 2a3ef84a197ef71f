#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shearwave/config.hpp"
#include "shearwave/dispersion.hpp"
#include "shearwave/obstruction.hpp"
#include "shearwave/residuals.hpp"
#include "shearwave/util.hpp"

namespace shearwave {

inline constexpr int report_schema_version = 1;

/// Hash of the canonicalized (sorted-keys, exact-double) config dump;
/// identical configs hash identically across runs.
inline std::string config_hash(const json& j) {
  const std::string dump = j.dump();
  const std::uint64_t h = fnv1a(dump.data(), dump.size());
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline json to_json(const ResidualReport& r) {
  return json{{"momentum_max", r.momentum_max},
              {"momentum_l2", r.momentum_l2},
              {"divergence_max", r.divergence_max},
              {"divergence_l2", r.divergence_l2},
              {"kinematic_top_max", r.kinematic_top_max},
              {"kinematic_bottom_max", r.kinematic_bottom_max},
              {"dynamic_max", r.dynamic_max},
              {"dynamic_l2", r.dynamic_l2},
              {"overall_max", r.overall_max()}};
}

inline json to_json(const LinearReport& r) {
  json per_mode = json::array();
  for (const auto& m : r.per_mode)
    per_mode.push_back(json{{"k", {m.key.i, m.key.j}},
                            {"momentum", {m.momentum1, m.momentum2, m.momentum3}},
                            {"divergence", m.divergence},
                            {"kinematic", {m.kinematic_bottom, m.kinematic_top}},
                            {"dynamic", m.dynamic},
                            {"overall", m.overall()}});
  return json{{"per_mode", per_mode}, {"aggregate", to_json(r.aggregate)}};
}

inline json to_json(const ScalingProbe& p) {
  json rows = json::array();
  for (std::size_t n = 0; n < p.eps.size(); ++n)
    rows.push_back(json{{"eps", p.eps[n]}, {"norm", p.norms.empty() ? 0.0 : p.norms[n]}});
  return json{{"samples", rows}, {"slope", p.slope}, {"exact_solution", p.exact_solution}};
}

inline json to_json(const VerdictRecord& v) {
  json modes = json::array();
  for (const auto& [idx, peak] : v.profile_data.mode_peaks)
    modes.push_back(json{{"k", {idx[0], idx[1]}}, {"f_peak", peak}});
  json resonant = json::array();
  for (const auto& m : v.resonant.modes)
    resonant.push_back(json{{"k", {m.index[0], m.index[1]}},
                            {"q_surface", m.q_surface},
                            {"residual", m.residual}});
  return json{{"classification", to_string(v.classification)},
              {"max_abs_uprime", v.max_abs_uprime},
              {"max_abs_f", v.max_abs_f},
              {"max_abs_uprime_f", v.max_abs_uprime_f},
              {"ratio", v.ratio},
              {"positivity_threshold", v.positivity_threshold},
              {"positivity_delta", v.positivity_delta},
              {"obstruction_nonvanishing", v.obstruction_nonvanishing},
              {"mode_contributions", modes},
              {"resonant_set",
               {{"cutoff_radius", v.resonant.cutoff_radius},
                {"membership_tol", v.resonant.membership_tol},
                {"modes", resonant}}}};
}

/// CSV columns: k1, k2, |k|, q0, rhs, residual.
inline std::string dispersion_scan_csv(const ShearProfile& profile, const WaveParams& params,
                                       const LatticeSpec& lattice, double radius,
                                       double tol = 1e-10, RiccatiCache* cache = nullptr) {
  std::ostringstream os;
  os << "k1,k2,|k|,q0,rhs,residual\n";
  RiccatiCache local;
  RiccatiCache* use = cache ? cache : &local;
  const double u0 = profile.value(0.0);
  const auto nodes = linspace(-profile.depth(), 0.0, 129);
  const int imax = static_cast<int>(std::floor(radius / lattice.kappa1()));
  const int jmax = static_cast<int>(std::floor(radius / lattice.kappa2()));
  struct Row {
    double k1, k2, kn, q0, rhs, res;
  };
  std::vector<Row> rows;
  for (int i = -imax; i <= imax; ++i) {
    if (i == 0) continue;
    for (int j = -jmax; j <= jmax; ++j) {
      const auto k = lattice.wavevector(i, j);
      const double kn = std::hypot(k[0], k[1]);
      if (kn > radius) continue;
      const auto sol = use->get(profile, k, tol, nodes);
      const double rhs = k[0] * k[0] * u0 * u0 / params.D(kn * kn);
      rows.push_back({k[0], k[1], kn, sol.q_surface, rhs, sol.q_surface - rhs});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.kn != b.kn) return a.kn < b.kn;
    if (a.k1 != b.k1) return a.k1 < b.k1;
    return a.k2 < b.k2;
  });
  for (const auto& r : rows)
    os << format_double(r.k1) << ',' << format_double(r.k2) << ',' << format_double(r.kn) << ','
       << format_double(r.q0) << ',' << format_double(r.rhs) << ',' << format_double(r.res)
       << '\n';
  return os.str();
}

/// Field dump: <prefix>.json header (lattice, sizes, parity) + <prefix>.csv
/// grid values, row per node.
inline void dump_field(const std::filesystem::path& prefix, const SpectralField& field,
                       std::size_t n1, std::size_t n2) {
  const Grid3D grid = synthesize(field, n1, n2);
  json header{{"lattice", {{"lambda1", field.lattice.lambda1}, {"lambda2", field.lattice.lambda2}}},
              {"grid", {{"n1", n1}, {"n2", n2}, {"n3", grid.n3()}}},
              {"parity", {{"odd1", field.parity.odd1}, {"odd2", field.parity.odd2}}},
              {"vertical", field.vgrid.kind == VerticalGrid::Kind::chebyshev ? "chebyshev"
                                                                             : "uniform"}};
  write_text_file(prefix.string() + ".json", header.dump(2) + "\n");
  std::ostringstream os;
  os << "i1,i2,i3,x1,x2,x3,value\n";
  for (std::size_t p = 0; p < n1; ++p)
    for (std::size_t q = 0; q < n2; ++q)
      for (std::size_t l = 0; l < grid.n3(); ++l)
        os << p << ',' << q << ',' << l << ',' << format_double(grid.x1(p)) << ','
           << format_double(grid.x2(q)) << ',' << format_double(grid.x3(l)) << ','
           << format_double(grid.at(p, q, l)) << '\n';
  write_text_file(prefix.string() + ".csv", os.str());
}

inline void dump_vector_field(const std::filesystem::path& prefix,
                              const SymmetricVectorField& field, std::size_t n1,
                              std::size_t n2) {
  dump_field(prefix.string() + "_1", field.c1, n1, n2);
  dump_field(prefix.string() + "_2", field.c2, n1, n2);
  dump_field(prefix.string() + "_3", field.c3, n1, n2);
}

/// Plain (x, y) columns for external plotting.
inline std::string xy_table(const std::vector<double>& x, const std::vector<double>& y) {
  std::ostringstream os;
  for (std::size_t n = 0; n < x.size(); ++n)
    os << format_double(x[n]) << ' ' << format_double(y[n]) << '\n';
  return os.str();
}

inline std::string probe_csv(const ScalingProbe& p) {
  std::ostringstream os;
  os << "eps,momentum_max,divergence_max,kinematic_top_max,kinematic_bottom_max,dynamic_max,"
        "overall_max\n";
  for (std::size_t n = 0; n < p.eps.size(); ++n) {
    const auto& r = p.reports[n];
    os << format_double(p.eps[n]) << ',' << format_double(r.momentum_max) << ','
       << format_double(r.divergence_max) << ',' << format_double(r.kinematic_top_max) << ','
       << format_double(r.kinematic_bottom_max) << ',' << format_double(r.dynamic_max) << ','
       << format_double(r.overall_max()) << '\n';
  }
  return os.str();
}

}  // namespace shearwave
