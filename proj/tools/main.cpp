// Config-driven front end: dispersion scans, calibration, kernel assembly,
// residual verification, order-scaling probes and the obstruction verdict.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "shearwave/shearwave.hpp"

namespace fs = std::filesystem;
using namespace shearwave;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  double tol = 0.0;  // 0: keep config value
  std::string grid;  // "N1xN2xN3"
  bool quiet = false;
};

struct Pipeline {
  RunConfig cfg;
  json cfg_json;
  ShearProfile profile = ShearProfile::polynomial({1.0}, 1.0);
  WaveParams params;
  LatticeSpec lattice;
  VerticalGrid vgrid = VerticalGrid::chebyshev(3, 1.0);
  fs::path out;
  bool calibrated = false;
  double calibrated_sigma = 0.0;
};

Pipeline load_pipeline(const CliOptions& opts, bool auto_calibrate) {
  std::ifstream in(opts.config_path);
  if (!in) throw std::runtime_error("cannot open config: " + opts.config_path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }

  Pipeline p;
  p.cfg = parse_config(j);
  if (opts.tol > 0.0) p.cfg.ode_tol = opts.tol;
  if (!opts.grid.empty()) {
    unsigned long n1 = 0, n2 = 0, n3 = 0;
    if (std::sscanf(opts.grid.c_str(), "%lux%lux%lu", &n1, &n2, &n3) != 3)
      throw ConfigError("--grid", "expected N1xN2xN3");
    p.cfg.n1 = n1;
    p.cfg.n2 = n2;
    p.cfg.n3 = n3;
  }
  if (!opts.out_dir.empty()) p.cfg.out_dir = opts.out_dir;

  p.cfg_json = emit_config(p.cfg);
  p.profile = p.cfg.make_profile();
  p.lattice = p.cfg.lattice;
  p.vgrid = p.cfg.make_vgrid();
  p.out = p.cfg.out_dir;

  const auto report = validate_profile(p.profile);
  if (!report.zero_free)
    throw std::invalid_argument("profile has zeros on [-d, 0]; stagnant flows unsupported");

  if (auto_calibrate && p.cfg.calibrate_target) {
    p.calibrated_sigma =
        calibrate_sigma(p.profile, p.cfg.g, p.lattice, *p.cfg.calibrate_target, p.cfg.ode_tol);
    p.cfg.sigma = p.calibrated_sigma;
    p.calibrated = true;
  }
  p.params = p.cfg.make_params();
  return p;
}

void print_result(const CliOptions& opts, const json& j) {
  if (!opts.quiet) std::cout << j.dump(2) << std::endl;
}

int run_dispersion_scan(const CliOptions& opts) {
  Pipeline p = load_pipeline(opts, true);
  const double radius = kernel_cutoff_radius(p.profile, p.params, p.lattice);
  const std::string csv =
      dispersion_scan_csv(p.profile, p.params, p.lattice, radius, p.cfg.ode_tol);
  const fs::path path = p.out / "dispersion_scan.csv";
  write_text_file(path, csv);
  std::size_t rows = 0;
  for (char c : csv)
    if (c == '\n') ++rows;
  json result{{"csv", path.string()},
              {"rows", rows - 1},
              {"cutoff_radius", radius},
              {"config_hash", config_hash(p.cfg_json)}};
  if (p.calibrated) result["sigma"] = p.calibrated_sigma;
  print_result(opts, result);
  return 0;
}

int run_calibrate(const CliOptions& opts, std::optional<std::array<int, 2>> flag_target) {
  Pipeline p = load_pipeline(opts, false);
  std::array<int, 2> target{};
  if (flag_target)
    target = *flag_target;
  else if (p.cfg.calibrate_target)
    target = *p.cfg.calibrate_target;
  else
    throw ConfigError("config.calibrate_target", "missing (or pass --target i,j)");

  const double sigma = calibrate_sigma(p.profile, p.cfg.g, p.lattice, target, p.cfg.ode_tol);
  WaveParams tuned(p.cfg.g, sigma);
  const double residual =
      dispersion_residual(p.profile, tuned, p.lattice.wavevector(target[0], target[1]),
                          p.cfg.ode_tol);
  json result{{"target", {target[0], target[1]}},
              {"sigma", sigma},
              {"residual", residual},
              {"config_hash", config_hash(p.cfg_json)}};
  write_text_file(p.out / "calibrate.json", result.dump(2) + "\n");
  print_result(opts, result);
  return 0;
}

KernelFields build_kernel(Pipeline& p, ResonantSet& set) {
  set = find_kernel_set(p.profile, p.params, p.lattice, p.cfg.membership_tol, p.cfg.ode_tol,
                        p.vgrid.nodes);
  const KernelModeSet kset = p.cfg.make_mode_set(p.lattice, p.vgrid);
  return assemble_kernel(p.profile, p.params, set, kset, p.lattice, p.vgrid);
}

int run_kernel(const CliOptions& opts) {
  Pipeline p = load_pipeline(opts, true);
  ResonantSet set;
  const KernelFields kf = build_kernel(p, set);
  dump_field(p.out / "eta1", kf.eta1, p.cfg.n1, p.cfg.n2);
  dump_field(p.out / "wp1", kf.wp1, p.cfg.n1, p.cfg.n2);
  dump_vector_field(p.out / "u1", kf.u1, p.cfg.n1, p.cfg.n2);
  dump_vector_field(p.out / "v1", kf.v1, p.cfg.n1, p.cfg.n2);
  const LinearReport lin = linear_residual(kf, p.profile, p.params);
  json result{{"fields", {"eta1", "wp1", "u1", "v1"}},
              {"out_dir", p.out.string()},
              {"resonant_modes", set.modes.size()},
              {"linear_residual", to_json(lin)},
              {"config_hash", config_hash(p.cfg_json)}};
  if (p.calibrated) result["sigma"] = p.calibrated_sigma;
  write_text_file(p.out / "kernel.json", result.dump(2) + "\n");
  print_result(opts, result);
  return 0;
}

int run_verify(const CliOptions& opts) {
  Pipeline p = load_pipeline(opts, true);
  FlowState state = trivial_state(p.profile, p.lattice, p.vgrid);
  const bool has_amplitudes =
      p.cfg.a0 != 0.0 || !p.cfg.amplitudes.empty() || !p.cfg.w_modes.empty();
  if (has_amplitudes && p.cfg.epsilon != 0.0) {
    ResonantSet set;
    const KernelFields kf = build_kernel(p, set);
    state = perturbed_state(state, kf, p.cfg.epsilon);
  }
  const ResidualReport rep = nonlinear_residual(state, p.params, p.cfg.n1, p.cfg.n2);
  json result = to_json(rep);
  result["epsilon"] = has_amplitudes ? p.cfg.epsilon : 0.0;
  result["config_hash"] = config_hash(p.cfg_json);
  write_text_file(p.out / "verify.json", result.dump(2) + "\n");
  print_result(opts, result);
  return 0;
}

int run_probe(const CliOptions& opts) {
  Pipeline p = load_pipeline(opts, true);
  ResonantSet set;
  const KernelFields kf = build_kernel(p, set);
  const ScalingProbe probe =
      order_scaling_probe(p.profile, p.params, kf, p.cfg.eps_list, p.cfg.n1, p.cfg.n2);
  write_text_file(p.out / "probe.csv", probe_csv(probe));
  json result = to_json(probe);
  result["csv"] = (p.out / "probe.csv").string();
  result["config_hash"] = config_hash(p.cfg_json);
  write_text_file(p.out / "probe.json", result.dump(2) + "\n");
  print_result(opts, result);
  return 0;
}

int run_obstruct(const CliOptions& opts) {
  Pipeline p = load_pipeline(opts, true);
  VerdictOptions vopts;
  vopts.membership_tol = p.cfg.membership_tol;
  vopts.ode_tol = p.cfg.ode_tol;
  vopts.uniform_tol = p.cfg.uniform_tol;
  const KernelModeSet kset = p.cfg.make_mode_set(p.lattice, p.vgrid);
  const VerdictRecord verdict = theorem_verdict(p.profile, p.params, p.lattice, kset, vopts);
  json result = to_json(verdict);
  result["config_hash"] = config_hash(p.cfg_json);
  if (!verdict.profile_data.nodes.empty()) {
    write_text_file(p.out / "obstruction_f.dat",
                    xy_table(verdict.profile_data.nodes, verdict.profile_data.f));
    write_text_file(p.out / "obstruction_uprime_f.dat",
                    xy_table(verdict.profile_data.nodes, verdict.profile_data.u_prime_f));
    result["profiles"] = {(p.out / "obstruction_f.dat").string(),
                          (p.out / "obstruction_uprime_f.dat").string()};
  }
  write_text_file(p.out / "obstruct.json", result.dump(2) + "\n");
  print_result(opts, result);
  return 0;
}

int run_report(const CliOptions& opts) {
  Pipeline p = load_pipeline(opts, true);
  json bundle{{"schema_version", report_schema_version},
              {"config_hash", config_hash(p.cfg_json)},
              {"config", p.cfg_json}};
  if (p.calibrated) bundle["sigma"] = p.calibrated_sigma;

  const double radius = kernel_cutoff_radius(p.profile, p.params, p.lattice);
  RiccatiCache cache;
  write_text_file(p.out / "dispersion_scan.csv",
                  dispersion_scan_csv(p.profile, p.params, p.lattice, radius, p.cfg.ode_tol,
                                      &cache));
  bundle["artifacts"]["dispersion_scan"] = (p.out / "dispersion_scan.csv").string();
  bundle["cutoff_radius"] = radius;

  ResonantSet set;
  const KernelFields kf = build_kernel(p, set);
  dump_field(p.out / "eta1", kf.eta1, p.cfg.n1, p.cfg.n2);
  dump_field(p.out / "wp1", kf.wp1, p.cfg.n1, p.cfg.n2);
  dump_vector_field(p.out / "u1", kf.u1, p.cfg.n1, p.cfg.n2);
  dump_vector_field(p.out / "v1", kf.v1, p.cfg.n1, p.cfg.n2);
  bundle["linear_residual"] = to_json(linear_residual(kf, p.profile, p.params));

  const FlowState trivial = trivial_state(p.profile, p.lattice, p.vgrid);
  bundle["trivial_residual"] = to_json(nonlinear_residual(trivial, p.params, p.cfg.n1, p.cfg.n2));

  const ScalingProbe probe =
      order_scaling_probe(p.profile, p.params, kf, p.cfg.eps_list, p.cfg.n1, p.cfg.n2);
  write_text_file(p.out / "probe.csv", probe_csv(probe));
  bundle["probe"] = to_json(probe);
  bundle["artifacts"]["probe"] = (p.out / "probe.csv").string();

  VerdictOptions vopts;
  vopts.membership_tol = p.cfg.membership_tol;
  vopts.ode_tol = p.cfg.ode_tol;
  vopts.uniform_tol = p.cfg.uniform_tol;
  const KernelModeSet kset = p.cfg.make_mode_set(p.lattice, p.vgrid);
  const VerdictRecord verdict = theorem_verdict(p.profile, p.params, p.lattice, kset, vopts);
  bundle["verdict"] = to_json(verdict);
  if (!verdict.profile_data.nodes.empty()) {
    write_text_file(p.out / "obstruction_f.dat",
                    xy_table(verdict.profile_data.nodes, verdict.profile_data.f));
    bundle["artifacts"]["obstruction_f"] = (p.out / "obstruction_f.dat").string();
  }

  write_text_file(p.out / "report.json", bundle.dump(2) + "\n");
  json summary{{"report", (p.out / "report.json").string()},
               {"verdict", to_string(verdict.classification)},
               {"config_hash", config_hash(p.cfg_json)}};
  print_result(opts, summary);
  return 0;
}

int dispatch(const std::string& name, const CliOptions& opts,
             std::optional<std::array<int, 2>> target) {
  if (name == "dispersion-scan") return run_dispersion_scan(opts);
  if (name == "calibrate") return run_calibrate(opts, target);
  if (name == "kernel") return run_kernel(opts);
  if (name == "verify") return run_verify(opts);
  if (name == "probe") return run_probe(opts);
  if (name == "obstruct") return run_obstruct(opts);
  if (name == "report") return run_report(opts);
  throw std::runtime_error("unknown subcommand: " + name);
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const IntegrationFailure*>(&e)) return "IntegrationFailure";
  if (dynamic_cast<const BoundViolation*>(&e)) return "BoundViolation";
  if (dynamic_cast<const ZeroFirstComponent*>(&e)) return "ZeroFirstComponent";
  if (dynamic_cast<const NotCapillary*>(&e)) return "NotCapillary";
  if (dynamic_cast<const AliasError*>(&e)) return "AliasError";
  if (dynamic_cast<const ShapeMismatch*>(&e)) return "ShapeMismatch";
  if (dynamic_cast<const DegenerateSurface*>(&e)) return "DegenerateSurface";
  if (dynamic_cast<const SymmetryViolation*>(&e)) return "SymmetryViolation";
  if (dynamic_cast<const NonResonantMode*>(&e)) return "NonResonantMode";
  if (dynamic_cast<const std::invalid_argument*>(&e)) return "InvalidArgument";
  return "RuntimeError";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Doubly-periodic capillary-gravity waves over shear flows"};
  app.require_subcommand(1);

  CliOptions opts;
  std::string target_str;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "run-configuration JSON file")->required();
    sub->add_option("--out", opts.out_dir, "output directory (overrides config)");
    sub->add_option("--tol", opts.tol, "ODE tolerance override");
    sub->add_option("--grid", opts.grid, "grid override, N1xN2xN3");
    sub->add_flag("--quiet", opts.quiet, "suppress stdout JSON");
  };

  for (const char* name : {"dispersion-scan", "calibrate", "kernel", "verify", "probe",
                           "obstruct", "report"}) {
    CLI::App* sub = app.add_subcommand(name);
    add_common(sub);
    if (std::string(name) == "calibrate")
      sub->add_option("--target", target_str, "target mode i,j");
  }

  CLI11_PARSE(app, argc, argv);

  std::optional<std::array<int, 2>> target;
  if (!target_str.empty()) {
    int i = 0, j = 0;
    if (std::sscanf(target_str.c_str(), "%d,%d", &i, &j) != 2) {
      std::cerr << json{{"error", "config"}, {"field", "--target"}, {"message", "expected i,j"}}
                       .dump()
                << std::endl;
      return 2;
    }
    target = std::array<int, 2>{i, j};
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    return dispatch(sub, opts, target);
  } catch (const ConfigError& e) {
    std::cerr << json{{"error", "config"}, {"field", e.field_path}, {"message", e.what()}}.dump()
              << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", error_kind(e)}, {"message", e.what()}}.dump() << std::endl;
    return 1;
  }
}
