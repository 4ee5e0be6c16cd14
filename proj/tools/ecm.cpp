#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ecm/ecm.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { ok = 0, runtime_error = 1, usage_error = 2, acceptance_failure = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string numbered(const std::string& stem, std::size_t i, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%06zu", i);
  return stem + buf + ext;
}

int cmd_run(const std::string& config_path, const std::string& out, std::size_t snapshots, bool quiet) {
  auto cfg = ecm::parse_config(config_path);
  if (snapshots > 0) cfg.snapshot_every = snapshots;
  const std::size_t every =
      cfg.snapshot_every > 0 ? cfg.snapshot_every : std::max<std::size_t>(1, cfg.steps / 10);

  fs::create_directories(out);
  ecm::RunManifest manifest;
  manifest.config_text = ecm::emit_config(cfg);

  ecm::Simulation sim(cfg);
  sim.warn = [](const std::string& w) { std::cerr << "warning: " << w << '\n'; };
  auto snapshot = [&](const ecm::Simulation& s) {
    const auto name = numbered("snapshot", s.step_index(), ".vtk");
    ecm::write_snapshot(s.mesh(), ecm::snapshot_fields(s), (fs::path(out) / name).string());
    manifest.files.push_back(name);
  };
  snapshot(sim);
  sim.run([&](const ecm::Simulation& s) {
    if (s.step_index() % every == 0 || s.done()) snapshot(s);
    if (!quiet && s.step_index() % every == 0) {
      std::fprintf(stderr, "step %zu/%zu  t = %.4g s  V_dis = %.6e m^3\n", s.step_index(),
                   s.config().steps, s.time(), s.dissolved_volume());
    }
  });

  ecm::write_timeseries(sim.series(), (fs::path(out) / "timeseries.csv").string());
  manifest.files.insert(manifest.files.begin(), "timeseries.csv");
  manifest.phases = sim.phases();
  manifest.files.push_back("manifest.json");
  ecm::write_manifest(manifest, (fs::path(out) / "manifest.json").string());

  const auto& p = sim.phases();
  std::printf("%s: %zu steps, t = %.6g s, V_dis = %.9e m^3\n", cfg.name.c_str(), cfg.steps, sim.time(),
              sim.dissolved_volume());
  std::printf("wall: geometry %.3f s, assembly %.3f s, solve %.3f s, dissolution %.3f s, total %.3f s\n",
              p.geometry, p.assembly, p.solve, p.dissolution, p.total);
  std::printf("output: %s\n", out.c_str());
  return ok;
}

int cmd_preset(const std::string& name, bool emit, const std::string& out) {
  const auto& names = ecm::preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw UsageError("unknown preset '" + name + "'");
  }
  if (!emit) throw UsageError("preset: nothing to do (use --emit-config)");
  const auto text = ecm::emit_config(ecm::preset(name));
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(out);
    if (!os) throw ecm::Error("cannot write '" + out + "'");
    os << text;
  }
  return ok;
}

int cmd_verify(const std::string& name, bool quick) {
  static const std::vector<std::string> known{"planar", "parabolic", "wire", "blade", "bench", "all"};
  if (std::find(known.begin(), known.end(), name) == known.end()) {
    throw UsageError("unknown verification target '" + name + "'");
  }
  const bool all = name == "all";
  auto progress = [](const std::string& s) { std::fprintf(stderr, "  .. %s\n", s.c_str()); };
  bool pass = true;
  auto report = [&](const ecm::CheckResult& r) {
    std::cout << ecm::format_check(r) << std::flush;
    if (!r.informational) pass = pass && r.pass;
  };
  if (all || name == "planar") {
    report(ecm::check_equilibrium_gap());
    report(ecm::check_planar_series(progress));
    report(quick ? ecm::check_planar_parallel(40, 1e-2) : ecm::check_planar_parallel());
    report(ecm::check_gap_convergence(progress));
    report(ecm::check_method_equivalence());
    if (!quick) report(ecm::check_distorted_meshes());
  }
  if (all || name == "parabolic") report(ecm::check_parabolic());
  if (all || name == "wire") report(ecm::check_wire(quick));
  if (all || name == "bench") report(ecm::check_bench(progress));
  if (all || name == "blade") report(ecm::check_blade());
  return pass ? ok : acceptance_failure;
}

int cmd_bench(const std::string& name, const std::string& methods_arg, double density) {
  const auto& names = ecm::preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw UsageError("unknown preset '" + name + "'");
  }
  std::vector<ecm::Method> methods;
  std::stringstream ss(methods_arg);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      methods.push_back(ecm::parse_method(tok));
    } catch (const ecm::Error&) {
      throw UsageError("unknown method '" + tok + "'");
    }
  }
  if (methods.empty()) throw UsageError("no methods given");

  auto cfg = ecm::bench_config(name);
  if (density > 0) {
    cfg.mesh.density_x = cfg.mesh.density_y = density;
  }
  std::printf("%-10s %-6s %12s %14s %16s\n", "scenario", "method", "wall [s]", "rel. to first", "V_dis [m^3]");
  double first = 0;
  for (auto m : methods) {
    const auto row = ecm::bench_run(cfg, m);
    if (first == 0) first = row.wall_s;
    std::printf("%-10s %-6s %12.3f %13.1f%% %16.9e\n", name.c_str(), std::string(ecm::to_string(m)).c_str(),
                row.wall_s, 100.0 * row.wall_s / first, row.dissolved);
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Electrochemical machining simulator"};
  app.set_version_flag("--version", ecm::version);
  app.require_subcommand(1);

  std::string config_path, out = "out";
  std::size_t snapshots = 0;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run a scenario from a config file");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--out", out, "Output directory")->capture_default_str();
  run->add_option("--snapshots", snapshots, "Write a snapshot every N steps");
  run->add_flag("-q,--quiet", quiet, "No progress output");

  std::string preset_name, preset_out;
  bool emit = false;
  auto* pre = app.add_subcommand("preset", "Print a built-in scenario");
  pre->add_option("name", preset_name, "planar | parabolic | wire | blade")->required();
  pre->add_flag("--emit-config", emit, "Write the preset as a config file");
  pre->add_option("-o,--output", preset_out, "Write to file instead of stdout");

  std::string verify_name;
  bool quick = false;
  auto* ver = app.add_subcommand("verify", "Run acceptance checks and print PASS/FAIL");
  ver->add_option("name", verify_name, "planar | parabolic | wire | blade | bench | all")->required();
  ver->add_flag("--quick", quick, "Reduced-cost variants where available");

  std::string bench_name, methods = "A,B";
  double density = 0;
  auto* bench = app.add_subcommand("bench", "Compare wall-clock time of cathode methods");
  bench->add_option("name", bench_name, "Preset name")->required();
  bench->add_option("--methods", methods, "Comma-separated list")->capture_default_str();
  bench->add_option("--density", density, "Elements per mm (default: 80 planar, 40 parabolic)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : usage_error;
  }

  try {
    if (*run) return cmd_run(config_path, out, snapshots, quiet);
    if (*pre) return cmd_preset(preset_name, emit, preset_out);
    if (*ver) return cmd_verify(verify_name, quick);
    if (*bench) return cmd_bench(bench_name, methods, density);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return runtime_error;
  }
  return usage_error;
}
