#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "ecm/presets.hpp"

namespace ecm {

/// Outcome of one acceptance check.
struct CheckResult {
  int criterion = 0;
  std::string name;
  bool pass = false;
  bool informational = false;
  std::vector<std::string> details;  // "measured ... target ..." lines
};

using Progress = std::function<void(const std::string&)>;

namespace verify_detail {

inline std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class... T>
std::string format(const char* f, T... v) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, v...);
  return buf;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace verify_detail

/// Gap ODE s' = nu k dv / s - feed integrated with classical RK4; returns s at
/// each multiple of `sample_dt` up to `t_end` (first entry at t = sample_dt).
inline std::vector<double> gap_ode(double s0, double nu_k_dv, double feed, double t_end,
                                   double sample_dt, double h = 1e-3) {
  auto f = [&](double s) { return nu_k_dv / s - feed; };
  std::vector<double> out;
  double s = s0, t = 0;
  const auto samples = static_cast<std::size_t>(std::llround(t_end / sample_dt));
  for (std::size_t k = 1; k <= samples; ++k) {
    const double target = sample_dt * static_cast<double>(k);
    while (t < target - 1e-12) {
      const double step = std::min(h, target - t);
      const double k1 = f(s), k2 = f(s + 0.5 * step * k1), k3 = f(s + 0.5 * step * k2),
                   k4 = f(s + step * k3);
      s += step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      t += step;
    }
    out.push_back(s);
  }
  return out;
}

/// Normalised dissolved volume of a planar run: V_dis / (feed t A).
inline double planar_normalized_volume(const PlanarOptions& o) {
  Simulation sim(planar_config(o));
  sim.run();
  const double area = 1.0 * mm * 0.1 * mm;
  return sim.dissolved_volume() / (o.feed * sim.time() * area);
}

inline CheckResult check_equilibrium_gap() {
  using verify_detail::format;
  CheckResult r{1, "analytic equilibrium gap", true, false, {}};
  const struct {
    double feed, expected;
  } cases[] = {{1e-5, 0.32e-3}, {1.5e-5, 0.32e-3 / 1.5}};
  for (const auto& c : cases) {
    const double s = equilibrium_gap(1e-11, 16, 20, c.feed);
    const double rel = std::abs(s - c.expected) / c.expected;
    r.pass = r.pass && rel <= 1e-12;
    r.details.push_back(format("feed %.3g m/s: s_eq = %.10g mm, target %.10g mm (rel err %.2e, tol 1e-12)",
                               c.feed, s * 1e3, c.expected * 1e3, rel));
  }
  return r;
}

inline CheckResult check_planar_series(const Progress& progress = {}) {
  using verify_detail::format;
  CheckResult r{2, "planar series rule, normalised volume", true, false, {}};
  for (double density : {10.0, 20.0, 40.0, 80.0}) {
    for (double dt : {1.0, 0.1, 0.01}) {
      PlanarOptions o;
      o.density = density;
      o.dt = dt;
      o.steps = static_cast<std::size_t>(std::llround(60.0 / dt));
      const double v = planar_normalized_volume(o);
      const bool ok = v >= 0.995 && v <= 1.005;
      r.pass = r.pass && ok;
      r.details.push_back(format("%gx%g dt=%g: V/V_ref = %.6f, target [0.995, 1.005] %s", density,
                                 density, dt, v, ok ? "ok" : "OUT"));
      if (progress) progress(r.details.back());
    }
  }
  return r;
}

inline CheckResult check_planar_parallel(double density = 80, double dt = 1e-3) {
  using verify_detail::format;
  CheckResult r{3, "planar parallel rule overestimation", false, false, {}};
  PlanarOptions o;
  o.density = density;
  o.dt = dt;
  o.steps = static_cast<std::size_t>(std::llround(60.0 / dt));
  o.rule = MixtureRule::parallel;
  const double v = planar_normalized_volume(o);
  const bool primary = density >= 80 && dt <= 1e-3;
  r.pass = primary ? std::abs(v - 1.018) <= 0.010 : v > 1.01;
  r.details.push_back(format("%gx%g dt=%g: V/V_ref = %.6f, target %s", density, density, dt, v,
                             primary ? "1.018 +/- 0.010" : "> 1.01 (reduced resolution)"));
  return r;
}

struct GapRun {
  std::vector<double> t;
  std::vector<double> gap;
  double element = 0;
};

inline GapRun planar_gap_run(double s_init, double feed, double t_end, double density = 20,
                             double dt = 0.1) {
  PlanarOptions o;
  o.density = density;
  o.dt = dt;
  o.steps = static_cast<std::size_t>(std::llround(t_end / dt));
  o.s_init = s_init;
  o.feed = feed;
  o.length = feed * t_end + 1.0 * mm;
  Simulation sim(planar_config(o));
  sim.run();
  GapRun g;
  g.element = 1e-3 / density;
  for (const auto& rec : sim.series().records) {
    g.t.push_back(rec.t);
    g.gap.push_back(rec.gap.value_or(NAN));
  }
  return g;
}

inline CheckResult check_gap_convergence(const Progress& progress = {}) {
  using verify_detail::format;
  CheckResult r{4, "working gap convergence and feed sweep", true, false, {}};
  const double nu_k_dv = 1e-11 * 16 * 20;
  const double t_end = 400;
  for (double s0 : {0.25, 0.32, 0.40}) {
    const auto g = planar_gap_run(s0 * mm, 0.015 * mm, t_end);
    const double s = g.gap.back();
    const bool ok = std::abs(s - 0.213 * mm) <= 0.010 * mm;
    r.pass = r.pass && ok;
    r.details.push_back(format("feed 0.015 mm/s, s_init %.2f mm: s(400 s) = %.4f mm, target 0.213 +/- 0.010 mm %s",
                               s0, s * 1e3, ok ? "ok" : "OUT"));
    if (progress) progress(r.details.back());
  }
  for (double feed : {0.005, 0.010, 0.015, 0.020}) {
    const double s0 = 0.4 * mm;
    const auto g = planar_gap_run(s0, feed * mm, t_end);
    const auto oracle = gap_ode(s0, nu_k_dv, feed * mm, t_end, 0.1);
    double worst = 0;
    for (std::size_t i = 0; i < g.gap.size() && i < oracle.size(); ++i) {
      worst = std::max(worst, std::abs(g.gap[i] - oracle[i]));
    }
    const double s = g.gap.back();
    const bool widening = s > s0;
    const bool expect_widening = nu_k_dv / feed / mm > s0;
    const bool ok = worst <= g.element && widening == expect_widening &&
                    std::abs(s - oracle.back()) <= g.element;
    r.pass = r.pass && ok;
    r.details.push_back(format("feed %.3f mm/s from 0.4 mm: s(400 s) = %.4f mm, ODE %.4f mm, max |dev| %.4f mm, "
                               "tol one element %.4f mm, %s %s",
                               feed, s * 1e3, oracle.back() * 1e3, worst * 1e3, g.element * 1e3,
                               widening ? "widens" : "narrows", ok ? "ok" : "OUT"));
    if (progress) progress(r.details.back());
  }
  return r;
}

inline CheckResult check_method_equivalence(double density = 40) {
  using verify_detail::format;
  CheckResult r{5, "methods A and B agree", false, false, {}};
  PlanarOptions o;
  o.density = density;
  o.method = Method::A;
  Simulation a(planar_config(o));
  a.run();
  o.method = Method::B;
  Simulation b(planar_config(o));
  b.run();
  const auto& ra = a.series().records;
  const auto& rb = b.series().records;
  double worst = 0;
  for (std::size_t i = 0; i < ra.size() && i < rb.size(); ++i) {
    const double ref = std::max(std::abs(rb[i].v_dis), 1e-300);
    worst = std::max(worst, std::abs(ra[i].v_dis - rb[i].v_dis) / ref);
  }
  r.pass = ra.size() == rb.size() && worst <= 1e-3;
  r.details.push_back(format("%gx%g, %zu steps: max relative V_dis difference %.3e, tol 1e-3", density,
                             density, ra.size(), worst));
  return r;
}

inline double parabolic_final_gap(double density) {
  Simulation sim(parabolic_config(density));
  sim.run();
  return sim.series().records.back().gap.value();
}

inline CheckResult check_parabolic() {
  using verify_detail::format;
  CheckResult r{6, "parabolic tool, gap on the symmetry axis", false, false, {}};
  const double fine = parabolic_final_gap(20);
  const double coarse = parabolic_final_gap(5);
  const bool ok_fine = std::abs(fine - 0.345 * mm) <= 0.010 * mm;
  const bool ok_coarse = std::abs(coarse - 0.35 * mm) <= 0.030 * mm;
  r.pass = ok_fine && ok_coarse;
  r.details.push_back(format("20x20: s = %.4f mm, target 0.345 +/- 0.010 mm %s", fine * 1e3,
                             ok_fine ? "ok" : "OUT"));
  r.details.push_back(format("5x5: s = %.4f mm, target 0.35 +/- 0.03 mm %s", coarse * 1e3,
                             ok_coarse ? "ok" : "OUT"));
  return r;
}

inline double wire_kerf(double density, double dt) {
  Simulation sim(wire_config(density, dt));
  sim.run();
  return sim.series().records.back().kerf.value();
}

inline CheckResult check_wire(bool smoke_only = false) {
  using verify_detail::format;
  CheckResult r{7, "wire kerf width at x = 400 um", true, false, {}};
  if (!smoke_only) {
    const double k = wire_kerf(400, 0.1);
    const bool ok = std::abs(k - 118.73 * um) <= 5 * um && k >= 110.08 * um && k <= 124.27 * um;
    r.pass = r.pass && ok;
    r.details.push_back(format("400 el/mm, dt 0.1 s: kerf = %.2f um, target 118.73 +/- 5 um within [110.08, 124.27] %s",
                               k / um, ok ? "ok" : "OUT"));
  }
  const double ks = wire_kerf(200, 0.4);
  const bool ok = ks >= 100.08 * um && ks <= 134.27 * um;
  r.pass = r.pass && ok;
  r.details.push_back(format("200 el/mm, dt 0.4 s: kerf = %.2f um, target [100.08, 134.27] um %s",
                             ks / um, ok ? "ok" : "OUT"));
  return r;
}

struct BenchRow {
  std::string scenario;
  Method method;
  double wall_s;
  double dissolved;
};

inline BenchRow bench_run(ScenarioConfig cfg, Method m) {
  cfg.method = m;
  const auto t0 = std::chrono::steady_clock::now();
  Simulation sim(std::move(cfg));
  sim.run();
  return {sim.config().name, m, verify_detail::seconds_since(t0), sim.dissolved_volume()};
}

/// Preset used for runtime comparisons: planar at 80 el/mm, parabolic at 40.
inline ScenarioConfig bench_config(const std::string& name) {
  if (name == "planar") {
    PlanarOptions o;
    o.density = 80;
    return planar_config(o);
  }
  if (name == "parabolic") return parabolic_config(40);
  return preset(name);
}

inline CheckResult check_bench(const Progress& progress = {}) {
  using verify_detail::format;
  CheckResult r{8, "method B not slower than method A", true, false, {}};
  for (const char* name : {"planar", "parabolic"}) {
    const auto a = bench_run(bench_config(name), Method::A);
    const auto b = bench_run(bench_config(name), Method::B);
    const bool ok = b.wall_s <= a.wall_s;
    r.pass = r.pass && ok;
    r.details.push_back(format("%s: A %.2f s, B %.2f s (B/A %.1f %%) %s", name, a.wall_s, b.wall_s,
                               100.0 * b.wall_s / a.wall_s, ok ? "ok" : "OUT"));
    if (progress) progress(r.details.back());
  }
  return r;
}

inline CheckResult check_blade() {
  using verify_detail::format;
  CheckResult r{10, "blade machining runs to completion", false, false, {}};
  Simulation sim(blade_config());
  std::size_t warnings = 0;
  sim.warn = [&](const std::string&) { ++warnings; };
  sim.run();
  const auto& mesh = sim.mesh();
  const auto& dis = sim.dissolution();
  bool monotone = true, finite = true;
  double prev = 0;
  for (const auto& rec : sim.series().records) {
    finite = finite && std::isfinite(rec.v_dis);
    monotone = monotone && rec.v_dis >= prev;
    prev = rec.v_dis;
  }
  std::size_t cut_left = 0, cut_right = 0, shorted = 0;
  const auto cathode = compute_cathode_field(sim.tool(), mesh, 1e-2);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    if (!dis.initially_metal[e]) continue;
    const double x = element_centroid(mesh, e).x;
    if (dis.d[e] >= 1.0) {
      if (x < 11.5 * mm) ++cut_left;
      if (x > 12 * mm) ++cut_right;
    }
    if (dis.d[e] < 0.5 && cathode.lambda[e] > 0.5) ++shorted;
  }
  r.pass = sim.done() && finite && monotone && cut_left > 0 && cut_right > 0 && shorted == 0;
  r.details.push_back(format("t = %.0f s, V_dis = %.4f mm^3 (finite %s, non-decreasing %s)", sim.time(),
                             sim.dissolved_volume() * 1e9, finite ? "yes" : "no", monotone ? "yes" : "no"));
  r.details.push_back(format("dissolved elements: left flank %zu, right flank %zu; undissolved metal inside tool: %zu",
                             cut_left, cut_right, shorted));
  return r;
}

/// Graded ("distorted") planar meshes; informational only.
inline CheckResult check_distorted_meshes(double dt = 0.1) {
  using verify_detail::format;
  CheckResult r{0, "distorted planar meshes (informational)", true, true, {}};
  struct Case {
    const char* label;
    Grading axis;
    double start, end, reported;
  };
  const Case cases[] = {{"10 v 80", Grading::y, 10, 80, -6.5}, {"80 -> 10", Grading::x, 80, 10, -9.3},
                        {"20 v 80", Grading::y, 20, 80, -5.1}, {"80 -> 20", Grading::x, 80, 20, -3.9},
                        {"40 v 80", Grading::y, 40, 80, -0.8}, {"80 -> 40", Grading::x, 80, 40, -1.2}};
  for (const auto& c : cases) {
    PlanarOptions o;
    o.dt = dt;
    o.steps = static_cast<std::size_t>(std::llround(60.0 / dt));
    auto cfg = planar_config(o);
    cfg.mesh.grading = c.axis;
    cfg.mesh.end_density = c.end;
    cfg.mesh.density_x = c.axis == Grading::x ? c.start : std::max(c.start, c.end);
    cfg.mesh.density_y = c.axis == Grading::y ? c.start : std::max(c.start, c.end);
    Simulation sim(cfg);
    sim.run();
    const double v = sim.dissolved_volume() / (o.feed * sim.time() * 1e-7);
    r.details.push_back(format("mesh %s dt=%g: error %+.2f %% (reported %+.1f %%)", c.label, dt,
                               100.0 * (v - 1.0), c.reported));
  }
  return r;
}

inline std::string format_check(const CheckResult& c) {
  std::string s;
  if (c.informational) {
    s = "INFO " + c.name + "\n";
  } else {
    s = std::string(c.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(c.criterion) + ": " +
        c.name + "\n";
  }
  for (const auto& d : c.details) s += "    " + d + "\n";
  return s;
}

}  // namespace ecm
