#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ecm/cathode.hpp"
#include "ecm/dissolution.hpp"
#include "ecm/error.hpp"
#include "ecm/field.hpp"
#include "ecm/geometry.hpp"
#include "ecm/materials.hpp"
#include "ecm/mesh.hpp"
#include "ecm/mixture.hpp"

namespace ecm {

enum class Method { A, B };

inline std::string_view to_string(Method m) { return m == Method::A ? "A" : "B"; }

inline Method parse_method(std::string_view s) {
  if (s == "A" || s == "a") return Method::A;
  if (s == "B" || s == "b") return Method::B;
  throw InvalidArgument("unknown method '" + std::string(s) + "'");
}

enum class Grading { none, x, y, band };

inline std::string_view to_string(Grading g) {
  switch (g) {
    case Grading::none: return "none";
    case Grading::x: return "x";
    case Grading::y: return "y";
    case Grading::band: return "band";
  }
  return "?";
}

inline Grading parse_grading(std::string_view s) {
  if (s == "none") return Grading::none;
  if (s == "x") return Grading::x;
  if (s == "y") return Grading::y;
  if (s == "band") return Grading::band;
  throw InvalidArgument("unknown grading '" + std::string(s) + "'");
}

/// Rectangular domain meshed with densities in elements per mm.
///   none  uniform, density_x by density_y
///   x, y  graded along the axis from the density at the low side to end_density
///   band  uniform in x; in y uniform at density_y inside [band_lo, band_hi]
///         and graded outward to end_density
struct MeshSpec {
  Box domain{{0, 0}, {1e-3, 1e-3}};
  double density_x = 20;
  double density_y = 20;
  Grading grading = Grading::none;
  double end_density = 20;
  double band_lo = 0;
  double band_hi = 0;
  double thickness = 1e-4;

  friend bool operator==(const MeshSpec&, const MeshSpec&) = default;
};

inline Mesh build_mesh(const MeshSpec& s) {
  const double w = s.domain.width(), h = s.domain.height();
  if (!(w > 0 && h > 0)) throw InvalidArgument("empty mesh domain");
  if (!(s.density_x > 0 && s.density_y > 0)) throw InvalidArgument("mesh density must be positive");
  auto count = [](double len, double dens) { return graded_cell_count(dens, dens, len); };
  switch (s.grading) {
    case Grading::none:
      return generate_structured(count(w, s.density_x), count(h, s.density_y), w, h, s.thickness,
                                 s.domain.lo);
    case Grading::x:
      return make_tensor_mesh(graded_coords(s.domain.lo.x, s.domain.hi.x, s.density_x, s.end_density),
                              uniform_coords(s.domain.lo.y, s.domain.hi.y, count(h, s.density_y)),
                              s.thickness);
    case Grading::y:
      return make_tensor_mesh(uniform_coords(s.domain.lo.x, s.domain.hi.x, count(w, s.density_x)),
                              graded_coords(s.domain.lo.y, s.domain.hi.y, s.density_y, s.end_density),
                              s.thickness);
    case Grading::band: {
      if (!(s.band_lo > s.domain.lo.y && s.band_hi < s.domain.hi.y && s.band_hi > s.band_lo)) {
        throw InvalidArgument("mesh band must lie strictly inside the domain");
      }
      auto below = graded_coords(s.domain.lo.y, s.band_lo, s.end_density, s.density_y);
      const auto mid = uniform_coords(s.band_lo, s.band_hi, count(s.band_hi - s.band_lo, s.density_y));
      const auto above = graded_coords(s.band_hi, s.domain.hi.y, s.density_y, s.end_density);
      below.insert(below.end(), mid.begin() + 1, mid.end());
      below.insert(below.end(), above.begin() + 1, above.end());
      return make_tensor_mesh(uniform_coords(s.domain.lo.x, s.domain.hi.x, count(w, s.density_x)),
                              std::move(below), s.thickness);
    }
  }
  throw InvalidArgument("bad grading");
}

/// Where the anode potential is imposed: a boundary edge, or every node in
/// a box (optionally moving with the feed, optionally restricted to nodes
/// touching undissolved metal).
struct AnodeRegion {
  std::string edge;  // "left", "right", "top", "bottom" or empty
  std::optional<Box> box;
  Vec2 direction;  // box velocity = feed * direction
  bool metal_only = false;

  friend bool operator==(const AnodeRegion&, const AnodeRegion&) = default;
};

struct Probes {
  std::optional<Vec2> gap_origin;  // point on the anode side of the gap line
  Vec2 gap_axis{1, 0};             // unit axis pointing toward the tool
  std::optional<double> kerf_station;
  double kerf_center = 0.0;

  friend bool operator==(const Probes&, const Probes&) = default;
};

struct ScenarioConfig {
  std::string name = "custom";
  MeshSpec mesh;
  MaterialSet materials;
  MixtureRule rule = MixtureRule::series;
  CathodeAssembly cathode;
  Method method = Method::B;
  double dv = 20.0;  // V
  std::vector<AnodeRegion> anodes;
  std::vector<Box> workpiece;  // elements with centroid inside are metal
  double dt = 0.1;
  std::size_t steps = 600;
  double transient_factor = 2.0;
  double lambda_tol = 1e-3;
  Probes probes;
  std::size_t record_every = 1;
  std::size_t snapshot_every = 0;  // 0: every 10 % of steps
  std::optional<std::size_t> pinned_node;
  std::string symmetry;  // informational; symmetry planes are natural boundaries

  void validate() const {
    if (!(dt > 0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
    if (steps < 1) throw InvalidArgument("steps must be >= 1");
    if (record_every < 1) throw InvalidArgument("record_every must be >= 1");
    if (!(transient_factor == 1.0 || transient_factor == 2.0)) {
      throw InvalidArgument("transient_factor must be 1 or 2");
    }
    if (!(cathode.feed >= 0)) throw InvalidArgument("feed must be non-negative");
    if (anodes.empty()) throw InvalidArgument("no anode region");
    if (workpiece.empty()) throw InvalidArgument("no workpiece");
    if (!(mesh.thickness > 0)) throw InvalidArgument("thickness must be positive");
    materials.validate();
    for (const auto& s : cathode.subsets) {
      for (const auto& p : s) p.validate();
    }
  }

  double end_time() const { return dt * static_cast<double>(steps); }
};

/// s_eq = nu k dv / feed.
inline double equilibrium_gap(double nu_dis, double k_el, double dv, double feed) {
  if (!(feed > 0)) throw InvalidArgument("no equilibrium gap without feed");
  return nu_dis * k_el * dv / feed;
}

struct TimeRecord {
  double t = 0;
  double v_dis = 0;
  std::optional<double> gap;
  std::optional<double> kerf;
  std::size_t ndof = 0;  // constrained nodes
  double step_wall_s = 0;

  friend bool operator==(const TimeRecord&, const TimeRecord&) = default;
};

struct TimeSeries {
  std::vector<TimeRecord> records;

  /// Time strictly increasing, dissolved volume non-decreasing.
  void validate() const {
    for (std::size_t i = 1; i < records.size(); ++i) {
      if (!(records[i].t > records[i - 1].t)) throw InvalidArgument("time not increasing");
      if (records[i].v_dis < records[i - 1].v_dis) {
        throw InvalidArgument("dissolved volume decreases at row " + std::to_string(i + 1));
      }
    }
  }

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;
};

struct PhaseTimes {
  double geometry = 0;
  double assembly = 0;
  double solve = 0;
  double dissolution = 0;
  double total = 0;
};

/// Distance along `axis` from the anode front to the tool boundary, on the
/// grid line through `origin`. The front is taken in the first undissolved
/// metal element met when walking from the tool side; it lies d times the
/// element length behind the element's tool-side face.
inline double measure_gap_width(const DissolutionState& state, const Mesh& mesh,
                                const CathodeAssembly& tool, Vec2 origin, Vec2 axis) {
  if (!mesh.grid) throw MeasurementError("gap probe needs a tensor-product mesh");
  const Grid& g = *mesh.grid;
  const bool along_x = std::abs(axis.x) > 0.5;
  const double sign = along_x ? (axis.x > 0 ? 1.0 : -1.0) : (axis.y > 0 ? 1.0 : -1.0);
  const auto& lines = along_x ? g.xs : g.ys;
  const auto cross_cell = Grid::cell_of(along_x ? g.ys : g.xs, along_x ? origin.y : origin.x);
  if (!cross_cell) throw MeasurementError("gap line outside the mesh");
  const std::size_t n = lines.size() - 1;
  auto element_at = [&](std::size_t k) {
    return along_x ? g.element(k, *cross_cell) : g.element(*cross_cell, k);
  };
  const double start = along_x ? origin.x : origin.y;

  std::optional<double> front;
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t k = sign > 0 ? n - 1 - step : step;
    const std::size_t e = element_at(k);
    if (!state.initially_metal[e] || state.d[e] >= 1.0) continue;
    const double lo = lines[k], hi = lines[k + 1];
    if ((sign > 0 && hi < start) || (sign < 0 && lo > start)) break;
    const double h = hi - lo;
    front = sign > 0 ? hi - state.d[e] * h : lo + state.d[e] * h;
    break;
  }
  if (!front) throw MeasurementError("anode front not found on gap line");

  auto point = [&](double s) { return along_x ? Vec2{s, origin.y} : Vec2{origin.x, s}; };
  const double end = sign > 0 ? lines.back() : lines.front();
  const double h_min = std::abs(lines[1] - lines[0]) * 0.25;
  double a = *front, b = *front;
  bool hit = false;
  while (sign * (end - b) > 0) {
    a = b;
    b = sign > 0 ? std::min(end, b + h_min) : std::max(end, b - h_min);
    if (contains(tool, point(b))) {
      hit = true;
      break;
    }
  }
  if (!hit) throw MeasurementError("tool boundary not found on gap line");
  if (contains(tool, point(a))) return 0.0;
  while (std::abs(b - a) > 1e-9) {
    const double m = 0.5 * (a + b);
    (contains(tool, point(m)) ? b : a) = m;
  }
  return std::abs(0.5 * (a + b) - *front);
}

/// Cut width across the grid column containing x = `station`: the d-weighted
/// height of the contiguous partially dissolved run through `center`. Zero
/// when the element at the centre is less than half dissolved.
inline double measure_kerf_width(const DissolutionState& state, const Mesh& mesh, double station,
                                 double center = 0.0) {
  if (!mesh.grid) throw MeasurementError("kerf probe needs a tensor-product mesh");
  const Grid& g = *mesh.grid;
  const auto col = Grid::cell_of(g.xs, station);
  const auto row = Grid::cell_of(g.ys, center);
  if (!col || !row) throw MeasurementError("kerf station outside the mesh");
  auto d_at = [&](std::size_t j) { return state.d[g.element(*col, j)]; };
  if (d_at(*row) < 0.5) return 0.0;
  double width = 0.0;
  for (std::size_t j = *row; j < g.ny() && d_at(j) > 0.0; ++j) width += d_at(j) * (g.ys[j + 1] - g.ys[j]);
  for (std::size_t j = *row; j-- > 0 && d_at(j) > 0.0;) width += d_at(j) * (g.ys[j + 1] - g.ys[j]);
  return width;
}

/// Step-by-step ECM simulation. Each step solves the field for the tool
/// position at the start of the step, dissolves, then advances the tool.
class Simulation {
 public:
  std::function<void(const std::string&)> warn = [](const std::string&) {};

  explicit Simulation(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    mesh_ = build_mesh(cfg_.mesh);
    validate(mesh_);
    std::vector<std::uint8_t> metal(mesh_.element_count(), 0);
    for (std::size_t e = 0; e < mesh_.element_count(); ++e) {
      const Vec2 c = element_centroid(mesh_, e);
      metal[e] = std::any_of(cfg_.workpiece.begin(), cfg_.workpiece.end(),
                             [&](const Box& b) { return b.contains(c); });
    }
    dis_ = make_dissolution_state(mesh_, metal);
    field_ = FieldState::zeros(mesh_.node_count(), cfg_.dt);
    solver_.emplace(mesh_);
    for (const auto& a : cfg_.anodes) {
      if (!a.edge.empty()) mesh_.tag(a.edge);
    }
  }

  const ScenarioConfig& config() const { return cfg_; }
  const Mesh& mesh() const { return mesh_; }
  const DissolutionState& dissolution() const { return dis_; }
  const FieldState& field() const { return field_; }
  const CathodeAssembly& tool() const { return cfg_.cathode; }
  const CathodeField& cathode_field() const { return cathode_; }
  const std::vector<Vec2>& current() const { return j_; }
  const TimeSeries& series() const { return series_; }
  const PhaseTimes& phases() const { return phases_; }
  std::size_t step_index() const { return step_; }
  double time() const { return cfg_.cathode.time; }
  bool done() const { return step_ >= cfg_.steps; }

  double dissolved_volume() const { return total_dissolved_volume(dis_, mesh_); }

  std::optional<double> gap() const {
    if (!cfg_.probes.gap_origin) return std::nullopt;
    return measure_gap_width(dis_, mesh_, cfg_.cathode, *cfg_.probes.gap_origin, cfg_.probes.gap_axis);
  }

  std::optional<double> kerf() const {
    if (!cfg_.probes.kerf_station) return std::nullopt;
    return measure_kerf_width(dis_, mesh_, *cfg_.probes.kerf_station, cfg_.probes.kerf_center);
  }

  /// Advances one time step; errors are rethrown with the step index.
  void step() {
    if (done()) throw InvalidArgument("simulation already finished");
    try {
      do_step();
    } catch (const NumericalError& e) {
      throw NumericalError("step " + std::to_string(step_ + 1) + ": " + e.what(), e.residual());
    } catch (const SetupError& e) {
      throw SetupError("step " + std::to_string(step_ + 1) + ": " + e.what());
    } catch (const MeasurementError& e) {
      throw MeasurementError("step " + std::to_string(step_ + 1) + ": " + e.what());
    }
  }

  const TimeSeries& run(const std::function<void(const Simulation&)>& on_step = {}) {
    while (!done()) {
      step();
      if (on_step) on_step(*this);
    }
    return series_;
  }

  /// Tool field and constraints for the current tool position (no solve).
  ConstraintSet constraints_now() {
    cathode_ = compute_cathode_field(cfg_.cathode, mesh_, cfg_.lambda_tol);
    ConstraintSet c;
    params_ = effective_anode_params(dis_, cfg_.materials, cfg_.rule);
    if (cfg_.method == Method::B) {
      const auto r = apply_method_b(cathode_, mesh_, 0.0, c);
      if (r.mixture_only) {
        warn("tool covers no node; imposed through the mixture only");
      }
      params_ = apply_cathode_mixture(cathode_, cfg_.materials, params_, cfg_.rule);
    } else {
      params_ = apply_method_a(cathode_, cfg_.materials, params_, cfg_.rule, 0.0, c, cfg_.pinned_node);
    }
    add_anode(c);
    return renumber(std::move(c), mesh_.node_count());
  }

 private:
  using clock = std::chrono::steady_clock;
  static double seconds(clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  }

  void add_anode(ConstraintSet& c) {
    const auto& tool = cfg_.cathode;
    std::size_t conflicts = 0;
    auto fix = [&](std::size_t n) {
      if (!c.add(n, cfg_.dv)) ++conflicts;
    };
    for (const auto& a : cfg_.anodes) {
      if (!a.edge.empty()) {
        for (auto n : mesh_.tag(a.edge)) fix(n);
      }
      if (!a.box) continue;
      const Box box = a.box->translated((tool.feed * tool.time) * a.direction);
      std::vector<std::uint8_t> live;
      if (a.metal_only) {
        live.assign(mesh_.node_count(), 0);
        for (std::size_t e = 0; e < mesh_.element_count(); ++e) {
          if (!dis_.initially_metal[e] || dis_.d[e] >= 1.0) continue;
          for (auto n : mesh_.elements[e]) live[n] = 1;
        }
      }
      for (std::size_t n = 0; n < mesh_.node_count(); ++n) {
        if (!box.contains(mesh_.nodes[n])) continue;
        if (a.metal_only && !live[n]) continue;
        fix(n);
      }
    }
    if (conflicts > 0 && !conflict_warned_) {
      warn(std::to_string(conflicts) + " anode node(s) inside the tool; the tool potential wins");
      conflict_warned_ = true;
    }
  }

  void do_step() {
    const auto t0 = clock::now();
    const ConstraintSet c = constraints_now();
    const auto t1 = clock::now();

    field_.dt = cfg_.dt;
    SolveOptions opt;
    opt.eps0 = cfg_.materials.eps0;
    opt.transient_factor = cfg_.transient_factor;
    FieldState next = solver_->solve(mesh_, params_, c, field_, opt);
    const auto t2 = clock::now();

    j_ = current_density_field(mesh_, params_, next, cfg_.materials.eps0);
    auto up = update_dissolution(dis_, mesh_, cfg_.materials, j_, cfg_.dt);
    propagate_activation(dis_, mesh_, up);
    settle_cut_off(dis_, mesh_, cfg_.materials, cfg_.dt);
    next.v_prev = next.v;
    field_ = std::move(next);
    cfg_.cathode = advance(cfg_.cathode, cfg_.dt);
    ++step_;
    const auto t3 = clock::now();

    phases_.geometry += seconds(t0, t1);
    phases_.assembly += solver_->report().assembly_seconds;
    phases_.solve += solver_->report().solve_seconds;
    phases_.dissolution += seconds(t2, t3);
    phases_.total += seconds(t0, t3);

    if (step_ % cfg_.record_every == 0 || done()) {
      TimeRecord r;
      r.t = time();
      r.v_dis = dissolved_volume();
      r.gap = gap();
      r.kerf = kerf();
      r.ndof = c.fixed.size();
      r.step_wall_s = seconds(t0, t3);
      series_.records.push_back(r);
    }
  }

  ScenarioConfig cfg_;
  Mesh mesh_;
  DissolutionState dis_;
  FieldState field_;
  std::optional<FieldSolver> solver_;
  CathodeField cathode_;
  EffectiveParams params_;
  std::vector<Vec2> j_;
  TimeSeries series_;
  PhaseTimes phases_;
  std::size_t step_ = 0;
  bool conflict_warned_ = false;
};

inline TimeSeries run(const ScenarioConfig& cfg) {
  Simulation sim(cfg);
  return sim.run();
}

}  // namespace ecm
