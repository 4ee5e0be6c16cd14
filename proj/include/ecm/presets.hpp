#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "ecm/driver.hpp"

namespace ecm {

inline constexpr double mm = 1e-3;
inline constexpr double um = 1e-6;
inline constexpr double deg = M_PI / 180.0;

inline Primitive make_primitive(PrimitiveKind kind, double a, double b, Vec2 position,
                                Vec2 direction, bool inside = true, double rotation = 0.0) {
  Primitive p;
  p.kind = kind;
  p.a = a;
  p.b = b;
  p.position = position;
  p.direction = direction;
  p.inside = inside;
  p.rotation = rotation;
  return p;
}

struct PlanarOptions {
  double density = 20;  // el/mm
  double dt = 0.1;
  std::size_t steps = 600;
  double s_init = 0.32 * mm;
  double feed = 0.01 * mm;
  double length = 1.0 * mm;  // metal length along the feed
  MixtureRule rule = MixtureRule::series;
  Method method = Method::B;
};

/// Flat tool facing a flat anode across a 1D gap; the left edge is the anode.
inline ScenarioConfig planar_config(const PlanarOptions& o = {}) {
  ScenarioConfig c;
  c.name = "planar";
  const double height = 1.0 * mm;
  const double width = std::ceil((o.length + o.s_init + 0.1 * mm) / (0.2 * mm) - 1e-9) * 0.2 * mm;
  c.mesh.domain = {{0, 0}, {width, height}};
  c.mesh.density_x = c.mesh.density_y = o.density;
  c.mesh.thickness = 0.1 * mm;
  c.workpiece = {Box{{0, 0}, {o.length, height}}};
  c.anodes = {AnodeRegion{"left", std::nullopt, {}, false}};
  c.dv = 20.0;
  c.cathode.feed = o.feed;
  c.cathode.subsets = {{make_primitive(PrimitiveKind::half_plane, 0, 0,
                                       {o.length + o.s_init, 0}, {-1, 0})}};
  c.rule = o.rule;
  c.method = o.method;
  c.dt = o.dt;
  c.steps = o.steps;
  c.probes.gap_origin = Vec2{0, 0.5 * height};
  c.probes.gap_axis = {1, 0};
  return c;
}

/// Parabolic tool sinking into a block; left half with the symmetry axis at x = 0.
inline ScenarioConfig parabolic_config(double density = 20) {
  ScenarioConfig c;
  c.name = "parabolic";
  c.mesh.domain = {{-2 * mm, 0}, {0, 5 * mm}};
  c.mesh.density_x = c.mesh.density_y = density;
  c.mesh.thickness = 0.5 * mm;
  c.workpiece = {Box{{-2 * mm, 0}, {0, 3 * mm}}};
  c.anodes = {AnodeRegion{"bottom", std::nullopt, {}, false}};
  c.dv = 10.0;
  c.materials.k_metal = 6.67e6;
  c.materials.k_electrolyte = 15.0;
  c.materials.nu_dis = 3.696e-11;
  c.cathode.feed = 0.0145 * mm;
  // y >= 0.375 x^2 + 3.5 in mm
  c.cathode.subsets = {{make_primitive(PrimitiveKind::parabola, 0.375 / mm, 0, {0, 3.5 * mm},
                                       {0, -1})}};
  c.method = Method::B;
  c.dt = 0.34483;
  c.steps = 500;
  c.probes.gap_origin = Vec2{0, 0};
  c.probes.gap_axis = {0, 1};
  c.symmetry = "x=0";
  return c;
}

/// Wire tool cutting a kerf through a plate. `density` is the x density and
/// the y density inside the band around the kerf.
inline ScenarioConfig wire_config(double density = 400, double dt = 0.1, bool moving_band = false) {
  ScenarioConfig c;
  c.name = "wire";
  c.mesh.domain = {{0, -0.2 * mm}, {0.75 * mm, 0.2 * mm}};
  c.mesh.density_x = c.mesh.density_y = density;
  c.mesh.grading = Grading::band;
  c.mesh.end_density = 50;
  c.mesh.band_lo = -0.08 * mm;
  c.mesh.band_hi = 0.08 * mm;
  c.mesh.thickness = 0.1 * mm;
  c.workpiece = {Box{{0, -0.2 * mm}, {0.7 * mm, 0.2 * mm}}};
  c.dv = 6.0;
  if (moving_band) {
    c.anodes = {AnodeRegion{"", Box{{0, -0.2 * mm}, {0.65 * mm, 0.2 * mm}}, {-1, 0}, true}};
  } else {
    c.anodes = {AnodeRegion{"left", std::nullopt, {}, false}};
  }
  c.materials.k_electrolyte = 1.71;
  c.materials.nu_dis = 1.09e-11;
  c.cathode.feed = 0.004 * mm;
  c.cathode.subsets = {{make_primitive(PrimitiveKind::circle, 0.015 * mm, 0, {0.725 * mm, 0}, {-1, 0})}};
  c.method = Method::B;
  c.dt = dt;
  c.steps = static_cast<std::size_t>(std::llround(150.0 / dt));
  c.probes.kerf_station = 0.4 * mm;
  c.probes.kerf_center = 0.0;
  return c;
}

/// Two shaped tools closing in on a blade blank from both sides.
inline ScenarioConfig blade_config(double density = 5) {
  ScenarioConfig c;
  c.name = "blade";
  c.mesh.domain = {{0, 0}, {22 * mm, 25 * mm}};
  c.mesh.density_x = c.mesh.density_y = density;
  c.mesh.thickness = 0.2 * mm;
  c.workpiece = {Box{{6 * mm, 0}, {16 * mm, 25 * mm}}};
  c.anodes = {AnodeRegion{"", Box{{11.5 * mm, 3 * mm}, {12 * mm, 20 * mm}}, {}, true}};
  c.dv = 20.0;
  c.cathode.feed = 0.01 * mm;
  const Vec2 right{1, 0}, left{-1, 0};
  using K = PrimitiveKind;
  c.cathode.subsets = {
      {make_primitive(K::ellipse, 2.8 * mm, 14 * mm, {1.56 * mm, 13.9 * mm}, right, true, 5.44 * deg),
       make_primitive(K::circle, 2 * mm, 0, {4.5 * mm, 3 * mm}, right, false)},
      {make_primitive(K::circle, 0.5 * mm, 0, {4 * mm, 0.551 * mm}, right)},
      {make_primitive(K::half_plane, 0, 0, {16.35 * mm, 0}, left),
       make_primitive(K::ellipse, 4.5 * mm, 11.25 * mm, {16.05 * mm, 13.75 * mm}, left, false,
                      11.5 * deg),
       make_primitive(K::ellipse, 4.5 * mm, 7.5 * mm, {16.35 * mm, 8.5 * mm}, left, false),
       make_primitive(K::circle, 0.49 * mm, 0, {16.84 * mm, 0.551 * mm}, left, false)},
  };
  c.method = Method::B;
  c.dt = 2.0;
  c.steps = 290;
  return c;
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"planar", "parabolic", "wire", "blade"};
  return names;
}

inline ScenarioConfig preset(std::string_view name) {
  if (name == "planar") return planar_config();
  if (name == "parabolic") return parabolic_config();
  if (name == "wire") return wire_config();
  if (name == "blade") return blade_config();
  throw InvalidArgument("unknown preset '" + std::string(name) + "'");
}

}  // namespace ecm
