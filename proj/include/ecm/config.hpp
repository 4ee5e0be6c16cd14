#pragma once

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ecm/presets.hpp"

namespace ecm {

namespace config_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

/// Removes a trailing comment that is not inside quotes.
inline std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

struct Entry {
  std::string value;
  std::size_t line;
};

class Reader {
 public:
  Reader(std::string key, Entry e) : key_(std::move(key)), e_(std::move(e)) {}

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(what, e_.line, key_); }

  std::string text() const {
    const auto& v = e_.value;
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
    if (v.find('"') != std::string::npos) fail("malformed string");
    return v;
  }

  static bool to_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    errno = 0;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return errno == 0 && end == s.c_str() + s.size() && std::isfinite(out);
  }

  double number(double scale = 1.0) const {
    double v = 0;
    if (!to_number(trim(e_.value), v)) fail("expected a number, got '" + e_.value + "'");
    return v * scale;
  }

  double positive(double scale = 1.0) const {
    const double v = number(scale);
    if (!(v > 0)) fail("must be positive");
    return v;
  }

  std::size_t count() const {
    const double v = number();
    if (!(v >= 0) || v != std::floor(v) || v > 1e15) fail("expected a non-negative integer");
    return static_cast<std::size_t>(v);
  }

  bool flag() const {
    const auto t = text();
    if (t == "true") return true;
    if (t == "false") return false;
    fail("expected true or false");
  }

  std::vector<double> list(std::size_t n, double scale = 1.0) const {
    const auto& v = e_.value;
    if (v.size() < 2 || v.front() != '[' || v.back() != ']') fail("expected [a, b, ...]");
    std::vector<double> out;
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      double x = 0;
      if (!to_number(trim(item), x)) fail("bad list element '" + trim(item) + "'");
      out.push_back(x * scale);
    }
    if (out.size() != n) fail("expected " + std::to_string(n) + " values");
    return out;
  }

  Vec2 vec(double scale = 1.0) const {
    const auto l = list(2, scale);
    return {l[0], l[1]};
  }

  Box box(double scale = 1.0) const {
    const auto l = list(4, scale);
    if (!(l[2] > l[0] && l[3] > l[1])) fail("box must be [x0, y0, x1, y1] with x1 > x0, y1 > y0");
    return {{l[0], l[1]}, {l[2], l[3]}};
  }

  template <class F>
  auto convert(F&& f) const {
    try {
      return f(text());
    } catch (const InvalidArgument& e) {
      fail(e.what());
    }
  }

  std::size_t line() const { return e_.line; }

 private:
  std::string key_;
  Entry e_;
};

/// Shortest decimal for v / scale that reads back, multiplied by `scale`,
/// as exactly v. Falls back to 17 digits nudged by ulps.
inline std::string scaled(double v, double scale = 1.0) {
  char buf[64];
  auto exact = [&](double q, int digits) {
    // keep integer parts positional: 20, not 2e+01
    const double mag = std::abs(q);
    if (mag >= 1 && mag < 1e7) digits = std::max(digits, static_cast<int>(std::log10(mag)) + 1);
    std::snprintf(buf, sizeof buf, "%.*g", digits, q);
    return std::strtod(buf, nullptr) * scale == v;
  };
  const double q = v / scale;
  for (int digits = 1; digits <= 17; ++digits) {
    if (exact(q, digits)) return buf;
  }
  double up = q, down = q;
  for (int k = 0; k < 32; ++k) {
    up = std::nextafter(up, HUGE_VAL);
    if (exact(up, 17)) return buf;
    down = std::nextafter(down, -HUGE_VAL);
    if (exact(down, 17)) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", q);
  return buf;
}

inline std::string quoted(std::string_view s) { return "\"" + std::string(s) + "\""; }

inline std::string vec_text(Vec2 p, double scale = 1.0) {
  return "[" + scaled(p.x, scale) + ", " + scaled(p.y, scale) + "]";
}

inline std::string box_text(const Box& b, double scale = 1.0) {
  return "[" + scaled(b.lo.x, scale) + ", " + scaled(b.lo.y, scale) + ", " + scaled(b.hi.x, scale) +
         ", " + scaled(b.hi.y, scale) + "]";
}

}  // namespace config_detail

/// Parses the key = value configuration text. Lengths are in mm, feed in
/// mm/s, angles in degrees, everything else SI. A `scenario` preset is
/// applied first; keys then override it, and any [anode] or [primitive]
/// section replaces the preset's list.
inline ScenarioConfig parse_config_text(const std::string& text) {
  using namespace config_detail;
  using Section = std::map<std::string, Entry>;
  Section top;
  std::vector<Section> anode_sections, primitive_sections;
  std::vector<Entry> workpieces;
  std::vector<std::size_t> anode_lines, primitive_lines;
  Section* current = &top;

  std::istringstream in(text);
  std::string raw;
  for (std::size_t lineno = 1; std::getline(in, raw); ++lineno) {
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line == "[anode]") {
        anode_sections.emplace_back();
        anode_lines.push_back(lineno);
        current = &anode_sections.back();
      } else if (line == "[primitive]") {
        primitive_sections.emplace_back();
        primitive_lines.push_back(lineno);
        current = &primitive_sections.back();
      } else {
        throw ConfigError("unknown section " + line, lineno);
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", lineno);
    if (value.empty()) throw ConfigError("empty value", lineno, key);
    if (current == &top && key == "workpiece") {
      workpieces.push_back({value, lineno});
      continue;
    }
    if (current->count(key)) throw ConfigError("duplicate key", lineno, key);
    (*current)[key] = {value, lineno};
  }

  ScenarioConfig cfg;
  bool from_preset = false;
  if (auto it = top.find("scenario"); it != top.end()) {
    const Reader r("scenario", it->second);
    const auto name = r.text();
    if (name != "custom") {
      cfg = r.convert([](const std::string& n) { return preset(n); });
      from_preset = true;
    } else {
      cfg.name = "custom";
      cfg.anodes.clear();
    }
  }
  if (!from_preset) {
    for (const char* k : {"domain", "dt", "steps"}) {
      if (!top.count(k)) throw ConfigError("missing required key", 0, k);
    }
    if (workpieces.empty()) throw ConfigError("missing required key", 0, "workpiece");
    if (anode_sections.empty()) throw ConfigError("missing required section", 0, "[anode]");
  }

  for (const auto& [key, entry] : top) {
    const Reader r(key, entry);
    auto& m = cfg.mesh;
    auto& mat = cfg.materials;
    if (key == "scenario") {
    } else if (key == "mesh") {
      const auto t = r.text();
      const auto x = t.find('x');
      double a = 0, b = 0;
      if (x == std::string::npos || !Reader::to_number(trim(t.substr(0, x)), a) ||
          !Reader::to_number(trim(t.substr(x + 1)), b) || !(a > 0 && b > 0)) {
        r.fail("expected <density_x>x<density_y> in el/mm");
      }
      m.density_x = a;
      m.density_y = b;
    } else if (key == "mesh_grading") {
      m.grading = r.convert([](const std::string& s) { return parse_grading(s); });
    } else if (key == "mesh_end_density") {
      m.end_density = r.positive();
    } else if (key == "mesh_band") {
      const auto v = r.vec(mm);
      if (!(v.y > v.x)) r.fail("band must be [lo, hi] with hi > lo");
      m.band_lo = v.x;
      m.band_hi = v.y;
    } else if (key == "domain") {
      m.domain = r.box(mm);
    } else if (key == "thickness") {
      m.thickness = r.positive(mm);
    } else if (key == "rule") {
      cfg.rule = r.convert([](const std::string& s) { return parse_mixture_rule(s); });
    } else if (key == "method") {
      cfg.method = r.convert([](const std::string& s) { return parse_method(s); });
    } else if (key == "dv") {
      cfg.dv = r.number();
    } else if (key == "feed") {
      cfg.cathode.feed = r.number(mm);
      if (cfg.cathode.feed < 0) r.fail("must be non-negative");
    } else if (key == "dt") {
      cfg.dt = r.positive();
    } else if (key == "steps") {
      cfg.steps = r.count();
      if (cfg.steps < 1) r.fail("must be >= 1");
    } else if (key == "transient_factor") {
      cfg.transient_factor = r.number();
      if (cfg.transient_factor != 1.0 && cfg.transient_factor != 2.0) r.fail("must be 1 or 2");
    } else if (key == "lambda_tol") {
      cfg.lambda_tol = r.positive();
    } else if (key == "k_metal") {
      mat.k_metal = r.positive();
    } else if (key == "k_electrolyte") {
      mat.k_electrolyte = r.positive();
    } else if (key == "k_cathode") {
      mat.k_cathode = r.positive();
    } else if (key == "eps_r_metal") {
      mat.eps_r_metal = r.number();
    } else if (key == "eps_r_electrolyte") {
      mat.eps_r_electrolyte = r.number();
    } else if (key == "eps_r_cathode") {
      mat.eps_r_cathode = r.number();
    } else if (key == "eps0") {
      mat.eps0 = r.number();
    } else if (key == "nu_dis") {
      mat.nu_dis = r.positive();
    } else if (key == "gap_origin") {
      cfg.probes.gap_origin = r.vec(mm);
    } else if (key == "gap_axis") {
      const auto a = r.vec();
      if (!((std::abs(a.x) == 1 && a.y == 0) || (a.x == 0 && std::abs(a.y) == 1))) {
        r.fail("must be a unit axis such as [1, 0]");
      }
      cfg.probes.gap_axis = a;
    } else if (key == "kerf_station") {
      cfg.probes.kerf_station = r.number(mm);
    } else if (key == "kerf_center") {
      cfg.probes.kerf_center = r.number(mm);
    } else if (key == "record_every") {
      cfg.record_every = r.count();
      if (cfg.record_every < 1) r.fail("must be >= 1");
    } else if (key == "snapshot_every") {
      cfg.snapshot_every = r.count();
    } else if (key == "pinned_node") {
      cfg.pinned_node = r.count();
    } else if (key == "symmetry") {
      cfg.symmetry = r.text();
    } else {
      r.fail("unknown key");
    }
  }

  if (!workpieces.empty()) {
    cfg.workpiece.clear();
    for (const auto& w : workpieces) cfg.workpiece.push_back(Reader("workpiece", w).box(mm));
  }

  if (!anode_sections.empty()) {
    cfg.anodes.clear();
    for (std::size_t i = 0; i < anode_sections.size(); ++i) {
      AnodeRegion a;
      for (const auto& [key, entry] : anode_sections[i]) {
        const Reader r(key, entry);
        if (key == "edge") {
          a.edge = r.text();
          if (a.edge != "left" && a.edge != "right" && a.edge != "top" && a.edge != "bottom") {
            r.fail("edge must be left, right, top or bottom");
          }
        } else if (key == "box") {
          a.box = r.box(mm);
        } else if (key == "direction") {
          a.direction = r.vec();
        } else if (key == "metal_only") {
          a.metal_only = r.flag();
        } else {
          r.fail("unknown key in [anode]");
        }
      }
      if (a.edge.empty() && !a.box) throw ConfigError("[anode] needs edge or box", anode_lines[i]);
      cfg.anodes.push_back(a);
    }
  }

  if (!primitive_sections.empty()) {
    std::map<std::size_t, std::vector<Primitive>> subsets;
    for (std::size_t i = 0; i < primitive_sections.size(); ++i) {
      Primitive p;
      std::size_t subset = 0;
      bool have_kind = false;
      std::set<std::string> seen;
      for (const auto& [key, entry] : primitive_sections[i]) {
        const Reader r(key, entry);
        seen.insert(key);
        if (key == "subset") {
          subset = r.count();
        } else if (key == "kind") {
          p.kind = r.convert([](const std::string& s) { return parse_primitive_kind(s); });
          have_kind = true;
        } else if (key == "position") {
          p.position = r.vec(mm);
        } else if (key == "rotation") {
          p.rotation = r.number(deg);
        } else if (key == "radius") {
          p.a = r.positive(mm);
        } else if (key == "semi_axes") {
          const auto v = r.vec(mm);
          p.a = v.x;
          p.b = v.y;
        } else if (key == "curvature") {
          p.a = r.positive(1.0 / mm);
        } else if (key == "half_angle") {
          p.a = r.positive(deg);
        } else if (key == "side") {
          const auto s = r.text();
          if (s != "inside" && s != "outside") r.fail("side must be inside or outside");
          p.inside = s == "inside";
        } else if (key == "direction") {
          p.direction = r.vec();
        } else {
          r.fail("unknown key in [primitive]");
        }
      }
      if (!have_kind) throw ConfigError("[primitive] needs kind", primitive_lines[i], "kind");
      const char* shape_key = nullptr;
      switch (p.kind) {
        case PrimitiveKind::circle: shape_key = "radius"; break;
        case PrimitiveKind::ellipse: shape_key = "semi_axes"; break;
        case PrimitiveKind::parabola: shape_key = "curvature"; break;
        case PrimitiveKind::wedge: shape_key = "half_angle"; break;
        case PrimitiveKind::half_plane: break;
      }
      if (shape_key && !seen.count(shape_key)) {
        throw ConfigError("missing shape parameter", primitive_lines[i], shape_key);
      }
      try {
        p.validate();
      } catch (const InvalidArgument& e) {
        throw ConfigError(e.what(), primitive_lines[i]);
      }
      subsets[subset].push_back(p);
    }
    cfg.cathode.subsets.clear();
    for (auto& [id, prims] : subsets) cfg.cathode.subsets.push_back(std::move(prims));
  }

  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline ScenarioConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Fully resolved configuration in the format read by parse_config_text.
inline std::string emit_config(const ScenarioConfig& c) {
  using namespace config_detail;
  std::ostringstream os;
  const auto& m = c.mesh;
  const auto& mat = c.materials;
  bool known = false;
  for (const auto& n : preset_names()) known = known || n == c.name;
  os << "scenario = " << quoted(known ? c.name : "custom") << "\n";
  os << "mesh = " << scaled(m.density_x) << "x" << scaled(m.density_y) << "\n";
  os << "mesh_grading = " << quoted(to_string(m.grading)) << "\n";
  os << "mesh_end_density = " << scaled(m.end_density) << "\n";
  if (m.grading == Grading::band) {
    os << "mesh_band = " << vec_text({m.band_lo, m.band_hi}, mm) << "\n";
  }
  os << "domain = " << box_text(m.domain, mm) << "\n";
  os << "thickness = " << scaled(m.thickness, mm) << "\n";
  for (const auto& w : c.workpiece) os << "workpiece = " << box_text(w, mm) << "\n";
  os << "rule = " << quoted(to_string(c.rule)) << "\n";
  os << "method = " << quoted(to_string(c.method)) << "\n";
  os << "dv = " << scaled(c.dv) << "\n";
  os << "feed = " << scaled(c.cathode.feed, mm) << "\n";
  os << "dt = " << scaled(c.dt) << "\n";
  os << "steps = " << c.steps << "\n";
  os << "transient_factor = " << scaled(c.transient_factor) << "\n";
  os << "lambda_tol = " << scaled(c.lambda_tol) << "\n";
  os << "k_metal = " << scaled(mat.k_metal) << "\n";
  os << "k_electrolyte = " << scaled(mat.k_electrolyte) << "\n";
  os << "k_cathode = " << scaled(mat.k_cathode) << "\n";
  os << "eps_r_metal = " << scaled(mat.eps_r_metal) << "\n";
  os << "eps_r_electrolyte = " << scaled(mat.eps_r_electrolyte) << "\n";
  os << "eps_r_cathode = " << scaled(mat.eps_r_cathode) << "\n";
  os << "eps0 = " << scaled(mat.eps0) << "\n";
  os << "nu_dis = " << scaled(mat.nu_dis) << "\n";
  if (c.probes.gap_origin) {
    os << "gap_origin = " << vec_text(*c.probes.gap_origin, mm) << "\n";
    os << "gap_axis = " << vec_text(c.probes.gap_axis) << "\n";
  }
  if (c.probes.kerf_station) {
    os << "kerf_station = " << scaled(*c.probes.kerf_station, mm) << "\n";
    os << "kerf_center = " << scaled(c.probes.kerf_center, mm) << "\n";
  }
  os << "record_every = " << c.record_every << "\n";
  os << "snapshot_every = " << c.snapshot_every << "\n";
  if (c.pinned_node) os << "pinned_node = " << *c.pinned_node << "\n";
  if (!c.symmetry.empty()) os << "symmetry = " << quoted(c.symmetry) << "\n";

  for (const auto& a : c.anodes) {
    os << "\n[anode]\n";
    if (!a.edge.empty()) os << "edge = " << quoted(a.edge) << "\n";
    if (a.box) {
      os << "box = " << box_text(*a.box, mm) << "\n";
      os << "direction = " << vec_text(a.direction) << "\n";
      os << "metal_only = " << (a.metal_only ? "true" : "false") << "\n";
    }
  }
  for (std::size_t s = 0; s < c.cathode.subsets.size(); ++s) {
    for (const auto& p : c.cathode.subsets[s]) {
      os << "\n[primitive]\n";
      os << "subset = " << s << "\n";
      os << "kind = " << quoted(to_string(p.kind)) << "\n";
      os << "position = " << vec_text(p.position, mm) << "\n";
      os << "rotation = " << scaled(p.rotation, deg) << "\n";
      switch (p.kind) {
        case PrimitiveKind::circle: os << "radius = " << scaled(p.a, mm) << "\n"; break;
        case PrimitiveKind::ellipse: os << "semi_axes = " << vec_text({p.a, p.b}, mm) << "\n"; break;
        case PrimitiveKind::parabola: os << "curvature = " << scaled(p.a, 1.0 / mm) << "\n"; break;
        case PrimitiveKind::wedge: os << "half_angle = " << scaled(p.a, deg) << "\n"; break;
        case PrimitiveKind::half_plane: break;
      }
      os << "side = " << quoted(p.inside ? "inside" : "outside") << "\n";
      os << "direction = " << vec_text(p.direction) << "\n";
    }
  }
  return os.str();
}

}  // namespace ecm
