#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecm/error.hpp"
#include "ecm/field.hpp"
#include "ecm/geometry.hpp"
#include "ecm/materials.hpp"
#include "ecm/mesh.hpp"
#include "ecm/mixture.hpp"

namespace ecm {

enum class PrimitiveKind { half_plane, circle, ellipse, parabola, wedge };

inline std::string_view to_string(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::half_plane: return "half-plane";
    case PrimitiveKind::circle: return "circle";
    case PrimitiveKind::ellipse: return "ellipse";
    case PrimitiveKind::parabola: return "parabola";
    case PrimitiveKind::wedge: return "wedge";
  }
  return "?";
}

inline PrimitiveKind parse_primitive_kind(std::string_view s) {
  if (s == "half-plane") return PrimitiveKind::half_plane;
  if (s == "circle") return PrimitiveKind::circle;
  if (s == "ellipse") return PrimitiveKind::ellipse;
  if (s == "parabola") return PrimitiveKind::parabola;
  if (s == "wedge") return PrimitiveKind::wedge;
  throw InvalidArgument("unknown primitive kind '" + std::string(s) + "'");
}

/// One tool primitive. Shapes are described in a local frame obtained by
/// translating by the current position and rotating by -rotation:
///   half-plane  local x >= 0
///   circle      |p| <= a
///   ellipse     (x/a)^2 + (y/b)^2 <= 1
///   parabola    y >= a x^2             (a: curvature coefficient, 1/m)
///   wedge       |atan2(y, x)| <= a     (a: half-angle, rad; apex at origin)
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::half_plane;
  double a = 0.0;
  double b = 0.0;
  Vec2 position;
  double rotation = 0.0;  // rad
  bool inside = true;     // false: the complement of the shape
  Vec2 direction;         // feed direction; velocity = feed * direction

  void validate() const {
    switch (kind) {
      case PrimitiveKind::circle:
        if (!(a > 0)) throw InvalidArgument("circle radius must be positive");
        break;
      case PrimitiveKind::ellipse:
        if (!(a > 0 && b > 0)) throw InvalidArgument("ellipse semi-axes must be positive");
        break;
      case PrimitiveKind::parabola:
        if (!(a > 0)) throw InvalidArgument("parabola coefficient must be positive");
        break;
      case PrimitiveKind::wedge:
        if (!(a > 0 && a < M_PI / 2)) throw InvalidArgument("wedge half-angle must be in (0, 90) deg");
        break;
      case PrimitiveKind::half_plane: break;
    }
  }

  /// Smallest geometric length scale; infinite for unbounded straight shapes.
  double feature_size() const {
    switch (kind) {
      case PrimitiveKind::circle: return a;
      case PrimitiveKind::ellipse: return std::min(a, b);
      case PrimitiveKind::parabola: return 0.5 / a;  // vertex radius of curvature
      default: return std::numeric_limits<double>::infinity();
    }
  }

  friend bool operator==(const Primitive&, const Primitive&) = default;
};

/// Approximate signed distance to the primitive's boundary at time `t`;
/// negative inside.
inline double level(const Primitive& p, Vec2 x, double feed, double t) {
  const Vec2 pos = p.position + (feed * t) * p.direction;
  const Vec2 q = p.rotation == 0.0 ? x - pos : rotate(x - pos, -p.rotation);
  double phi = 0.0;
  switch (p.kind) {
    case PrimitiveKind::half_plane:
      phi = -q.x;
      break;
    case PrimitiveKind::circle:
      phi = norm(q) - p.a;
      break;
    case PrimitiveKind::ellipse:
      phi = (std::hypot(q.x / p.a, q.y / p.b) - 1.0) * std::min(p.a, p.b);
      break;
    case PrimitiveKind::parabola:
      phi = (p.a * q.x * q.x - q.y) / std::sqrt(1.0 + 4.0 * p.a * p.a * q.x * q.x);
      break;
    case PrimitiveKind::wedge: {
      const double s = std::sin(p.a), c = std::cos(p.a);
      phi = std::max(-q.x * s + q.y * c, -q.x * s - q.y * c);
      break;
    }
  }
  return p.inside ? phi : -phi;
}

/// Union of subsets, each subset the intersection of its primitives.
struct CathodeAssembly {
  std::vector<std::vector<Primitive>> subsets;
  double feed = 0.0;  // m/s
  double time = 0.0;  // s

  double feature_size() const {
    double f = std::numeric_limits<double>::infinity();
    for (const auto& s : subsets) {
      for (const auto& p : s) f = std::min(f, p.feature_size());
    }
    return f;
  }

  friend bool operator==(const CathodeAssembly&, const CathodeAssembly&) = default;
};

/// min over subsets of max over primitives; +inf for an empty assembly.
inline double level(const CathodeAssembly& a, Vec2 x, double t) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& subset : a.subsets) {
    if (subset.empty()) continue;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& p : subset) worst = std::max(worst, level(p, x, a.feed, t));
    best = std::min(best, worst);
  }
  return best;
}

inline bool contains(const CathodeAssembly& a, Vec2 x, double t) { return level(a, x, t) < 0.0; }
inline bool contains(const CathodeAssembly& a, Vec2 x) { return contains(a, x, a.time); }

/// Moves every primitive along its feed for `dt` seconds.
inline CathodeAssembly advance(CathodeAssembly a, double dt) {
  if (!(dt >= 0)) throw InvalidArgument("dt must be non-negative");
  a.time += dt;
  return a;
}

namespace detail {

/// Area of the part of triangle (p, phi) where the linear interpolant of phi < 0.
inline double negative_area(const std::array<Vec2, 3>& p, const std::array<double, 3>& f) {
  int neg = 0;
  for (double v : f) neg += v < 0 ? 1 : 0;
  const double full = std::abs(cross(p[1] - p[0], p[2] - p[0])) * 0.5;
  if (neg == 0) return 0.0;
  if (neg == 3) return full;
  // lone vertex: the one whose sign differs from the other two
  const bool lone_negative = neg == 1;
  int k = 0;
  for (int i = 0; i < 3; ++i) {
    if ((f[i] < 0) == lone_negative) k = i;
  }
  const int i1 = (k + 1) % 3, i2 = (k + 2) % 3;
  const double t1 = f[k] / (f[k] - f[i1]);
  const double t2 = f[k] / (f[k] - f[i2]);
  const double corner = full * t1 * t2;  // similar sub-triangle at the lone vertex
  return lone_negative ? corner : full - corner;
}

struct Cell {
  double u0, u1, w0, w1;  // parametric extent in [0,1]^2
};

inline Vec2 map_bilinear(const std::array<Vec2, 4>& c, double u, double w) {
  return (1 - u) * (1 - w) * c[0] + u * (1 - w) * c[1] + u * w * c[2] + (1 - u) * w * c[3];
}

}  // namespace detail

/// Fraction of element `e` inside the assembly at time `t`.
///
/// The element is subdivided as a quadtree. A cell is decided when its four
/// corners and centre agree and either the boundary is farther than half the
/// cell diameter or the cell is smaller than the smallest tool feature. Cells
/// cut by the boundary on which the level function is linear to round-off are
/// integrated exactly by clipping. The remaining cut cells are refined until
/// their estimated clipping error (deviation from linear over the interpolant
/// gradient, times cell diameter, summed) is at most `tol` times the element
/// area, then clipped.
inline double cathode_ratio(const CathodeAssembly& a, const Mesh& mesh, std::size_t e, double t,
                            double tol = 1e-3) {
  if (!(tol > 0 && tol <= 0.1)) throw InvalidArgument("tol must be in (0, 0.1]");
  const auto c = mesh.coords(e);
  const double area = element_area(mesh, e);
  const double feature = a.feature_size();
  {
    // whole element decided by its corners and centre
    int neg = 0;
    double nearest = std::numeric_limits<double>::infinity();
    for (const Vec2 p : {c[0], c[1], c[2], c[3], 0.25 * (c[0] + c[1] + c[2] + c[3])}) {
      const double f = level(a, p, t);
      neg += f < 0 ? 1 : 0;
      nearest = std::min(nearest, std::abs(f));
    }
    const double diam = std::max(norm(c[2] - c[0]), norm(c[3] - c[1]));
    if ((neg == 0 || neg == 5) && (nearest >= 0.5 * diam || diam < feature)) {
      return neg == 5 ? 1.0 : 0.0;
    }
  }

  double inside = 0.0;
  std::vector<detail::Cell> cells{{0, 1, 0, 1}};
  std::vector<detail::Cell> next;
  constexpr int max_depth = 14;
  for (int depth = 0; !cells.empty(); ++depth) {
    struct Pending {
      detail::Cell cell;
      std::array<Vec2, 4> p;
      std::array<double, 4> f;
      double area;
    };
    std::vector<Pending> band;
    double band_error = 0.0;
    for (const auto& cell : cells) {
      std::array<Vec2, 4> p{detail::map_bilinear(c, cell.u0, cell.w0),
                            detail::map_bilinear(c, cell.u1, cell.w0),
                            detail::map_bilinear(c, cell.u1, cell.w1),
                            detail::map_bilinear(c, cell.u0, cell.w1)};
      std::array<double, 4> f{};
      for (int i = 0; i < 4; ++i) f[i] = level(a, p[i], t);
      const double um = 0.5 * (cell.u0 + cell.u1), wm = 0.5 * (cell.w0 + cell.w1);
      const double fc = level(a, detail::map_bilinear(c, um, wm), t);
      const double cell_area = signed_area(p);
      const double diam = std::max(norm(p[2] - p[0]), norm(p[3] - p[1]));
      int neg = fc < 0 ? 1 : 0;
      double nearest = std::abs(fc);
      for (double v : f) {
        neg += v < 0 ? 1 : 0;
        nearest = std::min(nearest, std::abs(v));
      }
      if (neg == 0 || neg == 5) {
        if (nearest >= 0.5 * diam || diam < feature) {
          if (neg == 5) inside += cell_area;
          continue;
        }
      }
      // linearity check against the bilinear interpolant at centre and edge midpoints
      const std::array<std::pair<double, double>, 5> probes{
          std::pair{um, wm}, std::pair{um, cell.w0}, std::pair{cell.u1, wm},
          std::pair{um, cell.w1}, std::pair{cell.u0, wm}};
      const std::array<double, 5> interp{0.25 * (f[0] + f[1] + f[2] + f[3]), 0.5 * (f[0] + f[1]),
                                         0.5 * (f[1] + f[2]), 0.5 * (f[2] + f[3]),
                                         0.5 * (f[3] + f[0])};
      double dev = std::abs(fc - interp[0]);
      for (int i = 1; i < 5; ++i) {
        dev = std::max(dev, std::abs(level(a, detail::map_bilinear(c, probes[i].first,
                                                                   probes[i].second), t) -
                                     interp[i]));
      }
      if (dev <= 1e-12 * diam || depth >= max_depth) {
        inside += detail::negative_area({p[0], p[1], p[2]}, {f[0], f[1], f[2]}) +
                  detail::negative_area({p[0], p[2], p[3]}, {f[0], f[2], f[3]});
        continue;
      }
      band.push_back({cell, p, f, cell_area});
      // clipping misplaces the boundary by ~dev / |grad f| over a length ~diam
      const Vec2 ex = 0.5 * (p[1] - p[0] + p[2] - p[3]), ey = 0.5 * (p[3] - p[0] + p[2] - p[1]);
      const double fx = 0.5 * (f[1] - f[0] + f[2] - f[3]), fy = 0.5 * (f[3] - f[0] + f[2] - f[1]);
      const double det = cross(ex, ey);
      const double grad = norm(Vec2{(fx * ey.y - fy * ex.y) / det, (ex.x * fy - ey.x * fx) / det});
      band_error += dev * diam < grad * cell_area ? dev * diam / grad : cell_area;
    }
    if (band_error <= tol * area) {
      for (const auto& b : band) {
        inside += detail::negative_area({b.p[0], b.p[1], b.p[2]}, {b.f[0], b.f[1], b.f[2]}) +
                  detail::negative_area({b.p[0], b.p[2], b.p[3]}, {b.f[0], b.f[2], b.f[3]});
      }
      break;
    }
    next.clear();
    for (const auto& b : band) {
      const double um = 0.5 * (b.cell.u0 + b.cell.u1), wm = 0.5 * (b.cell.w0 + b.cell.w1);
      next.push_back({b.cell.u0, um, b.cell.w0, wm});
      next.push_back({um, b.cell.u1, b.cell.w0, wm});
      next.push_back({um, b.cell.u1, wm, b.cell.w1});
      next.push_back({b.cell.u0, um, wm, b.cell.w1});
    }
    cells.swap(next);
  }
  return std::clamp(inside / area, 0.0, 1.0);
}

/// Tool occupancy of the mesh at one instant.
struct CathodeField {
  std::vector<double> lambda;              // per element
  std::vector<std::size_t> inside_nodes;   // strictly inside the tool
  std::optional<std::size_t> pinned_node;  // deepest inside node (method A)
};

inline CathodeField compute_cathode_field(const CathodeAssembly& a, const Mesh& mesh,
                                          double tol = 1e-3) {
  CathodeField f;
  f.lambda.resize(mesh.element_count());
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    f.lambda[e] = cathode_ratio(a, mesh, e, a.time, tol);
  }
  double deepest = 0.0;
  for (std::size_t n = 0; n < mesh.node_count(); ++n) {
    const double phi = level(a, mesh.nodes[n], a.time);
    if (phi < 0.0) {
      f.inside_nodes.push_back(n);
      if (phi < deepest) {
        deepest = phi;
        f.pinned_node = n;
      }
    }
  }
  return f;
}

/// Electrolyte/cathode mixture on every element the tool touches; `base`
/// holds the values without the tool (electrolyte, or the anode mixture).
inline EffectiveParams apply_cathode_mixture(const CathodeField& field, const MaterialSet& mat,
                                             EffectiveParams base, MixtureRule rule) {
  for (std::size_t e = 0; e < field.lambda.size(); ++e) {
    const double lam = field.lambda[e];
    if (lam <= 0.0) continue;
    base.k[e] = mix(rule, lam, base.k[e], mat.k_cathode);
    base.eps_r[e] = mix(rule, lam, base.eps_r[e], mat.eps_r_cathode);
  }
  return base;
}

/// Method A: near-infinite conductivity inside the tool, potential pinned at
/// a single node. `pinned` overrides the automatic choice.
inline EffectiveParams apply_method_a(const CathodeField& field, const MaterialSet& mat,
                                      const EffectiveParams& base, MixtureRule rule, double v_ca,
                                      ConstraintSet& constraints,
                                      std::optional<std::size_t> pinned = std::nullopt) {
  const auto node = pinned ? pinned : field.pinned_node;
  const bool enclosed = std::any_of(field.lambda.begin(), field.lambda.end(),
                                    [](double l) { return l >= 1.0; });
  if (!node) {
    if (enclosed) throw SetupError("cathode elements present but no node to pin the tool potential");
  } else if (!constraints.add(*node, v_ca)) {
    throw SetupError("pinned cathode node " + std::to_string(*node) +
                     " already carries a different potential");
  }
  return apply_cathode_mixture(field, mat, base, rule);
}

struct MethodBResult {
  std::size_t fixed = 0;
  bool mixture_only = false;  // tool cuts elements but covers no node
  std::vector<std::size_t> conflicts;  // inside nodes already fixed elsewhere
};

/// Method B: Dirichlet v_ca on every node strictly inside the tool.
inline MethodBResult apply_method_b(const CathodeField& field, const Mesh& mesh, double v_ca,
                                    ConstraintSet& constraints) {
  (void)mesh;
  MethodBResult r;
  for (auto n : field.inside_nodes) {
    if (constraints.add(n, v_ca)) {
      ++r.fixed;
    } else {
      r.conflicts.push_back(n);
    }
  }
  if (field.inside_nodes.empty()) {
    r.mixture_only = std::any_of(field.lambda.begin(), field.lambda.end(),
                                 [](double l) { return l > 0.0; });
  }
  return r;
}

}  // namespace ecm
