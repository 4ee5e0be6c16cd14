#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ecm/error.hpp"
#include "ecm/geometry.hpp"

namespace ecm {

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

using Quad = std::array<std::size_t, 4>;

enum class Axis { x, y };

/// Coordinates of a tensor-product mesh. Element (i, j) has id j*nx + i and
/// node (i, j) has id j*(nx+1) + i.
struct Grid {
  std::vector<double> xs;
  std::vector<double> ys;

  std::size_t nx() const { return xs.size() - 1; }
  std::size_t ny() const { return ys.size() - 1; }
  std::size_t element(std::size_t i, std::size_t j) const { return j * nx() + i; }
  std::size_t node(std::size_t i, std::size_t j) const { return j * (nx() + 1) + i; }

  /// Cell index along one axis containing `c`; values on an interior line go
  /// to the upper cell, the last line to the last cell.
  static std::optional<std::size_t> cell_of(const std::vector<double>& coords, double c) {
    if (c < coords.front() || c > coords.back()) return std::nullopt;
    auto it = std::upper_bound(coords.begin(), coords.end(), c);
    std::size_t idx = static_cast<std::size_t>(it - coords.begin());
    if (idx == 0) return 0;
    return std::min(idx - 1, coords.size() - 2);
  }
};

/// Fixed quadrilateral mesh with uniform out-of-plane thickness.
struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<Quad> elements;  // counter-clockwise
  double thickness = 1.0;
  // Neighbour across local edge k (nodes k -> k+1), npos on the boundary.
  std::vector<Quad> face_adjacency;
  std::map<std::string, std::vector<std::size_t>> boundary_tags;
  std::optional<Grid> grid;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t element_count() const { return elements.size(); }

  std::array<Vec2, 4> coords(std::size_t e) const {
    const auto& q = elements[e];
    return {nodes[q[0]], nodes[q[1]], nodes[q[2]], nodes[q[3]]};
  }

  const std::vector<std::size_t>& tag(const std::string& name) const {
    auto it = boundary_tags.find(name);
    if (it == boundary_tags.end()) throw InvalidArgument("unknown boundary tag '" + name + "'");
    return it->second;
  }
};

inline double element_area(const Mesh& mesh, std::size_t e) {
  const auto c = mesh.coords(e);
  return signed_area(c);
}

/// Quad area (shoelace) times thickness.
inline double element_volume(const Mesh& mesh, std::size_t e) {
  if (e >= mesh.element_count()) throw InvalidArgument("element id out of range");
  return element_area(mesh, e) * mesh.thickness;
}

inline Vec2 element_centroid(const Mesh& mesh, std::size_t e) {
  const auto c = mesh.coords(e);
  return 0.25 * (c[0] + c[1] + c[2] + c[3]);
}

/// Fills face_adjacency by matching shared edges.
inline void build_adjacency(Mesh& mesh) {
  std::map<std::pair<std::size_t, std::size_t>, std::pair<std::size_t, int>> open;
  mesh.face_adjacency.assign(mesh.element_count(), Quad{npos, npos, npos, npos});
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    for (int k = 0; k < 4; ++k) {
      std::size_t a = mesh.elements[e][k], b = mesh.elements[e][(k + 1) % 4];
      auto key = std::minmax(a, b);
      auto it = open.find(key);
      if (it == open.end()) {
        open.emplace(key, std::make_pair(e, k));
      } else {
        auto [other, ok] = it->second;
        mesh.face_adjacency[e][k] = other;
        mesh.face_adjacency[other][ok] = e;
        open.erase(it);
      }
    }
  }
}

/// Checks the structural invariants; throws InvalidArgument on violation.
inline void validate(const Mesh& mesh) {
  if (!(mesh.thickness > 0)) throw InvalidArgument("thickness must be positive");
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    for (auto n : mesh.elements[e]) {
      if (n >= mesh.node_count()) throw InvalidArgument("element references missing node");
    }
    if (!(element_area(mesh, e) > 0)) {
      throw InvalidArgument("element " + std::to_string(e) + " is inverted or degenerate");
    }
  }
  if (mesh.face_adjacency.size() != mesh.element_count()) {
    throw InvalidArgument("face adjacency not built");
  }
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    for (auto nb : mesh.face_adjacency[e]) {
      if (nb == npos) continue;
      const auto& back = mesh.face_adjacency[nb];
      if (std::find(back.begin(), back.end(), e) == back.end()) {
        throw InvalidArgument("face adjacency is not symmetric");
      }
    }
  }
  for (const auto& [name, ids] : mesh.boundary_tags) {
    for (auto n : ids) {
      if (n >= mesh.node_count()) throw InvalidArgument("tag '" + name + "' has invalid node");
    }
  }
}

/// Tensor-product mesh from strictly increasing coordinate lines.
inline Mesh make_tensor_mesh(std::vector<double> xs, std::vector<double> ys, double thickness) {
  auto increasing = [](const std::vector<double>& v) {
    if (v.size() < 2) return false;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (!(v[i] > v[i - 1])) return false;
    }
    return true;
  };
  if (!increasing(xs) || !increasing(ys)) {
    throw InvalidArgument("coordinate lines must be strictly increasing with >= 2 entries");
  }
  if (!(thickness > 0)) throw InvalidArgument("thickness must be positive");

  Mesh mesh;
  mesh.thickness = thickness;
  Grid grid{std::move(xs), std::move(ys)};
  const std::size_t nx = grid.nx(), ny = grid.ny();
  mesh.nodes.reserve((nx + 1) * (ny + 1));
  for (std::size_t j = 0; j <= ny; ++j) {
    for (std::size_t i = 0; i <= nx; ++i) mesh.nodes.push_back({grid.xs[i], grid.ys[j]});
  }
  mesh.elements.reserve(nx * ny);
  mesh.face_adjacency.reserve(nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      mesh.elements.push_back({grid.node(i, j), grid.node(i + 1, j), grid.node(i + 1, j + 1),
                               grid.node(i, j + 1)});
      // edges: bottom, right, top, left
      mesh.face_adjacency.push_back({j > 0 ? grid.element(i, j - 1) : npos,
                                     i + 1 < nx ? grid.element(i + 1, j) : npos,
                                     j + 1 < ny ? grid.element(i, j + 1) : npos,
                                     i > 0 ? grid.element(i - 1, j) : npos});
    }
  }
  auto& left = mesh.boundary_tags["left"];
  auto& right = mesh.boundary_tags["right"];
  for (std::size_t j = 0; j <= ny; ++j) {
    left.push_back(grid.node(0, j));
    right.push_back(grid.node(nx, j));
  }
  auto& bottom = mesh.boundary_tags["bottom"];
  auto& top = mesh.boundary_tags["top"];
  for (std::size_t i = 0; i <= nx; ++i) {
    bottom.push_back(grid.node(i, 0));
    top.push_back(grid.node(i, ny));
  }
  mesh.grid = std::move(grid);
  return mesh;
}

/// n+1 equally spaced coordinates on [lo, hi].
inline std::vector<double> uniform_coords(double lo, double hi, std::size_t n) {
  std::vector<double> c(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    c[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
  }
  c.back() = hi;
  return c;
}

/// Number of cells for a geometric grading between two densities (elements
/// per mm) over `length` metres: the integral of an exponential density
/// profile, rounded. Equal densities give length * density.
inline std::size_t graded_cell_count(double density_start, double density_end, double length) {
  const double mm = length * 1e3;
  double n = 0.0;
  if (std::abs(density_start - density_end) <= 1e-12 * std::max(density_start, density_end)) {
    n = mm * density_start;
  } else {
    n = mm * (density_end - density_start) / std::log(density_end / density_start);
  }
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(n)));
}

/// Coordinates whose cell sizes form a geometric progression from
/// 1/density_start at `lo` to 1/density_end at `hi` (densities in el/mm).
inline std::vector<double> graded_coords(double lo, double hi, double density_start,
                                         double density_end) {
  if (!(density_start > 0 && density_end > 0)) throw InvalidArgument("densities must be positive");
  if (!(hi > lo)) throw InvalidArgument("empty interval");
  const std::size_t n = graded_cell_count(density_start, density_end, hi - lo);
  if (std::abs(density_start - density_end) <= 1e-12 * std::max(density_start, density_end) ||
      n == 1) {
    return uniform_coords(lo, hi, n);
  }
  const double ratio = std::pow(density_start / density_end, 1.0 / static_cast<double>(n - 1));
  std::vector<double> sizes(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sizes[k] = std::pow(ratio, static_cast<double>(k));
    total += sizes[k];
  }
  std::vector<double> c(n + 1);
  c[0] = lo;
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    acc += sizes[k];
    c[k + 1] = lo + (hi - lo) * acc / total;
  }
  c.back() = hi;
  return c;
}

/// nx * ny uniform quads on [origin, origin + (width, height)].
inline Mesh generate_structured(std::size_t nx, std::size_t ny, double width, double height,
                                double thickness, Vec2 origin = {}) {
  if (nx < 1 || ny < 1) throw InvalidArgument("nx and ny must be >= 1");
  if (!(width > 0 && height > 0 && thickness > 0)) {
    throw InvalidArgument("mesh dimensions must be positive");
  }
  return make_tensor_mesh(uniform_coords(origin.x, origin.x + width, nx),
                          uniform_coords(origin.y, origin.y + height, ny), thickness);
}

/// Mesh graded along `axis` from `density_start` el/mm at the low coordinate
/// to `density_end` el/mm at the high one; the other axis is uniform at the
/// finer of the two densities.
inline Mesh generate_graded(double density_start, double density_end, Axis axis, double width,
                            double height, double thickness, Vec2 origin = {}) {
  if (!(density_start >= 1 && density_end >= 1)) {
    throw InvalidArgument("densities must be >= 1 el/mm");
  }
  if (!(width > 0 && height > 0 && thickness > 0)) {
    throw InvalidArgument("mesh dimensions must be positive");
  }
  const double fine = std::max(density_start, density_end);
  auto uniform = [&](double lo, double len) {
    return uniform_coords(lo, lo + len, graded_cell_count(fine, fine, len));
  };
  if (axis == Axis::y) {
    return make_tensor_mesh(uniform(origin.x, width),
                            graded_coords(origin.y, origin.y + height, density_start, density_end),
                            thickness);
  }
  return make_tensor_mesh(graded_coords(origin.x, origin.x + width, density_start, density_end),
                          uniform(origin.y, height), thickness);
}

/// Debug listing: "id x y" per node then "id n0 n1 n2 n3" per element.
inline void write_mesh_listing(const Mesh& mesh, std::ostream& os) {
  os.precision(17);
  for (std::size_t n = 0; n < mesh.node_count(); ++n) {
    os << n << ' ' << mesh.nodes[n].x << ' ' << mesh.nodes[n].y << '\n';
  }
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto& q = mesh.elements[e];
    os << e << ' ' << q[0] << ' ' << q[1] << ' ' << q[2] << ' ' << q[3] << '\n';
  }
}

/// Elements sharing each node.
inline std::vector<std::vector<std::size_t>> node_elements(const Mesh& mesh) {
  std::vector<std::vector<std::size_t>> out(mesh.node_count());
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    for (auto n : mesh.elements[e]) out[n].push_back(e);
  }
  return out;
}

}  // namespace ecm
