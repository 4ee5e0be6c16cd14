#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ecm/field.hpp"
#include "ecm/materials.hpp"
#include "ecm/mesh.hpp"
#include "ecm/mixture.hpp"

namespace ecm {

/// Per-element dissolution level and activation front.
struct DissolutionState {
  std::vector<double> d;                      // 0 = metal, 1 = electrolyte
  std::vector<std::uint8_t> active;           // activation function per element
  std::vector<double> v_co_ledger;            // carried cut-off volume, m^3
  std::vector<std::uint8_t> initially_metal;  // anode elements
  double lost_volume = 0.0;                   // cut-off volume with nowhere to go
  double faraday_volume = 0.0;                // sum of all raw Faraday increments

  std::size_t size() const { return d.size(); }
};

/// Fresh state: metal elements at d = 0, gap elements at d = 1, and metal
/// elements sharing a face with electrolyte active.
inline DissolutionState make_dissolution_state(const Mesh& mesh,
                                               std::span<const std::uint8_t> metal) {
  if (metal.size() != mesh.element_count()) throw InvalidArgument("metal flag count mismatch");
  DissolutionState s;
  const std::size_t n = mesh.element_count();
  s.initially_metal.assign(metal.begin(), metal.end());
  s.d.assign(n, 0.0);
  s.active.assign(n, 0);
  s.v_co_ledger.assign(n, 0.0);
  for (std::size_t e = 0; e < n; ++e) {
    if (!metal[e]) {
      s.d[e] = 1.0;
      continue;
    }
    for (auto nb : mesh.face_adjacency[e]) {
      if (nb != npos && !metal[nb]) s.active[e] = 1;
    }
  }
  return s;
}

/// Length of the element along `dir`: volume over the cross-section through
/// the centroid normal to `dir`.
inline double extent_along(const Mesh& mesh, std::size_t e, Vec2 dir) {
  const double len = norm(dir);
  if (!(len > 0)) return 0.0;
  const Vec2 u{dir.x / len, dir.y / len};
  const Vec2 perp{-u.y, u.x};
  const auto c = mesh.coords(e);
  const Vec2 o = element_centroid(mesh, e);
  // chord through the centroid along perp, clipped by the (convex) quad
  double lo = -std::numeric_limits<double>::infinity(), hi = -lo;
  for (int a = 0; a < 4; ++a) {
    const Vec2 p = c[a], q = c[(a + 1) % 4];
    const Vec2 edge = q - p;
    const Vec2 n{edge.y, -edge.x};  // outward for counter-clockwise nodes
    const double den = dot(n, perp), num = dot(n, p - o);
    if (den > 0) hi = std::min(hi, num / den);
    else if (den < 0) lo = std::max(lo, num / den);
  }
  return element_area(mesh, e) / (hi - lo);
}

struct DissolutionUpdate {
  std::vector<double> overshoot;        // clipped volume per element, m^3
  std::vector<std::size_t> dissolved;   // elements that reached d = 1 in this update
};

/// Faraday increment for every active, not yet dissolved metal element plus
/// any carried cut-off volume; d is clamped to 1 and the excess returned.
inline DissolutionUpdate update_dissolution(DissolutionState& state, const Mesh& mesh,
                                            const MaterialSet& mat, std::span<const Vec2> j,
                                            double dt) {
  if (!(dt > 0)) throw InvalidArgument("dt must be positive");
  if (j.size() != state.size()) throw InvalidArgument("current field size mismatch");
  DissolutionUpdate out;
  out.overshoot.assign(state.size(), 0.0);
  for (std::size_t e = 0; e < state.size(); ++e) {
    if (!state.initially_metal[e] || !state.active[e]) continue;
    const double vol = element_volume(mesh, e);
    if (state.d[e] >= 1.0) {
      // nothing left to dissolve; pass carried volume on
      if (state.v_co_ledger[e] > 0) {
        out.overshoot[e] = state.v_co_ledger[e];
        state.v_co_ledger[e] = 0.0;
        out.dissolved.push_back(e);
      }
      continue;
    }
    double delta = 0.0;
    const double jn = norm(j[e]);
    if (jn > 0) {
      const double h = extent_along(mesh, e, j[e]);
      const double inc = mat.nu_dis * jn * dt / h;
      delta += inc;
      state.faraday_volume += inc * vol;
    }
    if (state.v_co_ledger[e] > 0) {
      delta += state.v_co_ledger[e] / vol;
      state.v_co_ledger[e] = 0.0;
    }
    if (delta <= 0) continue;
    const double raw = state.d[e] + delta;
    if (raw >= 1.0) {
      state.d[e] = 1.0;
      out.overshoot[e] = (raw - 1.0) * vol;
      out.dissolved.push_back(e);
    } else {
      state.d[e] = raw;
    }
  }
  return out;
}

/// Activates the metal face-neighbours of every element dissolved in
/// `update` and splits its overshoot equally into their ledgers. Overshoot
/// with no receiving neighbour is added to the lost-volume counter.
/// Returns the number of newly activated elements.
inline std::size_t propagate_activation(DissolutionState& state, const Mesh& mesh,
                                        const DissolutionUpdate& update) {
  std::size_t activated = 0;
  for (auto e : update.dissolved) {
    std::size_t receivers[4];
    std::size_t count = 0;
    for (auto nb : mesh.face_adjacency[e]) {
      if (nb != npos && state.initially_metal[nb] && state.d[nb] < 1.0) receivers[count++] = nb;
    }
    for (std::size_t i = 0; i < count; ++i) {
      if (!state.active[receivers[i]]) {
        state.active[receivers[i]] = 1;
        ++activated;
      }
    }
    const double over = update.overshoot[e];
    if (over <= 0) continue;
    if (count == 0) {
      state.lost_volume += over;
    } else {
      for (std::size_t i = 0; i < count; ++i) state.v_co_ledger[receivers[i]] += over / count;
    }
  }
  return activated;
}

/// Applies carried cut-off volume immediately, cascading through further
/// activations until every ledger is empty.
inline void settle_cut_off(DissolutionState& state, const Mesh& mesh, const MaterialSet& mat,
                           double dt) {
  const std::vector<Vec2> none(state.size());
  for (int guard = 0; guard < 1000000; ++guard) {
    const bool pending = std::any_of(state.v_co_ledger.begin(), state.v_co_ledger.end(),
                                     [](double v) { return v > 0; });
    if (!pending) return;
    auto up = update_dissolution(state, mesh, mat, none, dt);
    propagate_activation(state, mesh, up);
  }
}

/// Sum of d * V over the anode elements.
inline double total_dissolved_volume(const DissolutionState& state, const Mesh& mesh) {
  double v = 0.0;
  for (std::size_t e = 0; e < state.size(); ++e) {
    if (state.initially_metal[e]) v += state.d[e] * element_volume(mesh, e);
  }
  return v;
}

/// Metal/electrolyte mixture for anode elements; gap elements get the
/// electrolyte values.
inline EffectiveParams effective_anode_params(const DissolutionState& state,
                                              const MaterialSet& mat, MixtureRule rule) {
  EffectiveParams p(state.size(), mat.k_electrolyte, mat.eps_r_electrolyte);
  for (std::size_t e = 0; e < state.size(); ++e) {
    if (!state.initially_metal[e]) continue;
    p.k[e] = mix(rule, state.d[e], mat.k_metal, mat.k_electrolyte);
    p.eps_r[e] = mix(rule, state.d[e], mat.eps_r_metal, mat.eps_r_electrolyte);
  }
  return p;
}

}  // namespace ecm
