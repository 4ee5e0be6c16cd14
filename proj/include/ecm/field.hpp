#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <chrono>
#include <limits>
#include <cmath>
#include <cstddef>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ecm/error.hpp"
#include "ecm/geometry.hpp"
#include "ecm/mesh.hpp"

namespace ecm {

/// Per-element conductivity and relative permittivity entering the constitutive law.
struct EffectiveParams {
  std::vector<double> k;
  std::vector<double> eps_r;

  EffectiveParams() = default;
  EffectiveParams(std::size_t n, double k0, double eps0) : k(n, k0), eps_r(n, eps0) {}
  std::size_t size() const { return k.size(); }
};

/// Nodal potentials of the current and previous time step.
struct FieldState {
  std::vector<double> v;
  std::vector<double> v_prev;
  double dt = 1.0;

  static FieldState zeros(std::size_t nodes, double dt) {
    return {std::vector<double>(nodes, 0.0), std::vector<double>(nodes, 0.0), dt};
  }
};

/// Dirichlet data plus the equation numbering of the remaining nodes.
struct ConstraintSet {
  std::vector<std::pair<std::size_t, double>> fixed;  // (node, potential)
  std::vector<std::ptrdiff_t> equation;               // node -> equation, -1 if fixed
  std::size_t equation_count = 0;

  /// Adds a Dirichlet value. Returns false (and leaves the set unchanged) when
  /// the node is already fixed to a different value.
  bool add(std::size_t node, double value) {
    if (const auto* f = find(node)) return f->second == value;
    index_[node] = fixed.size();
    fixed.emplace_back(node, value);
    return true;
  }

  bool contains(std::size_t node) const { return find(node) != nullptr; }

  /// Fixed entry of `node`, or nullptr.
  const std::pair<std::size_t, double>* find(std::size_t node) const {
    if (index_.size() != fixed.size()) reindex();
    auto it = index_.find(node);
    if (it != index_.end() && it->second < fixed.size() && fixed[it->second].first == node) {
      return &fixed[it->second];
    }
    if (it == index_.end()) return nullptr;
    reindex();
    it = index_.find(node);
    return it == index_.end() ? nullptr : &fixed[it->second];
  }

 private:
  // `fixed` is public and may be reordered (renumber sorts it); the index is
  // rebuilt whenever its size or a hit disagrees with it.
  void reindex() const {
    index_.clear();
    for (std::size_t i = 0; i < fixed.size(); ++i) index_.emplace(fixed[i].first, i);
  }
  mutable std::unordered_map<std::size_t, std::size_t> index_;
};

/// Contiguous numbering of the unfixed nodes in ascending node id.
inline ConstraintSet renumber(ConstraintSet c, std::size_t node_count) {
  std::vector<char> is_fixed(node_count, 0);
  for (const auto& [n, v] : c.fixed) {
    if (n >= node_count) throw InvalidArgument("constraint on missing node");
    if (is_fixed[n]) throw InvalidArgument("node " + std::to_string(n) + " constrained twice");
    is_fixed[n] = 1;
  }
  std::sort(c.fixed.begin(), c.fixed.end());
  c.equation.assign(node_count, -1);
  std::ptrdiff_t next = 0;
  for (std::size_t n = 0; n < node_count; ++n) {
    if (!is_fixed[n]) c.equation[n] = next++;
  }
  c.equation_count = static_cast<std::size_t>(next);
  return c;
}

// ---------------------------------------------------------------------------
// Bilinear quadrilateral

struct ShapeGradients {
  std::array<Vec2, 4> grad;  // physical gradients of N_a
  double det = 0.0;          // Jacobian determinant
};

inline ShapeGradients shape_gradients(const std::array<Vec2, 4>& c, double xi, double eta) {
  static constexpr std::array<double, 4> xs{-1, 1, 1, -1};
  static constexpr std::array<double, 4> es{-1, -1, 1, 1};
  std::array<Vec2, 4> dn;  // (dN/dxi, dN/deta)
  for (int a = 0; a < 4; ++a) {
    dn[a] = {0.25 * xs[a] * (1 + es[a] * eta), 0.25 * es[a] * (1 + xs[a] * xi)};
  }
  double j11 = 0, j12 = 0, j21 = 0, j22 = 0;
  for (int a = 0; a < 4; ++a) {
    j11 += c[a].x * dn[a].x;
    j12 += c[a].x * dn[a].y;
    j21 += c[a].y * dn[a].x;
    j22 += c[a].y * dn[a].y;
  }
  ShapeGradients out;
  out.det = j11 * j22 - j12 * j21;
  if (out.det == 0.0) return out;
  const double inv = 1.0 / out.det;
  for (int a = 0; a < 4; ++a) {
    // grad N = J^{-T} (dN/dxi, dN/deta)
    out.grad[a] = {inv * (j22 * dn[a].x - j21 * dn[a].y), inv * (-j12 * dn[a].x + j11 * dn[a].y)};
  }
  return out;
}

/// Integral of grad N grad N^T over the element (2x2 Gauss), times thickness.
inline Eigen::Matrix4d laplace_stiffness(const std::array<Vec2, 4>& c, double thickness,
                                         std::size_t element = npos) {
  static const double g = 1.0 / std::sqrt(3.0);
  Eigen::Matrix4d k = Eigen::Matrix4d::Zero();
  for (double xi : {-g, g}) {
    for (double eta : {-g, g}) {
      const auto sg = shape_gradients(c, xi, eta);
      if (!(sg.det > 0)) throw SingularElement(element, sg.det);
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) k(a, b) += dot(sg.grad[a], sg.grad[b]) * sg.det;
      }
    }
  }
  return k * thickness;
}

struct ElementSystem {
  Eigen::Matrix4d matrix;
  Eigen::Vector4d rhs;
};

/// Backward-Euler element contribution of the charge balance: conduction plus
/// the displacement-current term weighted by `transient_factor`.
inline ElementSystem element_system(const std::array<Vec2, 4>& coords, double k_eff,
                                    double eps_r_eff, double eps0, double dt,
                                    const std::array<double, 4>& v_prev_elem,
                                    double thickness = 1.0, double transient_factor = 2.0) {
  if (!(dt > 0)) throw InvalidArgument("dt must be positive");
  const Eigen::Matrix4d kg = laplace_stiffness(coords, thickness);
  const double cap = transient_factor * eps0 * eps_r_eff / dt;
  const Eigen::Vector4d vp(v_prev_elem[0], v_prev_elem[1], v_prev_elem[2], v_prev_elem[3]);
  return {(k_eff + cap) * kg, cap * (kg * vp)};
}

struct SolveOptions {
  double eps0 = 8.854e-12;
  double transient_factor = 2.0;
  double tolerance = 1e-10;
  // try the previous factorization as a CG preconditioner before refactorizing
  bool reuse_factorization = true;
  double reuse_tolerance = 1e-13;
};

struct SolveReport {
  double relative_residual = 0.0;
  std::size_t equations = 0;
  int refinements = 0;
  bool reanalyzed = false;
  bool reused_factorization = false;
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;
};

/// Reusable assembler/solver for one mesh. Keeps the reduced sparsity pattern
/// and the symbolic factorization while the equation numbering is unchanged.
class FieldSolver {
 public:
  explicit FieldSolver(const Mesh& mesh) {
    kgeo_.reserve(mesh.element_count());
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
      kgeo_.push_back(laplace_stiffness(mesh.coords(e), mesh.thickness, e));
    }
  }

  /// Solves for the potential of the step described by `state` (v_prev, dt).
  /// `constraints` must be renumbered for this mesh.
  FieldState solve(const Mesh& mesh, const EffectiveParams& params,
                   const ConstraintSet& constraints, const FieldState& state,
                   const SolveOptions& opt = {}) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    check_inputs(mesh, params, constraints, state);
    report_ = {};
    report_.equations = constraints.equation_count;

    if (constraints.equation != equation_) rebuild_pattern(mesh, constraints);

    FieldState out = state;
    for (const auto& [n, val] : constraints.fixed) out.v[n] = val;

    std::fill(matrix_.valuePtr(), matrix_.valuePtr() + matrix_.nonZeros(), 0.0);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(constraints.equation_count));
    double* values = matrix_.valuePtr();
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
      const auto& q = mesh.elements[e];
      const auto& eq = constraints.equation;
      if (eq[q[0]] < 0 && eq[q[1]] < 0 && eq[q[2]] < 0 && eq[q[3]] < 0) continue;
      const double cap = opt.transient_factor * opt.eps0 * params.eps_r[e] / state.dt;
      const double cond = params.k[e] + cap;
      const Eigen::Matrix4d& kg = kgeo_[e];
      const auto& slot = slots_[e];
      for (int a = 0; a < 4; ++a) {
        const std::ptrdiff_t row = eq[q[a]];
        if (row < 0) continue;
        double r = 0.0;
        for (int b = 0; b < 4; ++b) {
          const double kab = kg(a, b);
          r += cap * kab * state.v_prev[q[b]];
          if (eq[q[b]] < 0) {
            r -= cond * kab * out.v[q[b]];
          } else {
            values[slot[4 * a + b]] += cond * kab;
          }
        }
        rhs[row] += r;
      }
    }
    const auto t1 = clock::now();

    if (constraints.equation_count > 0) {
      const double bnorm = rhs.norm();
      auto rel_of = [&](const Eigen::VectorXd& r) { return bnorm > 0 ? r.norm() / bnorm : r.norm(); };
      Eigen::VectorXd x;
      bool done = false;
      if (factorized_ && opt.reuse_factorization) {
        done = preconditioned_cg(rhs, x, opt.tolerance, opt.reuse_tolerance, rel_of);
        report_.reused_factorization = done;
      }
      if (!done) {
        if (!analyzed_) {
          solver_.analyzePattern(matrix_);
          analyzed_ = true;
          report_.reanalyzed = true;
        }
        solver_.factorize(matrix_);
        factorized_ = solver_.info() == Eigen::Success;
        if (!factorized_) {
          throw NumericalError("factorization failed (singular system)",
                               std::numeric_limits<double>::infinity());
        }
        x = solver_.solve(rhs);
        Eigen::VectorXd r = rhs - matrix_ * x;
        double rel = rel_of(r);
        report_.refinements = 0;
        while (rel > opt.tolerance && report_.refinements < 4) {
          x += solver_.solve(r);
          r = rhs - matrix_ * x;
          rel = rel_of(r);
          ++report_.refinements;
        }
        report_.relative_residual = rel;
      }
      const double rel = report_.relative_residual;
      if (!std::isfinite(rel) || rel > opt.tolerance) {
        throw NumericalError("linear solve did not converge", rel);
      }
      for (std::size_t n = 0; n < mesh.node_count(); ++n) {
        const auto row = constraints.equation[n];
        if (row >= 0) out.v[n] = x[row];
      }
    }
    const auto t2 = clock::now();
    report_.assembly_seconds = std::chrono::duration<double>(t1 - t0).count();
    report_.solve_seconds = std::chrono::duration<double>(t2 - t1).count();
    return out;
  }

  const SolveReport& report() const { return report_; }
  const Eigen::Matrix4d& geometric_stiffness(std::size_t e) const { return kgeo_[e]; }

 private:
  /// Conjugate gradients on the current matrix preconditioned with the last
  /// factorization. Gives up after a few iterations so that a drifted
  /// preconditioner triggers a fresh factorization instead.
  template <class Rel>
  bool preconditioned_cg(const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol,
                         double potential_tol, Rel rel_of) {
    constexpr int max_iterations = 6;
    const Eigen::VectorXd inv_diag = matrix_.diagonal().cwiseInverse();
    // Jacobi-scaled residual: estimated nodal potential error relative to max |v|
    auto accurate = [&](const Eigen::VectorXd& r, const Eigen::VectorXd& xv, double rel) {
      const double scale = xv.cwiseAbs().maxCoeff();
      return rel <= tol && (r.cwiseProduct(inv_diag)).cwiseAbs().maxCoeff() <= potential_tol * scale;
    };
    x = solver_.solve(b);
    Eigen::VectorXd r = b - matrix_ * x;
    double rel = rel_of(r);
    int it = 0;
    if (!accurate(r, x, rel)) {
      Eigen::VectorXd z = solver_.solve(r);
      Eigen::VectorXd p = z;
      double rz = r.dot(z);
      for (; it < max_iterations; ++it) {
        const Eigen::VectorXd ap = matrix_ * p;
        const double pap = p.dot(ap);
        if (!(pap > 0)) return false;
        const double alpha = rz / pap;
        x += alpha * p;
        r -= alpha * ap;
        rel = rel_of(r);
        if (accurate(r, x, rel)) {
          ++it;
          break;
        }
        z = solver_.solve(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
      }
      // guard against drift of the recursive residual
      r = b - matrix_ * x;
      rel = rel_of(r);
    }
    report_.refinements = it;
    report_.relative_residual = rel;
    return std::isfinite(rel) && accurate(r, x, rel);
  }

  static void check_inputs(const Mesh& mesh, const EffectiveParams& params,
                           const ConstraintSet& c, const FieldState& state) {
    if (c.fixed.empty()) throw SetupError("no Dirichlet constraints: potential is undetermined");
    if (c.equation.size() != mesh.node_count()) {
      throw InvalidArgument("constraint set not renumbered for this mesh");
    }
    if (params.k.size() != mesh.element_count() || params.eps_r.size() != mesh.element_count()) {
      throw InvalidArgument("parameter count does not match element count");
    }
    if (state.v.size() != mesh.node_count() || state.v_prev.size() != mesh.node_count()) {
      throw InvalidArgument("field state size does not match node count");
    }
    if (!(state.dt > 0)) throw InvalidArgument("dt must be positive");
  }

  void rebuild_pattern(const Mesh& mesh, const ConstraintSet& c) {
    const auto n = static_cast<Eigen::Index>(c.equation_count);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.element_count() * 16);
    for (const auto& q : mesh.elements) {
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          const auto r = c.equation[q[a]], s = c.equation[q[b]];
          if (r >= 0 && s >= 0) trip.emplace_back(r, s, 1.0);
        }
      }
    }
    matrix_ = Eigen::SparseMatrix<double>(n, n);
    matrix_.setFromTriplets(trip.begin(), trip.end());
    matrix_.makeCompressed();
    slots_.assign(mesh.element_count(), {});
    const auto* outer = matrix_.outerIndexPtr();
    const auto* inner = matrix_.innerIndexPtr();
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
      const auto& q = mesh.elements[e];
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          const auto r = c.equation[q[a]], s = c.equation[q[b]];
          if (r < 0 || s < 0) {
            slots_[e][4 * a + b] = -1;
            continue;
          }
          // column-major: column s holds rows in ascending order
          const auto* first = inner + outer[s];
          const auto* last = inner + outer[s + 1];
          const auto* it = std::lower_bound(first, last, static_cast<int>(r));
          slots_[e][4 * a + b] = static_cast<std::ptrdiff_t>(it - inner);
        }
      }
    }
    equation_ = c.equation;
    analyzed_ = false;
    factorized_ = false;
  }

  std::vector<Eigen::Matrix4d> kgeo_;
  std::vector<std::ptrdiff_t> equation_;
  Eigen::SparseMatrix<double> matrix_;
  std::vector<std::array<std::ptrdiff_t, 16>> slots_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> solver_;
  bool analyzed_ = false;
  bool factorized_ = false;
  SolveReport report_;
};

/// One-shot assembly and solve of the constrained potential problem.
inline FieldState assemble_and_solve(const Mesh& mesh, const EffectiveParams& params,
                                     const ConstraintSet& constraints, const FieldState& state,
                                     const SolveOptions& opt = {}) {
  FieldSolver solver(mesh);
  return solver.solve(mesh, params, constraints, state, opt);
}

/// Electric field -grad v at the element centroid.
inline Vec2 electric_field(const Mesh& mesh, std::span<const double> v, std::size_t e) {
  const auto sg = shape_gradients(mesh.coords(e), 0.0, 0.0);
  Vec2 grad{};
  const auto& q = mesh.elements[e];
  for (int a = 0; a < 4; ++a) grad += sg.grad[a] * v[q[a]];
  return -grad;
}

/// j = k E + eps0 eps_r dE/dt at the element centroid, dE/dt by backward difference.
inline Vec2 current_density(const Mesh& mesh, const EffectiveParams& params,
                            const FieldState& state, std::size_t e, double eps0) {
  const Vec2 field = electric_field(mesh, state.v, e);
  const Vec2 prev = electric_field(mesh, state.v_prev, e);
  return params.k[e] * field + (eps0 * params.eps_r[e] / state.dt) * (field - prev);
}

inline std::vector<Vec2> current_density_field(const Mesh& mesh, const EffectiveParams& params,
                                               const FieldState& state, double eps0) {
  std::vector<Vec2> j(mesh.element_count());
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    j[e] = current_density(mesh, params, state, e, eps0);
  }
  return j;
}

}  // namespace ecm
