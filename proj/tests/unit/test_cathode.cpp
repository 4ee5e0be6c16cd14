#include <cmath>

#include <gtest/gtest.h>

#include "ecm/cathode.hpp"
#include "ecm/presets.hpp"

using namespace ecm;
using K = PrimitiveKind;

namespace {

CathodeAssembly single(const Primitive& p, double feed = 0.0) {
  CathodeAssembly a;
  a.subsets = {{p}};
  a.feed = feed;
  return a;
}

Primitive half_plane_right_of(double x0) {
  return make_primitive(K::half_plane, 0, 0, {x0, 0}, {-1, 0});
}

}  // namespace

TEST(Membership, UnionOfIntersectionsDiffersFromFlatIntersection) {
  const auto a = make_primitive(K::half_plane, 0, 0, {0, 0}, {});
  const auto b = make_primitive(K::circle, 1, 0, {0.5, 0}, {});
  const auto c = make_primitive(K::circle, 1, 0, {5, 0}, {});
  const auto d = make_primitive(K::half_plane, 0, 0, {4, 0}, {});
  CathodeAssembly two_level;
  two_level.subsets = {{a, b}, {c, d}};
  CathodeAssembly flat;
  flat.subsets = {{a, b, c, d}};
  const Vec2 witness{0.5, 0};
  EXPECT_TRUE(contains(two_level, witness));
  EXPECT_FALSE(contains(flat, witness));
  EXPECT_TRUE(contains(two_level, {5.5, 0}));
  EXPECT_FALSE(contains(two_level, {2.5, 0}));
}

TEST(Membership, EmptyAssembly) {
  const CathodeAssembly a;
  for (double x : {-1.0, 0.0, 3.0}) EXPECT_FALSE(contains(a, {x, x}));
}

TEST(Membership, PrimitiveShapes) {
  EXPECT_TRUE(contains(single(make_primitive(K::circle, 1, 0, {2, 2}, {})), {2.5, 2.5}));
  EXPECT_FALSE(contains(single(make_primitive(K::circle, 1, 0, {2, 2}, {})), {3.1, 2}));
  // ellipse with the long axis rotated onto y
  const auto e = single(make_primitive(K::ellipse, 3, 1, {0, 0}, {}, true, M_PI / 2));
  EXPECT_TRUE(contains(e, {0, 2.5}));
  EXPECT_FALSE(contains(e, {2.5, 0}));
  // parabola y >= 0.5 x^2 opening upward, and its complement
  const auto p = make_primitive(K::parabola, 0.5, 0, {0, 0}, {});
  EXPECT_TRUE(contains(single(p), {1, 0.6}));
  EXPECT_FALSE(contains(single(p), {1, 0.4}));
  auto q = p;
  q.inside = false;
  EXPECT_TRUE(contains(single(q), {1, 0.4}));
  // wedge of half-angle 30 deg along +x
  const auto w = single(make_primitive(K::wedge, M_PI / 6, 0, {0, 0}, {}));
  EXPECT_TRUE(contains(w, {1, 0.5}));
  EXPECT_FALSE(contains(w, {1, 0.6}));
  EXPECT_FALSE(contains(w, {-1, 0}));
}

TEST(Membership, FeedMovesBoundaryAtPredictedTime) {
  const double x0 = 1e-3, feed = 1e-5;
  auto a = single(half_plane_right_of(x0), feed);
  const Vec2 p{x0 - 2e-4, 0};
  const double t_cross = 2e-4 / feed;
  EXPECT_FALSE(contains(a, p, t_cross * (1 - 1e-9)));
  EXPECT_TRUE(contains(a, p, t_cross * (1 + 1e-9)));
}

TEST(Advance, DisplacementPerStep) {
  auto a = single(make_primitive(K::circle, 1e-4, 0, {0, 0}, {-1, 0}), 1e-5);
  a = advance(a, 0.34483);
  const Vec2 centre = a.subsets[0][0].position + (a.feed * a.time) * a.subsets[0][0].direction;
  EXPECT_NEAR(centre.x, -3.4483e-6, 1e-18);
  EXPECT_NEAR(centre.y, 0.0, 1e-18);
}

TEST(Advance, ZeroIsIdentityAndStepsCompose) {
  const auto a = single(make_primitive(K::ellipse, 2e-4, 1e-4, {1e-4, 0}, {0.6, -0.8}, true, 0.3), 1e-5);
  EXPECT_EQ(advance(a, 0.0), a);
  const auto two = advance(advance(a, 1.25), 2.5);
  const auto one = advance(a, 3.75);
  for (double x = -5e-4; x <= 5e-4; x += 1.7e-5) {
    for (double y = -5e-4; y <= 5e-4; y += 2.3e-5) EXPECT_EQ(contains(two, {x, y}), contains(one, {x, y}));
  }
  EXPECT_THROW(advance(a, -1.0), InvalidArgument);
}

TEST(CathodeRatio, InsideOutsideAndBisected) {
  const auto m = generate_structured(4, 1, 4e-4, 1e-4, 1e-4);
  const auto a = single(half_plane_right_of(2.5e-4));
  EXPECT_EQ(cathode_ratio(a, m, 0, 0.0), 0.0);
  EXPECT_EQ(cathode_ratio(a, m, 3, 0.0), 1.0);
  EXPECT_NEAR(cathode_ratio(a, m, 2, 0.0), 0.5, 1e-3);
  EXPECT_THROW(cathode_ratio(a, m, 2, 0.0, 0.0), InvalidArgument);
  EXPECT_THROW(cathode_ratio(a, m, 2, 0.0, 0.5), InvalidArgument);
}

TEST(CathodeRatio, CircleAreaFraction) {
  const double h = 1e-4;
  const auto m = generate_structured(1, 1, h, h, h);
  const auto a = single(make_primitive(K::circle, 0.3 * h, 0, {0.5 * h, 0.5 * h}, {}));
  EXPECT_NEAR(cathode_ratio(a, m, 0, 0.0, 1e-3), M_PI * 0.09, 1e-3);
}

TEST(CathodeRatio, MonotoneUnderApproach) {
  const auto m = generate_structured(1, 1, 1e-4, 1e-4, 1e-4);
  const auto a = single(make_primitive(K::half_plane, 0, 0, {1.5e-4, 0}, {-1, 0}, true, 0.2), 1e-5);
  double prev = 0.0;
  for (double t = 0; t <= 25; t += 0.5) {
    const double l = cathode_ratio(a, m, 0, t);
    EXPECT_GE(l, prev - 1e-3);
    prev = std::max(prev, l);
  }
  EXPECT_EQ(prev, 1.0);
}

TEST(MethodA, ConductivityOverride) {
  const auto m = generate_structured(4, 1, 4e-4, 1e-4, 1e-4);
  const auto field = compute_cathode_field(single(half_plane_right_of(2.5e-4)), m);
  const MaterialSet mat;
  ConstraintSet c;
  const EffectiveParams base(4, mat.k_electrolyte, mat.eps_r_electrolyte);
  const auto p = apply_method_a(field, mat, base, MixtureRule::parallel, 0.0, c);
  EXPECT_EQ(p.k[0], 16.0);
  EXPECT_EQ(p.k[3], 1e12);
  EXPECT_NEAR(p.k[2], 0.5 * 16 + 0.5 * 1e12, 1e12 * 1e-3);
  ASSERT_EQ(c.fixed.size(), 1u);
  EXPECT_EQ(m.nodes[c.fixed[0].first].x, 4e-4);  // deepest node: on the far edge
  const auto s = apply_method_a(field, mat, base, MixtureRule::series, 0.0, c);
  EXPECT_EQ(s.k[3], 1e12);
}

TEST(MethodA, FloatingCathodeRejected) {
  CathodeField f;
  f.lambda = {1.0, 0.0};
  const MaterialSet mat;
  ConstraintSet c;
  EXPECT_THROW(apply_method_a(f, mat, EffectiveParams(2, 16, 80), MixtureRule::series, 0.0, c), SetupError);
  f.pinned_node = 3;
  c.add(3, 20.0);
  EXPECT_THROW(apply_method_a(f, mat, EffectiveParams(2, 16, 80), MixtureRule::series, 0.0, c), SetupError);
}

TEST(MethodB, PlanarStripFixed) {
  const auto m = generate_structured(10, 10, 1.0, 1.0, 1.0);
  const auto field = compute_cathode_field(single(half_plane_right_of(0.7)), m);
  ConstraintSet c;
  const auto r = apply_method_b(field, m, 0.0, c);
  // strictly inside: the three node columns right of x = 0.7
  EXPECT_EQ(r.fixed, 33u);
  for (const auto& [n, v] : c.fixed) {
    EXPECT_GT(m.nodes[n].x, 0.7);
    EXPECT_EQ(v, 0.0);
  }
  EXPECT_EQ(renumber(c, m.node_count()).equation_count, 121u - 33u);
}

TEST(MethodB, WireFixesOnlyDiscNodes) {
  const double um = 1e-6;
  const auto m = generate_structured(40, 40, 100 * um, 100 * um, 100 * um);
  const auto tool = single(make_primitive(K::circle, 15 * um, 0, {50 * um, 50 * um}, {}));
  const auto field = compute_cathode_field(tool, m);
  ConstraintSet c;
  apply_method_b(field, m, 0.0, c);
  std::size_t brute = 0;
  for (const auto& p : m.nodes) brute += norm(p - Vec2{50 * um, 50 * um}) < 15 * um;
  EXPECT_EQ(c.fixed.size(), brute);
  EXPECT_GT(brute, 0u);
  for (const auto& [n, v] : c.fixed) EXPECT_LT(norm(m.nodes[n] - Vec2{50 * um, 50 * um}), 15 * um);
}

TEST(MethodB, ThinToolIsMixtureOnly) {
  const auto m = generate_structured(4, 4, 1.0, 1.0, 1.0);
  const auto field = compute_cathode_field(single(make_primitive(K::circle, 0.1, 0, {0.375, 0.375}, {})), m);
  ConstraintSet c;
  const auto r = apply_method_b(field, m, 0.0, c);
  EXPECT_EQ(r.fixed, 0u);
  EXPECT_TRUE(r.mixture_only);
}

TEST(MethodB, ConflictsReported) {
  const auto m = generate_structured(2, 1, 1.0, 1.0, 1.0);
  const auto field = compute_cathode_field(single(half_plane_right_of(0.25)), m);
  ConstraintSet c;
  c.add(2, 20.0);
  const auto r = apply_method_b(field, m, 0.0, c);
  ASSERT_EQ(r.conflicts.size(), 1u);
  EXPECT_EQ(r.conflicts[0], 2u);
}

TEST(Primitive, Validation) {
  EXPECT_THROW(make_primitive(K::circle, 0, 0, {}, {}).validate(), InvalidArgument);
  EXPECT_THROW(make_primitive(K::ellipse, 1, -1, {}, {}).validate(), InvalidArgument);
  EXPECT_THROW(make_primitive(K::wedge, 2.0, 0, {}, {}).validate(), InvalidArgument);
  EXPECT_EQ(parse_primitive_kind("half-plane"), K::half_plane);
  EXPECT_THROW(parse_primitive_kind("cone"), InvalidArgument);
}
