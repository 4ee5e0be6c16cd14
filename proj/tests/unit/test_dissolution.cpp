#include <cmath>

#include <gtest/gtest.h>

#include "ecm/dissolution.hpp"

using namespace ecm;

namespace {

DissolutionState chain_state(const Mesh& m) {
  std::vector<std::uint8_t> metal(m.element_count(), 1);
  metal[0] = 0;
  return make_dissolution_state(m, metal);
}

}  // namespace

TEST(Dissolution, FreshState) {
  const auto m = generate_structured(4, 1, 4e-4, 1e-4, 1e-4);
  const auto s = chain_state(m);
  EXPECT_EQ(s.d[0], 1.0);
  EXPECT_EQ(s.d[1], 0.0);
  EXPECT_TRUE(s.active[1]);
  EXPECT_FALSE(s.active[2]);
  EXPECT_EQ(total_dissolved_volume(s, m), 0.0);
}

TEST(Dissolution, FaradayIncrement) {
  const auto m = generate_structured(4, 1, 4e-4, 1e-4, 1e-4);
  auto s = chain_state(m);
  MaterialSet mat;
  mat.nu_dis = 1e-11;
  const std::vector<Vec2> j(4, Vec2{-1e6, 0});
  update_dissolution(s, m, mat, j, 0.1);
  EXPECT_NEAR(s.d[1], 1e-11 * 1e6 * 0.1 / 1e-4, 1e-15);
  EXPECT_NEAR(s.d[1], 0.01, 1e-15);
  EXPECT_EQ(s.d[2], 0.0);  // inactive
  EXPECT_EQ(s.d[0], 1.0);
}

TEST(Dissolution, ClampReturnsOvershoot) {
  const auto m = generate_structured(4, 1, 4e-4, 1e-4, 1e-4);
  auto s = chain_state(m);
  s.d[1] = 0.995;
  MaterialSet mat;
  const std::vector<Vec2> j(4, Vec2{1e6, 0});
  const auto up = update_dissolution(s, m, mat, j, 0.1);
  EXPECT_EQ(s.d[1], 1.0);
  EXPECT_NEAR(up.overshoot[1], 0.5e-14, 1e-24);
  ASSERT_EQ(up.dissolved.size(), 1u);
  EXPECT_EQ(up.dissolved[0], 1u);
}

TEST(Dissolution, ExtentAlongCurrent) {
  const auto sq = generate_structured(1, 1, 1e-4, 1e-4, 1e-4);
  EXPECT_NEAR(extent_along(sq, 0, {1, 0}), 1e-4, 1e-18);
  EXPECT_NEAR(extent_along(sq, 0, {0, -3}), 1e-4, 1e-18);
  // slice through the centroid normal to a diagonal is the other diagonal
  EXPECT_NEAR(extent_along(sq, 0, {1, 1}), 1e-4 / std::sqrt(2.0), 1e-18);
  const auto rect = generate_structured(1, 1, 2.0, 1.0, 1.0);
  EXPECT_NEAR(extent_along(rect, 0, {1, 0}), 2.0, 1e-15);
  EXPECT_NEAR(extent_along(rect, 0, {0, 1}), 1.0, 1e-15);
}

TEST(Activation, EqualSplitToMetalNeighbours) {
  // 3x3 metal block, element 3 (left of the centre) is electrolyte
  const auto m = generate_structured(3, 3, 3e-4, 3e-4, 1e-4);
  std::vector<std::uint8_t> metal(9, 1);
  metal[3] = 0;
  auto s = make_dissolution_state(m, metal);
  EXPECT_TRUE(s.active[4]);
  EXPECT_FALSE(s.active[1] || s.active[5] || s.active[7]);
  DissolutionUpdate up;
  up.overshoot.assign(9, 0.0);
  up.overshoot[4] = 6e-15;
  up.dissolved = {4};
  s.d[4] = 1.0;
  EXPECT_EQ(propagate_activation(s, m, up), 3u);
  for (std::size_t e : {1, 5, 7}) {
    EXPECT_TRUE(s.active[e]);
    EXPECT_NEAR(s.v_co_ledger[e], 2e-15, 1e-30);
  }
  EXPECT_EQ(s.v_co_ledger[3], 0.0);
  EXPECT_EQ(s.lost_volume, 0.0);
}

TEST(Activation, CornerWithoutMetalNeighboursLosesOvershoot) {
  const auto m = generate_structured(2, 2, 2e-4, 2e-4, 1e-4);
  std::vector<std::uint8_t> metal{1, 0, 0, 0};
  auto s = make_dissolution_state(m, metal);
  DissolutionUpdate up{{3e-15, 0, 0, 0}, {0}};
  s.d[0] = 1.0;
  EXPECT_EQ(propagate_activation(s, m, up), 0u);
  EXPECT_NEAR(s.lost_volume, 3e-15, 1e-30);
}

// Scalar front march along a chain: the first undissolved cell receives the
// increment, its excess passes on to the next cell at once.
struct ChainOracle {
  std::vector<double> d;
  std::size_t front = 1;
  void step(double inc) {
    if (front >= d.size()) return;
    double carry = inc;
    while (front < d.size()) {
      d[front] += carry;
      if (d[front] < 1.0) break;
      carry = d[front] - 1.0;
      d[front] = 1.0;
      ++front;
      if (carry <= 0.0) break;
    }
  }
};

TEST(Activation, CascadeMatchesFrontMarch) {
  const double h = 1e-4;
  const auto m = generate_structured(6, 1, 6 * h, h, h);
  auto s = chain_state(m);
  for (std::size_t e = 1; e < 6; ++e) s.d[e] = 0.8;
  ChainOracle oracle{s.d};

  MaterialSet mat;
  const double dt = 0.1, inc = 0.3;
  const std::vector<Vec2> j(6, Vec2{-inc * h / (mat.nu_dis * dt), 0});
  for (int step = 0; step < 8; ++step) {
    auto up = update_dissolution(s, m, mat, j, dt);
    propagate_activation(s, m, up);
    settle_cut_off(s, m, mat, dt);
    oracle.step(inc);
    for (std::size_t e = 0; e < 6; ++e) {
      EXPECT_NEAR(s.d[e], oracle.d[e], 1e-12) << "step " << step << " element " << e;
    }
    // dissolution proceeds strictly in adjacency order
    for (std::size_t e = 2; e < 6; ++e) {
      if (s.d[e] > 0.8) {
        EXPECT_EQ(s.d[e - 1], 1.0);
      }
    }
  }
  EXPECT_EQ(oracle.front, 6u);
}

TEST(Dissolution, VolumeOfOneDissolvedCube) {
  const auto m = generate_structured(2, 1, 2e-4, 1e-4, 1e-4);
  std::vector<std::uint8_t> metal{1, 1};
  auto s = make_dissolution_state(m, metal);
  s.d[0] = 1.0;
  EXPECT_NEAR(total_dissolved_volume(s, m), 1e-12, 1e-26);
}

TEST(Dissolution, AnodeMixture) {
  const auto m = generate_structured(3, 1, 3e-4, 1e-4, 1e-4);
  std::vector<std::uint8_t> metal{1, 1, 1};
  auto s = make_dissolution_state(m, metal);
  s.d = {0.0, 1.0, 0.9};
  const MaterialSet mat;
  const auto series = effective_anode_params(s, mat, MixtureRule::series);
  EXPECT_EQ(series.k[0], 4.625e6);
  EXPECT_EQ(series.k[1], 16.0);
  EXPECT_NEAR(series.k[2], 1.0 / (0.1 / 4.625e6 + 0.9 / 16.0), 1e-10);
  EXPECT_EQ(effective_anode_params(s, mat, MixtureRule::parallel).k[1], 16.0);
}

TEST(Dissolution, BadInput) {
  const auto m = generate_structured(2, 1, 2e-4, 1e-4, 1e-4);
  auto s = chain_state(m);
  const MaterialSet mat;
  EXPECT_THROW(update_dissolution(s, m, mat, std::vector<Vec2>(2), 0.0), InvalidArgument);
  EXPECT_THROW(update_dissolution(s, m, mat, std::vector<Vec2>(3), 0.1), InvalidArgument);
  EXPECT_THROW(make_dissolution_state(m, std::vector<std::uint8_t>(5)), InvalidArgument);
}
