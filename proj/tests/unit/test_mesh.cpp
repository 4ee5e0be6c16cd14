#include <cmath>

#include <gtest/gtest.h>

#include "ecm/mesh.hpp"

using namespace ecm;

TEST(Mesh, StructuredTenByTen) {
  const auto m = generate_structured(10, 10, 1e-3, 1e-3, 1e-4);
  EXPECT_EQ(m.element_count(), 100u);
  EXPECT_EQ(m.node_count(), 121u);
  for (std::size_t e = 0; e < m.element_count(); ++e) {
    const auto c = m.coords(e);
    EXPECT_NEAR(c[1].x - c[0].x, 1e-4, 1e-18);
    EXPECT_NEAR(c[3].y - c[0].y, 1e-4, 1e-18);
  }
  EXPECT_NO_THROW(validate(m));
}

TEST(Mesh, SingleUnitElement) {
  const auto m = generate_structured(1, 1, 1, 1, 1);
  EXPECT_EQ(m.element_count(), 1u);
  EXPECT_EQ(m.node_count(), 4u);
  EXPECT_DOUBLE_EQ(element_volume(m, 0), 1.0);
  for (auto nb : m.face_adjacency[0]) EXPECT_EQ(nb, npos);
}

TEST(Mesh, TwoElementsAreNeighbours) {
  const auto m = generate_structured(2, 1, 1, 1, 1);
  const auto& a = m.face_adjacency[0];
  const auto& b = m.face_adjacency[1];
  EXPECT_NE(std::find(a.begin(), a.end(), 1u), a.end());
  EXPECT_NE(std::find(b.begin(), b.end(), 0u), b.end());
}

TEST(Mesh, AdjacencyRebuildMatchesTensorAdjacency) {
  auto m = generate_structured(4, 3, 1, 1, 1);
  const auto expected = m.face_adjacency;
  build_adjacency(m);
  EXPECT_EQ(m.face_adjacency, expected);
}

TEST(Mesh, ElementVolumes) {
  const auto m = generate_structured(10, 10, 1e-3, 1e-3, 1e-4);
  EXPECT_NEAR(element_volume(m, 17), 1e-12, 1e-26);

  Mesh t;
  t.nodes = {{0, 0}, {2, 0}, {1.5, 1}, {0, 1}};
  t.elements = {{0, 1, 2, 3}};
  t.thickness = 1;
  build_adjacency(t);
  EXPECT_DOUBLE_EQ(element_volume(t, 0), 1.75);
  EXPECT_THROW(element_volume(t, 1), InvalidArgument);
}

TEST(Mesh, InvertedElementRejected) {
  Mesh t;
  t.nodes = {{0, 0}, {0, 1}, {1, 1}, {1, 0}};
  t.elements = {{0, 1, 2, 3}};
  t.thickness = 1;
  build_adjacency(t);
  EXPECT_THROW(validate(t), InvalidArgument);
}

TEST(Mesh, BadArguments) {
  EXPECT_THROW(generate_structured(0, 3, 1, 1, 1), InvalidArgument);
  EXPECT_THROW(generate_structured(2, 2, 1, 1, 0), InvalidArgument);
  EXPECT_THROW(generate_graded(0.5, 10, Axis::y, 1, 1, 1), InvalidArgument);
  EXPECT_THROW(make_tensor_mesh({0, 1, 1}, {0, 1}, 1), InvalidArgument);
}

// Row count of a graded mesh from marching rows of local size 1/density(s)
// through an exponential density profile.
static std::size_t marched_rows(double d0, double d1, double length_mm) {
  std::size_t rows = 0;
  double s = 0;
  while (s < length_mm - 1e-12) {
    const double rho = d0 * std::pow(d1 / d0, s / length_mm);
    s += 1.0 / rho;
    ++rows;
  }
  return rows;
}

TEST(Mesh, GradedTenToEighty) {
  const auto m = generate_graded(10, 80, Axis::y, 1e-3, 1e-3, 1e-4);
  ASSERT_TRUE(m.grid.has_value());
  const auto& ys = m.grid->ys;
  const std::size_t rows = ys.size() - 1;
  const std::size_t oracle = marched_rows(10, 80, 1.0);
  EXPECT_LE(std::abs(static_cast<long>(rows) - static_cast<long>(oracle)), 1);
  EXPECT_EQ(m.grid->nx(), 80u);
  // coarse at the bottom, fine at the top
  EXPECT_GT(ys[1] - ys[0], 5 * (ys[rows] - ys[rows - 1]));
  for (std::size_t k = 1; k < rows; ++k) {
    EXPECT_LE(ys[k + 1] - ys[k], (ys[k] - ys[k - 1]) * (1 + 1e-9));
  }
  EXPECT_NEAR(ys.back(), 1e-3, 1e-18);
  EXPECT_NO_THROW(validate(m));
}

TEST(Mesh, GradedEqualDensitiesIsStructured) {
  const auto g = generate_graded(80, 80, Axis::y, 1e-3, 1e-3, 1e-4);
  const auto s = generate_structured(80, 80, 1e-3, 1e-3, 1e-4);
  ASSERT_EQ(g.node_count(), s.node_count());
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    EXPECT_NEAR(g.nodes[n].x, s.nodes[n].x, 1e-18);
    EXPECT_NEAR(g.nodes[n].y, s.nodes[n].y, 1e-18);
  }
}

TEST(Mesh, GradedAlongX) {
  const auto m = generate_graded(80, 20, Axis::x, 1e-3, 1e-3, 1e-4);
  const auto& xs = m.grid->xs;
  EXPECT_LT(xs[1] - xs[0], xs.back() - xs[xs.size() - 2]);
  EXPECT_EQ(m.grid->ny(), 80u);
}

TEST(Mesh, CellLookup) {
  const std::vector<double> c{0, 1, 2, 4};
  EXPECT_EQ(Grid::cell_of(c, 0.5), 0u);
  EXPECT_EQ(Grid::cell_of(c, 3.0), 2u);
  EXPECT_EQ(Grid::cell_of(c, 4.0), 2u);
  EXPECT_FALSE(Grid::cell_of(c, 4.5).has_value());
}
