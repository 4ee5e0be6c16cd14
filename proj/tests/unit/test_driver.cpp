#include <cmath>

#include <gtest/gtest.h>

#include "ecm/presets.hpp"

using namespace ecm;

namespace {

ScenarioConfig small_planar(std::size_t steps = 20) {
  PlanarOptions o;
  o.density = 10;
  o.steps = steps;
  o.dt = 0.5;
  return planar_config(o);
}

}  // namespace

TEST(EquilibriumGap, AnalyticValues) {
  EXPECT_NEAR(equilibrium_gap(1e-11, 16, 20, 1e-5), 3.2e-4, 3.2e-4 * 1e-12);
  EXPECT_NEAR(equilibrium_gap(1e-11, 16, 20, 1.5e-5), 3.2e-4 / 1.5, 3.2e-4 * 1e-12);
  EXPECT_NEAR(equilibrium_gap(1e-11, 16, 40, 1e-5), 2 * equilibrium_gap(1e-11, 16, 20, 1e-5), 1e-18);
  EXPECT_THROW(equilibrium_gap(1e-11, 16, 20, 0), InvalidArgument);
}

TEST(Presets, DefaultParameters) {
  EXPECT_EQ(preset("planar").dv, 20.0);
  EXPECT_EQ(preset("wire").method, Method::B);
  const auto p = preset("parabolic");
  EXPECT_EQ(p.symmetry, "x=0");
  EXPECT_EQ(p.mesh.domain.lo.x, -2e-3);
  EXPECT_EQ(p.mesh.domain.hi.x, 0.0);
  EXPECT_NEAR(p.cathode.feed * p.dt, 5e-6, 1e-9);
  EXPECT_EQ(p.steps, 500u);
  EXPECT_NEAR(preset("blade").end_time(), 580.0, 1e-12);
  EXPECT_THROW(preset("turbine"), InvalidArgument);
  for (const auto& n : preset_names()) EXPECT_NO_THROW(preset(n).validate());
}

TEST(Probes, FreshPlanarGap) {
  const Simulation sim(small_planar());
  ASSERT_TRUE(sim.gap().has_value());
  EXPECT_NEAR(*sim.gap(), 0.32e-3, 0.5 * 0.1e-3);
}

TEST(Probes, UndissolvedKerfIsZero) {
  const auto m = generate_structured(4, 4, 4e-4, 4e-4, 1e-4);
  const auto s = make_dissolution_state(m, std::vector<std::uint8_t>(16, 1));
  EXPECT_EQ(measure_kerf_width(s, m, 2e-4, 2e-4), 0.0);
  EXPECT_THROW(measure_kerf_width(s, m, 9e-4, 2e-4), MeasurementError);
}

TEST(Probes, KerfSumsDissolvedHeight) {
  const auto m = generate_structured(1, 5, 1e-4, 5e-4, 1e-4);
  auto s = make_dissolution_state(m, std::vector<std::uint8_t>(5, 1));
  s.d = {0.0, 0.5, 1.0, 1.0, 0.25};
  EXPECT_NEAR(measure_kerf_width(s, m, 0.5e-4, 2.5e-4), (0.5 + 1 + 1 + 0.25) * 1e-4, 1e-18);
}

TEST(Simulation, NoDrivingForceNoDissolution) {
  auto cfg = small_planar(10);
  cfg.dv = 0.0;
  cfg.cathode.feed = 0.0;
  Simulation sim(cfg);
  const auto before = sim.dissolution().d;
  sim.run();
  EXPECT_EQ(sim.dissolution().d, before);
  EXPECT_EQ(sim.dissolved_volume(), 0.0);
}

TEST(Simulation, SeriesInvariants) {
  Simulation sim(small_planar(30));
  const auto& ts = sim.run();
  ASSERT_EQ(ts.records.size(), 30u);
  EXPECT_NO_THROW(ts.validate());
  EXPECT_GT(ts.records.back().v_dis, 0.0);
  EXPECT_NEAR(ts.records.back().t, 15.0, 1e-12);
  EXPECT_THROW(sim.step(), InvalidArgument);
}

TEST(Simulation, Deterministic) {
  auto strip = [](TimeSeries ts) {
    for (auto& r : ts.records) r.step_wall_s = 0;
    return ts;
  };
  const auto a = strip(run(small_planar()));
  const auto b = strip(run(small_planar()));
  EXPECT_EQ(a, b);
}

TEST(Simulation, MethodsAgree) {
  auto cfg = small_planar(30);
  cfg.method = Method::A;
  const auto a = run(cfg);
  cfg.method = Method::B;
  const auto b = run(cfg);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_NEAR(a.records[i].v_dis, b.records[i].v_dis, 1e-3 * b.records[i].v_dis);
  }
}

TEST(Simulation, PlanarRecessionMatchesFeed) {
  // started at the equilibrium gap the front keeps pace with the tool
  auto cfg = small_planar(120);
  Simulation sim(cfg);
  sim.run();
  const double expected = cfg.cathode.feed * sim.time() * 1e-3 * cfg.mesh.thickness;
  EXPECT_NEAR(sim.dissolved_volume() / expected, 1.0, 5e-3);
  EXPECT_NEAR(*sim.gap(), 0.32e-3, 0.1e-3);
}

TEST(Simulation, InvalidConfig) {
  auto cfg = small_planar();
  cfg.dt = -1;
  EXPECT_THROW(Simulation{cfg}, InvalidArgument);
  cfg = small_planar();
  cfg.anodes.clear();
  EXPECT_THROW(Simulation{cfg}, InvalidArgument);
  cfg = small_planar();
  cfg.transient_factor = 3;
  EXPECT_THROW(Simulation{cfg}, InvalidArgument);
}

TEST(TimeSeries, ValidateRejectsShrinkingVolume) {
  TimeSeries ts;
  ts.records.push_back({1.0, 2e-12, {}, {}, 0, 0});
  ts.records.push_back({2.0, 1e-12, {}, {}, 0, 0});
  EXPECT_THROW(ts.validate(), InvalidArgument);
  ts.records[1] = {1.0, 3e-12, {}, {}, 0, 0};
  EXPECT_THROW(ts.validate(), InvalidArgument);
}
