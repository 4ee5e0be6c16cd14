#include <random>

#include <gtest/gtest.h>

#include "ecm/mixture.hpp"

using namespace ecm;

TEST(Mixture, ParallelLimitsAndMidpoint) {
  EXPECT_EQ(mix_parallel(0.0, 4.625e6, 16.0), 4.625e6);
  EXPECT_EQ(mix_parallel(1.0, 4.625e6, 16.0), 16.0);
  EXPECT_NEAR(mix_parallel(0.5, 4.625e6, 16.0), 2.312508e6, 1e-6);
}

TEST(Mixture, SeriesLimitsAndMidpoint) {
  EXPECT_EQ(mix_series(0.0, 4.625e6, 16.0), 4.625e6);
  EXPECT_EQ(mix_series(1.0, 4.625e6, 16.0), 16.0);
  const double oracle = 1.0 / (0.5 / 4.625e6 + 0.5 / 16.0);
  EXPECT_NEAR(mix_series(0.5, 4.625e6, 16.0), oracle, 1e-12 * oracle);
  EXPECT_NEAR(oracle, 31.99989, 1e-5);
}

TEST(Mixture, NearlyDissolvedSeries) {
  EXPECT_NEAR(mix(MixtureRule::series, 0.9, 4.625e6, 16.0), 17.7778, 1e-4);
}

TEST(Mixture, HarmonicBelowArithmetic) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> w(0.0, 1.0), v(1e-3, 1e7);
  for (int i = 0; i < 10000; ++i) {
    const double x = w(rng), a = v(rng), b = v(rng);
    EXPECT_LE(mix_series(x, a, b), mix_parallel(x, a, b) * (1 + 1e-14));
  }
}

TEST(Mixture, RuleNames) {
  EXPECT_EQ(parse_mixture_rule("series"), MixtureRule::series);
  EXPECT_EQ(parse_mixture_rule(to_string(MixtureRule::parallel)), MixtureRule::parallel);
  EXPECT_THROW(parse_mixture_rule("harmonic"), InvalidArgument);
}
