#pragma once

#include <string>
#include <string_view>

#include "ecm/error.hpp"

namespace ecm {

/// Rule of mixture between two phases sharing one element.
enum class MixtureRule { parallel, series };

/// Volume average: (1-w) a + w b.
constexpr double mix_parallel(double w, double a, double b) {
  return (1.0 - w) * a + w * b;
}

/// Harmonic average: [(1-w)/a + w/b]^-1.
constexpr double mix_series(double w, double a, double b) {
  if (w <= 0.0) return a;
  if (w >= 1.0) return b;
  return 1.0 / ((1.0 - w) / a + w / b);
}

constexpr double mix(MixtureRule rule, double w, double a, double b) {
  return rule == MixtureRule::parallel ? mix_parallel(w, a, b) : mix_series(w, a, b);
}

inline std::string_view to_string(MixtureRule r) {
  return r == MixtureRule::parallel ? "parallel" : "series";
}

inline MixtureRule parse_mixture_rule(std::string_view s) {
  if (s == "parallel") return MixtureRule::parallel;
  if (s == "series") return MixtureRule::series;
  throw InvalidArgument("unknown mixture rule '" + std::string(s) + "'");
}

}  // namespace ecm
