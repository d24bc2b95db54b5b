#include "sasaki/generators.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace sasaki {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

SpatialField cosine_field(const TransverseModel& model, double amplitude, int frequency,
                          int axis) {
  if (axis < 0 || axis >= model.grid.axes()) {
    throw std::invalid_argument("cosine_field: axis out of range");
  }
  if (frequency < 1) throw std::invalid_argument("cosine_field: frequency must be >= 1");
  SpatialField f(model.nodes());
  for (std::int64_t node = 0; node < model.nodes(); ++node) {
    f[node] = amplitude * std::cos(kTwoPi * frequency * model.grid.position(node, axis));
  }
  return f;
}

SpatialField random_bandlimited_field(const TransverseModel& model, std::uint64_t seed,
                                      double amplitude, int max_mode) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  SpatialField f(model.nodes());
  const int axes = model.grid.axes();
  for (int a = 0; a < axes; ++a) {
    for (int m = 1; m <= max_mode; ++m) {
      const double ca = unit(rng);
      const double sa = unit(rng);
      for (std::int64_t node = 0; node < model.nodes(); ++node) {
        const double x = model.grid.position(node, a);
        f[node] += ca * std::cos(kTwoPi * m * x) + sa * std::sin(kTwoPi * m * x);
      }
    }
  }
  for (int a = 0; a + 1 < axes; ++a) {
    const double c = unit(rng);
    for (std::int64_t node = 0; node < model.nodes(); ++node) {
      const double x = model.grid.position(node, a);
      const double y = model.grid.position(node, a + 1);
      f[node] += c * std::cos(kTwoPi * (x + y));
    }
  }

  double sup = 0.0;
  for (std::int64_t i = 0; i < f.size(); ++i) sup = std::max(sup, std::abs(f[i]));
  if (sup > 0.0) {
    const double scale = amplitude / sup;
    for (std::int64_t i = 0; i < f.size(); ++i) f[i] *= scale;
  }
  for (int tries = 0; tries < 40; ++tries) {
    if (metric_matrix(f, model).admissible) return f;
    for (std::int64_t i = 0; i < f.size(); ++i) f[i] *= 0.5;
  }
  throw std::runtime_error("random_bandlimited_field: could not reach admissibility");
}

}  // namespace sasaki
