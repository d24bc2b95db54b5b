#pragma once

#include <cstdint>

#include "sasaki/geometry.hpp"

namespace sasaki {

/// amplitude * cos(2 pi frequency x_axis). The admissibility bound for the
/// induced metric is amplitude * (pi * frequency)^2 ... < 1 on axis pairs;
/// callers validate before building.
SpatialField cosine_field(const TransverseModel& model, double amplitude, int frequency = 1,
                          int axis = 0);

/// Seeded band-limited random field: low-frequency cosine/sine modes up to
/// max_mode per axis plus a few cross-axis modes, scaled to the requested
/// amplitude and then halved until the induced metric is admissible.
/// Deterministic for a given seed.
SpatialField random_bandlimited_field(const TransverseModel& model, std::uint64_t seed,
                                      double amplitude, int max_mode = 2);

}  // namespace sasaki
