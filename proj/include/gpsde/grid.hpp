#pragma once
// Uniform time grid on [0, horizon].

#include "gpsde/common.hpp"

namespace gpsde {

struct TimeGrid {
  double horizon = 1.0;  // T > 0
  int n_steps = 0;       // >= 2, so the grid has interior nodes

  void validate() const {
    require(horizon > 0.0, "grid.horizon must be > 0");
    require(n_steps >= 2, "grid.n_steps must be >= 2");
  }

  double step() const { return horizon / n_steps; }
  int n_nodes() const { return n_steps + 1; }
  // node(0) = 0 and node(n_steps) = horizon exactly
  double node(int i) const { return horizon * static_cast<double>(i) / n_steps; }

  bool operator==(const TimeGrid&) const = default;
};

}  // namespace gpsde
