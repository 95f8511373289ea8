#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "chemcons/engine.hpp"

namespace chemcons {

struct TrajectorySample {
  double t = 0.0;
  std::vector<double> state;  // per node, in measurement units
  std::vector<bool> active;

  bool operator==(const TrajectorySample&) const = default;
};

using Trajectory = std::vector<TrajectorySample>;

/// Uniform sampling grid origin + k * interval with zero-order hold between
/// events. A sample at time tau reflects everything that happened at t <= tau.
class GridSampler {
 public:
  using Probe = std::function<TrajectorySample(double t)>;

  GridSampler(double origin, double interval);

  /// Emits every grid point strictly before `t`.
  void emit_before(double t, const Probe& probe, Trajectory& out);
  /// Emits every grid point up to `t_end` and a final sample exactly at t_end.
  void finish(double t_end, const Probe& probe, Trajectory& out);

  double next_time() const;

 private:
  double origin_;
  double interval_;
  std::size_t next_index_ = 0;
};

/// Maps the engine state to one sample.
using Observer = std::function<TrajectorySample(const Engine&, double t)>;

/// Raw counts of every registered species, in engine species order.
TrajectorySample observe_counts(const Engine& engine, double t);

/// Runs the engine to t_end, sampling every `interval` seconds from the
/// current time, with a final sample exactly at t_end.
Trajectory run_until(Engine& engine, double t_end, double interval,
                     const Observer& observer = observe_counts);

}  // namespace chemcons
