#include "chemcons/trajectory.hpp"

#include <cmath>
#include <stdexcept>

namespace chemcons {

GridSampler::GridSampler(double origin, double interval) : origin_(origin), interval_(interval) {
  if (!(interval > 0.0) || !std::isfinite(interval)) {
    throw std::invalid_argument("sampling interval must be positive");
  }
}

double GridSampler::next_time() const {
  return origin_ + static_cast<double>(next_index_) * interval_;
}

void GridSampler::emit_before(double t, const Probe& probe, Trajectory& out) {
  while (next_time() < t) {
    out.push_back(probe(next_time()));
    ++next_index_;
  }
}

void GridSampler::finish(double t_end, const Probe& probe, Trajectory& out) {
  // Grid points within rounding distance of t_end collapse onto it.
  const double slack = 1e-9 * interval_;
  while (next_time() < t_end - slack) {
    out.push_back(probe(next_time()));
    ++next_index_;
  }
  out.push_back(probe(t_end));
  ++next_index_;
}

TrajectorySample observe_counts(const Engine& engine, double t) {
  TrajectorySample sample;
  sample.t = t;
  sample.state.reserve(engine.species().size());
  for (const auto& id : engine.species()) sample.state.push_back(static_cast<double>(engine.count(id)));
  sample.active.assign(sample.state.size(), true);
  return sample;
}

Trajectory run_until(Engine& engine, double t_end, double interval, const Observer& observer) {
  if (!(t_end > engine.time())) throw std::invalid_argument("t_end must lie after the current engine time");
  GridSampler grid(engine.time(), interval);
  Trajectory out;
  const auto probe = [&](double t) { return observer(engine, t); };
  engine.advance_to(t_end, [&](double next) { grid.emit_before(next, probe, out); });
  grid.finish(t_end, probe, out);
  return out;
}

}  // namespace chemcons
