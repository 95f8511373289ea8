#pragma once

// Consensus chemistries over a network graph and the scenario events that
// act on them.
//
// Basic variant, per node i with out-neighbours N_i:
//   B: S_i -> sum_j S_j            (k = 1)
//   D: S_i -> 0                    (k = |N_i| - 1, omitted when |N_i| = 1)
// Full variant:
//   B': S_i -> sum_j S_j + S_i     (k = 1)
//   D'': S_i + Y_i -> Y_i          (k = 1/lambda)
//   X:  X_i -> sum_j Y_j + X_i     (k = 1, X_i clamped at lambda)
//   Y:  Y_i -> 0                   (k = 1)
//   Z:  Z_i -> S_i + Z_i           (k = delta, Z_i clamped at the measurement)
//   A:  S_i -> 0                   (k = delta)
// With delta = 0 the Z and A reactions are omitted.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "chemcons/engine.hpp"
#include "chemcons/topology.hpp"
#include "chemcons/trajectory.hpp"

namespace chemcons {

enum class Variant { basic, full };

std::string to_string(Variant variant);

struct ProtocolParams {
  Count scale = 100;  // molecules per measurement unit
  double lambda = 100.0;
  double delta = 0.1;
  Variant variant = Variant::basic;
  ChannelParams channel;
  std::uint64_t seed = 0;  // channel randomness only
  /// Full variant: start Y_i at its steady state lambda * (active in-degree)
  /// instead of zero, at build time and when a node joins.
  bool warm_start = false;
};

struct Chemistry {
  std::vector<Reaction> reactions;
  MultisetState initial;
};

/// Throws ConfigError(infeasible_topology) for unbalanced or disconnected
/// graphs and std::invalid_argument for bad measurements or parameters.
Chemistry build_basic(const NetworkGraph& g, const std::vector<double>& z, const ProtocolParams& params);
Chemistry build_full(const NetworkGraph& g, const std::vector<double>& z, const ProtocolParams& params,
                     const std::vector<bool>& active = {});
Chemistry build_chemistry(const NetworkGraph& g, const std::vector<double>& z, const ProtocolParams& params,
                          const std::vector<bool>& active = {});

Count to_molecules(double value, Count scale);

enum class EventKind { set_measurement, node_leave, node_join, transient_error };

std::string to_string(EventKind kind);
EventKind parse_event_kind(const std::string& name);

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::set_measurement;
  NodeIndex node = 0;
  double value = 0.0;     // new measurement, or relative error
  double duration = 0.0;  // transient_error only
};

using EventSchedule = std::vector<Event>;

/// Times non-decreasing and finite, nodes in range, durations positive.
/// Throws ConfigError(schema).
void validate_schedule(const EventSchedule& events, std::size_t nodes);

/// Primitive state changes a schedule expands into.
enum class ActionKind { set_measurement, leave, join, perturb_begin, perturb_end };

struct Action {
  double time = 0.0;
  ActionKind kind = ActionKind::set_measurement;
  NodeIndex node = 0;
  double value = 0.0;  // measurement, or the perturbation factor 1 + error
};

/// Splits each transient error into begin and end actions. The result is
/// ordered by time; equal times keep schedule order with window ends first.
std::vector<Action> expand(const EventSchedule& events);

/// One engine running a consensus chemistry, plus the measurement
/// bookkeeping the events need.
class ConsensusNetwork {
 public:
  ConsensusNetwork(NetworkGraph g, std::vector<double> z, ProtocolParams params,
                   std::vector<bool> active = {});

  Engine& engine() { return *engine_; }
  const Engine& engine() const { return *engine_; }
  const NetworkGraph& graph() const { return graph_; }
  const ProtocolParams& params() const { return params_; }
  const std::vector<Reaction>& chemistry() const { return chemistry_; }

  std::size_t size() const { return graph_.size(); }
  /// c_S / scale.
  double state(NodeIndex i) const;
  std::vector<double> states() const;
  const std::vector<bool>& active() const { return active_; }
  /// Nominal measurements, unaffected by transient errors.
  const std::vector<double>& measurements() const { return z_; }

  /// c_Y / lambda. Full variant only.
  double neighbor_estimate(NodeIndex i) const;

  /// Applies an action at the current engine time.
  void apply(const Action& action);

  TrajectorySample sample(double t) const;

 private:
  void set_measurement(NodeIndex i, double value);
  void refresh_z_clamp(NodeIndex i);
  void set_node_reactions(NodeIndex i, bool enabled);

  NetworkGraph graph_;
  std::vector<double> z_;
  ProtocolParams params_;
  std::vector<bool> active_;
  std::vector<double> perturbation_;
  std::vector<Reaction> chemistry_;
  std::vector<std::vector<std::size_t>> node_reactions_;  // engine indices
  std::unique_ptr<Engine> engine_;
};

/// Runs the network to t_end, applying each action when the clock reaches
/// it. A sample at time tau reflects every reaction and action at t <= tau.
/// Actions after t_end are ignored.
Trajectory simulate(ConsensusNetwork& net, const std::vector<Action>& actions, double t_end, double interval);

}  // namespace chemcons
