#pragma once

// Asynchronous gossip baselines on a single global Poisson clock of rate
// M * mu; each tick picks its node uniformly.
//
//   RN: node i averages with one out-neighbour j picked uniformly,
//       x_i = x_j = (x_i + x_j) / 2.
//   BR: node i broadcasts, every out-neighbour j sets
//       x_j = mix * x_j + (1 - mix) * x_i.
//
// RN runs on exact rationals, so its state sum is invariant bit for bit;
// states() holds the nearest doubles. BR runs on doubles.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "chemcons/consensus_protocol.hpp"
#include "chemcons/topology.hpp"
#include "chemcons/trajectory.hpp"

namespace chemcons {

enum class GossipAlgorithm { rn, br };

std::string to_string(GossipAlgorithm algorithm);

struct GossipParams {
  double mu = 2.0;   // ticks per node per second
  double mix = 0.5;  // BR weight kept by the receiver, in (0, 1)
  std::uint64_t seed = 0;
};

class GossipState {
 public:
  /// Throws std::invalid_argument for size mismatches, non-finite z,
  /// mu <= 0 or mix outside (0, 1).
  GossipState(NetworkGraph g, std::vector<double> z, GossipAlgorithm algorithm, GossipParams params,
              std::vector<bool> active = {});

  const NetworkGraph& graph() const { return graph_; }
  GossipAlgorithm algorithm() const { return algorithm_; }
  const GossipParams& params() const { return params_; }
  std::size_t size() const { return x_.size(); }

  const std::vector<double>& states() const { return x_; }
  /// RN only: the exact states.
  const std::vector<boost::multiprecision::cpp_rational>& exact_states() const { return exact_; }
  const std::vector<bool>& active() const { return active_; }
  const std::vector<double>& measurements() const { return z_; }

  double time() const { return time_; }
  double next_tick_time() const { return next_tick_; }
  /// Clock ticks so far, including ticks that landed on inactive nodes.
  std::uint64_t ticks() const { return ticks_; }

  /// Pairwise average with a uniformly drawn active out-neighbour. No-op for
  /// inactive nodes or nodes without active neighbours.
  void rn_tick(NodeIndex node);
  void br_tick(NodeIndex node);
  void tick(NodeIndex node);

  /// Executes the next clock tick and advances the clock.
  void step();
  /// Executes every tick at or before t and moves the clock to t.
  void advance_to(double t, const std::function<void(double)>& before_tick = {});

  /// Gossip has no measurement species, so actions act on the state:
  /// set_measurement and join overwrite x_i with the new value, leave
  /// freezes node i, and a perturbation window multiplies x_i by the factor
  /// at its start and divides by it at its end.
  void apply(const Action& action);

  TrajectorySample sample(double t) const;

 private:
  double draw_interval();
  void set_state(NodeIndex i, const boost::multiprecision::cpp_rational& value);

  NetworkGraph graph_;
  std::vector<double> z_;
  GossipAlgorithm algorithm_;
  GossipParams params_;
  std::vector<double> x_;
  std::vector<boost::multiprecision::cpp_rational> exact_;  // empty for BR
  std::vector<bool> active_;
  std::mt19937_64 rng_;
  double time_ = 0.0;
  double next_tick_ = 0.0;
  std::uint64_t ticks_ = 0;
};

/// Runs the gossip baseline to t_end with the same sampling and action
/// semantics as `simulate`.
Trajectory run_gossip(GossipState& state, const std::vector<Action>& actions, double t_end, double interval);

}  // namespace chemcons
