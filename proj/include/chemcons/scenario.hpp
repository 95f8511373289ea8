#pragma once

// Scenario configuration, execution and run records.
//
// Config JSON:
//   topology: {kind, M, k?, edges?, rewire_p?, seed?, path?}
//   algorithm: "chemical-basic" | "chemical-full" | "rn" | "br"
//   z: [numbers] | {"uniform": [lo, hi], "seed": n} | {"indexed": "i" | "c*i"}  (i counts from 1)
//   params?: {scale?, lambda?, delta?, mu?, mix?, warm_start?}
//   channel?: {p?, latency?}
//   events?: [{time, kind, node, value?, duration?}]
//   initially_inactive?: [node]
//   seed?, duration, sample_interval?

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "chemcons/baselines.hpp"
#include "chemcons/consensus_protocol.hpp"
#include "chemcons/topology.hpp"
#include "chemcons/trajectory.hpp"

namespace chemcons {

enum class Algorithm { chemical_basic, chemical_full, rn, br };

std::string to_string(Algorithm algorithm);
/// Throws ConfigError(unknown_algorithm).
Algorithm parse_algorithm(const std::string& name);
bool is_chemical(Algorithm algorithm);

struct ScenarioConfig {
  TopologySpec topology;
  Algorithm algorithm = Algorithm::chemical_basic;
  std::vector<double> z;
  ProtocolParams protocol;  // scale, lambda, delta, channel, seed, warm_start
  GossipParams gossip;      // mu, mix, seed
  EventSchedule events;
  std::vector<bool> active;  // initial activity, all true unless configured
  double duration = 0.0;
  double sample_interval = 0.1;
  std::uint64_t seed = 0;

  /// Copies `seed` into the protocol and gossip parameters.
  void set_seed(std::uint64_t value);
};

/// Throws ConfigError(schema), ConfigError(unknown_algorithm) or
/// ConfigError(infeasible_topology).
ScenarioConfig parse_scenario(const nlohmann::json& doc);
/// Reads a JSON document; unreadable or malformed files raise ConfigError(schema).
nlohmann::json read_json_file(const std::string& path);
ScenarioConfig load_scenario(const std::string& path);
/// Fully resolved configuration; parse_scenario(to_json(c)) reproduces c.
nlohmann::json to_json(const ScenarioConfig& config);

/// Molecules per unit such that the smallest positive measurement maps to at
/// least 300 molecules.
Count default_scale(const std::vector<double>& z);

/// Per sample: mean nominal measurement of the active nodes. Transient errors
/// do not move it.
struct ReferenceSample {
  double t = 0.0;
  double z_avg = 0.0;
  std::vector<bool> active;

  bool operator==(const ReferenceSample&) const = default;
};

using ReferenceSeries = std::vector<ReferenceSample>;

/// Replays the measurement-changing actions over the trajectory's sample
/// times. z_avg is NaN while no node is active.
ReferenceSeries reference_series(const std::vector<double>& z, const std::vector<Action>& actions,
                                 const Trajectory& samples);

struct RunMetrics {
  std::vector<double> t;
  std::vector<double> nmse;
  std::vector<double> deviation;
  std::optional<double> convergence_time;
  double final_mean = 0.0;
  double threshold = 0.01;

  bool operator==(const RunMetrics&) const = default;
};

/// Samples without active nodes get NaN metrics.
RunMetrics compute_metrics(const Trajectory& samples, const ReferenceSeries& reference, double threshold = 0.01);

struct RunRecord {
  ScenarioConfig config;
  Trajectory samples;
  ReferenceSeries reference;
  RunMetrics metrics;
  std::optional<nlohmann::json> analysis;  // chemical variants
  nlohmann::json provenance;
};

NetworkGraph build_graph(const ScenarioConfig& config);

RunRecord run_scenario(const ScenarioConfig& config);

/// Mean-field trajectory of a chemical scenario, events included.
Trajectory run_oracle(const ScenarioConfig& config);

/// Analysis report of the unicast-equivalent consensus network on the
/// scenario's topology.
nlohmann::json consensus_analysis(const NetworkGraph& g);

}  // namespace chemcons
