#include "chemcons/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <random>
#include <regex>
#include <set>

#include "chemcons/crn_analysis.hpp"
#include "chemcons/error.hpp"
#include "chemcons/metrics.hpp"
#include "chemcons/ode_reference.hpp"

#ifndef CHEMCONS_VERSION
#define CHEMCONS_VERSION "unknown"
#endif

namespace chemcons {

using nlohmann::json;

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::chemical_basic:
      return "chemical-basic";
    case Algorithm::chemical_full:
      return "chemical-full";
    case Algorithm::rn:
      return "rn";
    case Algorithm::br:
      return "br";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "chemical-basic") return Algorithm::chemical_basic;
  if (name == "chemical-full") return Algorithm::chemical_full;
  if (name == "rn") return Algorithm::rn;
  if (name == "br") return Algorithm::br;
  throw ConfigError(ErrorCode::unknown_algorithm, "unknown algorithm '" + name + "'");
}

bool is_chemical(Algorithm algorithm) {
  return algorithm == Algorithm::chemical_basic || algorithm == Algorithm::chemical_full;
}

void ScenarioConfig::set_seed(std::uint64_t value) {
  seed = value;
  protocol.seed = value;
  gossip.seed = value;
}

Count default_scale(const std::vector<double>& z) {
  double smallest = std::numeric_limits<double>::infinity();
  for (double v : z) {
    if (v > 0.0) smallest = std::min(smallest, v);
  }
  if (!std::isfinite(smallest)) return 300;
  return std::max<Count>(1, static_cast<Count>(std::ceil(300.0 / smallest)));
}

namespace {

[[noreturn]] void schema_error(const std::string& what) { throw ConfigError(ErrorCode::schema, what); }

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return item.key() == a; })) {
      schema_error(where + ": unknown key '" + item.key() + "'");
    }
  }
}

const json& require(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) schema_error(where + ": missing '" + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) schema_error(where + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) schema_error(where + " must be finite");
  return x;
}

std::uint64_t unsigned_integer(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) schema_error(where + " must be a non-negative integer");
  return static_cast<std::uint64_t>(v.get<std::int64_t>());
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

json object_or_empty(const json& doc, const char* key) {
  if (!doc.contains(key)) return json::object();
  if (!doc.at(key).is_object()) schema_error(std::string(key) + " must be an object");
  return doc.at(key);
}

TopologySpec parse_topology(const json& t) {
  if (!t.is_object()) schema_error("topology must be an object");
  reject_unknown(t, "topology", {"kind", "M", "k", "edges", "rewire_p", "seed", "path"});
  TopologySpec spec;
  const json& kind = require(t, "topology", "kind");
  if (!kind.is_string()) schema_error("topology.kind must be a string");
  spec.kind = parse_topology_kind(kind.get<std::string>());
  if (spec.kind == TopologyKind::edge_list) {
    const json& path = require(t, "topology", "path");
    if (!path.is_string()) schema_error("topology.path must be a string");
    spec.path = path.get<std::string>();
  }
  if (t.contains("M")) spec.nodes = unsigned_integer(t.at("M"), "topology.M");
  if (spec.kind != TopologyKind::edge_list && spec.nodes == 0) schema_error("topology: missing 'M'");
  if (t.contains("k")) spec.k = unsigned_integer(t.at("k"), "topology.k");
  if (t.contains("edges")) spec.edges = unsigned_integer(t.at("edges"), "topology.edges");
  spec.rewire_p = number_or(t, "rewire_p", spec.rewire_p, "topology");
  if (t.contains("seed")) spec.seed = unsigned_integer(t.at("seed"), "topology.seed");
  return spec;
}

// "i", "c*i" or "i*c", with i counting from 1.
std::vector<double> indexed_measurements(const std::string& expr, std::size_t m) {
  static const std::regex form(R"(\s*(?:([0-9.eE+-]+)\s*\*\s*)?i(?:\s*\*\s*([0-9.eE+-]+))?\s*)");
  std::smatch match;
  if (!std::regex_match(expr, match, form) || (match[1].matched && match[2].matched)) {
    schema_error("z.indexed must be 'i', 'c*i' or 'i*c', got '" + expr + "'");
  }
  double factor = 1.0;
  const std::string text = match[1].matched ? match[1].str() : match[2].matched ? match[2].str() : "";
  if (!text.empty()) {
    try {
      std::size_t used = 0;
      factor = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      schema_error("z.indexed has a malformed factor '" + text + "'");
    }
  }
  std::vector<double> z(m);
  for (std::size_t i = 0; i < m; ++i) z[i] = factor * static_cast<double>(i + 1);
  return z;
}

std::vector<double> parse_measurements(const json& z, std::size_t m) {
  std::vector<double> out;
  if (z.is_array()) {
    for (std::size_t i = 0; i < z.size(); ++i) out.push_back(number(z[i], "z[" + std::to_string(i) + "]"));
  } else if (z.is_object() && z.contains("uniform")) {
    reject_unknown(z, "z", {"uniform", "seed"});
    const json& range = z.at("uniform");
    if (!range.is_array() || range.size() != 2) schema_error("z.uniform must be [lo, hi]");
    const double lo = number(range[0], "z.uniform[0]");
    const double hi = number(range[1], "z.uniform[1]");
    if (!(lo <= hi)) schema_error("z.uniform needs lo <= hi");
    std::mt19937_64 rng(z.contains("seed") ? unsigned_integer(z.at("seed"), "z.seed") : 0);
    std::uniform_real_distribution<double> draw(lo, hi);
    for (std::size_t i = 0; i < m; ++i) out.push_back(draw(rng));
  } else if (z.is_object() && z.contains("indexed")) {
    reject_unknown(z, "z", {"indexed"});
    if (!z.at("indexed").is_string()) schema_error("z.indexed must be a string");
    out = indexed_measurements(z.at("indexed").get<std::string>(), m);
  } else {
    schema_error("z must be an array, {uniform, seed} or {indexed}");
  }
  for (double v : out) {
    if (v < 0.0) schema_error("measurements must be non-negative");
  }
  return out;
}

EventSchedule parse_events(const json& events, std::size_t m) {
  if (!events.is_array()) schema_error("events must be an array");
  EventSchedule out;
  for (std::size_t k = 0; k < events.size(); ++k) {
    const std::string where = "events[" + std::to_string(k) + "]";
    const json& e = events[k];
    if (!e.is_object()) schema_error(where + " must be an object");
    reject_unknown(e, where, {"time", "kind", "node", "value", "duration"});
    Event ev;
    ev.time = number(require(e, where, "time"), where + ".time");
    const json& kind = require(e, where, "kind");
    if (!kind.is_string()) schema_error(where + ".kind must be a string");
    ev.kind = parse_event_kind(kind.get<std::string>());
    ev.node = unsigned_integer(require(e, where, "node"), where + ".node");
    if (ev.kind != EventKind::node_leave) ev.value = number(require(e, where, "value"), where + ".value");
    if (ev.kind == EventKind::transient_error) ev.duration = number(require(e, where, "duration"), where + ".duration");
    out.push_back(ev);
  }
  validate_schedule(out, m);
  return out;
}

json events_to_json(const EventSchedule& events) {
  json out = json::array();
  for (const auto& e : events) {
    json j{{"time", e.time}, {"kind", to_string(e.kind)}, {"node", e.node}};
    if (e.kind != EventKind::node_leave) j["value"] = e.value;
    if (e.kind == EventKind::transient_error) j["duration"] = e.duration;
    out.push_back(std::move(j));
  }
  return out;
}

std::size_t node_count(const TopologySpec& spec) {
  if (spec.kind != TopologyKind::edge_list) return spec.nodes;
  std::ifstream in(spec.path);
  if (!in) schema_error("cannot open edge list '" + spec.path + "'");
  return read_edge_list(in).size();
}

}  // namespace

ScenarioConfig parse_scenario(const json& doc) {
  if (!doc.is_object()) schema_error("scenario must be a JSON object");
  reject_unknown(doc, "scenario", {"topology", "algorithm", "z", "params", "channel", "events", "initially_inactive",
                                   "seed", "duration", "sample_interval"});
  ScenarioConfig c;
  c.topology = parse_topology(require(doc, "scenario", "topology"));
  const std::size_t m = node_count(c.topology);
  c.topology.nodes = m;

  const json& algorithm = require(doc, "scenario", "algorithm");
  if (!algorithm.is_string()) schema_error("algorithm must be a string");
  c.algorithm = parse_algorithm(algorithm.get<std::string>());

  c.z = parse_measurements(require(doc, "scenario", "z"), m);
  if (c.z.size() != m) {
    schema_error("z has " + std::to_string(c.z.size()) + " entries for " + std::to_string(m) + " nodes");
  }

  const json params = object_or_empty(doc, "params");
  reject_unknown(params, "params", {"scale", "lambda", "delta", "mu", "mix", "warm_start"});
  c.protocol.variant = c.algorithm == Algorithm::chemical_full ? Variant::full : Variant::basic;
  if (params.contains("scale")) {
    const auto scale = unsigned_integer(params.at("scale"), "params.scale");
    if (scale < 1) schema_error("params.scale must be at least 1");
    c.protocol.scale = static_cast<Count>(scale);
  } else {
    c.protocol.scale = default_scale(c.z);
  }
  c.protocol.lambda = number_or(params, "lambda", c.protocol.lambda, "params");
  c.protocol.delta = number_or(params, "delta", c.protocol.delta, "params");
  c.gossip.mu = number_or(params, "mu", c.gossip.mu, "params");
  c.gossip.mix = number_or(params, "mix", c.gossip.mix, "params");
  if (params.contains("warm_start")) {
    if (!params.at("warm_start").is_boolean()) schema_error("params.warm_start must be a boolean");
    c.protocol.warm_start = params.at("warm_start").get<bool>();
  }
  if (!(c.protocol.lambda >= 1.0)) schema_error("params.lambda must be at least 1");
  if (!(c.protocol.delta >= 0.0)) schema_error("params.delta must be non-negative");
  if (!(c.gossip.mu > 0.0)) schema_error("params.mu must be positive");
  if (!(c.gossip.mix > 0.0 && c.gossip.mix < 1.0)) schema_error("params.mix must lie in (0, 1)");

  const json channel = object_or_empty(doc, "channel");
  reject_unknown(channel, "channel", {"p", "latency"});
  c.protocol.channel.loss_probability = number_or(channel, "p", 0.0, "channel");
  c.protocol.channel.latency = number_or(channel, "latency", 0.0, "channel");
  if (!(c.protocol.channel.loss_probability >= 0.0 && c.protocol.channel.loss_probability <= 1.0)) {
    schema_error("channel.p must lie in [0, 1]");
  }
  if (!(c.protocol.channel.latency >= 0.0)) schema_error("channel.latency must be non-negative");

  if (doc.contains("events")) c.events = parse_events(doc.at("events"), m);

  c.active.assign(m, true);
  if (doc.contains("initially_inactive")) {
    const json& off = doc.at("initially_inactive");
    if (!off.is_array()) schema_error("initially_inactive must be an array");
    for (const auto& node : off) {
      const auto i = unsigned_integer(node, "initially_inactive[]");
      if (i >= m) schema_error("initially_inactive names node " + std::to_string(i) + " of " + std::to_string(m));
      c.active[i] = false;
    }
  }

  c.set_seed(doc.contains("seed") ? unsigned_integer(doc.at("seed"), "seed") : 0);
  c.duration = number(require(doc, "scenario", "duration"), "duration");
  if (!(c.duration > 0.0)) schema_error("duration must be positive");
  c.sample_interval = number_or(doc, "sample_interval", c.sample_interval, "scenario");
  if (!(c.sample_interval > 0.0)) schema_error("sample_interval must be positive");
  return c;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) schema_error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    schema_error(path + ": " + e.what());
  }
}

ScenarioConfig load_scenario(const std::string& path) { return parse_scenario(read_json_file(path)); }

json to_json(const ScenarioConfig& c) {
  json topology{{"kind", to_string(c.topology.kind)}, {"M", c.topology.nodes}};
  switch (c.topology.kind) {
    case TopologyKind::lattice:
      topology["k"] = c.topology.k;
      break;
    case TopologyKind::small_world:
      topology["edges"] = c.topology.edges;
      topology["rewire_p"] = c.topology.rewire_p;
      topology["seed"] = c.topology.seed;
      break;
    case TopologyKind::edge_list:
      topology["path"] = c.topology.path;
      break;
    default:
      break;
  }
  json inactive = json::array();
  for (std::size_t i = 0; i < c.active.size(); ++i) {
    if (!c.active[i]) inactive.push_back(i);
  }
  return json{{"topology", topology},
              {"algorithm", to_string(c.algorithm)},
              {"z", c.z},
              {"params",
               {{"scale", c.protocol.scale},
                {"lambda", c.protocol.lambda},
                {"delta", c.protocol.delta},
                {"mu", c.gossip.mu},
                {"mix", c.gossip.mix},
                {"warm_start", c.protocol.warm_start}}},
              {"channel", {{"p", c.protocol.channel.loss_probability}, {"latency", c.protocol.channel.latency}}},
              {"events", events_to_json(c.events)},
              {"initially_inactive", inactive},
              {"seed", c.seed},
              {"duration", c.duration},
              {"sample_interval", c.sample_interval}};
}

ReferenceSeries reference_series(const std::vector<double>& z, const std::vector<Action>& actions,
                                 const Trajectory& samples) {
  std::vector<double> nominal = z;
  ReferenceSeries out;
  out.reserve(samples.size());
  std::size_t next = 0;
  for (const auto& s : samples) {
    for (; next < actions.size() && actions[next].time <= s.t; ++next) {
      const Action& a = actions[next];
      if (a.kind == ActionKind::set_measurement || a.kind == ActionKind::join) nominal.at(a.node) = a.value;
    }
    const bool any = std::any_of(s.active.begin(), s.active.end(), [](bool a) { return a; });
    out.push_back({s.t, any ? active_mean(nominal, s.active) : std::numeric_limits<double>::quiet_NaN(), s.active});
  }
  return out;
}

RunMetrics compute_metrics(const Trajectory& samples, const ReferenceSeries& reference, double threshold) {
  if (samples.size() != reference.size()) throw std::invalid_argument("samples and reference differ in length");
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  RunMetrics m;
  m.threshold = threshold;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    const bool any = std::any_of(s.active.begin(), s.active.end(), [](bool a) { return a; });
    m.t.push_back(s.t);
    m.nmse.push_back(any ? nmse_about(s.state, reference[k].z_avg, s.active) : nan);
    m.deviation.push_back(any ? deviation(s.state, s.active) : nan);
  }
  m.convergence_time = convergence_time(m.t, m.nmse, threshold);
  if (!samples.empty()) {
    const auto& last = samples.back();
    const bool any = std::any_of(last.active.begin(), last.active.end(), [](bool a) { return a; });
    m.final_mean = any ? active_mean(last.state, last.active) : nan;
  }
  return m;
}

NetworkGraph build_graph(const ScenarioConfig& config) { return make_topology(config.topology); }

namespace {

std::string utc_timestamp() {
  std::time_t now = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

json consensus_analysis(const NetworkGraph& g) {
  ProtocolParams unit;
  unit.scale = 1;
  const auto chem = build_basic(g, std::vector<double>(g.size(), 1.0), unit);
  json report = to_json(analyze(equivalent_unicast_form(chem.reactions)));
  report["network"] = "unicast-equivalent basic consensus chemistry";
  report["algebraic_connectivity"] = algebraic_connectivity(g);
  return report;
}

RunRecord run_scenario(const ScenarioConfig& config) {
  const NetworkGraph g = build_graph(config);
  const auto actions = expand(config.events);
  RunRecord record;
  record.config = config;
  if (is_chemical(config.algorithm)) {
    ConsensusNetwork net(g, config.z, config.protocol, config.active);
    record.samples = simulate(net, actions, config.duration, config.sample_interval);
    record.analysis = consensus_analysis(g);
  } else {
    const auto algorithm = config.algorithm == Algorithm::rn ? GossipAlgorithm::rn : GossipAlgorithm::br;
    GossipState state(g, config.z, algorithm, config.gossip, config.active);
    record.samples = run_gossip(state, actions, config.duration, config.sample_interval);
  }
  record.reference = reference_series(config.z, actions, record.samples);
  record.metrics = compute_metrics(record.samples, record.reference);
  record.provenance = {{"seed", config.seed},
                       {"version", CHEMCONS_VERSION},
                       {"timestamp", utc_timestamp()},
                       {"source", is_chemical(config.algorithm) ? "agent" : "gossip"}};
  return record;
}

Trajectory run_oracle(const ScenarioConfig& config) {
  if (!is_chemical(config.algorithm)) {
    throw ConfigError(ErrorCode::invalid_argument, "the mean-field oracle covers the chemical algorithms only");
  }
  return oracle_trajectory(build_graph(config), config.z, config.protocol, config.active, expand(config.events),
                           config.duration, config.sample_interval);
}

}  // namespace chemcons
