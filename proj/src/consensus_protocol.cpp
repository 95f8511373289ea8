#include "chemcons/consensus_protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "chemcons/error.hpp"

namespace chemcons {

namespace {

SpeciesId S(NodeIndex i) { return {i, SpeciesKind::S}; }
SpeciesId X(NodeIndex i) { return {i, SpeciesKind::X}; }
SpeciesId Y(NodeIndex i) { return {i, SpeciesKind::Y}; }
SpeciesId Z(NodeIndex i) { return {i, SpeciesKind::Z}; }

void check_inputs(const NetworkGraph& g, const std::vector<double>& z, const ProtocolParams& params) {
  if (g.size() < 2) throw ConfigError(ErrorCode::infeasible_topology, "consensus needs at least two nodes");
  if (!is_balanced(g)) throw ConfigError(ErrorCode::infeasible_topology, "graph is not balanced");
  if (!is_strongly_connected(g)) throw ConfigError(ErrorCode::infeasible_topology, "graph is not strongly connected");
  if (z.size() != g.size()) {
    throw std::invalid_argument("expected " + std::to_string(g.size()) + " measurements, got " + std::to_string(z.size()));
  }
  for (double v : z) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("measurements must be finite and non-negative");
  }
  if (params.scale < 1) throw std::invalid_argument("scale must be at least 1");
}

std::vector<bool> resolve_mask(const std::vector<bool>& active, std::size_t n) {
  if (active.empty()) return std::vector<bool>(n, true);
  if (active.size() != n) throw std::invalid_argument("activity mask size mismatch");
  return active;
}

}  // namespace

std::string to_string(Variant variant) { return variant == Variant::basic ? "basic" : "full"; }

Count to_molecules(double value, Count scale) {
  if (!std::isfinite(value) || value < 0.0) throw std::invalid_argument("measurement must be finite and non-negative");
  return static_cast<Count>(std::llround(value * static_cast<double>(scale)));
}

Chemistry build_basic(const NetworkGraph& g, const std::vector<double>& z, const ProtocolParams& params) {
  check_inputs(g, z, params);
  Chemistry chem;
  for (NodeIndex i = 0; i < g.size(); ++i) {
    chem.initial.counts[S(i)] = to_molecules(z[i], params.scale);
    Reaction broadcast{chem.reactions.size(), {{S(i), 1}}, {}, 1.0, i};
    for (NodeIndex j : g.neighbors(i)) broadcast.products.push_back({S(j), 1});
    chem.reactions.push_back(std::move(broadcast));
    if (g.out_degree(i) > 1) {
      chem.reactions.push_back(
          Reaction{chem.reactions.size(), {{S(i), 1}}, {}, static_cast<double>(g.out_degree(i) - 1), i});
    }
  }
  return chem;
}

Chemistry build_full(const NetworkGraph& g, const std::vector<double>& z, const ProtocolParams& params,
                     const std::vector<bool>& active) {
  check_inputs(g, z, params);
  if (!std::isfinite(params.lambda) || params.lambda < 1.0) throw std::invalid_argument("lambda must be at least one molecule");
  if (!std::isfinite(params.delta) || params.delta < 0.0) throw std::invalid_argument("delta must be non-negative");
  const auto mask = resolve_mask(active, g.size());

  std::vector<Count> active_in(g.size(), 0);
  for (NodeIndex i = 0; i < g.size(); ++i) {
    if (!mask[i]) continue;
    for (NodeIndex j : g.neighbors(i)) ++active_in[j];
  }

  const Count lambda_molecules = static_cast<Count>(std::llround(params.lambda));
  Chemistry chem;
  auto add = [&](std::vector<Term> reactants, std::vector<Term> products, double k, NodeIndex owner) {
    chem.reactions.push_back(Reaction{chem.reactions.size(), std::move(reactants), std::move(products), k, owner});
  };
  for (NodeIndex i = 0; i < g.size(); ++i) {
    chem.initial.counts[S(i)] = to_molecules(z[i], params.scale);
    chem.initial.counts[X(i)] = lambda_molecules;
    chem.initial.clamped.insert(X(i));
    chem.initial.counts[Y(i)] = params.warm_start && mask[i] ? lambda_molecules * active_in[i] : 0;

    std::vector<Term> spread{{S(i), 1}};
    std::vector<Term> beacons{{X(i), 1}};
    for (NodeIndex j : g.neighbors(i)) {
      spread.push_back({S(j), 1});
      beacons.push_back({Y(j), 1});
    }
    add({{S(i), 1}}, std::move(spread), 1.0, i);
    add({{S(i), 1}, {Y(i), 1}}, {{Y(i), 1}}, 1.0 / params.lambda, i);
    add({{X(i), 1}}, std::move(beacons), 1.0, i);
    add({{Y(i), 1}}, {}, 1.0, i);
    if (params.delta > 0.0) {
      chem.initial.counts[Z(i)] = to_molecules(z[i], params.scale);
      chem.initial.clamped.insert(Z(i));
      add({{Z(i), 1}}, {{S(i), 1}, {Z(i), 1}}, params.delta, i);
      add({{S(i), 1}}, {}, params.delta, i);
    }
  }
  return chem;
}

Chemistry build_chemistry(const NetworkGraph& g, const std::vector<double>& z, const ProtocolParams& params,
                          const std::vector<bool>& active) {
  return params.variant == Variant::basic ? build_basic(g, z, params) : build_full(g, z, params, active);
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::set_measurement:
      return "set_measurement";
    case EventKind::node_leave:
      return "node_leave";
    case EventKind::node_join:
      return "node_join";
    case EventKind::transient_error:
      return "transient_error";
  }
  return "unknown";
}

EventKind parse_event_kind(const std::string& name) {
  if (name == "set_measurement") return EventKind::set_measurement;
  if (name == "node_leave") return EventKind::node_leave;
  if (name == "node_join") return EventKind::node_join;
  if (name == "transient_error") return EventKind::transient_error;
  throw ConfigError(ErrorCode::schema, "unknown event kind '" + name + "'");
}

void validate_schedule(const EventSchedule& events, std::size_t nodes) {
  double last = 0.0;
  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto& e = events[k];
    const std::string where = "event " + std::to_string(k) + ": ";
    if (!std::isfinite(e.time) || e.time < 0.0) throw ConfigError(ErrorCode::schema, where + "time must be finite and non-negative");
    if (e.time < last) throw ConfigError(ErrorCode::schema, where + "event times must be non-decreasing");
    last = e.time;
    if (e.node >= nodes) throw ConfigError(ErrorCode::schema, where + "node " + std::to_string(e.node) + " out of range");
    if (!std::isfinite(e.value)) throw ConfigError(ErrorCode::schema, where + "value must be finite");
    switch (e.kind) {
      case EventKind::set_measurement:
      case EventKind::node_join:
        if (e.value < 0.0) throw ConfigError(ErrorCode::schema, where + "measurement must be non-negative");
        break;
      case EventKind::transient_error:
        if (!(e.duration > 0.0) || !std::isfinite(e.duration)) {
          throw ConfigError(ErrorCode::schema, where + "transient_error needs a positive duration");
        }
        if (e.value <= -1.0) throw ConfigError(ErrorCode::schema, where + "relative error must exceed -1");
        break;
      case EventKind::node_leave:
        break;
    }
  }
}

std::vector<Action> expand(const EventSchedule& events) {
  std::vector<Action> out;
  for (const auto& e : events) {
    switch (e.kind) {
      case EventKind::set_measurement:
        out.push_back({e.time, ActionKind::set_measurement, e.node, e.value});
        break;
      case EventKind::node_leave:
        out.push_back({e.time, ActionKind::leave, e.node, 0.0});
        break;
      case EventKind::node_join:
        out.push_back({e.time, ActionKind::join, e.node, e.value});
        break;
      case EventKind::transient_error:
        out.push_back({e.time, ActionKind::perturb_begin, e.node, 1.0 + e.value});
        out.push_back({e.time + e.duration, ActionKind::perturb_end, e.node, 1.0 + e.value});
        break;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Action& a, const Action& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.kind == ActionKind::perturb_end && b.kind != ActionKind::perturb_end;
  });
  return out;
}

ConsensusNetwork::ConsensusNetwork(NetworkGraph g, std::vector<double> z, ProtocolParams params,
                                   std::vector<bool> active)
    : graph_(std::move(g)), z_(std::move(z)), params_(params), active_(resolve_mask(active, graph_.size())),
      perturbation_(graph_.size(), 1.0) {
  auto chem = build_chemistry(graph_, z_, params_, active_);
  chemistry_ = chem.reactions;
  node_reactions_.assign(graph_.size(), {});
  for (std::size_t r = 0; r < chemistry_.size(); ++r) node_reactions_[chemistry_[r].owner].push_back(r);
  engine_ = std::make_unique<Engine>(std::move(chem.reactions), chem.initial, params_.channel, params_.seed);
  for (NodeIndex i = 0; i < graph_.size(); ++i) {
    if (!active_[i]) {
      set_node_reactions(i, false);
      engine_->set_node_active(i, false);
    }
  }
}

double ConsensusNetwork::state(NodeIndex i) const {
  return static_cast<double>(engine_->count(S(i))) / static_cast<double>(params_.scale);
}

std::vector<double> ConsensusNetwork::states() const {
  std::vector<double> out(size());
  for (NodeIndex i = 0; i < size(); ++i) out[i] = state(i);
  return out;
}

double ConsensusNetwork::neighbor_estimate(NodeIndex i) const {
  if (params_.variant != Variant::full) throw std::logic_error("neighbour estimation needs the full variant");
  return static_cast<double>(engine_->count(Y(i))) / params_.lambda;
}

TrajectorySample ConsensusNetwork::sample(double t) const { return TrajectorySample{t, states(), active_}; }

void ConsensusNetwork::set_node_reactions(NodeIndex i, bool enabled) {
  for (std::size_t r : node_reactions_[i]) engine_->set_reaction_enabled(r, enabled);
}

void ConsensusNetwork::refresh_z_clamp(NodeIndex i) {
  if (!engine_->has_species(Z(i))) return;
  engine_->set_clamped(Z(i), to_molecules(z_[i] * perturbation_[i], params_.scale));
}

void ConsensusNetwork::set_measurement(NodeIndex i, double value) {
  const double old = z_[i];
  z_[i] = value;
  if (params_.variant == Variant::full) {
    refresh_z_clamp(i);
  } else if (active_[i]) {
    const Count shift = to_molecules(value, params_.scale) - to_molecules(old, params_.scale);
    engine_->set_count(S(i), std::max<Count>(0, engine_->count(S(i)) + shift));
  }
}

void ConsensusNetwork::apply(const Action& action) {
  const NodeIndex i = action.node;
  if (i >= size()) throw std::out_of_range("event on unknown node " + std::to_string(i));
  switch (action.kind) {
    case ActionKind::set_measurement:
      set_measurement(i, action.value);
      break;
    case ActionKind::leave:
      if (!active_[i]) break;
      active_[i] = false;
      set_node_reactions(i, false);
      engine_->set_node_active(i, false);
      break;
    case ActionKind::join:
      if (active_[i]) {
        set_measurement(i, action.value);
        break;
      }
      z_[i] = action.value;
      active_[i] = true;
      engine_->set_node_active(i, true);
      engine_->set_count(S(i), to_molecules(action.value, params_.scale));
      if (params_.variant == Variant::full) {
        Count in = 0;
        if (params_.warm_start) {
          for (NodeIndex j = 0; j < size(); ++j) {
            if (!active_[j] || j == i) continue;
            for (NodeIndex k : graph_.neighbors(j)) in += k == i;
          }
        }
        engine_->set_count(Y(i), static_cast<Count>(std::llround(params_.lambda)) * in);
        refresh_z_clamp(i);
      }
      set_node_reactions(i, true);
      break;
    case ActionKind::perturb_begin:
    case ActionKind::perturb_end:
      if (params_.variant != Variant::full) {
        throw ConfigError(ErrorCode::invalid_argument, "transient_error needs the full variant");
      }
      perturbation_[i] = action.kind == ActionKind::perturb_begin ? action.value : 1.0;
      refresh_z_clamp(i);
      break;
  }
}

Trajectory simulate(ConsensusNetwork& net, const std::vector<Action>& actions, double t_end, double interval) {
  Engine& engine = net.engine();
  if (!(t_end > engine.time())) throw std::invalid_argument("t_end must lie after the current engine time");
  GridSampler grid(engine.time(), interval);
  Trajectory out;
  const auto probe = [&](double t) { return net.sample(t); };
  const auto before = [&](double next) { grid.emit_before(next, probe, out); };

  std::size_t next = 0;
  while (next < actions.size() && actions[next].time < engine.time()) ++next;
  while (next < actions.size() && actions[next].time <= t_end) {
    const double at = actions[next].time;
    engine.advance_to(at, before);
    grid.emit_before(at, probe, out);
    while (next < actions.size() && actions[next].time == at) net.apply(actions[next++]);
  }
  engine.advance_to(t_end, before);
  grid.finish(t_end, probe, out);
  return out;
}

}  // namespace chemcons
