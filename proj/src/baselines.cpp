#include "chemcons/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace chemcons {

using boost::multiprecision::cpp_rational;

std::string to_string(GossipAlgorithm algorithm) { return algorithm == GossipAlgorithm::rn ? "rn" : "br"; }

GossipState::GossipState(NetworkGraph g, std::vector<double> z, GossipAlgorithm algorithm, GossipParams params,
                         std::vector<bool> active)
    : graph_(std::move(g)),
      z_(std::move(z)),
      algorithm_(algorithm),
      params_(params),
      x_(z_),
      active_(active.empty() ? std::vector<bool>(graph_.size(), true) : std::move(active)),
      rng_(params.seed) {
  if (graph_.size() == 0) throw std::invalid_argument("gossip needs at least one node");
  if (z_.size() != graph_.size()) throw std::invalid_argument("measurement count differs from node count");
  if (active_.size() != graph_.size()) throw std::invalid_argument("activity mask size mismatch");
  for (double v : z_) {
    if (!std::isfinite(v)) throw std::invalid_argument("measurements must be finite");
  }
  if (!(params_.mu > 0.0) || !std::isfinite(params_.mu)) throw std::invalid_argument("mu must be positive");
  if (!(params_.mix > 0.0 && params_.mix < 1.0)) throw std::invalid_argument("mix must lie in (0, 1)");
  if (algorithm_ == GossipAlgorithm::rn) {
    exact_.reserve(x_.size());
    for (double v : x_) exact_.emplace_back(v);
  }
  next_tick_ = draw_interval();
}

void GossipState::set_state(NodeIndex i, const cpp_rational& value) {
  if (!exact_.empty()) exact_[i] = value;
  x_[i] = value.convert_to<double>();
}

double GossipState::draw_interval() {
  std::exponential_distribution<double> gap(params_.mu * static_cast<double>(graph_.size()));
  return gap(rng_);
}

void GossipState::rn_tick(NodeIndex node) {
  if (!active_.at(node)) return;
  std::vector<NodeIndex> peers;
  for (NodeIndex j : graph_.neighbors(node)) {
    if (active_[j]) peers.push_back(j);
  }
  if (peers.empty()) return;
  std::uniform_int_distribution<std::size_t> pick(0, peers.size() - 1);
  const NodeIndex j = peers[pick(rng_)];
  const cpp_rational avg = (exact_[node] + exact_[j]) / 2;
  set_state(node, avg);
  set_state(j, avg);
}

void GossipState::br_tick(NodeIndex node) {
  if (!active_.at(node)) return;
  const double mix = params_.mix;
  for (NodeIndex j : graph_.neighbors(node)) {
    if (active_[j]) x_[j] = mix * x_[j] + (1.0 - mix) * x_[node];
  }
}

void GossipState::tick(NodeIndex node) {
  if (algorithm_ == GossipAlgorithm::rn) {
    rn_tick(node);
  } else {
    br_tick(node);
  }
}

void GossipState::step() {
  std::uniform_int_distribution<NodeIndex> pick(0, graph_.size() - 1);
  time_ = next_tick_;
  ++ticks_;
  tick(pick(rng_));
  next_tick_ = time_ + draw_interval();
}

void GossipState::advance_to(double t, const std::function<void(double)>& before_tick) {
  while (next_tick_ <= t) {
    if (before_tick) before_tick(next_tick_);
    step();
  }
  if (t > time_) time_ = t;
}

void GossipState::apply(const Action& action) {
  const NodeIndex i = action.node;
  if (i >= size()) throw std::out_of_range("action addresses an unknown node");
  switch (action.kind) {
    case ActionKind::set_measurement:
      z_[i] = action.value;
      set_state(i, cpp_rational(action.value));
      break;
    case ActionKind::leave:
      active_[i] = false;
      break;
    case ActionKind::join:
      z_[i] = action.value;
      set_state(i, cpp_rational(action.value));
      active_[i] = true;
      break;
    case ActionKind::perturb_begin:
      if (exact_.empty()) {
        x_[i] *= action.value;
      } else {
        set_state(i, exact_[i] * cpp_rational(action.value));
      }
      break;
    case ActionKind::perturb_end:
      if (exact_.empty()) {
        x_[i] /= action.value;
      } else {
        set_state(i, exact_[i] / cpp_rational(action.value));
      }
      break;
  }
}

TrajectorySample GossipState::sample(double t) const { return {t, x_, active_}; }

Trajectory run_gossip(GossipState& state, const std::vector<Action>& actions, double t_end, double interval) {
  if (!(t_end > state.time())) throw std::invalid_argument("t_end must lie after the current gossip time");
  GridSampler grid(state.time(), interval);
  Trajectory out;
  const auto probe = [&](double t) { return state.sample(t); };
  const auto before = [&](double next) { grid.emit_before(next, probe, out); };

  std::size_t next = 0;
  while (next < actions.size() && actions[next].time < state.time()) ++next;
  while (next < actions.size() && actions[next].time <= t_end) {
    const double at = actions[next].time;
    state.advance_to(at, before);
    grid.emit_before(at, probe, out);
    while (next < actions.size() && actions[next].time == at) state.apply(actions[next++]);
  }
  state.advance_to(t_end, before);
  grid.finish(t_end, probe, out);
  return out;
}

}  // namespace chemcons
