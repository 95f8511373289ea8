#include "chemcons/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chemcons {

Engine::Engine(std::vector<Reaction> reactions, const MultisetState& initial, ChannelParams channel,
               std::uint64_t seed)
    : reactions_(std::move(reactions)), channel_(channel), rng_(seed) {
  if (!(channel_.loss_probability >= 0.0 && channel_.loss_probability <= 1.0)) {
    throw std::invalid_argument("channel loss probability must lie in [0, 1]");
  }
  if (!(channel_.latency >= 0.0) || !std::isfinite(channel_.latency)) {
    throw std::invalid_argument("channel latency must be finite and non-negative");
  }

  std::sort(reactions_.begin(), reactions_.end(),
            [](const Reaction& a, const Reaction& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < reactions_.size(); ++i) {
    validate(reactions_[i]);
    if (i > 0 && reactions_[i].id == reactions_[i - 1].id) {
      throw std::invalid_argument("duplicate reaction id " + std::to_string(reactions_[i].id));
    }
  }

  for (const auto& [id, c] : initial.counts) intern(id);
  for (const auto& r : reactions_) {
    for (const auto& term : r.reactants) intern(term.species);
    for (const auto& term : r.products) intern(term.species);
  }
  for (const auto& [id, c] : initial.counts) {
    if (c < 0) throw std::invalid_argument("negative initial count for " + to_string(id));
    counts_[index_of(id)] = c;
  }
  for (const auto& id : initial.clamped) {
    const std::size_t s = intern(id);
    clamp_[s] = counts_[s];
  }

  NodeIndex max_node = 0;
  for (const auto& id : species_) max_node = std::max(max_node, id.node);
  node_active_.assign(species_.empty() ? 0 : max_node + 1, 1);

  const std::size_t n = reactions_.size();
  reactants_.resize(n);
  products_.resize(n);
  dependents_.resize(n);
  readers_.assign(species_.size(), {});
  for (std::size_t r = 0; r < n; ++r) {
    for (const auto& term : reactions_[r].reactants) {
      const std::size_t s = index_of(term.species);
      reactants_[r].emplace_back(s, term.count);
      readers_[s].push_back(r);
    }
    for (const auto& term : reactions_[r].products) {
      products_[r].emplace_back(index_of(term.species), term.count);
    }
  }
  for (auto& list : readers_) list.erase(std::unique(list.begin(), list.end()), list.end());

  // A firing touches reactants and products; anything reading those is a dependent.
  for (std::size_t r = 0; r < n; ++r) {
    auto& deps = dependents_[r];
    deps.push_back(r);
    for (const auto& [s, a] : reactants_[r]) deps.insert(deps.end(), readers_[s].begin(), readers_[s].end());
    for (const auto& [s, b] : products_[r]) deps.insert(deps.end(), readers_[s].begin(), readers_[s].end());
    std::sort(deps.begin(), deps.end());
    deps.erase(std::unique(deps.begin(), deps.end()), deps.end());
  }

  enabled_.assign(n, 1);
  rate_.resize(n);
  std::vector<double> putative(n);
  for (std::size_t r = 0; r < n; ++r) {
    rate_[r] = compute_rate(r);
    putative[r] = rate_[r] > 0.0 ? 1.0 / rate_[r] : infinity;
  }
  queue_ = IndexedPriorityQueue(std::move(putative));
}

std::size_t Engine::intern(const SpeciesId& id) {
  auto [it, inserted] = species_index_.try_emplace(id, species_.size());
  if (inserted) {
    species_.push_back(id);
    counts_.push_back(0);
    clamp_.push_back(unclamped);
    species_node_.push_back(id.node);
  }
  return it->second;
}

std::size_t Engine::index_of(const SpeciesId& id) const {
  auto it = species_index_.find(id);
  if (it == species_index_.end()) throw std::invalid_argument("unknown species " + to_string(id));
  return it->second;
}

bool Engine::has_species(const SpeciesId& id) const { return species_index_.count(id) != 0; }

Count Engine::count(const SpeciesId& id) const {
  auto it = species_index_.find(id);
  return it == species_index_.end() ? 0 : counts_[it->second];
}

bool Engine::is_clamped(const SpeciesId& id) const {
  auto it = species_index_.find(id);
  return it != species_index_.end() && clamp_[it->second] != unclamped;
}

MultisetState Engine::state() const {
  MultisetState out;
  for (std::size_t s = 0; s < species_.size(); ++s) {
    out.counts[species_[s]] = counts_[s];
    if (clamp_[s] != unclamped) out.clamped.insert(species_[s]);
  }
  return out;
}

double Engine::compute_rate(std::size_t reaction) const {
  if (!enabled_[reaction]) return 0.0;
  double rate = reactions_[reaction].coefficient;
  for (const auto& [s, a] : reactants_[reaction]) {
    const Count c = counts_[s];
    if (c < a) return 0.0;
    rate *= std::pow(static_cast<double>(c), static_cast<double>(a));
  }
  return rate;
}

void Engine::reschedule(std::size_t reaction, double old_rate, double new_rate) {
  if (new_rate == old_rate) return;
  const double t_old = queue_.priority(reaction);
  double t_new;
  if (new_rate == 0.0) {
    t_new = infinity;
  } else if (old_rate == 0.0 || t_old == infinity) {
    // Newly enabled: the ratio rule is indeterminate, draw afresh.
    t_new = time_ + 1.0 / new_rate;
  } else {
    t_new = (old_rate / new_rate) * (t_old - time_) + time_;
  }
  queue_.update(reaction, t_new);
}

void Engine::refresh_readers(std::size_t species) {
  for (std::size_t r : readers_[species]) {
    const double old_rate = rate_[r];
    rate_[r] = compute_rate(r);
    reschedule(r, old_rate, rate_[r]);
  }
}

double Engine::next_event_time() const {
  const double reaction_time = queue_.empty() ? infinity : queue_.top_priority();
  const double delivery_time = pending_.empty() ? infinity : pending_.top().time;
  return std::min(reaction_time, delivery_time);
}

std::optional<Firing> Engine::execute_next() {
  const double reaction_time = queue_.empty() ? infinity : queue_.top_priority();
  const double delivery_time = pending_.empty() ? infinity : pending_.top().time;
  if (reaction_time == infinity && delivery_time == infinity) return std::nullopt;
  if (delivery_time <= reaction_time) {
    const Delivery d = pending_.top();
    deliver();
    return Firing{reactions_[d.reaction].id, d.time, true};
  }
  const std::size_t mu = queue_.top_key();
  fire(mu);
  return Firing{reactions_[mu].id, reaction_time, false};
}

void Engine::add_product(std::size_t reaction, std::size_t species, Count amount) {
  if (!node_active_[species_node_[species]]) return;
  if (!channel_.active() || species_node_[species] == reactions_[reaction].owner) {
    counts_[species] += amount;
    return;
  }
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (Count m = 0; m < amount; ++m) {
    if (channel_.loss_probability > 0.0 && uniform(rng_) < channel_.loss_probability) continue;
    if (channel_.latency > 0.0) {
      pending_.push(Delivery{time_ + channel_.latency, delivery_sequence_++, species, 1, reaction});
    } else {
      counts_[species] += 1;
    }
  }
}

void Engine::fire(std::size_t mu) {
  time_ = queue_.priority(mu);
  ++firings_;
  for (const auto& [s, a] : reactants_[mu]) counts_[s] -= a;
  for (const auto& [s, b] : products_[mu]) add_product(mu, s, b);
  for (const auto& [s, a] : reactants_[mu]) {
    if (clamp_[s] != unclamped) counts_[s] = clamp_[s];
  }
  for (const auto& [s, b] : products_[mu]) {
    if (clamp_[s] != unclamped) counts_[s] = clamp_[s];
  }

  for (std::size_t alpha : dependents_[mu]) {
    const double old_rate = rate_[alpha];
    rate_[alpha] = compute_rate(alpha);
    if (alpha == mu) {
      queue_.update(mu, rate_[mu] > 0.0 ? 1.0 / rate_[mu] + time_ : infinity);
    } else {
      reschedule(alpha, old_rate, rate_[alpha]);
    }
  }
}

void Engine::deliver() {
  const Delivery d = pending_.top();
  pending_.pop();
  time_ = d.time;
  if (!node_active_[species_node_[d.species]]) return;
  counts_[d.species] += d.amount;
  if (clamp_[d.species] != unclamped) counts_[d.species] = clamp_[d.species];
  refresh_readers(d.species);
}

void Engine::advance_to(double t, const std::function<void(double)>& before_event) {
  if (t < time_) throw std::invalid_argument("cannot advance the engine backwards in time");
  for (;;) {
    const double next = next_event_time();
    if (next > t) break;
    if (before_event) before_event(next);
    execute_next();
  }
  time_ = t;
}

void Engine::set_count(const SpeciesId& id, Count value) {
  if (value < 0) throw std::invalid_argument("negative count for " + to_string(id));
  const std::size_t s = index_of(id);
  counts_[s] = value;
  if (clamp_[s] != unclamped) clamp_[s] = value;
  refresh_readers(s);
}

void Engine::set_clamped(const SpeciesId& id, Count value) {
  if (value < 0) throw std::invalid_argument("negative clamp for " + to_string(id));
  const std::size_t s = index_of(id);
  clamp_[s] = value;
  counts_[s] = value;
  refresh_readers(s);
}

void Engine::release_clamp(const SpeciesId& id) { clamp_[index_of(id)] = unclamped; }

void Engine::set_reaction_enabled(std::size_t index, bool enabled) {
  if (index >= reactions_.size()) throw std::out_of_range("reaction index out of range");
  enabled_[index] = enabled ? 1 : 0;
  const double old_rate = rate_[index];
  rate_[index] = compute_rate(index);
  reschedule(index, old_rate, rate_[index]);
}

void Engine::set_node_active(NodeIndex node, bool active) {
  if (node >= node_active_.size()) throw std::out_of_range("node index out of range");
  node_active_[node] = active ? 1 : 0;
}

bool Engine::node_active(NodeIndex node) const {
  return node < node_active_.size() && node_active_[node] != 0;
}

}  // namespace chemcons
