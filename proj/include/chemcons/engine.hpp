#pragma once

// Deterministic next-reaction scheduler.
//
// Every reaction carries a putative firing time in an indexed priority queue.
// The least one fires; reactions whose rate changed have their remaining time
// rescaled by v_old / v_new, and the fired reaction is redrawn at 1/v.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <vector>

#include "chemcons/chemistry.hpp"
#include "chemcons/indexed_priority_queue.hpp"

namespace chemcons {

/// Lossy, delayed transport for products created on a node other than the
/// reaction's owner.
struct ChannelParams {
  double loss_probability = 0.0;  // in [0, 1]; 1 isolates every node
  double latency = 0.0;           // seconds

  bool active() const { return loss_probability > 0.0 || latency > 0.0; }
};

struct Firing {
  std::size_t reaction = 0;  // for a delivery, the reaction that sent it
  double time = 0.0;
  bool delivery = false;
};

class Engine {
 public:
  static constexpr double infinity = std::numeric_limits<double>::infinity();

  /// Throws std::invalid_argument on malformed reactions or duplicate ids.
  Engine(std::vector<Reaction> reactions, const MultisetState& initial,
         ChannelParams channel = {}, std::uint64_t seed = 0);

  double time() const { return time_; }
  std::size_t reaction_count() const { return reactions_.size(); }
  const Reaction& reaction(std::size_t index) const { return reactions_[index]; }
  double rate(std::size_t index) const { return rate_[index]; }
  double putative_time(std::size_t index) const { return queue_.priority(index); }

  /// Earliest pending firing or delivery, +inf when nothing can happen.
  double next_event_time() const;
  bool exhausted() const { return next_event_time() == infinity; }

  std::optional<Firing> execute_next();

  /// Executes every event with time <= t and moves the clock to t.
  /// `before_event` is called with each event's time before it executes.
  void advance_to(double t, const std::function<void(double)>& before_event = {});

  bool has_species(const SpeciesId& id) const;
  Count count(const SpeciesId& id) const;
  const std::vector<SpeciesId>& species() const { return species_; }
  MultisetState state() const;
  std::uint64_t firings() const { return firings_; }

  /// External change of a species count at the current time.
  void set_count(const SpeciesId& id, Count value);
  void set_clamped(const SpeciesId& id, Count value);
  void release_clamp(const SpeciesId& id);
  bool is_clamped(const SpeciesId& id) const;

  /// A disabled reaction behaves as if its rate were zero.
  void set_reaction_enabled(std::size_t index, bool enabled);
  bool reaction_enabled(std::size_t index) const { return enabled_[index] != 0; }

  /// Products addressed to an inactive node are dropped.
  void set_node_active(NodeIndex node, bool active);
  bool node_active(NodeIndex node) const;

 private:
  static constexpr Count unclamped = -1;

  struct Delivery {
    double time;
    std::uint64_t sequence;
    std::size_t species;
    Count amount;
    std::size_t reaction;

    bool operator>(const Delivery& o) const {
      return time > o.time || (time == o.time && sequence > o.sequence);
    }
  };

  std::size_t index_of(const SpeciesId& id) const;
  std::size_t intern(const SpeciesId& id);
  double compute_rate(std::size_t reaction) const;
  void reschedule(std::size_t reaction, double old_rate, double new_rate);
  void refresh_readers(std::size_t species);
  void fire(std::size_t reaction);
  void deliver();
  void add_product(std::size_t reaction, std::size_t species, Count amount);

  std::vector<Reaction> reactions_;
  std::vector<SpeciesId> species_;
  std::map<SpeciesId, std::size_t> species_index_;
  std::vector<Count> counts_;
  std::vector<Count> clamp_;
  std::vector<NodeIndex> species_node_;

  // Per reaction, in species indices.
  std::vector<std::vector<std::pair<std::size_t, Count>>> reactants_;
  std::vector<std::vector<std::pair<std::size_t, Count>>> products_;
  std::vector<std::vector<std::size_t>> dependents_;
  std::vector<std::vector<std::size_t>> readers_;  // species -> reactions reading it

  std::vector<double> rate_;
  std::vector<char> enabled_;
  std::vector<char> node_active_;
  IndexedPriorityQueue queue_;

  ChannelParams channel_;
  std::mt19937_64 rng_;
  std::priority_queue<Delivery, std::vector<Delivery>, std::greater<>> pending_;
  std::uint64_t delivery_sequence_ = 0;

  double time_ = 0.0;
  std::uint64_t firings_ = 0;
};

}  // namespace chemcons
