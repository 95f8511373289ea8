#pragma once

// Species, reactions and the molecule multiset of a distributed artificial
// chemistry. Reactions are owned by a node; all reactants are local to the
// owner while products may live on other nodes.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace chemcons {

using NodeIndex = std::size_t;
using Count = std::int64_t;

enum class SpeciesKind : std::uint8_t { S, X, Y, Z };

char to_char(SpeciesKind kind);

struct SpeciesId {
  NodeIndex node = 0;
  SpeciesKind kind = SpeciesKind::S;

  auto operator<=>(const SpeciesId&) const = default;
};

std::string to_string(const SpeciesId& id);

struct Term {
  SpeciesId species;
  Count count = 1;

  auto operator<=>(const Term&) const = default;
};

struct Reaction {
  std::size_t id = 0;
  std::vector<Term> reactants;
  std::vector<Term> products;  // empty means the null complex
  double coefficient = 1.0;
  NodeIndex owner = 0;
};

/// Throws std::invalid_argument if counts, coefficient or locality are violated.
void validate(const Reaction& r);

std::string to_string(const Reaction& r);

struct MultisetState {
  std::map<SpeciesId, Count> counts;
  std::set<SpeciesId> clamped;

  Count count(const SpeciesId& id) const {
    auto it = counts.find(id);
    return it == counts.end() ? 0 : it->second;
  }
};

/// Law of mass action: k * prod(c_s^a_s); zero when any reactant pool is short.
double mass_action_rate(const Reaction& r, const MultisetState& state);

}  // namespace chemcons
