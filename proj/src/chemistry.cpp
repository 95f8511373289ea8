#include "chemcons/chemistry.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace chemcons {

char to_char(SpeciesKind kind) {
  switch (kind) {
    case SpeciesKind::S:
      return 'S';
    case SpeciesKind::X:
      return 'X';
    case SpeciesKind::Y:
      return 'Y';
    case SpeciesKind::Z:
      return 'Z';
  }
  return '?';
}

std::string to_string(const SpeciesId& id) {
  return std::string(1, to_char(id.kind)) + std::to_string(id.node);
}

namespace {

std::string side_to_string(const std::vector<Term>& side) {
  if (side.empty()) return "0";
  std::string out;
  for (const auto& term : side) {
    if (!out.empty()) out += " + ";
    if (term.count != 1) out += std::to_string(term.count) + " ";
    out += to_string(term.species);
  }
  return out;
}

}  // namespace

std::string to_string(const Reaction& r) {
  std::ostringstream os;
  os << "r" << r.id << "@" << r.owner << ": " << side_to_string(r.reactants) << " -(" << r.coefficient
     << ")-> " << side_to_string(r.products);
  return os.str();
}

void validate(const Reaction& r) {
  if (!std::isfinite(r.coefficient) || r.coefficient <= 0.0) {
    throw std::invalid_argument("reaction " + std::to_string(r.id) + ": coefficient must be finite and positive");
  }
  for (const auto& term : r.reactants) {
    if (term.count < 1) throw std::invalid_argument("reaction " + std::to_string(r.id) + ": non-positive reactant count");
    if (term.species.node != r.owner) {
      throw std::invalid_argument("reaction " + std::to_string(r.id) + ": reactant " + to_string(term.species) +
                                  " is not local to node " + std::to_string(r.owner));
    }
  }
  for (const auto& term : r.products) {
    if (term.count < 1) throw std::invalid_argument("reaction " + std::to_string(r.id) + ": non-positive product count");
  }
}

double mass_action_rate(const Reaction& r, const MultisetState& state) {
  double rate = r.coefficient;
  for (const auto& term : r.reactants) {
    const Count c = state.count(term.species);
    if (c < term.count) return 0.0;
    rate *= std::pow(static_cast<double>(c), static_cast<double>(term.count));
  }
  return rate;
}

}  // namespace chemcons
