#pragma once

// Structural analysis of reaction networks: stoichiometry, complexes,
// linkage classes, weak reversibility and deficiency.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "chemcons/chemistry.hpp"
#include "json.hpp"

namespace chemcons {

/// Rows follow `species` (sorted), columns follow the input reaction order.
struct StoichiometricMatrix {
  std::vector<SpeciesId> species;
  std::vector<std::size_t> reactions;  // reaction ids
  std::vector<std::vector<std::int64_t>> entries;

  std::int64_t at(std::size_t row, std::size_t col) const { return entries[row][col]; }
};

StoichiometricMatrix stoichiometric_matrix(const std::vector<Reaction>& reactions);

/// Exact rank by fraction-free (Bareiss) elimination.
std::size_t integer_rank(const std::vector<std::vector<std::int64_t>>& matrix);

/// A reaction side with terms sorted by species and repeated species merged.
using Complex = std::vector<Term>;

Complex make_complex(const std::vector<Term>& side);

struct ComplexGraph {
  std::vector<Complex> complexes;                             // sorted, distinct
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // one per reaction
};

ComplexGraph complex_graph(const std::vector<Reaction>& reactions);
std::set<Complex> complexes(const std::vector<Reaction>& reactions);
std::size_t linkage_classes(const ComplexGraph& graph);
bool is_weakly_reversible(const ComplexGraph& graph);

/// |C| - l - rank(U).
std::int64_t deficiency(const std::vector<Reaction>& reactions);

enum class Verdict { stable_unique_fixed_point, inconclusive };

std::string to_string(Verdict verdict);

/// Deficiency Zero Theorem: a weakly reversible network of deficiency zero
/// has one asymptotically stable fixed point per stoichiometric class.
Verdict zero_deficiency_verdict(const std::vector<Reaction>& reactions);

struct AnalysisReport {
  std::size_t complexes = 0;
  std::size_t linkage_classes = 0;
  std::size_t rank = 0;
  std::int64_t deficiency = 0;
  bool weakly_reversible = false;
  Verdict verdict = Verdict::inconclusive;
};

AnalysisReport analyze(const std::vector<Reaction>& reactions);
nlohmann::json to_json(const AnalysisReport& report);
std::string to_text(const AnalysisReport& report);

/// Per-edge transfers S_i -> S_j for every remote S product of a consensus
/// chemistry. Drains, local catalytic products and the X/Y/Z machinery are
/// dropped, leaving the closed network whose dynamics equal the broadcast
/// and drain pair.
std::vector<Reaction> equivalent_unicast_form(const std::vector<Reaction>& consensus_chemistry);

/// Product of species powers, sorted by species.
using Monomial = std::vector<std::pair<SpeciesId, int>>;
using Polynomial = std::map<Monomial, double>;

/// Mass-action vector field dc_s/dt as polynomials in the species counts.
class VectorField {
 public:
  Polynomial& operator[](const SpeciesId& id) { return rates_[id]; }
  const std::map<SpeciesId, Polynomial>& rates() const { return rates_; }
  /// Zero polynomial for species without dynamics.
  const Polynomial& rate(const SpeciesId& id) const;

  double evaluate(const SpeciesId& id, const MultisetState& state) const;

  /// Replaces a species by a constant and re-collects like terms.
  VectorField substitute(const SpeciesId& id, double value) const;
  /// Keeps only the equations of species of the given kind.
  VectorField restrict_to(SpeciesKind kind) const;
  /// Drops terms with zero coefficient and species with no terms.
  void prune();

  std::string to_string() const;

  bool operator==(const VectorField&) const = default;

 private:
  std::map<SpeciesId, Polynomial> rates_;
};

VectorField extract_odes(const std::vector<Reaction>& reactions);

}  // namespace chemcons
