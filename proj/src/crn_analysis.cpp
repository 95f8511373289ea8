#include "chemcons/crn_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

namespace chemcons {

StoichiometricMatrix stoichiometric_matrix(const std::vector<Reaction>& reactions) {
  StoichiometricMatrix u;
  std::set<SpeciesId> seen;
  for (const auto& r : reactions) {
    for (const auto& t : r.reactants) seen.insert(t.species);
    for (const auto& t : r.products) seen.insert(t.species);
  }
  u.species.assign(seen.begin(), seen.end());
  std::map<SpeciesId, std::size_t> row;
  for (std::size_t i = 0; i < u.species.size(); ++i) row[u.species[i]] = i;

  u.entries.assign(u.species.size(), std::vector<std::int64_t>(reactions.size(), 0));
  for (std::size_t c = 0; c < reactions.size(); ++c) {
    const auto& r = reactions[c];
    u.reactions.push_back(r.id);
    for (const auto& t : r.reactants) u.entries[row[t.species]][c] -= t.count;
    for (const auto& t : r.products) u.entries[row[t.species]][c] += t.count;
  }
  return u;
}

namespace {

bool checked_mul(std::int64_t a, std::int64_t b, std::int64_t& out) { return !__builtin_mul_overflow(a, b, &out); }
bool checked_sub(std::int64_t a, std::int64_t b, std::int64_t& out) { return !__builtin_sub_overflow(a, b, &out); }

// Returns nullopt when an intermediate leaves the int64 range.
std::optional<std::size_t> bareiss_rank_int64(std::vector<std::vector<std::int64_t>> a) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows == 0 ? 0 : a[0].size();
  std::int64_t prev = 1;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && a[pivot][c] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(a[pivot], a[rank]);
    const std::int64_t p = a[rank][c];
    for (std::size_t i = rank + 1; i < rows; ++i) {
      const std::int64_t f = a[i][c];
      for (std::size_t j = c + 1; j < cols; ++j) {
        std::int64_t x = 0;
        std::int64_t y = 0;
        std::int64_t d = 0;
        if (!checked_mul(a[i][j], p, x) || !checked_mul(f, a[rank][j], y) || !checked_sub(x, y, d)) {
          return std::nullopt;
        }
        a[i][j] = d / prev;
      }
      a[i][c] = 0;
    }
    prev = p;
    ++rank;
  }
  return rank;
}

std::size_t bareiss_rank_big(const std::vector<std::vector<std::int64_t>>& input) {
  using Big = boost::multiprecision::cpp_int;
  std::vector<std::vector<Big>> a;
  a.reserve(input.size());
  for (const auto& row : input) a.emplace_back(row.begin(), row.end());
  const std::size_t rows = a.size();
  const std::size_t cols = rows == 0 ? 0 : a[0].size();
  Big prev = 1;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && a[pivot][c] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(a[pivot], a[rank]);
    const Big p = a[rank][c];
    for (std::size_t i = rank + 1; i < rows; ++i) {
      const Big f = a[i][c];
      for (std::size_t j = c + 1; j < cols; ++j) a[i][j] = (a[i][j] * p - f * a[rank][j]) / prev;
      a[i][c] = 0;
    }
    prev = p;
    ++rank;
  }
  return rank;
}

}  // namespace

std::size_t integer_rank(const std::vector<std::vector<std::int64_t>>& matrix) {
  for (const auto& row : matrix) {
    if (row.size() != matrix.front().size()) throw std::invalid_argument("ragged matrix");
  }
  if (auto rank = bareiss_rank_int64(matrix)) return *rank;
  return bareiss_rank_big(matrix);
}

Complex make_complex(const std::vector<Term>& side) {
  std::map<SpeciesId, Count> merged;
  for (const auto& t : side) merged[t.species] += t.count;
  Complex out;
  for (const auto& [s, c] : merged) {
    if (c != 0) out.push_back(Term{s, c});
  }
  return out;
}

ComplexGraph complex_graph(const std::vector<Reaction>& reactions) {
  ComplexGraph g;
  std::set<Complex> all;
  for (const auto& r : reactions) {
    all.insert(make_complex(r.reactants));
    all.insert(make_complex(r.products));
  }
  g.complexes.assign(all.begin(), all.end());
  auto index = [&](const Complex& c) {
    return static_cast<std::size_t>(std::lower_bound(g.complexes.begin(), g.complexes.end(), c) - g.complexes.begin());
  };
  for (const auto& r : reactions) {
    g.edges.emplace_back(index(make_complex(r.reactants)), index(make_complex(r.products)));
  }
  return g;
}

std::set<Complex> complexes(const std::vector<Reaction>& reactions) {
  const auto g = complex_graph(reactions);
  return {g.complexes.begin(), g.complexes.end()};
}

std::size_t linkage_classes(const ComplexGraph& graph) {
  std::vector<std::size_t> parent(graph.complexes.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t classes = graph.complexes.size();
  for (const auto& [u, v] : graph.edges) {
    const auto a = find(u);
    const auto b = find(v);
    if (a != b) {
      parent[a] = b;
      --classes;
    }
  }
  return classes;
}

namespace {

// Kosaraju, iterative.
std::vector<std::size_t> strong_components(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::vector<std::size_t>> fwd(n);
  std::vector<std::vector<std::size_t>> bwd(n);
  for (const auto& [u, v] : edges) {
    fwd[u].push_back(v);
    bwd[v].push_back(u);
  }
  std::vector<std::size_t> order;
  std::vector<char> seen(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{s, 0}};
    seen[s] = 1;
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      if (next < fwd[u].size()) {
        const std::size_t v = fwd[u][next++];
        if (!seen[v]) {
          seen[v] = 1;
          stack.emplace_back(v, 0);
        }
      } else {
        order.push_back(u);
        stack.pop_back();
      }
    }
  }
  constexpr auto unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp(n, unset);
  std::size_t label = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] != unset) continue;
    std::vector<std::size_t> stack{*it};
    comp[*it] = label;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (auto v : bwd[u]) {
        if (comp[v] == unset) {
          comp[v] = label;
          stack.push_back(v);
        }
      }
    }
    ++label;
  }
  return comp;
}

}  // namespace

bool is_weakly_reversible(const ComplexGraph& graph) {
  const auto comp = strong_components(graph.complexes.size(), graph.edges);
  return std::all_of(graph.edges.begin(), graph.edges.end(),
                     [&](const auto& e) { return comp[e.first] == comp[e.second]; });
}

std::int64_t deficiency(const std::vector<Reaction>& reactions) { return analyze(reactions).deficiency; }

std::string to_string(Verdict verdict) {
  return verdict == Verdict::stable_unique_fixed_point ? "stable_unique_fixed_point" : "inconclusive";
}

Verdict zero_deficiency_verdict(const std::vector<Reaction>& reactions) { return analyze(reactions).verdict; }

AnalysisReport analyze(const std::vector<Reaction>& reactions) {
  AnalysisReport report;
  const auto graph = complex_graph(reactions);
  report.complexes = graph.complexes.size();
  report.linkage_classes = linkage_classes(graph);
  report.rank = integer_rank(stoichiometric_matrix(reactions).entries);
  report.deficiency = static_cast<std::int64_t>(report.complexes) - static_cast<std::int64_t>(report.linkage_classes) -
                      static_cast<std::int64_t>(report.rank);
  report.weakly_reversible = is_weakly_reversible(graph);
  report.verdict = report.weakly_reversible && report.deficiency == 0 ? Verdict::stable_unique_fixed_point
                                                                      : Verdict::inconclusive;
  return report;
}

nlohmann::json to_json(const AnalysisReport& report) {
  return {{"complexes", report.complexes},
          {"linkage_classes", report.linkage_classes},
          {"rank", report.rank},
          {"deficiency", report.deficiency},
          {"weakly_reversible", report.weakly_reversible},
          {"verdict", to_string(report.verdict)}};
}

std::string to_text(const AnalysisReport& report) {
  std::ostringstream os;
  os << "complexes:         " << report.complexes << "\n"
     << "linkage classes:   " << report.linkage_classes << "\n"
     << "rank:              " << report.rank << "\n"
     << "deficiency:        " << report.deficiency << "\n"
     << "weakly reversible: " << (report.weakly_reversible ? "yes" : "no") << "\n"
     << "verdict:           " << to_string(report.verdict) << "\n";
  return os.str();
}

std::vector<Reaction> equivalent_unicast_form(const std::vector<Reaction>& consensus_chemistry) {
  std::vector<Reaction> out;
  for (const auto& r : consensus_chemistry) {
    const auto reactants = make_complex(r.reactants);
    if (reactants.size() != 1 || reactants[0].count != 1 || reactants[0].species.kind != SpeciesKind::S) continue;
    const SpeciesId source = reactants[0].species;
    for (const auto& t : make_complex(r.products)) {
      if (t.species.kind != SpeciesKind::S || t.species.node == source.node) continue;
      Reaction u;
      u.id = out.size();
      u.owner = source.node;
      u.reactants = {Term{source, 1}};
      u.products = {Term{t.species, 1}};
      u.coefficient = r.coefficient * static_cast<double>(t.count);
      out.push_back(std::move(u));
    }
  }
  return out;
}

namespace {

const Polynomial& zero_polynomial() {
  static const Polynomial zero;
  return zero;
}

double monomial_value(const Monomial& m, const MultisetState& state) {
  double v = 1.0;
  for (const auto& [s, p] : m) v *= std::pow(static_cast<double>(state.count(s)), static_cast<double>(p));
  return v;
}

}  // namespace

const Polynomial& VectorField::rate(const SpeciesId& id) const {
  auto it = rates_.find(id);
  return it == rates_.end() ? zero_polynomial() : it->second;
}

double VectorField::evaluate(const SpeciesId& id, const MultisetState& state) const {
  double sum = 0.0;
  for (const auto& [m, coef] : rate(id)) sum += coef * monomial_value(m, state);
  return sum;
}

VectorField VectorField::substitute(const SpeciesId& id, double value) const {
  VectorField out;
  for (const auto& [species, poly] : rates_) {
    if (species == id) continue;
    auto& target = out.rates_[species];
    for (const auto& [m, coef] : poly) {
      Monomial reduced;
      double factor = coef;
      for (const auto& [s, p] : m) {
        if (s == id) {
          factor *= std::pow(value, static_cast<double>(p));
        } else {
          reduced.emplace_back(s, p);
        }
      }
      target[reduced] += factor;
    }
  }
  out.prune();
  return out;
}

VectorField VectorField::restrict_to(SpeciesKind kind) const {
  VectorField out;
  for (const auto& [species, poly] : rates_) {
    if (species.kind == kind) out.rates_[species] = poly;
  }
  return out;
}

void VectorField::prune() {
  for (auto it = rates_.begin(); it != rates_.end();) {
    std::erase_if(it->second, [](const auto& term) { return term.second == 0.0; });
    it = it->second.empty() ? rates_.erase(it) : std::next(it);
  }
}

std::string VectorField::to_string() const {
  std::ostringstream os;
  for (const auto& [species, poly] : rates_) {
    os << "d" << chemcons::to_string(species) << "/dt =";
    bool first = true;
    for (const auto& [m, coef] : poly) {
      os << (first ? " " : (coef < 0 ? " - " : " + "));
      os << (first ? coef : std::abs(coef));
      for (const auto& [s, p] : m) {
        os << "*" << chemcons::to_string(s);
        if (p != 1) os << "^" << p;
      }
      first = false;
    }
    os << "\n";
  }
  return os.str();
}

VectorField extract_odes(const std::vector<Reaction>& reactions) {
  VectorField field;
  for (const auto& r : reactions) {
    Monomial m;
    for (const auto& t : make_complex(r.reactants)) m.emplace_back(t.species, static_cast<int>(t.count));
    std::map<SpeciesId, Count> net;
    for (const auto& t : r.reactants) net[t.species] -= t.count;
    for (const auto& t : r.products) net[t.species] += t.count;
    for (const auto& [s, n] : net) {
      if (n != 0) field[s][m] += static_cast<double>(n) * r.coefficient;
    }
  }
  field.prune();
  return field;
}

}  // namespace chemcons
