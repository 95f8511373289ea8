#include "chemcons/topology.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "chemcons/error.hpp"

namespace chemcons {

NetworkGraph::NetworkGraph(std::size_t n, bool directed) : out_(n), in_degree_(n, 0), directed_(directed) {}

void NetworkGraph::add_edge(NodeIndex from, NodeIndex to) {
  if (from >= size() || to >= size()) throw std::invalid_argument("edge endpoint out of range");
  if (from == to) throw std::invalid_argument("self-loop on node " + std::to_string(from));
  auto& list = out_[from];
  auto it = std::lower_bound(list.begin(), list.end(), to);
  if (it != list.end() && *it == to) return;
  list.insert(it, to);
  ++in_degree_[to];
}

bool NetworkGraph::has_edge(NodeIndex from, NodeIndex to) const {
  if (from >= size()) return false;
  return std::binary_search(out_[from].begin(), out_[from].end(), to);
}

std::size_t NetworkGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& list : out_) total += list.size();
  return total;
}

Eigen::MatrixXd NetworkGraph::adjacency() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < size(); ++i) {
    for (NodeIndex j : out_[i]) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
  }
  return a;
}

NetworkGraph make_ring(std::size_t m) {
  if (m < 2) throw ConfigError(ErrorCode::infeasible_topology, "ring needs at least 2 nodes");
  NetworkGraph g(m, true);
  for (std::size_t i = 0; i < m; ++i) g.add_edge(i, (i + 1) % m);
  return g;
}

NetworkGraph make_complete(std::size_t m) {
  if (m < 2) throw ConfigError(ErrorCode::infeasible_topology, "complete graph needs at least 2 nodes");
  NetworkGraph g(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j) g.add_edge(i, j);
    }
  }
  return g;
}

NetworkGraph make_regular_lattice(std::size_t m, std::size_t k) {
  if (k < 1 || m <= 2 * k) {
    throw ConfigError(ErrorCode::infeasible_topology,
                      "regular lattice needs k >= 1 and M > 2k (M=" + std::to_string(m) + ", k=" + std::to_string(k) + ")");
  }
  NetworkGraph g(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 1; j <= k; ++j) {
      g.add_edge(i, (i + j) % m);
      g.add_edge((i + j) % m, i);
    }
  }
  return g;
}

namespace {

NetworkGraph from_undirected(std::size_t m, const std::vector<std::set<NodeIndex>>& adj) {
  NetworkGraph g(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    for (NodeIndex j : adj[i]) g.add_edge(i, j);
  }
  return g;
}

}  // namespace

NetworkGraph make_small_world(std::size_t m, std::size_t undirected_edges, double rewire_p, std::uint64_t seed) {
  if (m == 0 || undirected_edges == 0 || undirected_edges % m != 0) {
    throw ConfigError(ErrorCode::infeasible_topology, "small world needs an edge count that is a positive multiple of M");
  }
  const std::size_t k = undirected_edges / m;
  if (m <= 2 * k) {
    throw ConfigError(ErrorCode::infeasible_topology,
                      "small world base lattice needs M > 2k (M=" + std::to_string(m) + ", k=" + std::to_string(k) + ")");
  }
  if (!(rewire_p >= 0.0 && rewire_p <= 1.0)) {
    throw ConfigError(ErrorCode::infeasible_topology, "rewiring probability must lie in [0, 1]");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  constexpr int max_attempts = 1000;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<std::set<NodeIndex>> adj(m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 1; j <= k; ++j) {
        adj[i].insert((i + j) % m);
        adj[(i + j) % m].insert(i);
      }
    }
    for (std::size_t j = 1; j <= k; ++j) {
      for (std::size_t u = 0; u < m; ++u) {
        const NodeIndex v = (u + j) % m;
        if (coin(rng) >= rewire_p) continue;
        if (adj[u].size() >= m - 1) continue;
        if (!adj[u].count(v)) continue;  // already rewired away
        std::vector<NodeIndex> candidates;
        for (NodeIndex w = 0; w < m; ++w) {
          if (w != u && !adj[u].count(w)) candidates.push_back(w);
        }
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        const NodeIndex w = candidates[pick(rng)];
        adj[u].erase(v);
        adj[v].erase(u);
        adj[u].insert(w);
        adj[w].insert(u);
      }
    }
    NetworkGraph g = from_undirected(m, adj);
    if (is_strongly_connected(g)) return g;
  }
  throw ConfigError(ErrorCode::infeasible_topology, "could not draw a connected small-world graph");
}

bool is_balanced(const NetworkGraph& g) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.in_degree(i) != g.out_degree(i)) return false;
  }
  return true;
}

namespace {

std::size_t reachable_count(const std::vector<std::vector<NodeIndex>>& adj) {
  std::vector<char> seen(adj.size(), 0);
  std::vector<NodeIndex> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const NodeIndex u = stack.back();
    stack.pop_back();
    for (NodeIndex v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count;
}

}  // namespace

bool is_strongly_connected(const NetworkGraph& g) {
  if (g.size() == 0) return false;
  std::vector<std::vector<NodeIndex>> forward(g.size());
  std::vector<std::vector<NodeIndex>> backward(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (NodeIndex j : g.neighbors(i)) {
      forward[i].push_back(j);
      backward[j].push_back(i);
    }
  }
  return reachable_count(forward) == g.size() && reachable_count(backward) == g.size();
}

Eigen::MatrixXd laplacian(const NetworkGraph& g) { return laplacian(g, std::vector<bool>(g.size(), true)); }

Eigen::MatrixXd laplacian(const NetworkGraph& g, const std::vector<bool>& active) {
  if (active.size() != g.size()) throw std::invalid_argument("activity mask size mismatch");
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!active[i]) continue;
    const auto row = static_cast<Eigen::Index>(i);
    for (NodeIndex j : g.neighbors(i)) {
      if (!active[j]) continue;
      l(row, static_cast<Eigen::Index>(j)) -= 1.0;
      l(row, row) += 1.0;
    }
  }
  return l;
}

double algebraic_connectivity(const NetworkGraph& g) {
  if (!is_balanced(g)) throw std::invalid_argument("algebraic connectivity requires a balanced graph");
  if (g.size() < 2) throw std::invalid_argument("algebraic connectivity requires at least two nodes");
  const Eigen::MatrixXd l = laplacian(g);
  const Eigen::MatrixXd mirror = 0.5 * (l + l.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(mirror, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  return std::max(0.0, solver.eigenvalues()(1));
}

void write_edge_list(std::ostream& os, const NetworkGraph& g) {
  os << "nodes " << g.size() << "\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (NodeIndex j : g.neighbors(i)) os << i << " " << j << "\n";
  }
}

NetworkGraph read_edge_list(std::istream& is) {
  std::string line;
  std::optional<NetworkGraph> g;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    if (!g) {
      std::size_t n = 0;
      if (first != "nodes" || !(fields >> n)) {
        throw ConfigError(ErrorCode::schema, "edge list must start with 'nodes M'");
      }
      g.emplace(n, true);
      continue;
    }
    std::size_t from = 0;
    std::size_t to = 0;
    std::istringstream edge(line);
    if (!(edge >> from >> to)) {
      throw ConfigError(ErrorCode::schema, "malformed edge on line " + std::to_string(line_no));
    }
    try {
      g->add_edge(from, to);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(ErrorCode::schema, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!g) throw ConfigError(ErrorCode::schema, "empty edge list");
  return *g;
}

TopologyKind parse_topology_kind(const std::string& name) {
  if (name == "ring") return TopologyKind::ring;
  if (name == "complete") return TopologyKind::complete;
  if (name == "lattice" || name == "regular_lattice") return TopologyKind::lattice;
  if (name == "small_world" || name == "small-world") return TopologyKind::small_world;
  if (name == "edge_list" || name == "file") return TopologyKind::edge_list;
  throw ConfigError(ErrorCode::schema, "unknown topology kind '" + name + "'");
}

std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::ring:
      return "ring";
    case TopologyKind::complete:
      return "complete";
    case TopologyKind::lattice:
      return "lattice";
    case TopologyKind::small_world:
      return "small_world";
    case TopologyKind::edge_list:
      return "edge_list";
  }
  return "unknown";
}

NetworkGraph make_topology(const TopologySpec& spec) {
  switch (spec.kind) {
    case TopologyKind::ring:
      return make_ring(spec.nodes);
    case TopologyKind::complete:
      return make_complete(spec.nodes);
    case TopologyKind::lattice:
      return make_regular_lattice(spec.nodes, spec.k);
    case TopologyKind::small_world:
      return make_small_world(spec.nodes, spec.edges == 0 ? 3 * spec.nodes : spec.edges, spec.rewire_p, spec.seed);
    case TopologyKind::edge_list: {
      std::ifstream in(spec.path);
      if (!in) throw ConfigError(ErrorCode::schema, "cannot open edge list '" + spec.path + "'");
      return read_edge_list(in);
    }
  }
  throw ConfigError(ErrorCode::schema, "unknown topology kind");
}

}  // namespace chemcons
