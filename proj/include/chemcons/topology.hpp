#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chemcons/chemistry.hpp"

namespace chemcons {

/// Directed graph without self-loops, stored as sorted out-neighbour lists.
class NetworkGraph {
 public:
  NetworkGraph() = default;
  explicit NetworkGraph(std::size_t n, bool directed = true);

  std::size_t size() const { return out_.size(); }
  bool directed() const { return directed_; }

  /// Throws std::invalid_argument on self-loops or out-of-range endpoints;
  /// duplicate edges are ignored.
  void add_edge(NodeIndex from, NodeIndex to);
  bool has_edge(NodeIndex from, NodeIndex to) const;

  const std::vector<NodeIndex>& neighbors(NodeIndex i) const { return out_[i]; }
  std::size_t out_degree(NodeIndex i) const { return out_[i].size(); }
  std::size_t in_degree(NodeIndex i) const { return in_degree_[i]; }
  std::size_t edge_count() const;

  Eigen::MatrixXd adjacency() const;

  bool operator==(const NetworkGraph&) const = default;

 private:
  std::vector<std::vector<NodeIndex>> out_;
  std::vector<std::size_t> in_degree_;
  bool directed_ = true;
};

NetworkGraph make_ring(std::size_t m);
NetworkGraph make_complete(std::size_t m);
NetworkGraph make_regular_lattice(std::size_t m, std::size_t k);
/// Watts-Strogatz: a k = undirected_edges / m lattice whose undirected edges
/// are each rewired with probability rewire_p; redrawn until strongly connected.
NetworkGraph make_small_world(std::size_t m, std::size_t undirected_edges, double rewire_p, std::uint64_t seed);

bool is_balanced(const NetworkGraph& g);
bool is_strongly_connected(const NetworkGraph& g);

/// L = D_out - A.
Eigen::MatrixXd laplacian(const NetworkGraph& g);
/// Laplacian of the subgraph induced by the active nodes; inactive rows and
/// columns are zero.
Eigen::MatrixXd laplacian(const NetworkGraph& g, const std::vector<bool>& active);

/// Second-smallest eigenvalue of the mirror Laplacian (L + L^T) / 2.
/// Throws std::invalid_argument for unbalanced graphs.
double algebraic_connectivity(const NetworkGraph& g);

void write_edge_list(std::ostream& os, const NetworkGraph& g);
NetworkGraph read_edge_list(std::istream& is);

enum class TopologyKind { ring, complete, lattice, small_world, edge_list };

struct TopologySpec {
  TopologyKind kind = TopologyKind::ring;
  std::size_t nodes = 0;
  std::size_t k = 3;
  std::size_t edges = 0;  // undirected, small world only; 0 means 3 * nodes
  double rewire_p = 0.5;
  std::uint64_t seed = 1;
  std::string path;  // edge_list only
};

TopologyKind parse_topology_kind(const std::string& name);
std::string to_string(TopologyKind kind);

/// Builds the graph; infeasible parameters raise ConfigError.
NetworkGraph make_topology(const TopologySpec& spec);

}  // namespace chemcons
