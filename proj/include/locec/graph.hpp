/// Undirected social graph with per-node attribute vectors and per-edge
/// interaction counts, plus ego-network extraction.

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace locec {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;
using ExternalId = std::uint64_t;
using Count = std::uint32_t;

inline constexpr NodeId kInvalidNode = std::numeric_limits<NodeId>::max();

/// An unordered node pair stored as (min, max).
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge canonical_edge(NodeId a, NodeId b) {
  return a < b ? Edge{a, b} : Edge{b, a};
}

/// Immutable graph in compressed sparse row form. Node ids are dense
/// (0..n-1) and assigned in ascending order of the external ids seen at load
/// time; edges are numbered in canonical (min, max) lexicographic order.
///
/// Safe for concurrent reads. Build one with GraphBuilder.
class Graph {
 public:
  Graph() = default;

  std::size_t num_nodes() const { return external_ids_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t feature_dim() const { return feature_dim_; }
  std::size_t interaction_dim() const { return interaction_dim_; }

  /// Sorted neighbour ids of v.
  std::span<const NodeId> neighbors(NodeId v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  /// Edge ids parallel to neighbors(v).
  std::span<const EdgeId> incident_edges(NodeId v) const {
    return {adjacency_edge_.data() + offsets_[v], adjacency_edge_.data() + offsets_[v + 1]};
  }

  std::optional<EdgeId> find_edge(NodeId a, NodeId b) const;
  bool has_edge(NodeId a, NodeId b) const { return find_edge(a, b).has_value(); }
  const Edge& edge(EdgeId e) const { return edges_[e]; }
  std::span<const Edge> edges() const { return edges_; }

  /// Individual feature vector f_v (length feature_dim()).
  std::span<const double> features(NodeId v) const {
    return {features_.data() + v * feature_dim_, feature_dim_};
  }

  /// Interaction count vector of an edge (length interaction_dim()); all zero
  /// when no interaction record exists.
  std::span<const Count> interactions(EdgeId e) const {
    return {interactions_.data() + std::size_t{e} * interaction_dim_, interaction_dim_};
  }
  /// I^j_ab; zero when a and b are not adjacent.
  Count interaction(NodeId a, NodeId b, std::size_t dim) const;
  bool has_interaction_record(EdgeId e) const { return has_record_[e] != 0; }

  ExternalId external_id(NodeId v) const { return external_ids_[v]; }
  std::optional<NodeId> internal_id(ExternalId ext) const;

 private:
  friend class GraphBuilder;

  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adjacency_;
  std::vector<EdgeId> adjacency_edge_;
  std::vector<Edge> edges_;
  std::size_t feature_dim_ = 1;
  std::size_t interaction_dim_ = 1;
  std::vector<double> features_;
  std::vector<Count> interactions_;
  std::vector<std::uint8_t> has_record_;
  std::vector<ExternalId> external_ids_;
  std::unordered_map<ExternalId, NodeId> internal_ids_;
};

/// Accumulates nodes, edges, features and interactions keyed by external id
/// and produces a validated Graph.
class GraphBuilder {
 public:
  GraphBuilder(std::size_t feature_dim, std::size_t interaction_dim);

  void add_node(ExternalId v);
  /// Duplicate edges (in either orientation) are merged. Throws DataError on
  /// a self-loop.
  void add_edge(ExternalId a, ExternalId b);
  /// Throws DataError on a length mismatch or a second record for the node.
  void set_features(ExternalId v, std::vector<double> values);
  /// Throws DataError on a length mismatch or a second record for the pair.
  /// The edge itself is checked in build().
  void set_interactions(ExternalId a, ExternalId b, std::vector<Count> counts);

  /// Nodes without a feature record get an all-zero vector. When
  /// normalize_features is set, each feature dimension is min-max scaled to
  /// [0, 1] (constant dimensions become 0). Throws DataError when an
  /// interaction record refers to a pair that is not an edge.
  Graph build(bool normalize_features = true) &&;

 private:
  std::size_t feature_dim_;
  std::size_t interaction_dim_;
  std::vector<ExternalId> nodes_;
  std::vector<std::pair<ExternalId, ExternalId>> edges_;
  std::unordered_map<ExternalId, std::vector<double>> features_;
  std::vector<std::pair<std::pair<ExternalId, ExternalId>, std::vector<Count>>> interactions_;
};

/// Induced subgraph over the neighbours of one node, the node itself and its
/// incident edges excluded. Members are kept sorted by global id and are
/// addressed by their local index (position in members) in the adjacency.
struct EgoNetwork {
  NodeId ego = kInvalidNode;
  std::vector<NodeId> members;
  /// Induced edges as local index pairs (a < b), lexicographically sorted.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> member_edges;
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> adjacency;

  std::size_t size() const { return members.size(); }
  std::size_t num_edges() const { return member_edges.size(); }
  std::span<const std::uint32_t> neighbors(std::uint32_t local) const {
    return {adjacency.data() + offsets[local], adjacency.data() + offsets[local + 1]};
  }
  std::size_t degree(std::uint32_t local) const { return offsets[local + 1] - offsets[local]; }
  std::optional<std::uint32_t> local_index(NodeId v) const;
  Edge global_edge(std::size_t i) const {
    return {members[member_edges[i].first], members[member_edges[i].second]};
  }
};

EgoNetwork ego_network(const Graph& g, NodeId v);

}  // namespace locec
