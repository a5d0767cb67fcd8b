/// Local community detection inside ego networks (Girvan-Newman with a
/// modularity-peak stopping rule).

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "locec/graph.hpp"

namespace locec {

/// Member subset of one ego network. Members are global ids, ascending.
struct LocalCommunity {
  NodeId ego = kInvalidNode;
  std::uint32_t index = 0;
  std::vector<NodeId> members;

  std::size_t size() const { return members.size(); }
  bool contains(NodeId v) const;
  friend bool operator==(const LocalCommunity&, const LocalCommunity&) = default;
};

/// A partition of an ego network's members given as one label per local
/// member index. Labels are canonical: numbered 0, 1, ... in order of first
/// appearance.
using PartitionLabels = std::vector<std::uint32_t>;

std::vector<std::vector<std::uint32_t>> partition_groups(const PartitionLabels& labels);

/// Exact shortest-path edge betweenness (Brandes accumulation), one value per
/// entry of net.member_edges. Each unordered node pair contributes once.
std::vector<double> edge_betweenness(const EgoNetwork& net);

/// Newman modularity of a partition on the full ego network. Zero for an
/// edgeless network.
double modularity(const EgoNetwork& net, const PartitionLabels& labels);
/// Same, for a partition given as groups of local indices. Throws
/// std::invalid_argument if the groups do not cover every member exactly
/// once.
double modularity(const EgoNetwork& net, const std::vector<std::vector<std::uint32_t>>& groups);

struct GnOptions {
  /// Recompute betweenness after this many removals (1 = exact GN).
  std::size_t recompute_every = 1;
  /// Ego networks with more members fall back to a single community.
  std::size_t member_cap = 5000;
};

/// Full divisive history: the initial partition (connected components), then
/// one step per removed edge.
struct Dendrogram {
  struct Step {
    std::optional<Edge> removed_edge;  // global ids; empty for the initial snapshot
    std::size_t partition = 0;         // index into partitions
    double modularity = 0.0;
  };
  std::vector<Step> steps;
  /// Distinct partitions in the order they appeared; consecutive steps share a
  /// partition until a removal disconnects a component.
  std::vector<PartitionLabels> partitions;
};

/// Runs Girvan-Newman to exhaustion. Among equal betweenness values the
/// canonically smallest edge is removed first.
Dendrogram girvan_newman(const EgoNetwork& net, const GnOptions& options = {});

/// Detects local communities: within each connected component of the ego
/// network, picks the dendrogram snapshot with peak modularity contribution
/// (ties go to fewer communities, then the earlier snapshot). Communities are
/// ordered by smallest member and indexed from 0.
std::vector<LocalCommunity> detect_local_communities(const EgoNetwork& net, const GnOptions& options = {});

}  // namespace locec
