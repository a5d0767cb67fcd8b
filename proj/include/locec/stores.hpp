/// Per-ego phase artifacts and their text formats.
///
/// Community file, one line per community, external ids:
///   ego<TAB>index<TAB>m1,m2,...
/// Class-result file, one line per community:
///   ego<TAB>index<TAB>p1,...,p|L|
/// Lines are sorted by (ego, index); '#' starts a comment line.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "locec/community.hpp"
#include "locec/graph.hpp"
#include "locec/labels.hpp"

namespace locec {

/// Local communities of every ego, indexed by internal node id.
class CommunityStore {
 public:
  CommunityStore() = default;
  explicit CommunityStore(std::size_t num_nodes) : by_ego_(num_nodes) {}

  std::size_t num_nodes() const { return by_ego_.size(); }
  void set(NodeId ego, std::vector<LocalCommunity> communities);
  const std::vector<LocalCommunity>& communities(NodeId ego) const { return by_ego_.at(ego).communities; }
  std::size_t total_communities() const;

  /// Index of the community of ego's network that contains member. Throws
  /// DataError when the ego network was never processed or lacks member.
  std::uint32_t community_of(NodeId ego, NodeId member) const;

  friend bool operator==(const CommunityStore&, const CommunityStore&) = default;

 private:
  struct Entry {
    std::vector<LocalCommunity> communities;
    std::vector<std::pair<NodeId, std::uint32_t>> member_index;  // sorted by member
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  std::vector<Entry> by_ego_;
};

/// Writes the store in canonical order.
void write_communities(const std::string& path, const CommunityStore& store, const Graph& g);
/// Reads a community file and checks that every ego's communities partition
/// its neighbourhood. Throws DataError otherwise.
CommunityStore read_communities(const std::string& path, const Graph& g);

/// One ClassResult per community, parallel to a CommunityStore.
class ClassResultStore {
 public:
  ClassResultStore() = default;
  explicit ClassResultStore(const CommunityStore& communities);

  std::size_t num_classes() const { return classes_; }
  void set(NodeId ego, std::uint32_t index, ClassResult r);
  /// Throws DataError when the result is missing.
  const ClassResult& get(NodeId ego, std::uint32_t index) const;
  bool has(NodeId ego, std::uint32_t index) const;

  friend bool operator==(const ClassResultStore&, const ClassResultStore&) = default;

 private:
  std::size_t classes_ = 0;
  std::vector<std::vector<ClassResult>> by_ego_;
};

void write_class_results(const std::string& path, const ClassResultStore& store, const CommunityStore& communities,
                         const Graph& g);
/// Throws DataError on unknown communities, inconsistent vector lengths,
/// vectors that are not probability distributions, or missing entries.
ClassResultStore read_class_results(const std::string& path, const CommunityStore& communities, const Graph& g);

/// tightness(member, community) for every (ego, member) pair, laid out
/// parallel to the graph's adjacency lists.
class TightnessStore {
 public:
  TightnessStore() = default;
  explicit TightnessStore(const Graph& g);

  void set_ego(NodeId ego, const std::vector<LocalCommunity>& communities, const EgoNetwork& net);
  /// Tightness of member in its community of ego's network.
  double get(NodeId ego, NodeId member) const;

 private:
  const Graph* g_ = nullptr;
  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
};

}  // namespace locec
