/// Per-community member features: interaction shares, tightness, and the
/// tightness-ordered k-row feature matrix.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "locec/community.hpp"
#include "locec/graph.hpp"

namespace locec {

/// Share of community C's activity on interaction dimension `dim` (0-based)
/// that involves u: the sum of u's counts with the other members divided by
/// the sum over all unordered member pairs. Zero when the community has no
/// activity on that dimension. Throws std::invalid_argument if u is not in C.
double interact(NodeId u, const LocalCommunity& c, std::size_t dim, const Graph& g);

/// interact() for every dimension.
std::vector<double> interaction_vector(NodeId u, const LocalCommunity& c, const Graph& g);

/// How exclusively and densely u is tied to its community inside the ego
/// network: 1 for a singleton community, otherwise
///   (friends in C / friends in net) * (friends in C / (|C| - 1)),
/// and 0 when u has no friends in the ego network at all.
double tightness(NodeId u, const LocalCommunity& c, const EgoNetwork& net);

/// Tightness of every member of c, in member order. Same values as
/// tightness() but computed in one pass.
std::vector<double> community_tightness(const LocalCommunity& c, const EgoNetwork& net);

inline constexpr NodeId kPadRow = kInvalidNode;

/// k rows of [interaction shares, individual features]; rows are members in
/// order of decreasing tightness (ties by ascending id), zero PAD rows after
/// the last member.
struct FeatureMatrix {
  std::size_t k = 0;
  std::size_t interaction_dim = 0;
  std::size_t feature_dim = 0;
  std::vector<double> values;       // row-major, k * width()
  std::vector<NodeId> row_owners;   // member id or kPadRow
  std::vector<double> row_tightness;

  std::size_t width() const { return interaction_dim + feature_dim; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * width(), width()}; }
  double at(std::size_t r, std::size_t col) const { return values[r * width() + col]; }
  std::size_t filled_rows() const;
};

/// Rows [I_u^C, f_u] for every member of c (in member order), without
/// ordering or padding.
std::vector<std::vector<double>> member_rows(const LocalCommunity& c, const Graph& g);

/// Builds the k-row feature matrix; throws std::invalid_argument if k == 0.
FeatureMatrix build_feature_matrix(const LocalCommunity& c, const Graph& g, const EgoNetwork& net,
                                   std::size_t k);

}  // namespace locec
