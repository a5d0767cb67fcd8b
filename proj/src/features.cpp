#include "locec/features.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace locec {
namespace {

/// Per-member interaction totals with the rest of the community:
/// totals[i * dims + j] = sum over other members v of I^j(member_i, v).
std::vector<std::uint64_t> member_interaction_totals(const LocalCommunity& c, const Graph& g) {
  const std::size_t dims = g.interaction_dim();
  std::vector<std::uint64_t> totals(c.size() * dims, 0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto nbrs = g.neighbors(c.members[i]);
    const auto eids = g.incident_edges(c.members[i]);
    // Merge the sorted neighbour list against the sorted member list.
    std::size_t p = 0;
    std::size_t q = 0;
    while (p < nbrs.size() && q < c.size()) {
      if (nbrs[p] < c.members[q]) {
        ++p;
      } else if (c.members[q] < nbrs[p]) {
        ++q;
      } else {
        const auto counts = g.interactions(eids[p]);
        for (std::size_t j = 0; j < dims; ++j) totals[i * dims + j] += counts[j];
        ++p;
        ++q;
      }
    }
  }
  return totals;
}

std::size_t member_position(NodeId u, const LocalCommunity& c) {
  const auto it = std::lower_bound(c.members.begin(), c.members.end(), u);
  if (it == c.members.end() || *it != u) {
    throw std::invalid_argument("node " + std::to_string(u) + " is not a member of the community");
  }
  return static_cast<std::size_t>(it - c.members.begin());
}

std::vector<double> shares_from_totals(const std::vector<std::uint64_t>& totals, std::size_t members,
                                       std::size_t dims) {
  std::vector<std::uint64_t> pair_sum(dims, 0);
  for (std::size_t i = 0; i < members; ++i) {
    for (std::size_t j = 0; j < dims; ++j) pair_sum[j] += totals[i * dims + j];
  }
  // Every unordered pair was counted from both ends.
  for (auto& s : pair_sum) s /= 2;
  std::vector<double> shares(members * dims, 0.0);
  for (std::size_t i = 0; i < members; ++i) {
    for (std::size_t j = 0; j < dims; ++j) {
      if (pair_sum[j] > 0) {
        shares[i * dims + j] = static_cast<double>(totals[i * dims + j]) / static_cast<double>(pair_sum[j]);
      }
    }
  }
  return shares;
}

/// Members must be ascending for the merge-based lookups; callers may pass
/// communities in any order.
const LocalCommunity& sorted_community(const LocalCommunity& c, LocalCommunity& scratch) {
  if (std::is_sorted(c.members.begin(), c.members.end())) return c;
  scratch = c;
  std::sort(scratch.members.begin(), scratch.members.end());
  return scratch;
}

}  // namespace

double interact(NodeId u, const LocalCommunity& c, std::size_t dim, const Graph& g) {
  if (dim >= g.interaction_dim()) throw std::invalid_argument("interaction dimension out of range");
  return interaction_vector(u, c, g)[dim];
}

std::vector<double> interaction_vector(NodeId u, const LocalCommunity& community, const Graph& g) {
  LocalCommunity scratch;
  const auto& c = sorted_community(community, scratch);
  const std::size_t pos = member_position(u, c);
  const std::size_t dims = g.interaction_dim();
  const auto shares = shares_from_totals(member_interaction_totals(c, g), c.size(), dims);
  return {shares.begin() + static_cast<std::ptrdiff_t>(pos * dims),
          shares.begin() + static_cast<std::ptrdiff_t>((pos + 1) * dims)};
}

double tightness(NodeId u, const LocalCommunity& community, const EgoNetwork& net) {
  LocalCommunity scratch;
  const auto& c = sorted_community(community, scratch);
  member_position(u, c);
  if (c.size() == 1) return 1.0;
  const auto local = net.local_index(u);
  if (!local) throw std::invalid_argument("node " + std::to_string(u) + " is not in the ego network");
  const auto in_net = net.degree(*local);
  if (in_net == 0) return 0.0;
  std::size_t in_community = 0;
  for (const auto w : net.neighbors(*local)) {
    if (c.contains(net.members[w])) ++in_community;
  }
  const double k = static_cast<double>(in_community);
  return (k / static_cast<double>(in_net)) * (k / static_cast<double>(c.size() - 1));
}

std::vector<double> community_tightness(const LocalCommunity& community, const EgoNetwork& net) {
  LocalCommunity scratch;
  const auto& c = sorted_community(community, scratch);
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = tightness(c.members[i], c, net);
  return out;
}

std::size_t FeatureMatrix::filled_rows() const {
  return static_cast<std::size_t>(std::count_if(row_owners.begin(), row_owners.end(),
                                                [](NodeId v) { return v != kPadRow; }));
}

std::vector<std::vector<double>> member_rows(const LocalCommunity& community, const Graph& g) {
  LocalCommunity scratch;
  const auto& c = sorted_community(community, scratch);
  const std::size_t dims = g.interaction_dim();
  const auto shares = shares_from_totals(member_interaction_totals(c, g), c.size(), dims);
  std::vector<std::vector<double>> rows(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto& row = rows[i];
    row.reserve(dims + g.feature_dim());
    row.insert(row.end(), shares.begin() + static_cast<std::ptrdiff_t>(i * dims),
               shares.begin() + static_cast<std::ptrdiff_t>((i + 1) * dims));
    const auto f = g.features(c.members[i]);
    row.insert(row.end(), f.begin(), f.end());
  }
  return rows;
}

FeatureMatrix build_feature_matrix(const LocalCommunity& community, const Graph& g, const EgoNetwork& net,
                                   std::size_t k) {
  LocalCommunity scratch;
  const auto& c = sorted_community(community, scratch);
  if (k == 0) throw std::invalid_argument("feature matrix needs k >= 1");
  FeatureMatrix m;
  m.k = k;
  m.interaction_dim = g.interaction_dim();
  m.feature_dim = g.feature_dim();
  m.values.assign(k * m.width(), 0.0);
  m.row_owners.assign(k, kPadRow);
  m.row_tightness.assign(k, 0.0);

  const auto rows = member_rows(c, g);
  const auto tight = community_tightness(c, net);
  std::vector<std::size_t> order(c.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Members are sorted by id, so a stable sort on tightness keeps ties in
  // ascending id order.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return tight[a] > tight[b]; });

  const std::size_t take = std::min(k, c.size());
  for (std::size_t r = 0; r < take; ++r) {
    const auto i = order[r];
    std::copy(rows[i].begin(), rows[i].end(), m.values.begin() + static_cast<std::ptrdiff_t>(r * m.width()));
    m.row_owners[r] = c.members[i];
    m.row_tightness[r] = tight[i];
  }
  return m;
}

}  // namespace locec
