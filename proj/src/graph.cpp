#include "locec/graph.hpp"

#include <algorithm>
#include <string>

#include "locec/errors.hpp"

namespace locec {

std::optional<EdgeId> Graph::find_edge(NodeId a, NodeId b) const {
  if (a >= num_nodes() || b >= num_nodes() || a == b) return std::nullopt;
  if (degree(a) > degree(b)) std::swap(a, b);
  const auto nbrs = neighbors(a);
  const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), b);
  if (it == nbrs.end() || *it != b) return std::nullopt;
  return adjacency_edge_[offsets_[a] + static_cast<std::size_t>(it - nbrs.begin())];
}

Count Graph::interaction(NodeId a, NodeId b, std::size_t dim) const {
  const auto e = find_edge(a, b);
  return e ? interactions(*e)[dim] : 0;
}

std::optional<NodeId> Graph::internal_id(ExternalId ext) const {
  const auto it = internal_ids_.find(ext);
  if (it == internal_ids_.end()) return std::nullopt;
  return it->second;
}

GraphBuilder::GraphBuilder(std::size_t feature_dim, std::size_t interaction_dim)
    : feature_dim_(feature_dim), interaction_dim_(interaction_dim) {
  if (feature_dim == 0) throw DataError("feature dimension must be at least 1");
  if (interaction_dim == 0) throw DataError("interaction dimension must be at least 1");
}

void GraphBuilder::add_node(ExternalId v) { nodes_.push_back(v); }

void GraphBuilder::add_edge(ExternalId a, ExternalId b) {
  if (a == b) throw DataError("self-loop on node " + std::to_string(a));
  nodes_.push_back(a);
  nodes_.push_back(b);
  edges_.emplace_back(std::min(a, b), std::max(a, b));
}

void GraphBuilder::set_features(ExternalId v, std::vector<double> values) {
  if (values.size() != feature_dim_) {
    throw DataError("feature vector of node " + std::to_string(v) + " has length " +
                    std::to_string(values.size()) + ", expected " + std::to_string(feature_dim_));
  }
  if (!features_.emplace(v, std::move(values)).second) {
    throw DataError("duplicate feature record for node " + std::to_string(v));
  }
  nodes_.push_back(v);
}

void GraphBuilder::set_interactions(ExternalId a, ExternalId b, std::vector<Count> counts) {
  if (counts.size() != interaction_dim_) {
    throw DataError("interaction vector of pair " + std::to_string(a) + "-" + std::to_string(b) +
                    " has length " + std::to_string(counts.size()) + ", expected " +
                    std::to_string(interaction_dim_));
  }
  if (a == b) throw DataError("interaction record on self-pair " + std::to_string(a));
  interactions_.push_back({{std::min(a, b), std::max(a, b)}, std::move(counts)});
}

Graph GraphBuilder::build(bool normalize_features) && {
  Graph g;
  g.feature_dim_ = feature_dim_;
  g.interaction_dim_ = interaction_dim_;

  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
  g.external_ids_ = nodes_;
  g.internal_ids_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    g.internal_ids_.emplace(nodes_[i], static_cast<NodeId>(i));
  }
  const auto to_internal = [&](ExternalId x) { return g.internal_ids_.at(x); };

  // Ids are assigned in ascending external order, so canonical external
  // order equals canonical internal order.
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  const std::size_t n = nodes_.size();
  g.edges_.reserve(edges_.size());
  std::vector<std::size_t> deg(n, 0);
  for (const auto& [a, b] : edges_) {
    const Edge e{to_internal(a), to_internal(b)};
    g.edges_.push_back(e);
    ++deg[e.u];
    ++deg[e.v];
  }

  g.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + deg[i];
  g.adjacency_.resize(g.offsets_[n]);
  g.adjacency_edge_.resize(g.offsets_[n]);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  // Edges are sorted by (u, v), so filling in edge order leaves every
  // adjacency list sorted: all lower neighbours precede all higher ones.
  for (EdgeId id = 0; id < g.edges_.size(); ++id) {
    const auto [u, v] = g.edges_[id];
    g.adjacency_[cursor[u]] = v;
    g.adjacency_edge_[cursor[u]++] = id;
    g.adjacency_[cursor[v]] = u;
    g.adjacency_edge_[cursor[v]++] = id;
  }
  g.features_.assign(n * feature_dim_, 0.0);
  for (auto& [ext, values] : features_) {
    std::copy(values.begin(), values.end(), g.features_.begin() + to_internal(ext) * feature_dim_);
  }
  if (normalize_features && n > 0) {
    for (std::size_t d = 0; d < feature_dim_; ++d) {
      double lo = g.features_[d];
      double hi = g.features_[d];
      for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, g.features_[i * feature_dim_ + d]);
        hi = std::max(hi, g.features_[i * feature_dim_ + d]);
      }
      const double span = hi - lo;
      for (std::size_t i = 0; i < n; ++i) {
        double& x = g.features_[i * feature_dim_ + d];
        x = span > 0.0 ? (x - lo) / span : 0.0;
      }
    }
  }

  g.interactions_.assign(g.edges_.size() * interaction_dim_, 0);
  g.has_record_.assign(g.edges_.size(), 0);
  for (auto& [pair, counts] : interactions_) {
    const auto a = g.internal_id(pair.first);
    const auto b = g.internal_id(pair.second);
    const auto e = (a && b) ? g.find_edge(*a, *b) : std::nullopt;
    if (!e) {
      throw DataError("interaction record for non-edge " + std::to_string(pair.first) + "-" +
                      std::to_string(pair.second));
    }
    if (g.has_record_[*e]) {
      throw DataError("duplicate interaction record for pair " + std::to_string(pair.first) + "-" +
                      std::to_string(pair.second));
    }
    g.has_record_[*e] = 1;
    std::copy(counts.begin(), counts.end(), g.interactions_.begin() + std::size_t{*e} * interaction_dim_);
  }
  return g;
}

std::optional<std::uint32_t> EgoNetwork::local_index(NodeId v) const {
  const auto it = std::lower_bound(members.begin(), members.end(), v);
  if (it == members.end() || *it != v) return std::nullopt;
  return static_cast<std::uint32_t>(it - members.begin());
}

EgoNetwork ego_network(const Graph& g, NodeId v) {
  EgoNetwork net;
  net.ego = v;
  const auto nbrs = g.neighbors(v);
  net.members.assign(nbrs.begin(), nbrs.end());
  const std::size_t n = net.members.size();

  std::vector<std::vector<std::uint32_t>> local_adj(n);
  for (std::uint32_t a = 0; a < n; ++a) {
    // Sorted merge of neighbors(member a) against the member list, keeping
    // only partners with a larger local index.
    const auto an = g.neighbors(net.members[a]);
    auto it = std::upper_bound(an.begin(), an.end(), net.members[a]);
    std::uint32_t b = a + 1;
    while (it != an.end() && b < n) {
      if (*it < net.members[b]) {
        ++it;
      } else if (net.members[b] < *it) {
        ++b;
      } else {
        net.member_edges.emplace_back(a, b);
        local_adj[a].push_back(b);
        local_adj[b].push_back(a);
        ++it;
        ++b;
      }
    }
  }
  net.offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) net.offsets[i + 1] = net.offsets[i] + local_adj[i].size();
  net.adjacency.reserve(net.offsets[n]);
  for (auto& row : local_adj) {
    // Rows already ascend: lower partners are appended before higher ones.
    net.adjacency.insert(net.adjacency.end(), row.begin(), row.end());
  }
  return net;
}

}  // namespace locec
