#include "locec/community.hpp"

#include <algorithm>
#include <iostream>
#include <stdexcept>

namespace locec {
namespace {

/// Mutable view of an ego network used during edge removal.
class WorkGraph {
 public:
  explicit WorkGraph(const EgoNetwork& net)
      : n_(net.size()), edges_(net.member_edges), alive_(net.num_edges(), 1) {
    offsets_.assign(n_ + 1, 0);
    for (const auto& [a, b] : edges_) {
      ++offsets_[a + 1];
      ++offsets_[b + 1];
    }
    for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
    incident_.resize(offsets_[n_]);
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (std::uint32_t e = 0; e < edges_.size(); ++e) {
      const auto [a, b] = edges_[e];
      incident_[cursor[a]++] = {b, e};
      incident_[cursor[b]++] = {a, e};
    }
    dist_.assign(n_, -1);
    sigma_.assign(n_, 0.0);
    delta_.assign(n_, 0.0);
    order_.reserve(n_);
  }

  std::size_t num_nodes() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  bool alive(std::uint32_t e) const { return alive_[e] != 0; }
  void remove(std::uint32_t e) { alive_[e] = 0; }
  const std::pair<std::uint32_t, std::uint32_t>& edge(std::uint32_t e) const { return edges_[e]; }

  /// Adds the single-source dependency of s to every alive edge.
  void accumulate_from(std::uint32_t s, std::vector<double>& betweenness) {
    order_.clear();
    dist_[s] = 0;
    sigma_[s] = 1.0;
    order_.push_back(s);
    for (std::size_t head = 0; head < order_.size(); ++head) {
      const auto v = order_[head];
      for (auto i = offsets_[v]; i < offsets_[v + 1]; ++i) {
        const auto [w, e] = incident_[i];
        if (!alive_[e]) continue;
        if (dist_[w] < 0) {
          dist_[w] = dist_[v] + 1;
          order_.push_back(w);
        }
        if (dist_[w] == dist_[v] + 1) sigma_[w] += sigma_[v];
      }
    }
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      const auto w = *it;
      for (auto i = offsets_[w]; i < offsets_[w + 1]; ++i) {
        const auto [v, e] = incident_[i];
        if (!alive_[e] || dist_[v] != dist_[w] - 1) continue;
        const double c = sigma_[v] / sigma_[w] * (1.0 + delta_[w]);
        betweenness[e] += c;
        delta_[v] += c;
      }
    }
    for (const auto v : order_) {
      dist_[v] = -1;
      sigma_[v] = 0.0;
      delta_[v] = 0.0;
    }
  }

  /// Recomputes betweenness for the alive edges touching the given nodes'
  /// components (nodes must cover whole components).
  void recompute(const std::vector<std::uint32_t>& nodes, std::vector<double>& betweenness) {
    for (const auto v : nodes) {
      for (auto i = offsets_[v]; i < offsets_[v + 1]; ++i) betweenness[incident_[i].second] = 0.0;
    }
    for (const auto s : nodes) accumulate_from(s, betweenness);
    for (const auto v : nodes) {
      for (auto i = offsets_[v]; i < offsets_[v + 1]; ++i) {
        const auto [w, e] = incident_[i];
        if (v < w) betweenness[e] *= 0.5;
      }
    }
  }

  /// Nodes reachable from s over alive edges.
  std::vector<std::uint32_t> reach(std::uint32_t s) {
    std::vector<std::uint32_t> seen{s};
    dist_[s] = 0;
    for (std::size_t head = 0; head < seen.size(); ++head) {
      const auto v = seen[head];
      for (auto i = offsets_[v]; i < offsets_[v + 1]; ++i) {
        const auto [w, e] = incident_[i];
        if (alive_[e] && dist_[w] < 0) {
          dist_[w] = 0;
          seen.push_back(w);
        }
      }
    }
    for (const auto v : seen) dist_[v] = -1;
    return seen;
  }

 private:
  std::size_t n_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_;
  std::vector<std::uint8_t> alive_;
  std::vector<std::size_t> offsets_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> incident_;  // (neighbour, edge)
  std::vector<int> dist_;
  std::vector<double> sigma_;
  std::vector<double> delta_;
  std::vector<std::uint32_t> order_;
};

void canonicalize(PartitionLabels& labels) {
  std::vector<std::uint32_t> remap(labels.size() + 1, UINT32_MAX);
  std::uint32_t next = 0;
  for (auto& l : labels) {
    if (remap[l] == UINT32_MAX) remap[l] = next++;
    l = remap[l];
  }
}

PartitionLabels components(WorkGraph& wg) {
  PartitionLabels labels(wg.num_nodes(), UINT32_MAX);
  std::uint32_t next = 0;
  for (std::uint32_t v = 0; v < wg.num_nodes(); ++v) {
    if (labels[v] != UINT32_MAX) continue;
    for (const auto w : wg.reach(v)) labels[w] = next;
    ++next;
  }
  return labels;
}

std::vector<std::uint32_t> members_with_label(const PartitionLabels& labels, std::uint32_t label) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < labels.size(); ++v) {
    if (labels[v] == label) out.push_back(v);
  }
  return out;
}

/// Per-label (intra-edge count, degree sum) on the original network.
struct LabelMass {
  std::vector<double> internal_edges;
  std::vector<double> degree_sum;
};

LabelMass label_mass(const EgoNetwork& net, const PartitionLabels& labels, std::size_t num_labels) {
  LabelMass mass{std::vector<double>(num_labels, 0.0), std::vector<double>(num_labels, 0.0)};
  for (const auto& [a, b] : net.member_edges) {
    if (labels[a] == labels[b]) mass.internal_edges[labels[a]] += 1.0;
  }
  for (std::uint32_t v = 0; v < net.size(); ++v) mass.degree_sum[labels[v]] += static_cast<double>(net.degree(v));
  return mass;
}

double community_term(double internal_edges, double degree_sum, double m) {
  const double share = degree_sum / (2.0 * m);
  return internal_edges / m - share * share;
}

}  // namespace

bool LocalCommunity::contains(NodeId v) const {
  return std::binary_search(members.begin(), members.end(), v);
}

std::vector<std::vector<std::uint32_t>> partition_groups(const PartitionLabels& labels) {
  std::vector<std::vector<std::uint32_t>> groups;
  for (std::uint32_t v = 0; v < labels.size(); ++v) {
    if (labels[v] >= groups.size()) groups.resize(labels[v] + 1);
    groups[labels[v]].push_back(v);
  }
  return groups;
}

std::vector<double> edge_betweenness(const EgoNetwork& net) {
  WorkGraph wg(net);
  std::vector<double> betweenness(net.num_edges(), 0.0);
  std::vector<std::uint32_t> all(net.size());
  for (std::uint32_t v = 0; v < net.size(); ++v) all[v] = v;
  wg.recompute(all, betweenness);
  return betweenness;
}

double modularity(const EgoNetwork& net, const PartitionLabels& labels) {
  if (labels.size() != net.size()) throw std::invalid_argument("partition does not match ego network size");
  const double m = static_cast<double>(net.num_edges());
  if (m == 0.0) return 0.0;
  std::uint32_t num_labels = 0;
  for (const auto l : labels) num_labels = std::max(num_labels, l + 1);
  const auto mass = label_mass(net, labels, num_labels);
  double q = 0.0;
  for (std::uint32_t c = 0; c < num_labels; ++c) q += community_term(mass.internal_edges[c], mass.degree_sum[c], m);
  return q;
}

double modularity(const EgoNetwork& net, const std::vector<std::vector<std::uint32_t>>& groups) {
  PartitionLabels labels(net.size(), UINT32_MAX);
  for (std::uint32_t c = 0; c < groups.size(); ++c) {
    for (const auto v : groups[c]) {
      if (v >= net.size() || labels[v] != UINT32_MAX) {
        throw std::invalid_argument("partition groups must cover every member exactly once");
      }
      labels[v] = c;
    }
  }
  if (std::find(labels.begin(), labels.end(), UINT32_MAX) != labels.end()) {
    throw std::invalid_argument("partition groups must cover every member exactly once");
  }
  return modularity(net, labels);
}

Dendrogram girvan_newman(const EgoNetwork& net, const GnOptions& options) {
  const std::size_t every = std::max<std::size_t>(1, options.recompute_every);
  WorkGraph wg(net);
  Dendrogram dendrogram;
  PartitionLabels labels = components(wg);
  dendrogram.partitions.push_back(labels);
  dendrogram.steps.push_back({std::nullopt, 0, modularity(net, labels)});

  std::vector<double> betweenness(net.num_edges(), 0.0);
  std::vector<std::uint32_t> all(net.size());
  for (std::uint32_t v = 0; v < net.size(); ++v) all[v] = v;
  wg.recompute(all, betweenness);

  std::size_t since_recompute = 0;
  for (std::size_t removed = 0; removed < net.num_edges(); ++removed) {
    double best = -1.0;
    for (std::uint32_t e = 0; e < wg.num_edges(); ++e) {
      if (wg.alive(e)) best = std::max(best, betweenness[e]);
    }
    const double tolerance = 1e-9 * std::max(1.0, best);
    std::uint32_t chosen = 0;
    for (std::uint32_t e = 0; e < wg.num_edges(); ++e) {
      if (wg.alive(e) && betweenness[e] >= best - tolerance) {
        chosen = e;
        break;
      }
    }
    wg.remove(chosen);
    betweenness[chosen] = 0.0;
    const auto [a, b] = wg.edge(chosen);

    auto side = wg.reach(a);
    const bool split = std::find(side.begin(), side.end(), b) == side.end();
    if (split) {
      const auto fresh = static_cast<std::uint32_t>(net.size());
      for (const auto v : side) labels[v] = fresh;
      canonicalize(labels);
      dendrogram.partitions.push_back(labels);
    }
    dendrogram.steps.push_back({Edge{net.members[a], net.members[b]}, dendrogram.partitions.size() - 1,
                                modularity(net, labels)});

    if (++since_recompute >= every) {
      since_recompute = 0;
      if (every == 1) {
        // Only the component(s) that lost the edge can change.
        auto affected = members_with_label(labels, labels[a]);
        if (split) {
          const auto other = members_with_label(labels, labels[b]);
          affected.insert(affected.end(), other.begin(), other.end());
        }
        wg.recompute(affected, betweenness);
      } else {
        wg.recompute(all, betweenness);
      }
    }
  }
  return dendrogram;
}

std::vector<LocalCommunity> detect_local_communities(const EgoNetwork& net, const GnOptions& options) {
  std::vector<LocalCommunity> out;
  if (net.size() == 0) return out;
  if (net.size() > options.member_cap) {
    std::cerr << "warning: ego network of node " << net.ego << " has " << net.size()
              << " members (cap " << options.member_cap << "); using a single community\n";
    out.push_back({net.ego, 0, net.members});
    return out;
  }

  const auto dendrogram = girvan_newman(net, options);
  const auto& initial = dendrogram.partitions.front();
  std::uint32_t num_components = 0;
  for (const auto l : initial) num_components = std::max(num_components, l + 1);
  const double m = static_cast<double>(net.num_edges());

  // Each snapshot refines the initial components, so every community lies in
  // one component and modularity splits into per-component contributions.
  std::vector<std::size_t> chosen(num_components, 0);
  std::vector<double> best(num_components, 0.0);
  for (std::size_t p = 0; p < dendrogram.partitions.size(); ++p) {
    const auto& labels = dendrogram.partitions[p];
    std::uint32_t num_labels = 0;
    for (const auto l : labels) num_labels = std::max(num_labels, l + 1);
    std::vector<double> contribution(num_components, 0.0);
    if (m > 0.0) {
      const auto mass = label_mass(net, labels, num_labels);
      std::vector<std::uint32_t> component_of(num_labels, 0);
      for (std::uint32_t v = 0; v < net.size(); ++v) component_of[labels[v]] = initial[v];
      for (std::uint32_t c = 0; c < num_labels; ++c) {
        contribution[component_of[c]] += community_term(mass.internal_edges[c], mass.degree_sum[c], m);
      }
    }
    for (std::uint32_t k = 0; k < num_components; ++k) {
      if (p == 0 || contribution[k] > best[k] + 1e-12) {
        best[k] = contribution[k];
        chosen[k] = p;
      }
    }
  }

  // Group members by (component, label within the chosen snapshot).
  std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed(net.size());
  for (std::uint32_t v = 0; v < net.size(); ++v) {
    const auto k = initial[v];
    const auto label = dendrogram.partitions[chosen[k]][v];
    keyed[v] = {(std::uint64_t{k} << 32) | label, v};
  }
  std::vector<std::vector<std::uint32_t>> groups;
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    if (i == 0 || keyed[i].first != keyed[i - 1].first) groups.emplace_back();
    groups.back().push_back(keyed[i].second);
  }
  for (auto& g : groups) std::sort(g.begin(), g.end());
  std::sort(groups.begin(), groups.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });

  out.reserve(groups.size());
  for (std::uint32_t i = 0; i < groups.size(); ++i) {
    LocalCommunity c{net.ego, i, {}};
    c.members.reserve(groups[i].size());
    for (const auto v : groups[i]) c.members.push_back(net.members[v]);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace locec
