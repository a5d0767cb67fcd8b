#include "locec/stores.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "locec/errors.hpp"
#include "locec/features.hpp"
#include "locec/text_io.hpp"

namespace locec {

namespace {

NodeId lookup_node(const Graph& g, std::string_view field, const std::string& path, std::size_t line) {
  ExternalId ext = 0;
  if (!text::parse_number(field, ext)) throw DataError(path, line, "invalid node id '" + std::string(field) + "'");
  const auto id = g.internal_id(ext);
  if (!id) throw DataError(path, line, "unknown node " + std::string(field));
  return *id;
}

std::uint32_t parse_index(std::string_view field, const std::string& path, std::size_t line) {
  std::uint32_t x = 0;
  if (!text::parse_number(field, x)) throw DataError(path, line, "invalid community index '" + std::string(field) + "'");
  return x;
}

std::vector<std::string_view> tab_fields(std::string_view line, std::size_t expected, const std::string& path,
                                         std::size_t number) {
  auto fields = text::split(line, '\t');
  if (fields.size() != expected) {
    throw DataError(path, number, "expected " + std::to_string(expected) + " tab-separated fields");
  }
  return fields;
}

bool skip(std::string_view line) {
  const auto t = text::trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace

void CommunityStore::set(NodeId ego, std::vector<LocalCommunity> communities) {
  auto& e = by_ego_.at(ego);
  e.member_index.clear();
  for (const auto& c : communities) {
    for (auto m : c.members) e.member_index.emplace_back(m, c.index);
  }
  std::sort(e.member_index.begin(), e.member_index.end());
  e.communities = std::move(communities);
}

std::size_t CommunityStore::total_communities() const {
  std::size_t n = 0;
  for (const auto& e : by_ego_) n += e.communities.size();
  return n;
}

std::uint32_t CommunityStore::community_of(NodeId ego, NodeId member) const {
  if (ego >= by_ego_.size()) throw DataError("node " + std::to_string(ego) + " is outside the community store");
  const auto& idx = by_ego_[ego].member_index;
  const auto it = std::lower_bound(idx.begin(), idx.end(), std::pair<NodeId, std::uint32_t>{member, 0});
  if (it == idx.end() || it->first != member) {
    throw DataError("no local community of ego " + std::to_string(ego) + " contains node " + std::to_string(member) +
                    " (community detection incomplete?)");
  }
  return it->second;
}

void write_communities(const std::string& path, const CommunityStore& store, const Graph& g) {
  auto out = text::open_output(path);
  for (NodeId ego = 0; ego < store.num_nodes(); ++ego) {
    for (const auto& c : store.communities(ego)) {
      out << g.external_id(ego) << '\t' << c.index << '\t';
      for (std::size_t i = 0; i < c.members.size(); ++i) out << (i ? "," : "") << g.external_id(c.members[i]);
      out << '\n';
    }
  }
  if (!out) throw DataError("failed writing " + path);
}

CommunityStore read_communities(const std::string& path, const Graph& g) {
  std::vector<std::map<std::uint32_t, LocalCommunity>> parsed(g.num_nodes());
  text::for_each_line(path, [&](std::string_view line, std::size_t number) {
    if (skip(line)) return;
    const auto f = tab_fields(line, 3, path, number);
    const NodeId ego = lookup_node(g, f[0], path, number);
    const std::uint32_t index = parse_index(f[1], path, number);
    LocalCommunity c{ego, index, {}};
    for (const auto m : text::split(f[2], ',')) {
      const NodeId v = lookup_node(g, m, path, number);
      if (!g.has_edge(ego, v)) {
        throw DataError(path, number, "node " + std::string(text::trim(m)) + " is not a neighbour of the ego");
      }
      c.members.push_back(v);
    }
    std::sort(c.members.begin(), c.members.end());
    if (std::adjacent_find(c.members.begin(), c.members.end()) != c.members.end()) {
      throw DataError(path, number, "duplicate member");
    }
    if (!parsed[ego].emplace(index, std::move(c)).second) {
      throw DataError(path, number, "duplicate community index " + std::to_string(index));
    }
  });

  CommunityStore store(g.num_nodes());
  for (NodeId ego = 0; ego < g.num_nodes(); ++ego) {
    std::vector<LocalCommunity> list;
    std::vector<NodeId> covered;
    for (auto& [index, c] : parsed[ego]) {
      if (index != list.size()) throw DataError(path + ": community indices of ego " +
                                                std::to_string(g.external_id(ego)) + " are not contiguous from 0");
      covered.insert(covered.end(), c.members.begin(), c.members.end());
      list.push_back(std::move(c));
    }
    std::sort(covered.begin(), covered.end());
    const auto nb = g.neighbors(ego);
    if (!std::equal(covered.begin(), covered.end(), nb.begin(), nb.end())) {
      throw DataError(path + ": communities of ego " + std::to_string(g.external_id(ego)) +
                      " do not partition its neighbours");
    }
    store.set(ego, std::move(list));
  }
  return store;
}

ClassResultStore::ClassResultStore(const CommunityStore& communities) : by_ego_(communities.num_nodes()) {
  for (NodeId ego = 0; ego < communities.num_nodes(); ++ego) by_ego_[ego].resize(communities.communities(ego).size());
}

void ClassResultStore::set(NodeId ego, std::uint32_t index, ClassResult r) {
  auto& slot = by_ego_.at(ego).at(index);
  if (classes_ == 0) classes_ = r.probabilities.size();
  if (r.probabilities.size() != classes_) throw ShapeError("class result length differs from earlier results");
  slot = std::move(r);
}

bool ClassResultStore::has(NodeId ego, std::uint32_t index) const {
  return ego < by_ego_.size() && index < by_ego_[ego].size() && !by_ego_[ego][index].probabilities.empty();
}

const ClassResult& ClassResultStore::get(NodeId ego, std::uint32_t index) const {
  if (!has(ego, index)) {
    throw DataError("missing class result for community " + std::to_string(index) + " of node " + std::to_string(ego));
  }
  return by_ego_[ego][index];
}

void write_class_results(const std::string& path, const ClassResultStore& store, const CommunityStore& communities,
                         const Graph& g) {
  auto out = text::open_output(path);
  for (NodeId ego = 0; ego < communities.num_nodes(); ++ego) {
    for (const auto& c : communities.communities(ego)) {
      out << g.external_id(ego) << '\t' << c.index << '\t' << text::join_doubles(store.get(ego, c.index).probabilities)
          << '\n';
    }
  }
  if (!out) throw DataError("failed writing " + path);
}

ClassResultStore read_class_results(const std::string& path, const CommunityStore& communities, const Graph& g) {
  ClassResultStore store(communities);
  std::size_t classes = 0;
  text::for_each_line(path, [&](std::string_view line, std::size_t number) {
    if (skip(line)) return;
    const auto f = tab_fields(line, 3, path, number);
    const NodeId ego = lookup_node(g, f[0], path, number);
    const std::uint32_t index = parse_index(f[1], path, number);
    if (index >= communities.communities(ego).size()) throw DataError(path, number, "unknown community");
    std::vector<double> p;
    for (const auto part : text::split(f[2], ',')) {
      double x = 0;
      if (!text::parse_number(part, x) || !(x >= 0.0)) throw DataError(path, number, "invalid probability");
      p.push_back(x);
    }
    if (classes == 0) classes = p.size();
    if (p.size() != classes) throw DataError(path, number, "probability vector length differs from earlier lines");
    double sum = 0.0;
    for (double x : p) sum += x;
    if (std::abs(sum - 1.0) > 1e-9) throw DataError(path, number, "probabilities do not sum to 1");
    if (store.has(ego, index)) throw DataError(path, number, "duplicate class result");
    store.set(ego, index, make_class_result(std::move(p)));
  });
  for (NodeId ego = 0; ego < communities.num_nodes(); ++ego) {
    for (const auto& c : communities.communities(ego)) {
      if (!store.has(ego, c.index)) {
        throw DataError(path + ": no class result for community " + std::to_string(c.index) + " of node " +
                        std::to_string(g.external_id(ego)));
      }
    }
  }
  return store;
}

TightnessStore::TightnessStore(const Graph& g) : g_(&g), offsets_(g.num_nodes() + 1, 0) {
  for (NodeId v = 0; v < g.num_nodes(); ++v) offsets_[v + 1] = offsets_[v] + g.degree(v);
  values_.assign(offsets_.back(), 0.0);
}

void TightnessStore::set_ego(NodeId ego, const std::vector<LocalCommunity>& communities, const EgoNetwork& net) {
  const auto nb = g_->neighbors(ego);
  for (const auto& c : communities) {
    const auto t = community_tightness(c, net);
    for (std::size_t i = 0; i < c.members.size(); ++i) {
      const auto pos = std::lower_bound(nb.begin(), nb.end(), c.members[i]) - nb.begin();
      values_[offsets_[ego] + static_cast<std::size_t>(pos)] = t[i];
    }
  }
}

double TightnessStore::get(NodeId ego, NodeId member) const {
  const auto nb = g_->neighbors(ego);
  const auto it = std::lower_bound(nb.begin(), nb.end(), member);
  if (it == nb.end() || *it != member) throw DataError("node " + std::to_string(member) + " is not a neighbour");
  return values_[offsets_[ego] + static_cast<std::size_t>(it - nb.begin())];
}

}  // namespace locec
