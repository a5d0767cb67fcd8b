#include <cmath>
#include <random>

#include "doctest.h"
#include "locec/community.hpp"
#include "test_support.hpp"

using namespace locec;
namespace lt = locec::testing;

namespace {

std::vector<std::vector<NodeId>> member_sets(const std::vector<LocalCommunity>& cs) {
  std::vector<std::vector<NodeId>> out;
  for (const auto& c : cs) out.push_back(c.members);
  return out;
}

PartitionLabels labels_of(const EgoNetwork& net, const std::vector<LocalCommunity>& cs) {
  PartitionLabels labels(net.size(), 0);
  for (std::uint32_t i = 0; i < cs.size(); ++i) {
    for (const auto v : cs[i].members) labels[*net.local_index(v)] = i;
  }
  return labels;
}

}  // namespace

TEST_CASE("betweenness on a path counts each unordered pair once") {
  const auto net = lt::as_ego_network(3, {{0, 1}, {1, 2}});
  const auto b = edge_betweenness(net);
  REQUIRE(b.size() == 2);
  CHECK(b[0] == doctest::Approx(2.0));
  CHECK(b[1] == doctest::Approx(2.0));
}

TEST_CASE("betweenness is symmetric on a triangle") {
  const auto net = lt::as_ego_network(3, lt::clique_edges(0, 3));
  const auto b = edge_betweenness(net);
  CHECK(b[0] == doctest::Approx(1.0));
  CHECK(b[1] == doctest::Approx(b[0]));
  CHECK(b[2] == doctest::Approx(b[0]));
}

TEST_CASE("bridge between two 4-cliques has the largest betweenness") {
  auto edges = lt::clique_edges(0, 4);
  auto second = lt::clique_edges(4, 4);
  edges.insert(edges.end(), second.begin(), second.end());
  edges.emplace_back(3, 4);
  const auto net = lt::as_ego_network(8, edges);
  const auto b = edge_betweenness(net);
  const auto oracle = lt::brute_force_betweenness(net);
  std::size_t bridge = 0;
  for (std::size_t i = 0; i < net.num_edges(); ++i) {
    if (net.member_edges[i] == std::pair<std::uint32_t, std::uint32_t>{3, 4}) bridge = i;
    CHECK(b[i] == doctest::Approx(oracle.at(net.member_edges[i])));
  }
  CHECK(b[bridge] == doctest::Approx(16.0));  // 4 x 4 separated pairs
  for (std::size_t i = 0; i < net.num_edges(); ++i) {
    if (i != bridge) CHECK(b[i] < b[bridge]);
  }
}

TEST_CASE("Brandes matches path enumeration on random graphs") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t n = 4 + trial % 8;
    const auto net = lt::as_ego_network(n, lt::random_edges(n, 0.45, rng));
    const auto b = edge_betweenness(net);
    const auto oracle = lt::brute_force_betweenness(net);
    for (std::size_t i = 0; i < net.num_edges(); ++i) {
      CHECK(std::abs(b[i] - oracle.at(net.member_edges[i])) <= 1e-9);
    }
  }
}

TEST_CASE("modularity values") {
  SUBCASE("one community covering everything") {
    const auto net = lt::as_ego_network(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}});
    CHECK(std::abs(modularity(net, PartitionLabels(5, 0))) < 1e-15);
  }
  SUBCASE("singletons on a triangle") {
    const auto net = lt::as_ego_network(3, lt::clique_edges(0, 3));
    CHECK(modularity(net, PartitionLabels{0, 1, 2}) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  }
  SUBCASE("two 6-cliques and a bridge") {
    const auto g = lt::two_cliques_with_bridge(6, 12);
    const auto net = ego_network(g, 12);
    PartitionLabels cliques(12, 0);
    for (std::size_t i = 6; i < 12; ++i) cliques[i] = 1;
    CHECK(std::abs(modularity(net, cliques) - lt::brute_force_modularity(net, cliques)) < 1e-12);
  }
  SUBCASE("edgeless network") {
    const auto net = lt::as_ego_network(3, {});
    CHECK(modularity(net, PartitionLabels{0, 1, 2}) == 0.0);
  }
  SUBCASE("groups must cover members once") {
    const auto net = lt::as_ego_network(3, lt::clique_edges(0, 3));
    CHECK_THROWS_AS(modularity(net, std::vector<std::vector<std::uint32_t>>{{0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(modularity(net, std::vector<std::vector<std::uint32_t>>{{0, 1}, {1, 2}}), std::invalid_argument);
  }
}

TEST_CASE("running example splits into C1 and C2") {
  const auto g = lt::running_example();
  const auto net = ego_network(g, 1);
  const auto cs = detect_local_communities(net);
  CHECK(member_sets(cs) == std::vector<std::vector<NodeId>>{{2, 3, 4}, {5, 6}});
  CHECK(cs[0].index == 0);
  CHECK(cs[1].index == 1);
  CHECK(cs[0].ego == 1);
}

TEST_CASE("edgeless ego network gives singletons") {
  const auto g = lt::make_graph(4, {{0, 1}, {0, 2}, {0, 3}});
  const auto cs = detect_local_communities(ego_network(g, 0));
  CHECK(member_sets(cs) == std::vector<std::vector<NodeId>>{{1}, {2}, {3}});
}

TEST_CASE("empty ego network gives no communities") {
  const auto g = lt::make_graph(2, {});
  CHECK(detect_local_communities(ego_network(g, 0)).empty());
}

TEST_CASE("two 6-cliques joined by a bridge are recovered and are the best 2-split") {
  const auto g = lt::two_cliques_with_bridge(6, 12);
  const auto net = ego_network(g, 12);
  const auto cs = detect_local_communities(net);
  CHECK(member_sets(cs) == std::vector<std::vector<NodeId>>{{0, 1, 2, 3, 4, 5}, {6, 7, 8, 9, 10, 11}});

  // Oracle: enumerate every 2-partition and confirm the clique split has the
  // highest modularity.
  const auto found = lt::brute_force_modularity(net, labels_of(net, cs));
  double best = -1.0;
  for (std::uint32_t mask = 1; mask < (1u << 11); ++mask) {
    PartitionLabels labels(12, 0);
    for (std::size_t i = 0; i < 11; ++i) labels[i + 1] = (mask >> i) & 1u;
    best = std::max(best, lt::brute_force_modularity(net, labels));
  }
  CHECK(std::abs(found - best) < 1e-12);
}

TEST_CASE("disjoint cliques come back exactly") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::pair<ExternalId, ExternalId>> edges;
    std::vector<std::vector<NodeId>> expected;
    ExternalId next = 0;
    const int cliques = 1 + trial % 4;
    for (int c = 0; c < cliques; ++c) {
      const ExternalId size = 1 + rng() % 6;
      auto ce = lt::clique_edges(next, size);
      edges.insert(edges.end(), ce.begin(), ce.end());
      expected.emplace_back();
      for (ExternalId v = next; v < next + size; ++v) expected.back().push_back(static_cast<NodeId>(v));
      next += size;
    }
    const auto net = lt::as_ego_network(next, edges);
    CHECK(member_sets(detect_local_communities(net)) == expected);
  }
}

TEST_CASE("dendrogram invariants and modularity peak") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 6 + trial % 10;
    const auto net = lt::as_ego_network(n, lt::random_edges(n, 0.35, rng));
    const auto d = girvan_newman(net);
    CHECK(d.steps.size() == net.num_edges() + 1);
    for (std::size_t p = 1; p < d.partitions.size(); ++p) {
      // each snapshot refines the previous one
      const auto& prev = d.partitions[p - 1];
      const auto& cur = d.partitions[p];
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
          if (cur[a] == cur[b]) CHECK(prev[a] == prev[b]);
        }
      }
    }
    for (const auto& s : d.steps) {
      CHECK(s.modularity >= -0.5);
      CHECK(s.modularity <= 1.0);
    }
    const auto cs = detect_local_communities(net);
    // covering and disjoint
    std::vector<int> seen(n, 0);
    for (const auto& c : cs) {
      for (auto v : c.members) ++seen[*net.local_index(v)];
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int x) { return x == 1; }));
    const double q = modularity(net, labels_of(net, cs));
    for (const auto& s : d.steps) CHECK(q >= s.modularity - 1e-12);
    // determinism
    CHECK(member_sets(detect_local_communities(net)) == member_sets(cs));
  }
}

TEST_CASE("ties remove the canonically smallest edge first") {
  // 4-cycle: all edges carry betweenness 2
  const auto net = lt::as_ego_network(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  const auto d = girvan_newman(net);
  REQUIRE(d.steps.size() == 5);
  CHECK(d.steps[1].removed_edge == Edge{0, 1});
}

TEST_CASE("recompute knob and member cap") {
  const auto g = lt::two_cliques_with_bridge(6, 12);
  const auto net = ego_network(g, 12);
  GnOptions lazy;
  lazy.recompute_every = 3;
  CHECK(girvan_newman(net, lazy).steps.size() == net.num_edges() + 1);
  CHECK(detect_local_communities(net, lazy).size() >= 1);

  GnOptions capped;
  capped.member_cap = 5;
  const auto cs = detect_local_communities(net, capped);
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].size() == 12);
}
