#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "doctest.h"
#include "locec/errors.hpp"
#include "locec/synthgen.hpp"
#include "test_support.hpp"

using namespace locec;
namespace lt = locec::testing;

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void join(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

/// Canonical form of a partition: sorted list of sorted blocks.
std::vector<std::vector<std::size_t>> blocks(UnionFind& uf, std::size_t n) {
  std::map<std::size_t, std::vector<std::size_t>> by_root;
  for (std::size_t v = 0; v < n; ++v) by_root[uf.find(v)].push_back(v);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [root, b] : by_root) out.push_back(b);
  std::sort(out.begin(), out.end());
  return out;
}

double edge_total(const Graph& g, ExternalId a, ExternalId b) {
  const auto u = *g.internal_id(a), v = *g.internal_id(b);
  double s = 0.0;
  for (std::size_t d = 0; d < g.interaction_dim(); ++d) s += g.interaction(u, v, d);
  return s;
}

/// Shared group types of every pair that shares at least one group.
std::map<std::pair<ExternalId, ExternalId>, std::set<GroupType>> shared_types(const std::vector<PlantedGroup>& groups) {
  std::map<std::pair<ExternalId, ExternalId>, std::set<GroupType>> out;
  for (const auto& grp : groups) {
    for (std::size_t i = 0; i < grp.members.size(); ++i) {
      for (std::size_t j = i + 1; j < grp.members.size(); ++j) out[{grp.members[i], grp.members[j]}].insert(grp.type);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("generation is deterministic") {
  GenConfig cfg;
  cfg.n_users = 100;
  cfg.seed = 42;
  const auto a = lt::temp_dir("gen_a"), b = lt::temp_dir("gen_b");
  write_synthetic(a.string(), generate(cfg));
  write_synthetic(b.string(), generate(cfg));
  for (const char* f : {"edges.tsv", "features.tsv", "interactions.tsv", "labels.tsv", "groups.tsv"}) {
    CAPTURE(f);
    CHECK(lt::read_text(a / f) == lt::read_text(b / f));
    CHECK_FALSE(lt::read_text(a / f).empty());
  }
  cfg.seed = 43;
  const auto c = lt::temp_dir("gen_c");
  write_synthetic(c.string(), generate(cfg));
  CHECK(lt::read_text(a / "edges.tsv") != lt::read_text(c / "edges.tsv"));
}

TEST_CASE("without cross-group edges the components follow the groups") {
  GenConfig cfg;
  cfg.n_users = 400;
  cfg.p_out = 0.0;
  cfg.p_in = 1.0;
  const auto data = generate(cfg);
  const auto n = data.graph.num_nodes();

  UnionFind by_groups(n);
  for (const auto& grp : data.groups) {
    for (auto m : grp.members) by_groups.join(*data.graph.internal_id(m), *data.graph.internal_id(grp.members[0]));
  }
  UnionFind by_edges(n);
  for (const auto& e : data.graph.edges()) by_edges.join(e.u, e.v);
  CHECK(blocks(by_groups, n) == blocks(by_edges, n));
  for (const auto& e : data.truth) CHECK(e.label != kOtherLabel);
}

TEST_CASE("edge labels agree with the planted groups") {
  GenConfig cfg;
  cfg.n_users = 1500;
  cfg.seed = 9;
  const auto data = generate(cfg);
  const auto shared = shared_types(data.groups);
  CHECK(data.truth.size() == data.graph.num_edges());

  std::set<std::pair<ExternalId, ExternalId>> seen;
  std::size_t other = 0;
  for (const auto& e : data.truth) {
    const auto key = std::minmax(e.u, e.v);
    CHECK(seen.insert(key).second);
    const auto it = shared.find(key);
    if (e.label == kOtherLabel) {
      ++other;
      CHECK(it == shared.end());
      continue;
    }
    REQUIRE(it != shared.end());
    // highest-precedence shared type
    CHECK(e.label == std::string(group_label(*it->second.begin())));
  }
  CHECK(other > 0);
  CHECK(other < data.truth.size());
}

TEST_CASE("sparsity and interaction profiles at the default size") {
  GenConfig cfg;
  const auto data = generate(cfg);
  const double zero = zero_interaction_fraction(data.graph);
  CHECK(zero >= 0.55);
  CHECK(zero <= 0.65);

  // Welch t statistic between intra-group and cross-group interaction totals
  std::vector<double> intra, inter;
  for (const auto& e : data.truth) (e.label == kOtherLabel ? inter : intra).push_back(edge_total(data.graph, e.u, e.v));
  auto mean_var = [](const std::vector<double>& x) {
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double v = 0.0;
    for (double a : x) v += (a - m) * (a - m);
    return std::pair{m, v / static_cast<double>(x.size() - 1)};
  };
  const auto [mi, vi] = mean_var(intra);
  const auto [mo, vo] = mean_var(inter);
  const double t = (mi - mo) / std::sqrt(vi / static_cast<double>(intra.size()) + vo / static_cast<double>(inter.size()));
  CHECK(mi > mo);
  CHECK(t > 5.0);
}

TEST_CASE("features are normalised") {
  GenConfig cfg;
  cfg.n_users = 300;
  const auto data = generate(cfg);
  REQUIRE(data.graph.feature_dim() == 3);
  for (std::size_t d = 0; d < 3; ++d) {
    double lo = 1e300, hi = -1e300;
    for (NodeId v = 0; v < data.graph.num_nodes(); ++v) {
      lo = std::min(lo, data.graph.features(v)[d]);
      hi = std::max(hi, data.graph.features(v)[d]);
    }
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
  }
}

TEST_CASE("generator config files") {
  SUBCASE("round trip") {
    GenConfig cfg;
    cfg.n_users = 1234;
    cfg.seed = 77;
    cfg.p_out = 0.01;
    cfg.rates_other = {0.5, 0.25, 0.0, 2.0};
    const auto back = parse_gen_config(format_gen_config(cfg));
    CHECK(back.n_users == 1234);
    CHECK(back.seed == 77);
    CHECK(back.p_out == 0.01);
    CHECK(back.rates_other == cfg.rates_other);
    CHECK(back.rates_family == cfg.rates_family);
    CHECK(format_gen_config(back) == format_gen_config(cfg));
  }
  SUBCASE("comments and whitespace") {
    const auto cfg = parse_gen_config("# small\n n_users = 50 \n\np_in=0.5\n");
    CHECK(cfg.n_users == 50);
    CHECK(cfg.p_in == 0.5);
  }
  SUBCASE("malformed input") {
    CHECK_THROWS_AS(parse_gen_config("colour=blue\n"), DataError);
    CHECK_THROWS_AS(parse_gen_config("p_in=high\n"), DataError);
    CHECK_THROWS_AS(parse_gen_config("n_users\n"), DataError);
  }
  SUBCASE("invalid values") {
    GenConfig cfg;
    cfg.p_in = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.family_mean = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.rates_colleague = {1.0, -1.0, 0.0, 0.0};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.p_in = 0.0;
    cfg.p_out = 0.0;
    CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  }
}

TEST_CASE("summaries") {
  SUBCASE("empty graph") {
    const auto g = lt::make_graph(0, {});
    const auto s = summarize(g, {}, {});
    CHECK(s.nodes == 0);
    CHECK(s.edges == 0);
    CHECK(s.mean_degree == 0.0);
    CHECK(s.zero_interaction_fraction == 0.0);
    CHECK(s.label_counts.empty());
  }
  SUBCASE("single family") {
    const auto g = lt::make_graph(4, lt::clique_edges(0, 4));
    std::vector<LabeledEdge> truth;
    for (const auto& [u, v] : lt::clique_edges(0, 4)) truth.push_back({u, v, "family"});
    const auto s = summarize(g, truth, {{GroupType::Family, {0, 1, 2, 3}}});
    CHECK(s.group_size_quantiles == std::vector<std::size_t>(5, 4));
    REQUIRE(s.label_counts.size() == 1);
    CHECK(s.label_counts[0] == std::pair<std::string, std::size_t>{"family", 6});
    CHECK(s.zero_interaction_fraction == 1.0);
  }
  SUBCASE("totals") {
    GenConfig cfg;
    cfg.n_users = 500;
    const auto data = generate(cfg);
    const auto s = summarize(data.graph, data.truth, data.groups);
    CHECK(s.nodes == 500);
    CHECK(s.edges == data.graph.num_edges());
    std::size_t labelled = 0;
    for (const auto& [label, count] : s.label_counts) labelled += count;
    CHECK(labelled == s.edges);
    CHECK(s.mean_degree == doctest::Approx(2.0 * static_cast<double>(s.edges) / 500.0));
  }
}
