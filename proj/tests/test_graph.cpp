#include <fstream>
#include <random>

#include "doctest.h"
#include "locec/errors.hpp"
#include "locec/graph_io.hpp"
#include "test_support.hpp"

using namespace locec;
using locec::testing::temp_dir;

namespace {

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

GraphPaths paths_in(const std::filesystem::path& dir) {
  return {(dir / "edges.tsv").string(), (dir / "features.tsv").string(), (dir / "interactions.tsv").string()};
}

}  // namespace

TEST_CASE("load a triangle") {
  const auto dir = temp_dir("triangle");
  const auto p = paths_in(dir);
  write(p.edges, "# triangle\n10\t20\n20\t30\n30\t10\n");
  write(p.features, "#|f|=2\n10\t1,2\n20\t3,4\n30\t5,6\n");
  write(p.interactions, "#|I|=1\n10\t20\t7\n");
  const auto g = load_graph(p);
  CHECK(g.num_nodes() == 3);
  CHECK(g.num_edges() == 3);
  CHECK(g.feature_dim() == 2);
  CHECK(g.interaction_dim() == 1);
  CHECK(g.external_id(0) == 10);
  CHECK(g.interaction(0, 1, 0) == 7);
  CHECK(g.interaction(1, 0, 0) == 7);
  CHECK(g.interaction(1, 2, 0) == 0);
  // min-max normalised per dimension
  CHECK(g.features(0)[0] == 0.0);
  CHECK(g.features(1)[0] == 0.5);
  CHECK(g.features(2)[1] == 1.0);
}

TEST_CASE("load rejects malformed input with line numbers") {
  const auto dir = temp_dir("bad");
  const auto p = paths_in(dir);
  write(p.features, "#|f|=1\n");
  write(p.interactions, "#|I|=1\n");

  SUBCASE("self-loop") {
    write(p.edges, "1\t2\n5 5\n");
    try {
      load_graph(p);
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("self-loop") != std::string::npos);
    }
  }
  SUBCASE("malformed line") {
    write(p.edges, "1\t2\n\n3\tx\n");
    try {
      load_graph(p);
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("interaction on a non-edge") {
    // path 1-2-3; the chord 1-3 is missing
    write(p.edges, "1\t2\n2\t3\n");
    write(p.interactions, "#|I|=1\n1\t3\t4\n");
    CHECK_THROWS_AS(load_graph(p), DataError);
  }
  SUBCASE("feature length mismatch") {
    write(p.edges, "1\t2\n");
    write(p.features, "#|f|=2\n1\t0.5,0.5\n2\t0.5\n");
    try {
      load_graph(p);
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("missing header") {
    write(p.edges, "1\t2\n");
    write(p.features, "1\t0.5\n");
    CHECK_THROWS_AS(load_graph(p), DataError);
  }
}

TEST_CASE("duplicate and reversed edges collapse to one") {
  const auto g = locec::testing::make_graph(3, {{0, 1}, {1, 0}, {1, 2}, {0, 1}});
  CHECK(g.num_edges() == 2);
  CHECK(g.edge(0) == Edge{0, 1});
}

TEST_CASE("ego network of the running example") {
  const auto g = locec::testing::running_example();
  const auto net = ego_network(g, 1);
  CHECK(net.members == std::vector<NodeId>{2, 3, 4, 5, 6});
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < net.num_edges(); ++i) edges.push_back(net.global_edge(i));
  // U7 is not a friend of U1 and ego edges are dropped
  CHECK(edges == std::vector<Edge>{{2, 3}, {2, 4}, {3, 4}, {4, 6}, {5, 6}});
}

TEST_CASE("ego network edge cases") {
  SUBCASE("star centre") {
    const auto g = locec::testing::make_graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    const auto net = ego_network(g, 0);
    CHECK(net.size() == 4);
    CHECK(net.num_edges() == 0);
  }
  SUBCASE("clique closure") {
    const auto g = locec::testing::make_graph(5, locec::testing::clique_edges(0, 5));
    for (NodeId v = 0; v < 5; ++v) {
      const auto net = ego_network(g, v);
      CHECK(net.size() == 4);
      CHECK(net.num_edges() == 6);
    }
  }
  SUBCASE("isolated node") {
    const auto g = locec::testing::make_graph(3, {{0, 1}});
    const auto net = ego_network(g, 2);
    CHECK(net.size() == 0);
    CHECK(net.num_edges() == 0);
  }
}

TEST_CASE("ego network properties on random graphs") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + trial * 3;
    const auto g = locec::testing::make_graph(n, locec::testing::random_edges(n, 0.3, rng));
    std::size_t handshake = 0;
    for (NodeId v = 0; v < n; ++v) {
      const auto net = ego_network(g, v);
      CHECK(net.size() == g.degree(v));
      handshake += net.size();
      CHECK_FALSE(net.local_index(v).has_value());
      // member_edges is exactly the induced edge set
      std::size_t induced = 0;
      for (std::size_t a = 0; a < net.size(); ++a) {
        for (std::size_t b = a + 1; b < net.size(); ++b) {
          if (g.has_edge(net.members[a], net.members[b])) ++induced;
        }
      }
      CHECK(net.num_edges() == induced);
      for (std::size_t i = 0; i < net.num_edges(); ++i) {
        const auto e = net.global_edge(i);
        CHECK(g.has_edge(e.u, e.v));
        CHECK(g.has_edge(e.u, v));
        CHECK(g.has_edge(e.v, v));
      }
    }
    CHECK(handshake == 2 * g.num_edges());
  }
}

TEST_CASE("save and reload round-trips bit-identically") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-3.0, 9.0);
  std::uniform_int_distribution<Count> counts(0, 40);
  GraphBuilder b(3, 2);
  const auto edges = locec::testing::random_edges(30, 0.2, rng);
  for (const auto& [u, v] : edges) {
    b.add_edge(u * 7 + 100, v * 7 + 100);
    if (counts(rng) % 2) b.set_interactions(u * 7 + 100, v * 7 + 100, {counts(rng), counts(rng)});
  }
  for (ExternalId v = 0; v < 32; ++v) b.set_features(v * 7 + 100, {unit(rng), unit(rng), unit(rng)});
  const auto g = std::move(b).build();

  const auto dir = temp_dir("roundtrip");
  const auto p = paths_in(dir);
  save_graph(g, p);
  const auto h = load_graph(p);
  REQUIRE(h.num_nodes() == g.num_nodes());
  REQUIRE(h.num_edges() == g.num_edges());
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    CHECK(h.external_id(v) == g.external_id(v));
    for (std::size_t d = 0; d < 3; ++d) CHECK(h.features(v)[d] == g.features(v)[d]);
  }
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    CHECK(h.edge(e) == g.edge(e));
    CHECK(h.has_interaction_record(e) == g.has_interaction_record(e));
    for (std::size_t j = 0; j < 2; ++j) CHECK(h.interactions(e)[j] == g.interactions(e)[j]);
  }
  // second save is byte-identical to the first
  const auto dir2 = temp_dir("roundtrip2");
  const auto p2 = paths_in(dir2);
  save_graph(h, p2);
  for (auto [a, b2] : {std::pair{p.edges, p2.edges}, {p.features, p2.features}, {p.interactions, p2.interactions}}) {
    std::ifstream x(a), y(b2);
    std::string sx((std::istreambuf_iterator<char>(x)), {}), sy((std::istreambuf_iterator<char>(y)), {});
    CHECK(sx == sy);
  }
}

TEST_CASE("edge label files") {
  const auto dir = temp_dir("labels");
  const auto path = (dir / "labels.tsv").string();
  write(path, "5\t3\tfamily\n1\t2\tcolleague\n3\t5\tfamily\n");
  const auto labels = read_edge_labels(path);
  REQUIRE(labels.size() == 2);
  CHECK(labels[0] == LabeledEdge{1, 2, "colleague"});
  CHECK(labels[1] == LabeledEdge{3, 5, "family"});
  write(path, "5\t3\tfamily\n3\t5\tschoolmate\n");
  CHECK_THROWS_AS(read_edge_labels(path), DataError);
}
