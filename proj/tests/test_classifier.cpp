#include <cmath>
#include <random>

#include "doctest.h"
#include "locec/classifier.hpp"
#include "locec/errors.hpp"
#include "locec/model_io.hpp"
#include "locec/softmax_regression.hpp"
#include "locec/text_io.hpp"
#include "test_support.hpp"

using namespace locec;
namespace lt = locec::testing;

namespace {

/// Three Gaussian blobs in `dim` dimensions, centred at distinct corners.
RegressionData blobs(std::size_t per_class, std::size_t dim, double spread, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, spread);
  RegressionData d;
  for (std::size_t i = 0; i < per_class * 3; ++i) {
    const std::size_t c = i % 3;
    std::vector<double> x(dim);
    for (std::size_t j = 0; j < dim; ++j) x[j] = (j % 3 == c ? 1.0 : 0.0) + noise(rng);
    d.add(x, c);
  }
  return d;
}

double accuracy(const SoftmaxRegression& m, const RegressionData& d) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.size(); ++i) ok += m.predict(d.row(i)).label == d.y[i];
  return static_cast<double>(ok) / static_cast<double>(d.size());
}

/// Plain full-batch gradient descent on the same objective, used as an
/// independent reference optimum.
double gradient_descent_optimum(const RegressionData& d, std::size_t classes, const RegressionConfig& cfg) {
  SoftmaxRegression m(d.dim, classes);
  auto theta = m.flatten();
  std::vector<double> g;
  double loss = 0.0;
  for (int it = 0; it < 200000; ++it) {
    m.unflatten(theta);
    loss = regression_objective(m, d, cfg, &g);
    double norm = 0.0;
    for (double x : g) norm = std::max(norm, std::abs(x));
    if (norm < 1e-9) break;
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= 0.5 * g[i];
  }
  return loss;
}

}  // namespace

TEST_CASE("label sets") {
  const auto l = LabelSet::defaults();
  CHECK(l.size() == 3);
  CHECK(l.name(0) == "family");
  CHECK(l.index_of("schoolmate") == 2u);
  CHECK(!l.index_of("other"));
  CHECK(LabelSet::parse("a, b,c").names() == std::vector<std::string>{"a", "b", "c"});
  CHECK(l.joined() == "family,colleague,schoolmate");
  CHECK_THROWS_AS(LabelSet({}), std::invalid_argument);
  CHECK_THROWS_AS(LabelSet({"a", "a"}), std::invalid_argument);
  CHECK_THROWS_AS(LabelSet({"a b"}), std::invalid_argument);
}

TEST_CASE("softmax contract") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 30.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> logits(2 + trial % 5);
    for (auto& x : logits) x = z(rng);
    const auto r = class_result_from_logits(logits);
    double sum = 0.0;
    for (double p : r.probabilities) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
    auto shifted = logits;
    for (auto& x : shifted) x += 1234.5;
    CHECK(class_result_from_logits(shifted).label == r.label);
  }
  CHECK(class_result_from_logits(std::vector<double>{1.0, 1.0, 0.0}).label == 0);
}

TEST_CASE("regression gradient matches central differences") {
  std::mt19937_64 rng(2);
  auto d = blobs(10, 5, 0.5, rng);
  for (const bool weighted : {false, true}) {
    RegressionConfig cfg;
    cfg.l2 = 0.3;
    cfg.class_weighting = weighted;
    SoftmaxRegression m(5, 3);
    std::normal_distribution<double> w(0.0, 1.0);
    for (auto& x : m.weights()) x = w(rng);
    for (auto& x : m.bias()) x = w(rng);
    std::vector<double> g;
    regression_objective(m, d, cfg, &g);
    std::vector<double*> coords;
    for (auto& x : m.weights()) coords.push_back(&x);
    for (auto& x : m.bias()) coords.push_back(&x);
    const double err = lt::max_gradient_error(coords, g, [&] { return regression_objective(m, d, cfg); });
    CHECK(err < 1e-6);
  }
}

TEST_CASE("L-BFGS reaches the convex optimum") {
  std::mt19937_64 rng(3);
  const auto d = blobs(30, 4, 0.8, rng);
  RegressionConfig cfg;
  cfg.l2 = 1e-2;
  RegressionReport report;
  const auto m = regression_train(d, 3, cfg, &report);
  const double reference = gradient_descent_optimum(d, 3, cfg);
  CHECK(std::abs(report.loss - reference) <= 1e-6);
  CHECK(report.loss == doctest::Approx(regression_objective(m, d, cfg)).epsilon(1e-15));
  // restarts from random points agree
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    cfg.seed = seed;
    RegressionReport r;
    regression_train(d, 3, cfg, &r);
    CHECK(std::abs(r.loss - report.loss) <= 1e-6);
  }
}

TEST_CASE("separable aggregates are classified correctly") {
  std::mt19937_64 rng(4);
  const auto train = blobs(50, 6, 0.05, rng);
  const auto test = blobs(50, 6, 0.05, rng);
  const auto m = baseline_train(train, 3);
  CHECK(accuracy(m, train) >= 0.99);
  CHECK(accuracy(m, test) >= 0.99);
}

TEST_CASE("zero features give the class prior, which is uniform when balanced") {
  RegressionData d;
  for (std::size_t i = 0; i < 9; ++i) d.add(std::vector<double>{0.0, 0.0}, i % 3);
  const auto m = baseline_train(d, 3);
  for (double p : baseline_classify(m, std::vector<double>{0.0, 0.0}).probabilities) {
    CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  }
  const SoftmaxRegression zero(2, 3);
  const auto r = zero.predict(std::vector<double>{5.0, -1.0});
  CHECK(r.label == 0);
  for (double p : r.probabilities) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("strong regularisation drives predictions to the prior") {
  std::mt19937_64 rng(5);
  RegressionData d;
  std::normal_distribution<double> x(0.0, 1.0);
  const std::size_t counts[3] = {10, 30, 60};
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < counts[c]; ++i) d.add(std::vector<double>{x(rng) + double(c), x(rng)}, c);
  RegressionConfig cfg;
  cfg.l2 = 1e8;
  const auto m = regression_train(d, 3, cfg);
  for (double w : m.weights()) CHECK(std::abs(w) < 1e-6);
  const auto r = m.predict(std::vector<double>{3.0, -2.0});
  CHECK(r.probabilities[0] == doctest::Approx(0.1).epsilon(1e-5));
  CHECK(r.probabilities[1] == doctest::Approx(0.3).epsilon(1e-5));
  CHECK(r.probabilities[2] == doctest::Approx(0.6).epsilon(1e-5));
}

TEST_CASE("regression rejects degenerate input") {
  RegressionData d;
  d.add(std::vector<double>{1.0}, 0);
  d.add(std::vector<double>{2.0}, 0);
  CHECK_THROWS_AS(regression_train(d, 3, {}), std::invalid_argument);
  CHECK_THROWS_AS(regression_train(RegressionData{}, 3, {}), std::invalid_argument);
  CHECK_THROWS_AS(d.add(std::vector<double>{1.0, 2.0}, 1), ShapeError);
  CHECK_THROWS_AS(SoftmaxRegression(2, 3).predict(std::vector<double>{1.0}), ShapeError);
}

TEST_CASE("baseline aggregate") {
  GraphBuilder b(2, 2);
  for (ExternalId v = 0; v < 6; ++v) b.add_node(v);
  const auto clique = lt::clique_edges(0, 6);
  for (const auto& [u, v] : clique) b.add_edge(u, v);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> f(0.0, 1.0);
  for (ExternalId v = 0; v < 6; ++v) b.set_features(v, {f(rng), f(rng)});
  for (const auto& [u, v] : clique) b.set_interactions(u, v, {Count(rng() % 5), Count(rng() % 3)});
  const auto g = std::move(b).build(false);

  SUBCASE("singleton has zero spread") {
    const auto a = baseline_aggregate({0, 0, {3}}, g);
    REQUIRE(a.size() == 8);
    for (std::size_t j = 4; j < 8; ++j) CHECK(a[j] == 0.0);
    CHECK(a[2] == g.features(3)[0]);
  }
  SUBCASE("random community matches a two-pass oracle") {
    const LocalCommunity c{0, 0, {1, 2, 3, 4, 5}};
    const auto rows = member_rows(c, g);
    const auto a = baseline_aggregate(c, g);
    for (std::size_t j = 0; j < 4; ++j) {
      double mean = 0.0;
      for (const auto& r : rows) mean += r[j];
      mean /= 5.0;
      double var = 0.0;
      for (const auto& r : rows) var += (r[j] - mean) * (r[j] - mean);
      CHECK(a[j] == doctest::Approx(mean).epsilon(1e-12));
      CHECK(a[4 + j] == doctest::Approx(std::sqrt(var / 5.0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("baseline aggregate of identical rows") {
  GraphBuilder b(2, 1);
  b.add_edge(0, 1);
  b.set_features(0, {0.3, 0.7});
  b.set_features(1, {0.3, 0.7});
  b.set_interactions(0, 1, {4});
  const auto g = std::move(b).build(false);
  const auto a = baseline_aggregate({5, 0, {0, 1}}, g);
  CHECK(a == std::vector<double>{1.0, 0.3, 0.7, 0.0, 0.0, 0.0});
}

TEST_CASE("community labels by majority") {
  EdgeLabels truth;
  // ego 0; members 1..4 family, 5 colleague
  for (NodeId m = 1; m <= 3; ++m) truth.set(0, m, 0);
  truth.set(5, 0, 1);
  truth.set(6, 0, 1);
  truth.set(7, 0, 2);
  CHECK(derive_community_label({0, 0, {1, 2, 3, 5}}, truth, 3) == 0u);
  CHECK(!derive_community_label({0, 1, {1, 2, 5, 6}}, truth, 3));
  CHECK(!derive_community_label({0, 2, {8, 9}}, truth, 3));
  CHECK(derive_community_label({0, 3, {7, 8}}, truth, 3) == 2u);
  // edges between members do not count, only (ego, member) edges
  truth.set(8, 9, 1);
  CHECK(!derive_community_label({0, 4, {8, 9}}, truth, 3));
}

TEST_CASE("baseline model file round trip") {
  std::mt19937_64 rng(7);
  const auto d = blobs(10, 6, 0.3, rng);
  const CommunityClassifier original(LabelSet::defaults(), baseline_train(d, 3));
  const auto dir = lt::temp_dir("baseline_io");
  save_community_classifier(dir / "b.bin", original);
  const auto loaded = load_community_classifier(dir / "b.bin");
  CHECK(loaded.kind() == ClassifierKind::Baseline);
  CHECK(std::get<SoftmaxRegression>(loaded.model()) == std::get<SoftmaxRegression>(original.model()));
}

TEST_CASE("malformed model files") {
  const auto dir = lt::temp_dir("bad_models");
  ModelFile m{"baseline", {"a", "b"}, {{"dim", "2"}}, {}};
  m.tensors.emplace_back("weight", std::vector<std::size_t>{2, 2});
  m.tensors.emplace_back("bias", std::vector<std::size_t>{2});
  const auto bytes = encode_model(m);
  CHECK(decode_model(bytes) == m);
  CHECK_THROWS_AS(decode_model("NOTAMODEL" + bytes), DataError);
  CHECK_THROWS_AS(decode_model(bytes.substr(0, bytes.size() - 3)), DataError);
  CHECK_THROWS_AS(decode_model(bytes + "x"), DataError);
  m.kind = "edge-lr";
  write_model_file(dir / "edge.bin", m);
  CHECK_THROWS_AS(load_community_classifier(dir / "edge.bin"), DataError);
  CHECK_THROWS_AS(load_community_classifier(dir / "missing.bin"), DataError);
  CHECK_THROWS_WITH_AS(parse_classifier_kind("xgb"), doctest::Contains("unknown classifier"), std::invalid_argument);
}
