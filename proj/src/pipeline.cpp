#include "locec/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>
#include <tuple>

#include "json.hpp"
#include "locec/errors.hpp"
#include "locec/features.hpp"
#include "locec/parallel.hpp"
#include "locec/text_io.hpp"

namespace locec {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ stream);
}

PhaseOneResult run_phase1(const Graph& g, std::size_t workers, const GnOptions& options) {
  PhaseOneResult out{CommunityStore(g.num_nodes()), TightnessStore(g), {}};
  std::vector<std::uint8_t> capped(g.num_nodes(), 0);
  parallel_for(g.num_nodes(), workers, [&](std::size_t i) {
    const auto ego = static_cast<NodeId>(i);
    const auto net = ego_network(g, ego);
    auto communities = detect_local_communities(net, options);
    capped[i] = net.size() > options.member_cap;
    out.tightness.set_ego(ego, communities, net);
    out.communities.set(ego, std::move(communities));
  }, 4);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (capped[v]) out.capped_egos.push_back(v);
  }
  return out;
}

TightnessStore compute_tightness(const Graph& g, const CommunityStore& communities, std::size_t workers) {
  TightnessStore t(g);
  parallel_for(g.num_nodes(), workers, [&](std::size_t i) {
    const auto ego = static_cast<NodeId>(i);
    t.set_ego(ego, communities.communities(ego), ego_network(g, ego));
  });
  return t;
}

CommunityTrainingSet community_training_set(const CommunityStore& communities, const EdgeLabels& train,
                                            std::size_t classes) {
  CommunityTrainingSet out;
  for (NodeId ego = 0; ego < communities.num_nodes(); ++ego) {
    for (const auto& c : communities.communities(ego)) {
      if (const auto l = derive_community_label(c, train, classes)) {
        out.refs.push_back({ego, c.index});
        out.labels.push_back(*l);
      }
    }
  }
  return out;
}

CommunityClassifier train_community_classifier(const Graph& g, const CommunityStore& communities,
                                               const CommunityTrainingSet& training, const LabelSet& labels,
                                               const ClassifierConfig& cfg, std::size_t workers,
                                               TrainingCurve* curve) {
  const std::size_t n = training.refs.size();
  auto community = [&](std::size_t i) -> const LocalCommunity& {
    return communities.communities(training.refs[i].ego).at(training.refs[i].index);
  };
  if (cfg.kind == ClassifierKind::CommCnn) {
    std::vector<LabeledMatrix> data(n);
    parallel_for(n, workers, [&](std::size_t i) {
      const auto net = ego_network(g, training.refs[i].ego);
      data[i] = {build_feature_matrix(community(i), g, net, cfg.k), training.labels[i]};
    });
    auto cnn_cfg = cfg.cnn;
    cnn_cfg.workers = workers;
    return CommunityClassifier(labels, commcnn_train(data, labels.size(), cnn_cfg, curve));
  }
  std::vector<std::vector<double>> rows(n);
  parallel_for(n, workers, [&](std::size_t i) { rows[i] = baseline_aggregate(community(i), g); });
  RegressionData data;
  data.dim = 2 * (g.interaction_dim() + g.feature_dim());
  for (std::size_t i = 0; i < n; ++i) data.add(rows[i], training.labels[i]);
  return CommunityClassifier(labels, baseline_train(data, labels.size(), cfg.baseline));
}

ClassResultStore run_phase2(const Graph& g, const CommunityStore& communities, const CommunityClassifier& model,
                            std::size_t workers) {
  std::vector<std::vector<ClassResult>> per_ego(g.num_nodes());
  parallel_for(g.num_nodes(), workers, [&](std::size_t i) {
    const auto ego = static_cast<NodeId>(i);
    const auto& list = communities.communities(ego);
    if (list.empty()) return;
    const auto net = ego_network(g, ego);
    for (const auto& c : list) per_ego[i].push_back(model.classify(c, g, net));
  });
  ClassResultStore store(communities);
  for (NodeId ego = 0; ego < g.num_nodes(); ++ego) {
    for (std::size_t j = 0; j < per_ego[ego].size(); ++j) {
      store.set(ego, static_cast<std::uint32_t>(j), std::move(per_ego[ego][j]));
    }
  }
  return store;
}

void write_community_inputs(const std::string& path, const Graph& g, const CommunityStore& communities,
                            ClassifierKind kind, std::size_t k, std::size_t workers) {
  std::vector<std::vector<std::string>> lines(g.num_nodes());
  parallel_for(g.num_nodes(), workers, [&](std::size_t i) {
    const auto ego = static_cast<NodeId>(i);
    const auto& list = communities.communities(ego);
    if (list.empty()) return;
    const auto net = ego_network(g, ego);
    for (const auto& c : list) {
      const auto values = kind == ClassifierKind::CommCnn ? build_feature_matrix(c, g, net, k).values
                                                          : baseline_aggregate(c, g);
      lines[i].push_back(std::to_string(g.external_id(ego)) + '\t' + std::to_string(c.index) + '\t' +
                         text::join_doubles(values));
    }
  });
  auto out = text::open_output(path);
  for (const auto& per_ego : lines) {
    for (const auto& l : per_ego) out << l << '\n';
  }
  if (!out) throw DataError("failed writing " + path);
}

RegressionData edge_training_data(const EdgeContext& ctx, const std::vector<std::pair<Edge, std::size_t>>& edges) {
  RegressionData data;
  for (const auto& [e, label] : edges) data.add(edge_feature(e.u, e.v, ctx), label);
  return data;
}

std::vector<EdgePrediction> run_phase3(const Graph& g, const EdgeContext& ctx, const EdgeLabeler& model,
                                       std::size_t workers) {
  std::vector<EdgePrediction> out(g.num_edges());
  parallel_for(g.num_edges(), workers, [&](std::size_t i) {
    const auto e = g.edge(static_cast<EdgeId>(i));
    out[i] = {e.u, e.v, model.predict(edge_feature(e.u, e.v, ctx))};
  }, 256);
  return out;
}

void write_predictions(const std::string& path, const Graph& g, const std::vector<EdgePrediction>& predictions,
                       const LabelSet& labels) {
  auto out = text::open_output(path);
  for (const auto& p : predictions) {
    out << g.external_id(p.u) << '\t' << g.external_id(p.v) << '\t' << labels.name(p.result.label) << '\t'
        << text::join_doubles(p.result.probabilities) << '\n';
  }
  if (!out) throw DataError("failed writing " + path);
}

std::vector<PredictionRecord> read_predictions(const std::string& path) {
  std::vector<PredictionRecord> out;
  text::for_each_line(path, [&](std::string_view line, std::size_t number) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') return;
    const auto f = text::split(t, '\t');
    if (f.size() != 4) throw DataError(path, number, "expected u, v, label and probabilities");
    PredictionRecord r;
    if (!text::parse_number(f[0], r.u) || !text::parse_number(f[1], r.v)) {
      throw DataError(path, number, "invalid node id");
    }
    if (r.u > r.v) std::swap(r.u, r.v);
    r.label = std::string(text::trim(f[2]));
    for (const auto part : text::split(f[3], ',')) {
      double x = 0;
      if (!text::parse_number(part, x)) throw DataError(path, number, "invalid probability");
      r.probabilities.push_back(x);
    }
    out.push_back(std::move(r));
  });
  return out;
}

double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

MetricsReport evaluate(const std::vector<PredictionRecord>& predictions, const std::vector<LabeledEdge>& truth,
                       const LabelSet& labels) {
  std::map<std::pair<ExternalId, ExternalId>, std::size_t> predicted;
  for (const auto& p : predictions) {
    const auto idx = labels.index_of(p.label);
    if (!idx) throw DataError("prediction for " + std::to_string(p.u) + "-" + std::to_string(p.v) +
                              " uses unknown label '" + p.label + "'");
    predicted[{std::min(p.u, p.v), std::max(p.u, p.v)}] = *idx;
  }
  const std::size_t L = labels.size();
  MetricsReport m;
  m.confusion.assign(L, std::vector<std::size_t>(L, 0));
  for (const auto& t : truth) {
    const auto truth_idx = labels.index_of(t.label);
    if (!truth_idx) continue;
    const auto it = predicted.find({std::min(t.u, t.v), std::max(t.u, t.v)});
    if (it == predicted.end()) {
      throw DataError("no prediction for edge " + std::to_string(t.u) + "-" + std::to_string(t.v));
    }
    ++m.confusion[*truth_idx][it->second];
    ++m.evaluated;
  }
  std::size_t correct = 0;
  for (std::size_t c = 0; c < L; ++c) {
    std::size_t row = 0, col = 0;
    for (std::size_t j = 0; j < L; ++j) {
      row += m.confusion[c][j];
      col += m.confusion[j][c];
    }
    const std::size_t tp = m.confusion[c][c];
    correct += tp;
    ClassMetrics cm;
    cm.label = labels.name(c);
    cm.support = row;
    cm.precision = col ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    cm.recall = row ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    cm.f1 = f1_score(cm.precision, cm.recall);
    m.macro_precision += cm.precision / static_cast<double>(L);
    m.macro_recall += cm.recall / static_cast<double>(L);
    m.macro_f1 += cm.f1 / static_cast<double>(L);
    m.per_class.push_back(cm);
  }
  // every scored edge carries exactly one predicted label from the set
  m.micro_precision = m.micro_recall = m.evaluated ? static_cast<double>(correct) / static_cast<double>(m.evaluated) : 0.0;
  m.micro_f1 = f1_score(m.micro_precision, m.micro_recall);
  return m;
}

void print_metrics(std::ostream& out, const MetricsReport& m) {
  const auto f = [](double x) { return text::format_double(std::round(x * 1e4) / 1e4); };
  out << "label\tprecision\trecall\tf1\tsupport\n";
  for (const auto& c : m.per_class) {
    out << c.label << '\t' << f(c.precision) << '\t' << f(c.recall) << '\t' << f(c.f1) << '\t' << c.support << '\n';
  }
  out << "micro\t" << f(m.micro_precision) << '\t' << f(m.micro_recall) << '\t' << f(m.micro_f1) << '\t'
      << m.evaluated << '\n';
  out << "macro\t" << f(m.macro_precision) << '\t' << f(m.macro_recall) << '\t' << f(m.macro_f1) << '\t'
      << m.evaluated << '\n';
  out << "confusion (rows: truth, columns: predicted)\n";
  for (std::size_t i = 0; i < m.confusion.size(); ++i) {
    out << m.per_class[i].label;
    for (auto x : m.confusion[i]) out << '\t' << x;
    out << '\n';
  }
}

std::string metrics_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  for (const auto& c : m.per_class) {
    j["per_class"][c.label] = {{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}};
  }
  j["micro"] = {{"precision", m.micro_precision}, {"recall", m.micro_recall}, {"f1", m.micro_f1}};
  j["macro"] = {{"precision", m.macro_precision}, {"recall", m.macro_recall}, {"f1", m.macro_f1}};
  j["confusion"] = m.confusion;
  j["evaluated"] = m.evaluated;
  return j.dump(2);
}

std::pair<std::vector<LabeledEdge>, std::vector<LabeledEdge>> split_labeled_edges(
    const std::vector<LabeledEdge>& truth, const LabelSet& labels, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("split fraction must lie in (0, 1)");
  std::vector<LabeledEdge> kept;
  for (const auto& e : truth) {
    if (labels.index_of(e.label)) kept.push_back({std::min(e.u, e.v), std::max(e.u, e.v), e.label});
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
  std::mt19937_64 rng(seed);
  std::shuffle(kept.begin(), kept.end(), rng);
  const auto cut = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(kept.size())));
  std::vector<LabeledEdge> train(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(cut));
  std::vector<LabeledEdge> test(kept.begin() + static_cast<std::ptrdiff_t>(cut), kept.end());
  return {std::move(train), std::move(test)};
}

void PipelineConfig::validate() const {
  if (classifier.k < 1) throw std::invalid_argument("k must be at least 1");
  if (!(split > 0.0 && split < 1.0)) throw std::invalid_argument("split must lie in (0, 1)");
  if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0)) {
    throw std::invalid_argument("labeled fraction must lie in (0, 1]");
  }
  if (workers < 1) throw std::invalid_argument("worker count must be at least 1");
}

CnnTrainConfig pipeline_cnn_defaults() {
  CnnTrainConfig c;
  c.max_epochs = 30;
  c.loss_threshold = 0.05;
  return c;
}

EdgeLabels to_edge_labels(const Graph& g, const std::vector<LabeledEdge>& edges, const LabelSet& labels) {
  EdgeLabels out;
  for (const auto& e : edges) {
    const auto l = labels.index_of(e.label);
    if (!l) continue;
    const auto u = g.internal_id(e.u);
    const auto v = g.internal_id(e.v);
    if (!u || !v) throw DataError("labelled edge " + std::to_string(e.u) + "-" + std::to_string(e.v) +
                                  " refers to an unknown node");
    if (!g.has_edge(*u, *v)) {
      throw DataError("labelled pair " + std::to_string(e.u) + "-" + std::to_string(e.v) + " is not an edge");
    }
    out.set(*u, *v, *l);
  }
  return out;
}

std::pair<std::vector<LabeledEdge>, std::vector<LabeledEdge>> protocol_split(const std::vector<LabeledEdge>& truth,
                                                                             const PipelineConfig& cfg) {
  auto [train, test] = split_labeled_edges(truth, cfg.labels, cfg.split, derive_seed(cfg.seed, kSplitStream));
  if (cfg.labeled_fraction < 1.0) {
    const auto keep = static_cast<std::size_t>(std::ceil(cfg.labeled_fraction * static_cast<double>(train.size())));
    train.resize(std::min(train.size(), keep));
  }
  const auto by_pair = [](const LabeledEdge& a, const LabeledEdge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); };
  std::sort(train.begin(), train.end(), by_pair);
  std::sort(test.begin(), test.end(), by_pair);
  return {std::move(train), std::move(test)};
}

RunResult run_supervised(const Graph& g, const PhaseOneResult& phase1, const std::vector<LabeledEdge>& truth,
                         const PipelineConfig& cfg) {
  cfg.validate();
  RunResult r;
  std::tie(r.train, r.test) = protocol_split(truth, cfg);

  const auto start2 = std::chrono::steady_clock::now();
  const auto train_labels = to_edge_labels(g, r.train, cfg.labels);
  const auto training = community_training_set(phase1.communities, train_labels, cfg.labels.size());
  r.training_communities = training.refs.size();
  if (std::set<std::size_t>(training.labels.begin(), training.labels.end()).size() < 2) {
    throw std::invalid_argument("labelled communities cover fewer than two classes; use more labelled edges");
  }
  if (cfg.log) {
    *cfg.log << "train edges " << r.train.size() << ", test edges " << r.test.size() << ", labelled communities "
             << training.refs.size() << '\n';
  }
  auto ccfg = cfg.classifier;
  ccfg.cnn.seed = derive_seed(cfg.seed, kCommunityTrainStream);
  ccfg.cnn.log = cfg.log;
  r.classifier = train_community_classifier(g, phase1.communities, training, cfg.labels, ccfg, cfg.workers);
  r.results = run_phase2(g, phase1.communities, *r.classifier, cfg.workers);
  r.phase2_seconds = seconds_since(start2);

  const auto start3 = std::chrono::steady_clock::now();
  const EdgeContext ctx{phase1.communities, r.results, phase1.tightness};
  std::vector<std::pair<Edge, std::size_t>> edges;
  for (const auto& e : r.train) {
    const auto u = *g.internal_id(e.u);
    const auto v = *g.internal_id(e.v);
    edges.emplace_back(canonical_edge(u, v), *cfg.labels.index_of(e.label));
  }
  auto ecfg = cfg.edge;
  if (ecfg.regression.seed != 0) ecfg.regression.seed = derive_seed(cfg.seed, kEdgeTrainStream);
  r.edge_model = lr_train(edge_training_data(ctx, edges), cfg.labels, ecfg);
  r.predictions = run_phase3(g, ctx, *r.edge_model, cfg.workers);
  r.phase3_seconds = seconds_since(start3);

  std::vector<PredictionRecord> records;
  records.reserve(r.predictions.size());
  for (const auto& p : r.predictions) {
    records.push_back({g.external_id(p.u), g.external_id(p.v), cfg.labels.name(p.result.label), {}});
  }
  r.metrics = evaluate(records, r.test, cfg.labels);
  return r;
}

RunResult run_all(const Graph& g, const std::vector<LabeledEdge>& truth, const PipelineConfig& cfg,
                  PhaseOneResult* phase1_out) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  auto phase1 = run_phase1(g, cfg.workers, cfg.gn);
  const double t1 = seconds_since(start);
  if (cfg.log) {
    *cfg.log << "phase 1: " << phase1.communities.total_communities() << " communities in " << t1 << " s\n";
    for (auto v : phase1.capped_egos) {
      *cfg.log << "warning: ego network of node " << g.external_id(v)
               << " exceeds the member cap; kept as one community\n";
    }
  }
  auto r = run_supervised(g, phase1, truth, cfg);
  r.phase1_seconds = t1;
  if (phase1_out) *phase1_out = std::move(phase1);
  return r;
}

std::vector<FractionRow> vary_labeled_fraction(const Graph& g, const PhaseOneResult& phase1,
                                               const std::vector<LabeledEdge>& truth,
                                               const std::vector<double>& fractions, const PipelineConfig& cfg) {
  std::vector<FractionRow> rows;
  for (double f : fractions) {
    auto c = cfg;
    c.labeled_fraction = f;
    const auto r = run_supervised(g, phase1, truth, c);
    rows.push_back({f, r.train.size(), r.metrics});
  }
  return rows;
}

}  // namespace locec
