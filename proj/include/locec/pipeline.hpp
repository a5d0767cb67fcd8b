/// End-to-end orchestration of the three phases, the train/test protocol and
/// evaluation metrics.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "locec/classifier.hpp"
#include "locec/community.hpp"
#include "locec/edge_labeler.hpp"
#include "locec/graph.hpp"
#include "locec/graph_io.hpp"
#include "locec/stores.hpp"

namespace locec {

/// Child seed for an independent random stream (splitmix64 of seed and
/// stream id).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

enum SeedStream : std::uint64_t { kSplitStream = 1, kCommunityTrainStream = 2, kEdgeTrainStream = 3 };

// ---------------------------------------------------------------- phase I

struct PhaseOneResult {
  CommunityStore communities;
  TightnessStore tightness;
  std::vector<NodeId> capped_egos;  // ego networks over the member cap
};

/// Extracts every ego network and detects its local communities.
PhaseOneResult run_phase1(const Graph& g, std::size_t workers, const GnOptions& options = {});

/// Recomputes member tightness from stored communities.
TightnessStore compute_tightness(const Graph& g, const CommunityStore& communities, std::size_t workers);

// ---------------------------------------------------------------- phase II

struct ClassifierConfig {
  ClassifierKind kind = ClassifierKind::CommCnn;
  std::size_t k = 20;
  CnnTrainConfig cnn;
  RegressionConfig baseline;
};

/// Communities with a majority label among training edges.
struct CommunityTrainingSet {
  std::vector<CommunityRef> refs;
  std::vector<std::size_t> labels;
};

CommunityTrainingSet community_training_set(const CommunityStore& communities, const EdgeLabels& train,
                                            std::size_t classes);

/// Builds inputs for the labelled communities and trains the chosen
/// classifier. cfg.cnn.seed is used as given.
CommunityClassifier train_community_classifier(const Graph& g, const CommunityStore& communities,
                                               const CommunityTrainingSet& training, const LabelSet& labels,
                                               const ClassifierConfig& cfg, std::size_t workers,
                                               TrainingCurve* curve = nullptr);

/// One ClassResult per community. Throws ShapeError when the model does not
/// fit the graph's dimensions.
ClassResultStore run_phase2(const Graph& g, const CommunityStore& communities, const CommunityClassifier& model,
                            std::size_t workers);

/// Flat per-community inputs as seen by the classifier: the k x W matrix for
/// CommCnn (or for the baseline, its aggregate vector). Lines are
/// "ego<TAB>index<TAB>v1,v2,...".
void write_community_inputs(const std::string& path, const Graph& g, const CommunityStore& communities,
                            ClassifierKind kind, std::size_t k, std::size_t workers);

// ---------------------------------------------------------------- phase III

struct EdgePrediction {
  NodeId u = 0;  // u < v
  NodeId v = 0;
  ClassResult result;
};

/// Canonical-order features of the given labelled edges.
RegressionData edge_training_data(const EdgeContext& ctx, const std::vector<std::pair<Edge, std::size_t>>& edges);

/// Labels every edge of g, in canonical edge order.
std::vector<EdgePrediction> run_phase3(const Graph& g, const EdgeContext& ctx, const EdgeLabeler& model,
                                       std::size_t workers);

/// "u<TAB>v<TAB>label<TAB>p1,...,p|L|" with external ids.
void write_predictions(const std::string& path, const Graph& g, const std::vector<EdgePrediction>& predictions,
                       const LabelSet& labels);

struct PredictionRecord {
  ExternalId u = 0;
  ExternalId v = 0;
  std::string label;
  std::vector<double> probabilities;
};
std::vector<PredictionRecord> read_predictions(const std::string& path);

// ---------------------------------------------------------------- evaluation

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  std::vector<std::vector<std::size_t>> confusion;  // [truth][predicted]
  double micro_precision = 0.0, micro_recall = 0.0, micro_f1 = 0.0;
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
  std::size_t evaluated = 0;
};

/// F1 with 0/0 treated as 0.
double f1_score(double precision, double recall);

/// Scores the truth edges whose label is in `labels`; other truth edges are
/// ignored. Throws DataError when a scored edge has no prediction or a
/// prediction uses an unknown label.
MetricsReport evaluate(const std::vector<PredictionRecord>& predictions, const std::vector<LabeledEdge>& truth,
                       const LabelSet& labels);
void print_metrics(std::ostream& out, const MetricsReport& m);
std::string metrics_json(const MetricsReport& m);

// ---------------------------------------------------------------- protocol

/// Keeps the edges labelled with a member of `labels`, shuffles them with the
/// seed and cuts them into train (the first `fraction`) and test.
std::pair<std::vector<LabeledEdge>, std::vector<LabeledEdge>> split_labeled_edges(
    const std::vector<LabeledEdge>& truth, const LabelSet& labels, double fraction, std::uint64_t seed);

struct PipelineConfig {
  LabelSet labels = LabelSet::defaults();
  ClassifierConfig classifier;
  EdgeLrConfig edge;
  GnOptions gn;
  std::size_t workers = 1;
  std::uint64_t seed = 1;
  double split = 0.8;
  double labeled_fraction = 1.0;  // share of the training split actually used
  std::ostream* log = nullptr;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

/// CommCnn defaults used by the pipeline (fewer epochs than the
/// stand-alone trainer, see README).
CnnTrainConfig pipeline_cnn_defaults();

/// The evaluation protocol's split: seeded train/test cut of the labelled
/// edges, then the first labeled_fraction of the training part. Both halves
/// are returned in canonical edge order.
std::pair<std::vector<LabeledEdge>, std::vector<LabeledEdge>> protocol_split(const std::vector<LabeledEdge>& truth,
                                                                             const PipelineConfig& cfg);

struct RunResult {
  std::vector<LabeledEdge> train;
  std::vector<LabeledEdge> test;
  std::size_t training_communities = 0;
  std::optional<CommunityClassifier> classifier;
  ClassResultStore results;
  std::optional<EdgeLabeler> edge_model;
  std::vector<EdgePrediction> predictions;
  MetricsReport metrics;
  double phase1_seconds = 0.0, phase2_seconds = 0.0, phase3_seconds = 0.0;
};

/// Phases II and III plus evaluation on an existing phase I result.
RunResult run_supervised(const Graph& g, const PhaseOneResult& phase1, const std::vector<LabeledEdge>& truth,
                         const PipelineConfig& cfg);

/// Full pipeline.
RunResult run_all(const Graph& g, const std::vector<LabeledEdge>& truth, const PipelineConfig& cfg,
                  PhaseOneResult* phase1_out = nullptr);

struct FractionRow {
  double fraction = 0.0;
  std::size_t train_edges = 0;
  MetricsReport metrics;
};

/// Reruns phases II and III with each labelled fraction of the training
/// split; the test split is the same for every row.
std::vector<FractionRow> vary_labeled_fraction(const Graph& g, const PhaseOneResult& phase1,
                                               const std::vector<LabeledEdge>& truth,
                                               const std::vector<double>& fractions, const PipelineConfig& cfg);

/// Edge labels converted to internal ids; unknown nodes raise DataError and
/// labels outside the set are skipped.
EdgeLabels to_edge_labels(const Graph& g, const std::vector<LabeledEdge>& edges, const LabelSet& labels);

}  // namespace locec
