/// Community classification: the aggregate-feature baseline, ground-truth
/// community labels, and a wrapper over both classifier kinds.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "locec/commcnn.hpp"
#include "locec/community.hpp"
#include "locec/features.hpp"
#include "locec/graph.hpp"
#include "locec/labels.hpp"
#include "locec/softmax_regression.hpp"

namespace locec {

/// Per-dimension mean and population standard deviation of the members'
/// [interaction shares, features] rows: length 2 * (|I| + |f|).
std::vector<double> baseline_aggregate(const LocalCommunity& c, const Graph& g);

inline SoftmaxRegression baseline_train(const RegressionData& aggregates, std::size_t classes,
                                        const RegressionConfig& config = {}) {
  return regression_train(aggregates, classes, config);
}
inline ClassResult baseline_classify(const SoftmaxRegression& model, std::span<const double> aggregate) {
  return model.predict(aggregate);
}

/// Label lookup for undirected edges by internal node id.
class EdgeLabels {
 public:
  void set(NodeId a, NodeId b, std::size_t label) { labels_[key(a, b)] = label; }
  std::optional<std::size_t> get(NodeId a, NodeId b) const {
    const auto it = labels_.find(key(a, b));
    if (it == labels_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t size() const { return labels_.size(); }

 private:
  static std::uint64_t key(NodeId a, NodeId b) {
    const auto e = canonical_edge(a, b);
    return (std::uint64_t{e.u} << 32) | e.v;
  }
  std::unordered_map<std::uint64_t, std::size_t> labels_;
};

/// Majority label over the labelled (ego, member) edges of c. Ties and
/// communities without labelled members give nullopt.
std::optional<std::size_t> derive_community_label(const LocalCommunity& c, const EdgeLabels& truth,
                                                  std::size_t classes);

enum class ClassifierKind { CommCnn, Baseline };

std::string_view to_string(ClassifierKind kind);
/// "commcnn" or "baseline"; throws std::invalid_argument otherwise.
ClassifierKind parse_classifier_kind(std::string_view name);

/// A trained community classifier of either kind.
class CommunityClassifier {
 public:
  CommunityClassifier(LabelSet labels, CommCnn model);
  CommunityClassifier(LabelSet labels, SoftmaxRegression model);

  ClassifierKind kind() const;
  const LabelSet& labels() const { return labels_; }
  const std::variant<CommCnn, SoftmaxRegression>& model() const { return model_; }
  /// Feature-matrix rows (CommCnn only, 0 for the baseline).
  std::size_t k() const;

  /// Throws ShapeError when g's dimensions do not match the model.
  ClassResult classify(const LocalCommunity& c, const Graph& g, const EgoNetwork& net) const;

 private:
  LabelSet labels_;
  std::variant<CommCnn, SoftmaxRegression> model_;
};

}  // namespace locec
