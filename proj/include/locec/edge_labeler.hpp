/// Edge features from the two incident local communities, and the
/// logistic-regression combiner that turns them into relationship labels.

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "locec/classifier.hpp"
#include "locec/graph.hpp"
#include "locec/labels.hpp"
#include "locec/softmax_regression.hpp"
#include "locec/stores.hpp"

namespace locec {

/// A community identified by its ego and index.
struct CommunityRef {
  NodeId ego = kInvalidNode;
  std::uint32_t index = 0;
  friend bool operator==(const CommunityRef&, const CommunityRef&) = default;
};

/// C_u is u's community in v's ego network and C_v is v's community in u's.
/// Throws DataError when either ego network is missing from the store.
std::pair<CommunityRef, CommunityRef> locate_communities(NodeId u, NodeId v, const CommunityStore& communities);

/// Read-only view of the phase outputs needed to build edge features.
struct EdgeContext {
  const CommunityStore& communities;
  const ClassResultStore& results;
  const TightnessStore& tightness;
};

/// [t(u, C_u), t(v, C_v), r(C_u)..., r(C_v)...] with u the smaller internal
/// id, so the result does not depend on argument order. Length 2 + 2|L|.
std::vector<double> edge_feature(NodeId a, NodeId b, const EdgeContext& ctx);

/// Same vector with the endpoint blocks exchanged.
std::vector<double> swap_endpoints(std::span<const double> feature);

struct EdgeLrConfig {
  RegressionConfig regression;
  bool swap_augmentation = true;  // add the swapped-order copy of every example
};

/// Trained edge combiner.
class EdgeLabeler {
 public:
  EdgeLabeler(LabelSet labels, SoftmaxRegression model);

  const LabelSet& labels() const { return labels_; }
  const SoftmaxRegression& model() const { return model_; }
  /// Throws ShapeError when the feature length is not 2 + 2|L|.
  ClassResult predict(std::span<const double> feature) const { return model_.predict(feature); }

 private:
  LabelSet labels_;
  SoftmaxRegression model_;
};

/// Fits the combiner on (feature, label) pairs given in canonical endpoint
/// order. Throws std::invalid_argument on single-class data.
EdgeLabeler lr_train(const RegressionData& features, const LabelSet& labels, const EdgeLrConfig& config = {});
inline ClassResult lr_predict(std::span<const double> feature, const EdgeLabeler& model) {
  return model.predict(feature);
}

void save_edge_labeler(const std::filesystem::path& path, const EdgeLabeler& m);
EdgeLabeler load_edge_labeler(const std::filesystem::path& path);

}  // namespace locec
