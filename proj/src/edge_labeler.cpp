#include "locec/edge_labeler.hpp"

#include <algorithm>
#include <stdexcept>

#include "locec/errors.hpp"
#include "locec/model_io.hpp"

namespace locec {

std::pair<CommunityRef, CommunityRef> locate_communities(NodeId u, NodeId v, const CommunityStore& communities) {
  return {CommunityRef{v, communities.community_of(v, u)}, CommunityRef{u, communities.community_of(u, v)}};
}

std::vector<double> edge_feature(NodeId a, NodeId b, const EdgeContext& ctx) {
  const NodeId u = std::min(a, b);
  const NodeId v = std::max(a, b);
  const auto [cu, cv] = locate_communities(u, v, ctx.communities);
  const auto& ru = ctx.results.get(cu.ego, cu.index).probabilities;
  const auto& rv = ctx.results.get(cv.ego, cv.index).probabilities;
  std::vector<double> f;
  f.reserve(2 + ru.size() + rv.size());
  f.push_back(ctx.tightness.get(v, u));
  f.push_back(ctx.tightness.get(u, v));
  f.insert(f.end(), ru.begin(), ru.end());
  f.insert(f.end(), rv.begin(), rv.end());
  return f;
}

std::vector<double> swap_endpoints(std::span<const double> feature) {
  if (feature.size() < 2 || feature.size() % 2 != 0) throw ShapeError("edge feature has odd length");
  const std::size_t block = (feature.size() - 2) / 2;
  std::vector<double> out{feature[1], feature[0]};
  out.insert(out.end(), feature.begin() + 2 + static_cast<std::ptrdiff_t>(block), feature.end());
  out.insert(out.end(), feature.begin() + 2, feature.begin() + 2 + static_cast<std::ptrdiff_t>(block));
  return out;
}

EdgeLabeler::EdgeLabeler(LabelSet labels, SoftmaxRegression model)
    : labels_(std::move(labels)), model_(std::move(model)) {
  if (model_.classes() != labels_.size() || model_.dim() != 2 + 2 * labels_.size()) {
    throw ShapeError("edge model shape does not match the label set");
  }
}

EdgeLabeler lr_train(const RegressionData& features, const LabelSet& labels, const EdgeLrConfig& config) {
  if (features.size() > 0 && features.dim != 2 + 2 * labels.size()) {
    throw ShapeError("edge features must have length 2 + 2|L|");
  }
  if (!config.swap_augmentation) {
    return EdgeLabeler(labels, regression_train(features, labels.size(), config.regression));
  }
  RegressionData augmented = features;
  for (std::size_t i = 0; i < features.size(); ++i) augmented.add(swap_endpoints(features.row(i)), features.y[i]);
  return EdgeLabeler(labels, regression_train(augmented, labels.size(), config.regression));
}

void save_edge_labeler(const std::filesystem::path& path, const EdgeLabeler& m) {
  ModelFile f;
  f.kind = "edge-lr";
  f.labels = m.labels().names();
  f.hyper = {{"dim", std::to_string(m.model().dim())}};
  f.tensors = m.model().to_tensors();
  write_model_file(path, f);
}

EdgeLabeler load_edge_labeler(const std::filesystem::path& path) {
  const auto f = read_model_file(path);
  if (f.kind != "edge-lr") throw DataError(path.string() + ": not an edge model (kind '" + f.kind + "')");
  try {
    return EdgeLabeler(LabelSet(f.labels), SoftmaxRegression::from_tensors(f.tensors));
  } catch (const std::invalid_argument& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace locec
