#include "locec/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "locec/errors.hpp"

namespace locec {

std::vector<double> baseline_aggregate(const LocalCommunity& c, const Graph& g) {
  if (c.members.empty()) throw std::invalid_argument("empty community");
  const auto rows = member_rows(c, g);
  const std::size_t w = g.interaction_dim() + g.feature_dim();
  std::vector<double> out(2 * w, 0.0);
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < w; ++j) out[j] += r[j];
  }
  for (std::size_t j = 0; j < w; ++j) out[j] /= n;
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < w; ++j) out[w + j] += (r[j] - out[j]) * (r[j] - out[j]);
  }
  for (std::size_t j = 0; j < w; ++j) out[w + j] = std::sqrt(out[w + j] / n);
  return out;
}

std::optional<std::size_t> derive_community_label(const LocalCommunity& c, const EdgeLabels& truth,
                                                  std::size_t classes) {
  std::vector<std::size_t> votes(classes, 0);
  for (auto m : c.members) {
    if (const auto l = truth.get(c.ego, m); l && *l < classes) ++votes[*l];
  }
  const auto best = std::max_element(votes.begin(), votes.end());
  if (*best == 0 || std::count(votes.begin(), votes.end(), *best) > 1) return std::nullopt;
  return static_cast<std::size_t>(best - votes.begin());
}

std::string_view to_string(ClassifierKind kind) {
  return kind == ClassifierKind::CommCnn ? "commcnn" : "baseline";
}

ClassifierKind parse_classifier_kind(std::string_view name) {
  if (name == "commcnn") return ClassifierKind::CommCnn;
  if (name == "baseline") return ClassifierKind::Baseline;
  throw std::invalid_argument("unknown classifier '" + std::string(name) + "' (expected commcnn or baseline)");
}

CommunityClassifier::CommunityClassifier(LabelSet labels, CommCnn model)
    : labels_(std::move(labels)), model_(std::move(model)) {
  if (std::get<CommCnn>(model_).shape().classes != labels_.size()) {
    throw ShapeError("classifier output size does not match the label set");
  }
}

CommunityClassifier::CommunityClassifier(LabelSet labels, SoftmaxRegression model)
    : labels_(std::move(labels)), model_(std::move(model)) {
  if (std::get<SoftmaxRegression>(model_).classes() != labels_.size()) {
    throw ShapeError("classifier output size does not match the label set");
  }
}

ClassifierKind CommunityClassifier::kind() const {
  return std::holds_alternative<CommCnn>(model_) ? ClassifierKind::CommCnn : ClassifierKind::Baseline;
}

std::size_t CommunityClassifier::k() const {
  return kind() == ClassifierKind::CommCnn ? std::get<CommCnn>(model_).shape().k : 0;
}

ClassResult CommunityClassifier::classify(const LocalCommunity& c, const Graph& g, const EgoNetwork& net) const {
  if (const auto* cnn = std::get_if<CommCnn>(&model_)) {
    return cnn->forward(build_feature_matrix(c, g, net, cnn->shape().k));
  }
  const auto& lr = std::get<SoftmaxRegression>(model_);
  return lr.predict(baseline_aggregate(c, g));
}

}  // namespace locec
