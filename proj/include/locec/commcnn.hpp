/// Three-branch convolutional community classifier.
///
/// Input is one k x W feature matrix (W = interaction dims + feature dims).
///   square: conv3x3 -> pool2x2 -> [conv3x3 -> pool2x2] x 2 -> flatten
///   wide:   conv 1xW -> conv1x1 -> global max pool
///   long:   conv kx1 -> conv1x1 -> global max pool
///   head:   concat -> dense(h) -> dense(|L|) -> softmax
/// Every conv and the first dense layer are followed by ReLU. Square convs
/// use zero padding 1; pooling rounds odd extents up.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "locec/features.hpp"
#include "locec/labels.hpp"
#include "locec/tensor.hpp"

namespace locec {

struct CommCnnShape {
  std::size_t k = 20;
  std::size_t width = 0;  // interaction dims + feature dims
  std::size_t channels = 16;
  std::size_t hidden = 64;
  std::size_t classes = 3;

  /// Length of the concatenated branch outputs.
  std::size_t flat_size() const;
  friend bool operator==(const CommCnnShape&, const CommCnnShape&) = default;
};

struct LabeledMatrix {
  FeatureMatrix matrix;
  std::size_t label = 0;
};

class CommCnn {
 public:
  /// All-zero parameters.
  explicit CommCnn(const CommCnnShape& shape);
  /// He-normal weights, zero biases.
  static CommCnn initialize(const CommCnnShape& shape, std::uint64_t seed);
  /// Takes ownership of tensors; throws ShapeError if names or shapes differ
  /// from what `shape` implies.
  static CommCnn from_tensors(const CommCnnShape& shape, TensorList params);

  const CommCnnShape& shape() const { return shape_; }
  const TensorList& params() const { return params_; }
  TensorList& params() { return params_; }

  /// Raw k x W input (row-major). Throws ShapeError on size mismatch.
  std::vector<double> logits(std::span<const double> input) const;
  ClassResult forward(const FeatureMatrix& m) const;

  /// Mean (optionally class-weighted) cross-entropy over the batch and its
  /// gradient. Per-sample gradients are summed in batch order, so the result
  /// does not depend on `workers`.
  double loss_and_gradient(std::span<const LabeledMatrix* const> batch, TensorList& gradient,
                           std::span<const double> class_weights = {}, std::size_t workers = 1) const;

 private:
  void check_matrix(const FeatureMatrix& m) const;

  CommCnnShape shape_;
  TensorList params_;
};

/// Convenience wrapper: gradient of the unweighted mean cross-entropy.
TensorList commcnn_gradient(const CommCnn& model, std::span<const LabeledMatrix> batch);

struct CnnTrainConfig {
  double learning_rate = 1e-2;
  double momentum = 0.0;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 500;
  double loss_threshold = 1e-3;  // stop once an epoch's mean loss is below this
  bool class_weighting = false;  // inverse-frequency weights
  std::size_t channels = 16;
  std::size_t hidden = 64;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::ostream* log = nullptr;  // one line per epoch when set
};

struct TrainingCurve {
  std::vector<double> epoch_loss;
};

/// Mini-batch gradient descent. The data is put into a canonical order before
/// the seeded shuffle, so the result depends only on the multiset of examples
/// and the seed. Throws std::invalid_argument on empty or single-class data,
/// on labels >= classes, or on inconsistent matrix shapes.
CommCnn commcnn_train(std::span<const LabeledMatrix> data, std::size_t classes, const CnnTrainConfig& config,
                      TrainingCurve* curve = nullptr);

/// Inverse-frequency weights n / (classes * count); absent classes get 0.
std::vector<double> inverse_frequency_weights(std::span<const std::size_t> labels, std::size_t classes);

}  // namespace locec
