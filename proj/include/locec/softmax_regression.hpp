/// L2-regularised multinomial logistic regression, used both as the
/// aggregate-feature community baseline and as the edge combiner.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "locec/labels.hpp"
#include "locec/tensor.hpp"

namespace locec {

struct RegressionData {
  std::size_t dim = 0;
  std::vector<double> x;  // row-major, size() * dim
  std::vector<std::size_t> y;

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * dim, dim}; }
  void add(std::span<const double> features, std::size_t label);
};

class SoftmaxRegression {
 public:
  SoftmaxRegression() = default;
  /// Zero weights and biases.
  SoftmaxRegression(std::size_t dim, std::size_t classes);

  std::size_t dim() const { return dim_; }
  std::size_t classes() const { return classes_; }
  /// classes x dim, row-major
  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& bias() { return bias_; }
  const std::vector<double>& bias() const { return bias_; }

  /// Throws ShapeError when x has the wrong length.
  std::vector<double> logits(std::span<const double> x) const;
  ClassResult predict(std::span<const double> x) const;

  /// Flat parameter vector [weights..., bias...].
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> theta);

  TensorList to_tensors() const;
  static SoftmaxRegression from_tensors(const TensorList& tensors);

  friend bool operator==(const SoftmaxRegression&, const SoftmaxRegression&) = default;

 private:
  std::size_t dim_ = 0;
  std::size_t classes_ = 0;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

struct RegressionConfig {
  double l2 = 1e-4;  // penalty (l2/2)*||W||^2; biases are not penalised
  bool class_weighting = false;
  std::size_t max_iterations = 2000;
  double gradient_tolerance = 1e-10;  // stop when ||grad||_inf falls below
  std::size_t history = 10;
  std::uint64_t seed = 0;  // 0: start from zero, otherwise small random start
};

/// Mean (optionally class-weighted) cross-entropy plus the L2 penalty.
/// Writes the gradient in flatten() layout when `gradient` is non-null.
double regression_objective(const SoftmaxRegression& model, const RegressionData& data,
                            const RegressionConfig& config, std::vector<double>* gradient = nullptr);

struct RegressionReport {
  double loss = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
};

/// Minimises regression_objective with L-BFGS. Throws std::invalid_argument on
/// empty data, single-class data or labels >= classes.
SoftmaxRegression regression_train(const RegressionData& data, std::size_t classes, const RegressionConfig& config,
                                   RegressionReport* report = nullptr);

}  // namespace locec
