#include "locec/softmax_regression.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>
#include <string>

#include "locec/errors.hpp"

namespace locec {

void RegressionData::add(std::span<const double> features, std::size_t label) {
  if (y.empty() && dim == 0) dim = features.size();
  if (features.size() != dim) throw ShapeError("regression row has wrong length");
  x.insert(x.end(), features.begin(), features.end());
  y.push_back(label);
}

SoftmaxRegression::SoftmaxRegression(std::size_t dim, std::size_t classes)
    : dim_(dim), classes_(classes), weights_(dim * classes, 0.0), bias_(classes, 0.0) {}

std::vector<double> SoftmaxRegression::logits(std::span<const double> x) const {
  if (x.size() != dim_) {
    throw ShapeError("input has " + std::to_string(x.size()) + " features, model expects " + std::to_string(dim_));
  }
  std::vector<double> z(bias_);
  for (std::size_t c = 0; c < classes_; ++c) {
    const double* w = &weights_[c * dim_];
    for (std::size_t j = 0; j < dim_; ++j) z[c] += w[j] * x[j];
  }
  return z;
}

ClassResult SoftmaxRegression::predict(std::span<const double> x) const { return class_result_from_logits(logits(x)); }

std::vector<double> SoftmaxRegression::flatten() const {
  std::vector<double> theta(weights_);
  theta.insert(theta.end(), bias_.begin(), bias_.end());
  return theta;
}

void SoftmaxRegression::unflatten(std::span<const double> theta) {
  if (theta.size() != weights_.size() + bias_.size()) throw ShapeError("parameter vector has wrong length");
  std::copy(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(weights_.size()), weights_.begin());
  std::copy(theta.begin() + static_cast<std::ptrdiff_t>(weights_.size()), theta.end(), bias_.begin());
}

TensorList SoftmaxRegression::to_tensors() const {
  TensorList out;
  out.emplace_back("weight", std::vector<std::size_t>{classes_, dim_});
  out.back().data = weights_;
  out.emplace_back("bias", std::vector<std::size_t>{classes_});
  out.back().data = bias_;
  return out;
}

SoftmaxRegression SoftmaxRegression::from_tensors(const TensorList& tensors) {
  if (tensors.size() != 2 || tensors[0].name != "weight" || tensors[1].name != "bias" ||
      tensors[0].shape.size() != 2 || tensors[1].shape.size() != 1 || tensors[0].shape[0] != tensors[1].shape[0]) {
    throw ShapeError("expected tensors 'weight' [classes, dim] and 'bias' [classes]");
  }
  SoftmaxRegression m(tensors[0].shape[1], tensors[0].shape[0]);
  m.weights_ = tensors[0].data;
  m.bias_ = tensors[1].data;
  if (m.weights_.size() != m.dim_ * m.classes_ || m.bias_.size() != m.classes_) {
    throw ShapeError("tensor data does not match its shape");
  }
  return m;
}

namespace {

std::vector<double> sample_weights(const RegressionData& data, std::size_t classes, bool class_weighting) {
  std::vector<double> per_class(classes, 1.0);
  if (class_weighting) {
    std::vector<double> counts(classes, 0.0);
    for (auto l : data.y) counts[l] += 1.0;
    for (std::size_t c = 0; c < classes; ++c) {
      per_class[c] = counts[c] > 0 ? static_cast<double>(data.size()) / (static_cast<double>(classes) * counts[c]) : 0.0;
    }
  }
  std::vector<double> w(data.size());
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) total += (w[i] = per_class[data.y[i]]);
  for (auto& x : w) x /= total;
  return w;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(std::span<const double> a) {
  double m = 0.0;
  for (auto x : a) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double regression_objective(const SoftmaxRegression& model, const RegressionData& data, const RegressionConfig& config,
                            std::vector<double>* gradient) {
  const std::size_t d = model.dim();
  const std::size_t k = model.classes();
  if (data.dim != d) throw ShapeError("data dimension does not match model");
  const auto w = sample_weights(data, k, config.class_weighting);
  if (gradient) gradient->assign(k * d + k, 0.0);

  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    const auto p = softmax(model.logits(x));
    const std::size_t y = data.y[i];
    loss -= w[i] * std::log(std::max(p[y], 1e-300));
    if (!gradient) continue;
    for (std::size_t c = 0; c < k; ++c) {
      const double r = w[i] * (p[c] - (c == y ? 1.0 : 0.0));
      double* g = gradient->data() + c * d;
      for (std::size_t j = 0; j < d; ++j) g[j] += r * x[j];
      (*gradient)[k * d + c] += r;
    }
  }
  const auto& weights = model.weights();
  loss += 0.5 * config.l2 * dot(weights, weights);
  if (gradient) {
    for (std::size_t i = 0; i < weights.size(); ++i) (*gradient)[i] += config.l2 * weights[i];
  }
  return loss;
}

SoftmaxRegression regression_train(const RegressionData& data, std::size_t classes, const RegressionConfig& config,
                                   RegressionReport* report) {
  if (data.size() == 0) throw std::invalid_argument("no training examples");
  if (classes < 2) throw std::invalid_argument("need at least two classes");
  for (auto l : data.y) {
    if (l >= classes) throw std::invalid_argument("label out of range");
  }
  if (std::all_of(data.y.begin(), data.y.end(), [&](auto l) { return l == data.y.front(); })) {
    throw std::invalid_argument("training data covers a single class");
  }

  SoftmaxRegression model(data.dim, classes);
  std::vector<double> theta = model.flatten();
  if (config.seed != 0) {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> dist(0.0, 0.1);
    for (auto& t : theta) t = dist(rng);
  }

  auto evaluate = [&](std::span<const double> at, std::vector<double>& grad) {
    model.unflatten(at);
    return regression_objective(model, data, config, &grad);
  };

  std::vector<double> grad;
  double loss = evaluate(theta, grad);
  std::deque<std::pair<std::vector<double>, std::vector<double>>> memory;  // (s, y)
  std::size_t iter = 0;
  const std::size_t n = theta.size();
  std::vector<double> direction(n), next(n), next_grad;

  for (; iter < config.max_iterations && inf_norm(grad) > config.gradient_tolerance; ++iter) {
    // two-loop recursion
    direction = grad;
    std::vector<double> alpha(memory.size());
    for (std::size_t m = memory.size(); m-- > 0;) {
      const auto& [s, y] = memory[m];
      alpha[m] = dot(s, direction) / dot(y, s);
      for (std::size_t i = 0; i < n; ++i) direction[i] -= alpha[m] * y[i];
    }
    if (!memory.empty()) {
      const auto& [s, y] = memory.back();
      const double gamma = dot(s, y) / dot(y, y);
      for (auto& x : direction) x *= gamma;
    }
    for (std::size_t m = 0; m < memory.size(); ++m) {
      const auto& [s, y] = memory[m];
      const double beta = dot(y, direction) / dot(y, s);
      for (std::size_t i = 0; i < n; ++i) direction[i] += s[i] * (alpha[m] - beta);
    }
    for (auto& x : direction) x = -x;
    double slope = dot(grad, direction);
    if (slope >= 0.0) {
      // not a descent direction; restart from steepest descent
      memory.clear();
      for (std::size_t i = 0; i < n; ++i) direction[i] = -grad[i];
      slope = dot(grad, direction);
    }

    double step = memory.empty() ? std::min(1.0, 1.0 / std::max(inf_norm(grad), 1e-12)) : 1.0;
    double next_loss = loss;
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      for (std::size_t i = 0; i < n; ++i) next[i] = theta[i] + step * direction[i];
      next_loss = evaluate(next, next_grad);
      if (next_loss <= loss + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = next[i] - theta[i];
      y[i] = next_grad[i] - grad[i];
    }
    if (dot(s, y) > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
      memory.emplace_back(std::move(s), std::move(y));
      if (memory.size() > config.history) memory.pop_front();
    }
    const bool stalled = loss - next_loss <= 1e-16 * std::max(1.0, std::abs(loss));
    theta.swap(next);
    grad.swap(next_grad);
    loss = next_loss;
    if (stalled) {
      ++iter;
      break;
    }
  }
  model.unflatten(theta);
  if (report) *report = {loss, inf_norm(grad), iter};
  return model;
}

}  // namespace locec
