#include "locec/commcnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "locec/errors.hpp"
#include "locec/parallel.hpp"

namespace locec {

namespace {

enum Param : std::size_t {
  kSq1W, kSq1B, kSq2W, kSq2B, kSq3W, kSq3B,
  kWide1W, kWide1B, kWide2W, kWide2B,
  kLong1W, kLong1B, kLong2W, kLong2B,
  kFc1W, kFc1B, kFc2W, kFc2B,
  kParamCount
};

std::size_t pooled(std::size_t n) { return (n + 1) / 2; }

/// Channel-major feature map.
struct Map {
  std::size_t c = 0, h = 0, w = 0;
  std::vector<double> v;

  Map() = default;
  Map(std::size_t c_, std::size_t h_, std::size_t w_) : c(c_), h(h_), w(w_), v(c_ * h_ * w_, 0.0) {}
  double& at(std::size_t ch, std::size_t y, std::size_t x) { return v[(ch * h + y) * w + x]; }
  double at(std::size_t ch, std::size_t y, std::size_t x) const { return v[(ch * h + y) * w + x]; }
};

struct ConvGeom {
  std::size_t kh, kw, ph, pw;
};

Map conv_forward(const Map& in, const Tensor& weight, const Tensor& bias, const ConvGeom& g) {
  const std::size_t cout = weight.shape[0];
  Map out(cout, in.h + 2 * g.ph - g.kh + 1, in.w + 2 * g.pw - g.kw + 1);
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t y = 0; y < out.h; ++y) {
      for (std::size_t x = 0; x < out.w; ++x) {
        double acc = bias.data[o];
        for (std::size_t i = 0; i < in.c; ++i) {
          const double* wk = &weight.data[((o * in.c + i) * g.kh) * g.kw];
          for (std::size_t dy = 0; dy < g.kh; ++dy) {
            const std::ptrdiff_t yy = static_cast<std::ptrdiff_t>(y + dy) - static_cast<std::ptrdiff_t>(g.ph);
            if (yy < 0 || yy >= static_cast<std::ptrdiff_t>(in.h)) continue;
            const double* row = &in.v[(i * in.h + static_cast<std::size_t>(yy)) * in.w];
            for (std::size_t dx = 0; dx < g.kw; ++dx) {
              const std::ptrdiff_t xx = static_cast<std::ptrdiff_t>(x + dx) - static_cast<std::ptrdiff_t>(g.pw);
              if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(in.w)) continue;
              acc += wk[dy * g.kw + dx] * row[xx];
            }
          }
        }
        out.at(o, y, x) = acc;
      }
    }
  }
  return out;
}

/// Accumulates weight and bias gradients; writes the input gradient when
/// `din` is non-null.
void conv_backward(const Map& in, const Tensor& weight, const Map& dout, const ConvGeom& g, Tensor& dweight,
                   Tensor& dbias, Map* din) {
  if (din) *din = Map(in.c, in.h, in.w);
  for (std::size_t o = 0; o < dout.c; ++o) {
    for (std::size_t y = 0; y < dout.h; ++y) {
      for (std::size_t x = 0; x < dout.w; ++x) {
        const double d = dout.at(o, y, x);
        if (d == 0.0) continue;
        dbias.data[o] += d;
        for (std::size_t i = 0; i < in.c; ++i) {
          const std::size_t base = ((o * in.c + i) * g.kh) * g.kw;
          for (std::size_t dy = 0; dy < g.kh; ++dy) {
            const std::ptrdiff_t yy = static_cast<std::ptrdiff_t>(y + dy) - static_cast<std::ptrdiff_t>(g.ph);
            if (yy < 0 || yy >= static_cast<std::ptrdiff_t>(in.h)) continue;
            for (std::size_t dx = 0; dx < g.kw; ++dx) {
              const std::ptrdiff_t xx = static_cast<std::ptrdiff_t>(x + dx) - static_cast<std::ptrdiff_t>(g.pw);
              if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(in.w)) continue;
              const auto yi = static_cast<std::size_t>(yy);
              const auto xi = static_cast<std::size_t>(xx);
              dweight.data[base + dy * g.kw + dx] += d * in.at(i, yi, xi);
              if (din) din->at(i, yi, xi) += d * weight.data[base + dy * g.kw + dx];
            }
          }
        }
      }
    }
  }
}

void relu(Map& m) {
  for (auto& x : m.v) x = std::max(x, 0.0);
}

/// dout *= [activation > 0]
void relu_backward(const Map& activation, Map& grad) {
  for (std::size_t i = 0; i < grad.v.size(); ++i) {
    if (activation.v[i] <= 0.0) grad.v[i] = 0.0;
  }
}

/// 2x2 max pooling with stride 2, window clipped at the border. `arg` holds
/// the flat input index of each output's maximum (first on ties).
Map maxpool(const Map& in, std::vector<std::size_t>& arg) {
  Map out(in.c, pooled(in.h), pooled(in.w));
  arg.assign(out.v.size(), 0);
  for (std::size_t ch = 0; ch < in.c; ++ch) {
    for (std::size_t y = 0; y < out.h; ++y) {
      for (std::size_t x = 0; x < out.w; ++x) {
        std::size_t best = (ch * in.h + 2 * y) * in.w + 2 * x;
        for (std::size_t dy = 0; dy < 2 && 2 * y + dy < in.h; ++dy) {
          for (std::size_t dx = 0; dx < 2 && 2 * x + dx < in.w; ++dx) {
            const std::size_t idx = (ch * in.h + 2 * y + dy) * in.w + 2 * x + dx;
            if (in.v[idx] > in.v[best]) best = idx;
          }
        }
        const std::size_t o = (ch * out.h + y) * out.w + x;
        out.v[o] = in.v[best];
        arg[o] = best;
      }
    }
  }
  return out;
}

/// Per-channel maximum over all positions.
std::vector<double> global_max(const Map& in, std::vector<std::size_t>& arg) {
  std::vector<double> out(in.c);
  arg.assign(in.c, 0);
  const std::size_t area = in.h * in.w;
  for (std::size_t ch = 0; ch < in.c; ++ch) {
    std::size_t best = ch * area;
    for (std::size_t p = 1; p < area; ++p) {
      if (in.v[ch * area + p] > in.v[best]) best = ch * area + p;
    }
    out[ch] = in.v[best];
    arg[ch] = best;
  }
  return out;
}

Map scatter(const Map& shape_of, std::span<const double> grad, const std::vector<std::size_t>& arg) {
  Map out(shape_of.c, shape_of.h, shape_of.w);
  for (std::size_t i = 0; i < grad.size(); ++i) out.v[arg[i]] += grad[i];
  return out;
}

struct Activations {
  Map input;
  Map sq1, pool1, sq2, pool2, sq3, pool3;
  std::vector<std::size_t> arg1, arg2, arg3;
  Map wide1, wide2, long1, long2;
  std::vector<std::size_t> wide_arg, long_arg;
  std::vector<double> flat, hidden, logits;
};

const ConvGeom kSquare{3, 3, 1, 1};
const ConvGeom kPointwise{1, 1, 0, 0};

std::vector<std::vector<std::size_t>> expected_shapes(const CommCnnShape& s) {
  const std::size_t c = s.channels;
  return {{c, 1, 3, 3}, {c},         {c, c, 3, 3}, {c},         {c, c, 3, 3}, {c},
          {c, 1, 1, s.width}, {c},   {c, c, 1, 1}, {c},         {c, 1, s.k, 1}, {c},
          {c, c, 1, 1}, {c},         {s.hidden, s.flat_size()}, {s.hidden},
          {s.classes, s.hidden},     {s.classes}};
}

const char* const kParamNames[kParamCount] = {
    "square1.weight", "square1.bias", "square2.weight", "square2.bias", "square3.weight", "square3.bias",
    "wide1.weight",   "wide1.bias",   "wide2.weight",   "wide2.bias",   "long1.weight",   "long1.bias",
    "long2.weight",   "long2.bias",   "fc1.weight",     "fc1.bias",     "fc2.weight",     "fc2.bias"};

void run_forward(const CommCnnShape& s, const TensorList& p, std::span<const double> input, Activations& a) {
  a.input = Map(1, s.k, s.width);
  std::copy(input.begin(), input.end(), a.input.v.begin());

  a.sq1 = conv_forward(a.input, p[kSq1W], p[kSq1B], kSquare);
  relu(a.sq1);
  a.pool1 = maxpool(a.sq1, a.arg1);
  a.sq2 = conv_forward(a.pool1, p[kSq2W], p[kSq2B], kSquare);
  relu(a.sq2);
  a.pool2 = maxpool(a.sq2, a.arg2);
  a.sq3 = conv_forward(a.pool2, p[kSq3W], p[kSq3B], kSquare);
  relu(a.sq3);
  a.pool3 = maxpool(a.sq3, a.arg3);

  a.wide1 = conv_forward(a.input, p[kWide1W], p[kWide1B], {1, s.width, 0, 0});
  relu(a.wide1);
  a.wide2 = conv_forward(a.wide1, p[kWide2W], p[kWide2B], kPointwise);
  relu(a.wide2);
  const auto wide = global_max(a.wide2, a.wide_arg);

  a.long1 = conv_forward(a.input, p[kLong1W], p[kLong1B], {s.k, 1, 0, 0});
  relu(a.long1);
  a.long2 = conv_forward(a.long1, p[kLong2W], p[kLong2B], kPointwise);
  relu(a.long2);
  const auto lng = global_max(a.long2, a.long_arg);

  a.flat = a.pool3.v;
  a.flat.insert(a.flat.end(), wide.begin(), wide.end());
  a.flat.insert(a.flat.end(), lng.begin(), lng.end());

  const std::size_t f = a.flat.size();
  a.hidden.assign(s.hidden, 0.0);
  for (std::size_t j = 0; j < s.hidden; ++j) {
    double acc = p[kFc1B].data[j];
    const double* w = &p[kFc1W].data[j * f];
    for (std::size_t i = 0; i < f; ++i) acc += w[i] * a.flat[i];
    a.hidden[j] = std::max(acc, 0.0);
  }
  a.logits.assign(s.classes, 0.0);
  for (std::size_t l = 0; l < s.classes; ++l) {
    double acc = p[kFc2B].data[l];
    const double* w = &p[kFc2W].data[l * s.hidden];
    for (std::size_t j = 0; j < s.hidden; ++j) acc += w[j] * a.hidden[j];
    a.logits[l] = acc;
  }
}

/// Adds scale * d(loss)/d(params) for one sample to `g`, where dlogits is the
/// gradient of the loss with respect to the logits.
void run_backward(const CommCnnShape& s, const TensorList& p, const Activations& a, std::span<const double> dlogits,
                  TensorList& g) {
  const std::size_t f = a.flat.size();
  std::vector<double> dhidden(s.hidden, 0.0);
  for (std::size_t l = 0; l < s.classes; ++l) {
    const double d = dlogits[l];
    g[kFc2B].data[l] += d;
    for (std::size_t j = 0; j < s.hidden; ++j) {
      g[kFc2W].data[l * s.hidden + j] += d * a.hidden[j];
      dhidden[j] += d * p[kFc2W].data[l * s.hidden + j];
    }
  }
  std::vector<double> dflat(f, 0.0);
  for (std::size_t j = 0; j < s.hidden; ++j) {
    if (a.hidden[j] <= 0.0) continue;
    const double d = dhidden[j];
    g[kFc1B].data[j] += d;
    double* gw = &g[kFc1W].data[j * f];
    const double* w = &p[kFc1W].data[j * f];
    for (std::size_t i = 0; i < f; ++i) {
      gw[i] += d * a.flat[i];
      dflat[i] += d * w[i];
    }
  }

  const std::size_t square_len = a.pool3.v.size();
  const std::span<const double> dsquare(dflat.data(), square_len);
  const std::span<const double> dwide(dflat.data() + square_len, s.channels);
  const std::span<const double> dlong(dflat.data() + square_len + s.channels, s.channels);

  Map d = scatter(a.sq3, dsquare, a.arg3);
  relu_backward(a.sq3, d);
  Map dprev;
  conv_backward(a.pool2, p[kSq3W], d, kSquare, g[kSq3W], g[kSq3B], &dprev);
  d = scatter(a.sq2, dprev.v, a.arg2);
  relu_backward(a.sq2, d);
  conv_backward(a.pool1, p[kSq2W], d, kSquare, g[kSq2W], g[kSq2B], &dprev);
  d = scatter(a.sq1, dprev.v, a.arg1);
  relu_backward(a.sq1, d);
  conv_backward(a.input, p[kSq1W], d, kSquare, g[kSq1W], g[kSq1B], nullptr);

  d = scatter(a.wide2, dwide, a.wide_arg);
  relu_backward(a.wide2, d);
  conv_backward(a.wide1, p[kWide2W], d, kPointwise, g[kWide2W], g[kWide2B], &dprev);
  relu_backward(a.wide1, dprev);
  conv_backward(a.input, p[kWide1W], dprev, {1, s.width, 0, 0}, g[kWide1W], g[kWide1B], nullptr);

  d = scatter(a.long2, dlong, a.long_arg);
  relu_backward(a.long2, d);
  conv_backward(a.long1, p[kLong2W], d, kPointwise, g[kLong2W], g[kLong2B], &dprev);
  relu_backward(a.long1, dprev);
  conv_backward(a.input, p[kLong1W], dprev, {s.k, 1, 0, 0}, g[kLong1W], g[kLong1B], nullptr);
}

void add_into(TensorList& acc, const TensorList& x) {
  for (std::size_t t = 0; t < acc.size(); ++t) {
    for (std::size_t i = 0; i < acc[t].data.size(); ++i) acc[t].data[i] += x[t].data[i];
  }
}

void check_width(const CommCnnShape& s) {
  if (s.k == 0 || s.width == 0 || s.channels == 0 || s.hidden == 0 || s.classes == 0) {
    throw ShapeError("CommCnn dimensions must be positive");
  }
}

}  // namespace

std::size_t CommCnnShape::flat_size() const {
  const std::size_t h = pooled(pooled(pooled(k)));
  const std::size_t w = pooled(pooled(pooled(width)));
  return channels * h * w + 2 * channels;
}

CommCnn::CommCnn(const CommCnnShape& shape) : shape_(shape) {
  check_width(shape_);
  const auto shapes = expected_shapes(shape_);
  for (std::size_t i = 0; i < kParamCount; ++i) params_.emplace_back(kParamNames[i], shapes[i]);
}

CommCnn CommCnn::initialize(const CommCnnShape& shape, std::uint64_t seed) {
  CommCnn model(shape);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < kParamCount; i += 2) {
    auto& w = model.params_[i];
    const std::size_t fan_in = w.size() / w.shape[0];
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    for (auto& x : w.data) x = dist(rng);
  }
  return model;
}

CommCnn CommCnn::from_tensors(const CommCnnShape& shape, TensorList params) {
  CommCnn model(shape);
  if (params.size() != kParamCount) throw ShapeError("CommCnn expects " + std::to_string(kParamCount) + " tensors");
  for (std::size_t i = 0; i < kParamCount; ++i) {
    if (params[i].name != model.params_[i].name || params[i].shape != model.params_[i].shape ||
        params[i].data.size() != model.params_[i].data.size()) {
      throw ShapeError("tensor '" + params[i].name + "' does not match expected '" + model.params_[i].name + "'");
    }
  }
  model.params_ = std::move(params);
  return model;
}

void CommCnn::check_matrix(const FeatureMatrix& m) const {
  if (m.k != shape_.k || m.width() != shape_.width || m.values.size() != m.k * m.width()) {
    throw ShapeError("feature matrix is " + std::to_string(m.k) + "x" + std::to_string(m.width()) +
                     ", model expects " + std::to_string(shape_.k) + "x" + std::to_string(shape_.width));
  }
}

std::vector<double> CommCnn::logits(std::span<const double> input) const {
  if (input.size() != shape_.k * shape_.width) throw ShapeError("input size does not match model");
  Activations a;
  run_forward(shape_, params_, input, a);
  return a.logits;
}

ClassResult CommCnn::forward(const FeatureMatrix& m) const {
  check_matrix(m);
  return class_result_from_logits(logits(m.values));
}

double CommCnn::loss_and_gradient(std::span<const LabeledMatrix* const> batch, TensorList& gradient,
                                  std::span<const double> class_weights, std::size_t workers) const {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  for (const auto* ex : batch) {
    check_matrix(ex->matrix);
    if (ex->label >= shape_.classes) throw std::invalid_argument("label out of range");
  }
  if (!class_weights.empty() && class_weights.size() != shape_.classes) {
    throw std::invalid_argument("class weight count does not match classes");
  }
  auto weight_of = [&](std::size_t label) { return class_weights.empty() ? 1.0 : class_weights[label]; };
  double total_weight = 0.0;
  for (const auto* ex : batch) total_weight += weight_of(ex->label);
  if (total_weight <= 0.0) throw std::invalid_argument("batch has zero total weight");

  std::vector<TensorList> per_sample(batch.size());
  std::vector<double> losses(batch.size());
  parallel_for(
      batch.size(), workers,
      [&](std::size_t i) {
        const auto& ex = *batch[i];
        Activations a;
        run_forward(shape_, params_, ex.matrix.values, a);
        const auto prob = softmax(a.logits);
        const double w = weight_of(ex.label) / total_weight;
        std::vector<double> dlogits(shape_.classes);
        for (std::size_t l = 0; l < shape_.classes; ++l) dlogits[l] = w * (prob[l] - (l == ex.label ? 1.0 : 0.0));
        losses[i] = -w * std::log(std::max(prob[ex.label], 1e-300));
        per_sample[i] = zeros_like(params_);
        run_backward(shape_, params_, a, dlogits, per_sample[i]);
      },
      1);

  gradient = zeros_like(params_);
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    add_into(gradient, per_sample[i]);
    loss += losses[i];
  }
  return loss;
}

TensorList commcnn_gradient(const CommCnn& model, std::span<const LabeledMatrix> batch) {
  std::vector<const LabeledMatrix*> ptrs;
  for (const auto& ex : batch) ptrs.push_back(&ex);
  TensorList g;
  model.loss_and_gradient(ptrs, g);
  return g;
}

std::vector<double> inverse_frequency_weights(std::span<const std::size_t> labels, std::size_t classes) {
  std::vector<double> counts(classes, 0.0);
  for (auto l : labels) counts.at(l) += 1.0;
  std::vector<double> w(classes, 0.0);
  for (std::size_t c = 0; c < classes; ++c) {
    if (counts[c] > 0) w[c] = static_cast<double>(labels.size()) / (static_cast<double>(classes) * counts[c]);
  }
  return w;
}

CommCnn commcnn_train(std::span<const LabeledMatrix> data, std::size_t classes, const CnnTrainConfig& config,
                      TrainingCurve* curve) {
  if (data.empty()) throw std::invalid_argument("no training examples");
  if (config.batch_size == 0) throw std::invalid_argument("batch size must be positive");
  const auto& first = data.front().matrix;
  std::vector<std::size_t> labels;
  for (const auto& ex : data) {
    if (ex.label >= classes) throw std::invalid_argument("label out of range");
    if (ex.matrix.k != first.k || ex.matrix.width() != first.width()) {
      throw std::invalid_argument("feature matrices have inconsistent shapes");
    }
    labels.push_back(ex.label);
  }
  if (std::all_of(labels.begin(), labels.end(), [&](auto l) { return l == labels.front(); })) {
    throw std::invalid_argument("training data covers a single class");
  }

  const CommCnnShape shape{first.k, first.width(), config.channels, config.hidden, classes};
  std::mt19937_64 rng(config.seed);
  CommCnn model = CommCnn::initialize(shape, rng());

  // canonical order: by label, then by matrix contents
  std::vector<const LabeledMatrix*> order;
  for (const auto& ex : data) order.push_back(&ex);
  std::sort(order.begin(), order.end(), [](const LabeledMatrix* a, const LabeledMatrix* b) {
    if (a->label != b->label) return a->label < b->label;
    return a->matrix.values < b->matrix.values;
  });

  const std::vector<double> weights =
      config.class_weighting ? inverse_frequency_weights(labels, classes) : std::vector<double>{};
  TensorList velocity = zeros_like(model.params());
  TensorList grad;
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const std::span<const LabeledMatrix* const> batch(order.data() + begin, end - begin);
      const double loss = model.loss_and_gradient(batch, grad, weights, config.workers);
      epoch_loss += loss * static_cast<double>(end - begin);
      auto& params = model.params();
      for (std::size_t t = 0; t < params.size(); ++t) {
        for (std::size_t i = 0; i < params[t].data.size(); ++i) {
          velocity[t].data[i] = config.momentum * velocity[t].data[i] - config.learning_rate * grad[t].data[i];
          params[t].data[i] += velocity[t].data[i];
        }
      }
    }
    epoch_loss /= static_cast<double>(order.size());
    if (curve) curve->epoch_loss.push_back(epoch_loss);
    if (config.log) *config.log << "epoch " << epoch + 1 << " loss " << epoch_loss << '\n';
    if (epoch_loss < config.loss_threshold) break;
  }
  return model;
}

}  // namespace locec
