// Copyright 2026 The PAST Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "past/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "past/rng.hpp"

namespace past::nn {

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw std::invalid_argument("unknown activation '" + name +
                              "' (expected relu or tanh)");
}

std::string activation_name(Activation activation) {
  return activation == Activation::kRelu ? "relu" : "tanh";
}

void ModelSpec::validate() const {
  if (input_dim < 1) {
    throw std::invalid_argument("ModelSpec: input_dim must be >= 1");
  }
  if (layer_widths.empty()) {
    throw std::invalid_argument("ModelSpec: layer_widths must be non-empty");
  }
  for (int w : layer_widths) {
    if (w < 1) throw std::invalid_argument("ModelSpec: zero or negative width");
  }
  if (num_classes < 2) {
    throw std::invalid_argument("ModelSpec: num_classes must be >= 2");
  }
}

std::vector<int> ModelSpec::layer_dims() const {
  std::vector<int> dims;
  dims.reserve(layer_widths.size() + 2);
  dims.push_back(input_dim);
  dims.insert(dims.end(), layer_widths.begin(), layer_widths.end());
  dims.push_back(num_classes);
  return dims;
}

std::size_t ModelSpec::param_count() const {
  const auto dims = layer_dims();
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    count += static_cast<std::size_t>(dims[l]) * dims[l + 1] + dims[l + 1];
  }
  return count;
}

ParameterStore::ParameterStore(std::vector<double> values,
                               std::vector<Segment> segments)
    : values_(std::move(values)), segments_(std::move(segments)) {
  std::size_t expected_offset = 0;
  for (const auto& segment : segments_) {
    if (segment.offset != expected_offset) {
      throw std::invalid_argument(
          "ParameterStore: segments must be contiguous and ordered");
    }
    expected_offset += segment.length;
  }
  if (expected_offset != values_.size()) {
    throw std::invalid_argument(
        "ParameterStore: segment lengths must sum to the parameter count");
  }
}

std::span<const double> ParameterStore::segment_values(
    const Segment& segment) const {
  return {values_.data() + segment.offset, segment.length};
}

ParameterStore init_model(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto dims = spec.layer_dims();

  std::vector<double> values;
  values.reserve(spec.param_count());
  std::vector<Segment> segments;
  Rng rng(seed);

  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t fan_in = static_cast<std::size_t>(dims[l]);
    const std::size_t fan_out = static_cast<std::size_t>(dims[l + 1]);
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    const std::string base = "fc" + std::to_string(l);

    segments.push_back({base + ".weight", values.size(), fan_out * fan_in});
    for (std::size_t i = 0; i < fan_out * fan_in; ++i) {
      values.push_back(rng.uniform(-bound, bound));
    }
    segments.push_back({base + ".bias", values.size(), fan_out});
    for (std::size_t i = 0; i < fan_out; ++i) values.push_back(0.0);
  }
  return ParameterStore(std::move(values), std::move(segments));
}

namespace {

void check_model_shape(const ParameterStore& params, const ModelSpec& spec) {
  if (params.size() != spec.param_count()) {
    throw std::invalid_argument("model: parameter count does not match spec");
  }
  if (params.segments().size() !=
      2 * static_cast<std::size_t>(spec.num_layers())) {
    throw std::invalid_argument("model: segment layout does not match spec");
  }
}

inline double activate(double z, Activation a) {
  return a == Activation::kRelu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

inline double activate_grad(double z, Activation a) {
  if (a == Activation::kRelu) return z > 0.0 ? 1.0 : 0.0;
  const double t = std::tanh(z);
  return 1.0 - t * t;
}

}  // namespace

Matrix forward(const ParameterStore& params, const ModelSpec& spec,
               const Matrix& inputs, BatchCache* cache) {
  spec.validate();
  check_model_shape(params, spec);
  if (inputs.cols != static_cast<std::size_t>(spec.input_dim)) {
    throw std::invalid_argument("forward: input width does not match spec");
  }
  const auto dims = spec.layer_dims();
  const std::size_t batch = inputs.rows;
  const double* theta = params.values().data();

  if (cache) {
    cache->input = inputs;
    cache->pre_activations.clear();
    cache->activations.clear();
    cache->batch_size = batch;
    cache->param_version = params.version();
  }

  Matrix current = inputs;
  for (int l = 0; l < spec.num_layers(); ++l) {
    const std::size_t in_dim = static_cast<std::size_t>(dims[l]);
    const std::size_t out_dim = static_cast<std::size_t>(dims[l + 1]);
    const Segment& wseg = params.segments()[2 * l];
    const Segment& bseg = params.segments()[2 * l + 1];
    const double* w = theta + wseg.offset;  // [out_dim x in_dim], row-major
    const double* b = theta + bseg.offset;

    Matrix z(batch, out_dim);
    for (std::size_t r = 0; r < batch; ++r) {
      const double* x = current.row(r).data();
      double* zr = z.row(r).data();
      for (std::size_t o = 0; o < out_dim; ++o) {
        const double* wrow = w + o * in_dim;
        double acc = b[o];
        for (std::size_t i = 0; i < in_dim; ++i) acc += wrow[i] * x[i];
        zr[o] = acc;
      }
    }
    if (cache) cache->pre_activations.push_back(z);

    if (l + 1 < spec.num_layers()) {
      Matrix a(batch, out_dim);
      for (std::size_t i = 0; i < z.data.size(); ++i) {
        a.data[i] = activate(z.data[i], spec.activation);
      }
      if (cache) cache->activations.push_back(a);
      current = std::move(a);
    } else {
      current = std::move(z);
    }
  }
  return current;
}

CrossEntropyResult cross_entropy(const Matrix& logits,
                                 const std::vector<int>& labels) {
  if (logits.rows != labels.size()) {
    throw std::invalid_argument("cross_entropy: batch size mismatch");
  }
  if (logits.rows == 0) {
    throw std::invalid_argument("cross_entropy: empty batch");
  }
  const std::size_t k = logits.cols;

  CrossEntropyResult result;
  result.per_example.resize(logits.rows);
  result.probs = Matrix(logits.rows, k);

  double total = 0.0;
  for (std::size_t r = 0; r < logits.rows; ++r) {
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      throw std::invalid_argument("cross_entropy: label out of [0, K)");
    }
    const auto row = logits.row(r);
    const double max_logit = *std::max_element(row.begin(), row.end());
    double denom = 0.0;
    for (double v : row) denom += std::exp(v - max_logit);
    auto probs = result.probs.row(r);
    for (std::size_t j = 0; j < k; ++j) {
      probs[j] = std::exp(row[j] - max_logit) / denom;
    }
    const double loss = std::log(denom) - (row[y] - max_logit);
    result.per_example[r] = std::max(0.0, loss);
    total += result.per_example[r];
  }
  result.mean_loss = total / static_cast<double>(logits.rows);
  return result;
}

std::vector<double> backward(const ParameterStore& params,
                             const ModelSpec& spec, const BatchCache& cache,
                             const Matrix& probs,
                             const std::vector<int>& labels) {
  spec.validate();
  check_model_shape(params, spec);
  if (cache.param_version != params.version()) {
    throw std::invalid_argument(
        "backward: stale cache (parameters changed since forward)");
  }
  const std::size_t batch = cache.batch_size;
  if (probs.rows != batch || labels.size() != batch) {
    throw std::invalid_argument("backward: probs/labels do not match cache");
  }
  if (cache.pre_activations.size() !=
          static_cast<std::size_t>(spec.num_layers()) ||
      probs.cols != static_cast<std::size_t>(spec.num_classes)) {
    throw std::invalid_argument("backward: cache does not match spec");
  }

  const auto dims = spec.layer_dims();
  const double* theta = params.values().data();
  std::vector<double> grad(params.size(), 0.0);
  const double inv_batch = 1.0 / static_cast<double>(batch);

  // dL/dz for the output layer of the mean cross-entropy.
  Matrix delta(batch, static_cast<std::size_t>(spec.num_classes));
  for (std::size_t r = 0; r < batch; ++r) {
    const int y = labels[r];
    if (y < 0 || y >= spec.num_classes) {
      throw std::invalid_argument("backward: label out of [0, K)");
    }
    for (std::size_t j = 0; j < delta.cols; ++j) {
      delta(r, j) = (probs(r, j) - (static_cast<int>(j) == y ? 1.0 : 0.0)) *
                    inv_batch;
    }
  }

  for (int l = spec.num_layers() - 1; l >= 0; --l) {
    const std::size_t in_dim = static_cast<std::size_t>(dims[l]);
    const std::size_t out_dim = static_cast<std::size_t>(dims[l + 1]);
    const Segment& wseg = params.segments()[2 * l];
    const Segment& bseg = params.segments()[2 * l + 1];
    const Matrix& below =
        l == 0 ? cache.input : cache.activations[static_cast<std::size_t>(l) - 1];

    double* gw = grad.data() + wseg.offset;
    double* gb = grad.data() + bseg.offset;
    for (std::size_t r = 0; r < batch; ++r) {
      const double* d = delta.row(r).data();
      const double* x = below.row(r).data();
      for (std::size_t o = 0; o < out_dim; ++o) {
        const double dv = d[o];
        gb[o] += dv;
        double* gwrow = gw + o * in_dim;
        for (std::size_t i = 0; i < in_dim; ++i) gwrow[i] += dv * x[i];
      }
    }

    if (l > 0) {
      const double* w = theta + wseg.offset;
      const Matrix& z_below =
          cache.pre_activations[static_cast<std::size_t>(l) - 1];
      Matrix next_delta(batch, in_dim);
      for (std::size_t r = 0; r < batch; ++r) {
        const double* d = delta.row(r).data();
        double* nd = next_delta.row(r).data();
        for (std::size_t i = 0; i < in_dim; ++i) {
          double acc = 0.0;
          for (std::size_t o = 0; o < out_dim; ++o) {
            acc += d[o] * w[o * in_dim + i];
          }
          nd[i] = acc * activate_grad(z_below(r, i), spec.activation);
        }
      }
      delta = std::move(next_delta);
    }
  }
  return grad;
}

void OptimHyper::validate() const {
  if (lr0 < 0.0) throw std::invalid_argument("OptimHyper: lr0 must be >= 0");
  if (momentum < 0.0 || momentum >= 1.0) {
    throw std::invalid_argument("OptimHyper: momentum must be in [0, 1)");
  }
  if (weight_decay < 0.0) {
    throw std::invalid_argument("OptimHyper: weight_decay must be >= 0");
  }
  if (batch_size < 1) {
    throw std::invalid_argument("OptimHyper: batch_size must be >= 1");
  }
}

void sgd_step(ParameterStore& params, const std::vector<double>& grad,
              OptimizerState& state, double lr) {
  if (grad.size() != params.size() ||
      state.momentum_buffers.size() != params.size()) {
    throw std::invalid_argument("sgd_step: length mismatch");
  }
  for (double g : grad) {
    if (!std::isfinite(g)) {
      throw std::runtime_error("sgd_step: non-finite gradient entry");
    }
  }
  auto& theta = params.mutable_values();
  const double momentum = state.hyper.momentum;
  const double weight_decay = state.hyper.weight_decay;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    double& buffer = state.momentum_buffers[i];
    buffer = momentum * buffer + (grad[i] + weight_decay * theta[i]);
    theta[i] -= lr * buffer;
  }
}

double cosine_lr(int epoch, int total_epochs, double lr0) {
  if (total_epochs <= 0) {
    throw std::invalid_argument("cosine_lr: total_epochs must be positive");
  }
  if (epoch < 0 || epoch > total_epochs) {
    throw std::invalid_argument("cosine_lr: epoch out of [0, total_epochs]");
  }
  const double phase = std::numbers::pi * static_cast<double>(epoch) /
                       static_cast<double>(total_epochs);
  return lr0 * (1.0 + std::cos(phase)) / 2.0;
}

EvalResult evaluate(const ParameterStore& params, const ModelSpec& spec,
                    const data::Dataset& dataset) {
  if (dataset.size() == 0) {
    throw std::invalid_argument("evaluate: empty dataset");
  }
  constexpr std::size_t kEvalBatch = 256;
  const std::size_t n = dataset.size();

  EvalResult result;
  result.per_example_losses.resize(n);
  std::size_t correct = 0;
  double total_loss = 0.0;

  for (std::size_t start = 0; start < n; start += kEvalBatch) {
    const std::size_t len = std::min(kEvalBatch, n - start);
    Matrix batch(len, dataset.features.cols);
    std::vector<int> labels(len);
    for (std::size_t i = 0; i < len; ++i) {
      const auto src = dataset.features.row(start + i);
      std::copy(src.begin(), src.end(), batch.row(i).begin());
      labels[i] = dataset.labels[start + i];
    }
    const Matrix logits = forward(params, spec, batch);
    const auto ce = cross_entropy(logits, labels);
    for (std::size_t i = 0; i < len; ++i) {
      result.per_example_losses[start + i] = ce.per_example[i];
      total_loss += ce.per_example[i];
      const auto row = logits.row(i);
      const std::size_t argmax =
          std::max_element(row.begin(), row.end()) - row.begin();
      if (static_cast<int>(argmax) == labels[i]) ++correct;
    }
  }
  result.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  result.mean_loss = total_loss / static_cast<double>(n);
  return result;
}

}  // namespace past::nn
