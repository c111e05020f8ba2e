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

#ifndef PAST_NN_MODEL_HPP_
#define PAST_NN_MODEL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "past/data/dataset.hpp"
#include "past/matrix.hpp"

namespace past::nn {

enum class Activation { kRelu, kTanh };

Activation parse_activation(const std::string& name);
std::string activation_name(Activation activation);

/// MLP architecture: input_dim -> layer_widths... -> num_classes, with the
/// chosen activation after every hidden layer and linear logits at the end.
struct ModelSpec {
  int input_dim = 0;
  std::vector<int> layer_widths;
  int num_classes = 0;
  Activation activation = Activation::kRelu;

  void validate() const;

  /// [input_dim, layer_widths..., num_classes]
  std::vector<int> layer_dims() const;

  int num_layers() const { return static_cast<int>(layer_widths.size()) + 1; }

  /// Total parameter count across all weight and bias segments.
  std::size_t param_count() const;
};

/// A named contiguous slice of the flat parameter vector. Weights and biases
/// of each layer are separate segments; adaptive-weight normalization treats
/// every segment as its own module.
struct Segment {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;
};

/// Flat parameter vector plus its segment map. Mutation goes through
/// mutable_values(), which bumps a version counter used to reject stale
/// forward caches.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(std::vector<double> values, std::vector<Segment> segments);

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values() {
    ++version_;
    return values_;
  }
  const std::vector<Segment>& segments() const { return segments_; }
  std::span<const double> segment_values(const Segment& segment) const;
  std::uint64_t version() const { return version_; }

 private:
  std::vector<double> values_;
  std::vector<Segment> segments_;
  std::uint64_t version_ = 0;
};

/// Forward-pass state retained for backward.
struct BatchCache {
  Matrix input;
  std::vector<Matrix> pre_activations;  // one per layer, last = logits
  std::vector<Matrix> activations;      // one per hidden layer
  std::size_t batch_size = 0;
  std::uint64_t param_version = 0;
};

/// Fan-in-scaled uniform weights (bound sqrt(1/fan_in)), zero biases.
/// Identical seeds yield bit-identical parameter vectors.
ParameterStore init_model(const ModelSpec& spec, std::uint64_t seed);

/// Returns logits [B x K]; fills *cache when non-null.
Matrix forward(const ParameterStore& params, const ModelSpec& spec,
               const Matrix& inputs, BatchCache* cache = nullptr);

struct CrossEntropyResult {
  double mean_loss = 0.0;
  std::vector<double> per_example;
  Matrix probs;
};

/// Numerically stable softmax cross-entropy (log-sum-exp with max
/// subtraction). Rows of probs sum to 1; per-example losses are >= 0.
CrossEntropyResult cross_entropy(const Matrix& logits,
                                 const std::vector<int>& labels);

/// Gradient of the mean cross-entropy with respect to every parameter, laid
/// out exactly like the parameter vector. Rejects caches taken before the
/// parameters were last mutated.
std::vector<double> backward(const ParameterStore& params,
                             const ModelSpec& spec, const BatchCache& cache,
                             const Matrix& probs,
                             const std::vector<int>& labels);

struct OptimHyper {
  double lr0 = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  int batch_size = 128;

  void validate() const;
};

struct OptimizerState {
  std::vector<double> momentum_buffers;
  OptimHyper hyper;

  OptimizerState(std::size_t param_count, const OptimHyper& h)
      : momentum_buffers(param_count, 0.0), hyper(h) {}
};

/// buffer <- momentum * buffer + (grad + weight_decay * theta);
/// theta  <- theta - lr * buffer.
/// Aborts on non-finite gradient entries.
void sgd_step(ParameterStore& params, const std::vector<double>& grad,
              OptimizerState& state, double lr);

/// lr0 * (1 + cos(pi * epoch / total_epochs)) / 2.
double cosine_lr(int epoch, int total_epochs, double lr0);

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  std::vector<double> per_example_losses;
};

/// Deterministic full-dataset evaluation (argmax accuracy, mean loss).
EvalResult evaluate(const ParameterStore& params, const ModelSpec& spec,
                    const data::Dataset& dataset);

}  // namespace past::nn

#endif  // PAST_NN_MODEL_HPP_
