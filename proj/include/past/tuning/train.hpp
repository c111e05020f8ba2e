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

#ifndef PAST_TUNING_TRAIN_HPP_
#define PAST_TUNING_TRAIN_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "past/data/dataset.hpp"
#include "past/nn/model.hpp"
#include "past/tuning/sensitivity.hpp"

namespace past::tuning {

struct PastConfig {
  double lambda = 1e-4;
  double alpha = 2.5;
  int tuning_epochs = 20;
  int standard_epochs = 60;
  std::optional<int> gap_batch_limit;  // batches per set in sensitivity passes

  void validate() const;
};

/// One completed epoch of training or tuning.
struct EpochRecord {
  int epoch = 0;  // phase-local index
  double lr = 0.0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_loss = 0.0;
  double test_acc = 0.0;
  double loss_gap = 0.0;  // |L(train) - L(gap non-members)|
  double gini = 0.0;
  double near_zero_fraction = 0.0;
  // |L(inference) - L(leak reference)|; NaN when no reference set is given.
  double inference_leak_gap = 0.0;
  std::map<std::string, double> module_sensitivity;  // mean raw per segment
};

using TuningTrace = std::vector<EpochRecord>;

/// One model's slice of the six-subset protocol. leak_reference is a
/// non-member set never seen by tuning, used to expose inference-set leakage.
struct SplitView {
  const data::Dataset& train;
  const data::Dataset& test;
  const data::Dataset& inference;
  const data::Dataset* leak_reference = nullptr;
};

/// Plain SGD epochs (the lambda = 0 phase). Batch order is keyed by
/// (seed, epoch); the learning rate follows a cosine schedule over `epochs`.
/// gap_nonmembers only feeds the trace's loss-gap and sensitivity columns.
TuningTrace standard_train(nn::ParameterStore& params,
                           const nn::ModelSpec& spec,
                           const data::Dataset& train,
                           const data::Dataset& test,
                           const data::Dataset& gap_nonmembers, int epochs,
                           const nn::OptimHyper& opt, std::uint64_t seed);

/// Privacy-aware sparsity tuning. At the start of every epoch the
/// sensitivity map is recomputed from a fixed member sample (drawn once,
/// sized like the inference set) against the inference set; gamma is held
/// constant through the epoch. Every mini-batch step is an SGD step followed
/// by a proximal shrink with strengths lambda * gamma^alpha.
TuningTrace past_tune(nn::ParameterStore& params, const nn::ModelSpec& spec,
                      const SplitView& split, const PastConfig& cfg,
                      const nn::OptimHyper& opt, std::uint64_t seed,
                      SensitivityMap* last_sensitivity = nullptr);

enum class NormOrder { kL1 = 1, kL2 = 2 };

/// Uniform-weight baseline: L1 via the proximal shrink with constant
/// strength lambda, or L2 via a 2*lambda*theta term added to the gradient.
TuningTrace uniform_reg_tune(nn::ParameterStore& params,
                             const nn::ModelSpec& spec, const SplitView& split,
                             double lambda, NormOrder order, int epochs,
                             const nn::OptimHyper& opt, std::uint64_t seed);

/// Direct loss-gap regularization baseline: every mini-batch gradient is
/// grad L(batch) + mu * grad G(member sample, inference). The trace's
/// inference_leak_gap column exposes how this leaks the inference set.
TuningTrace lossgap_reg_tune(nn::ParameterStore& params,
                             const nn::ModelSpec& spec, const SplitView& split,
                             double mu, int epochs, const nn::OptimHyper& opt,
                             std::uint64_t seed,
                             std::optional<int> gap_batch_limit = {});

}  // namespace past::tuning

#endif  // PAST_TUNING_TRAIN_HPP_
