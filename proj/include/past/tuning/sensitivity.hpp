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

#ifndef PAST_TUNING_SENSITIVITY_HPP_
#define PAST_TUNING_SENSITIVITY_HPP_

#include <optional>
#include <span>
#include <vector>

#include "past/data/dataset.hpp"
#include "past/nn/model.hpp"

namespace past::tuning {

/// Per-parameter privacy sensitivity |dG/d theta_i| (raw) and the adaptive
/// weights gamma normalized so every segment averages to 1.
struct SensitivityMap {
  std::vector<double> raw;
  std::vector<double> gamma;
  int computed_at_epoch = -1;
};

/// Mean loss and the gradient of the mean loss over a whole dataset,
/// accumulated in index order (deterministic). When batch_limit is set, only
/// the first batch_limit batches of size batch_size are used.
struct SetGradient {
  double mean_loss = 0.0;
  std::vector<double> grad;
};
SetGradient mean_loss_and_gradient(const nn::ParameterStore& params,
                                   const nn::ModelSpec& spec,
                                   const data::Dataset& dataset,
                                   std::optional<int> batch_limit = {},
                                   int batch_size = 256);

/// |mean loss(members) - mean loss(nonmembers)|: the loss gap G, the proxy
/// for privacy risk.
double loss_gap(const nn::ParameterStore& params, const nn::ModelSpec& spec,
                const data::Dataset& members, const data::Dataset& nonmembers);

/// Raw privacy sensitivity: the elementwise magnitude of
/// sign(Lm - Ln) * (grad Lm - grad Ln), i.e. |dG/d theta_i|. Carries no
/// gradient state; fully deterministic.
std::vector<double> privacy_sensitivity(const nn::ParameterStore& params,
                                        const nn::ModelSpec& spec,
                                        const data::Dataset& members,
                                        const data::Dataset& nonmembers,
                                        std::optional<int> batch_limit = {});

/// Signed gradient of G, used when the gap itself is optimized directly.
/// At the kink (|Lm - Ln| < 1e-12) the subgradient 0 is used.
std::vector<double> loss_gap_gradient(const nn::ParameterStore& params,
                                      const nn::ModelSpec& spec,
                                      const data::Dataset& members,
                                      const data::Dataset& nonmembers,
                                      std::optional<int> batch_limit = {});

/// Per-segment normalization: gamma_i = seg_len * raw_i / sum(raw over the
/// segment). A segment whose raw mass is below 1e-12 falls back to uniform
/// gamma = 1. Every segment's gamma therefore averages to exactly 1.
std::vector<double> normalize_gamma(std::span<const double> raw,
                                    const std::vector<nn::Segment>& segments);

struct PenaltyResult {
  double value = 0.0;                      // lambda * sum_i gamma_i^alpha |theta_i|
  std::vector<double> per_param_strength;  // lambda * gamma_i^alpha
};

/// Focused weighted-L1 penalty. gamma^0 == 1 for every gamma >= 0, so
/// alpha = 0 reproduces the standard L1 penalty exactly.
PenaltyResult past_penalty(const nn::ParameterStore& params,
                           std::span<const double> gamma, double alpha,
                           double lambda);

/// Soft-threshold applied after an SGD step:
///   theta_i <- sign(theta_i) * max(|theta_i| - lr * strength_i, 0).
/// Produces exact zeros; never flips sign.
void proximal_shrink(nn::ParameterStore& params,
                     std::span<const double> per_param_strength, double lr);

/// Concentration statistics over a raw sensitivity vector.
class SensitivityConcentration {
 public:
  /// Rejects empty and all-zero input.
  explicit SensitivityConcentration(std::span<const double> raw);

  /// Share of total sensitivity carried by the largest ceil(q * p) entries.
  double top_quantile_share(double q) const;

  /// Fraction of entries strictly below t.
  double fraction_below(double t) const;

 private:
  std::vector<double> sorted_desc_;
  std::vector<double> prefix_sums_;
  double total_ = 0.0;
};

}  // namespace past::tuning

#endif  // PAST_TUNING_SENSITIVITY_HPP_
