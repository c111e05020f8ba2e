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

#ifndef PAST_MIA_ATTACKS_HPP_
#define PAST_MIA_ATTACKS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "past/data/dataset.hpp"
#include "past/nn/model.hpp"

namespace past::mia {

/// Black-box query set: records plus their membership bits.
struct QuerySet {
  data::Dataset records;
  std::vector<int> membership;  // 1 = member of the model's training set

  void validate() const;
};

enum class Metric { kCorrectness, kLoss, kConfidence, kEntropy, kMEntropy };

inline constexpr Metric kThresholdMetrics[] = {
    Metric::kLoss, Metric::kConfidence, Metric::kEntropy, Metric::kMEntropy};

std::string metric_name(Metric metric);

/// Lower loss/entropy/m-entropy means member; higher confidence means member.
bool member_if_below(Metric metric);

/// Per-record attack scores from one model's predictions.
struct MetricScores {
  std::vector<int> correctness;    // argmax == label
  std::vector<double> loss;        // per-example cross-entropy
  std::vector<double> confidence;  // probability of the true class
  std::vector<double> entropy;     // -sum p log p
  std::vector<double> m_entropy;   // modified entropy (label-aware)

  std::size_t size() const { return loss.size(); }
  const std::vector<double>& values(Metric metric) const;
};

MetricScores compute_metric_scores(const nn::ParameterStore& params,
                                   const nn::ModelSpec& spec,
                                   const data::Dataset& records);

/// Per-(metric, class) thresholds calibrated on shadow scores, with a global
/// per-metric fallback for classes unseen (or one-sided) in the shadow set.
struct ThresholdTable {
  std::map<Metric, std::map<int, double>> per_class;
  std::map<Metric, double> global;
};

/// Sweeps all midpoints between adjacent distinct score values and keeps the
/// threshold with the best balanced accuracy (ties -> smallest threshold).
/// A class with only one membership kind falls back to the global threshold.
ThresholdTable calibrate_thresholds(const MetricScores& shadow_scores,
                                    const std::vector<int>& shadow_membership,
                                    const std::vector<int>& labels);

/// Thresholded membership predictions for one metric. The correctness attack
/// ignores thresholds entirely (member iff classified correctly).
std::vector<int> metric_attack(const MetricScores& scores,
                               const ThresholdTable& thresholds,
                               const std::vector<int>& labels, Metric metric);

/// Binary MLP attack model over [softmax probabilities || one-hot label].
struct NnAttackModel {
  nn::ModelSpec spec;
  nn::ParameterStore params;
};

/// Feature encoding used by the NN attack.
Matrix attack_features(const nn::ParameterStore& params,
                       const nn::ModelSpec& spec,
                       const data::Dataset& records);

/// Trains the attack classifier (one hidden layer, width 64) with
/// cross-entropy; deterministic given the seed. Rejects single-class input.
NnAttackModel train_nn_attack(const Matrix& features,
                              const std::vector<int>& membership,
                              std::uint64_t seed);

std::vector<int> nn_attack_predict(const NnAttackModel& model,
                                   const Matrix& features);

struct AttackResult {
  std::vector<int> predictions;
  double advantage = 0.0;
  double accuracy = 0.0;  // Pr(A = m)
};

struct AttackReport {
  std::map<std::string, AttackResult> per_attack;
  double max_advantage = 0.0;
};

/// Adaptive-attack battery: calibrates thresholds and the NN attack on the
/// shadow model's query set (the shadow pipeline must mirror the defense),
/// then runs every attack against the target query set.
AttackReport run_attack_battery(const nn::ParameterStore& target_params,
                                const nn::ParameterStore& shadow_params,
                                const nn::ModelSpec& spec,
                                const QuerySet& target_query,
                                const QuerySet& shadow_query,
                                std::uint64_t seed);

}  // namespace past::mia

#endif  // PAST_MIA_ATTACKS_HPP_
