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

#include "past/mia/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "past/metrics/metrics.hpp"
#include "past/rng.hpp"

namespace past::mia {

namespace {
constexpr double kLogClamp = 1e-12;

// Attack-model training recipe; fixed so the battery is reproducible.
constexpr int kAttackEpochs = 30;
constexpr int kAttackHiddenWidth = 64;
}  // namespace

void QuerySet::validate() const {
  records.validate();
  if (membership.size() != records.size()) {
    throw std::invalid_argument("QuerySet: membership length mismatch");
  }
  for (int m : membership) {
    if (m != 0 && m != 1) {
      throw std::invalid_argument("QuerySet: membership not in {0,1}");
    }
  }
}

std::string metric_name(Metric metric) {
  switch (metric) {
    case Metric::kCorrectness:
      return "correctness";
    case Metric::kLoss:
      return "loss";
    case Metric::kConfidence:
      return "confidence";
    case Metric::kEntropy:
      return "entropy";
    case Metric::kMEntropy:
      return "m_entropy";
  }
  throw std::invalid_argument("metric_name: unknown metric");
}

bool member_if_below(Metric metric) {
  switch (metric) {
    case Metric::kLoss:
    case Metric::kEntropy:
    case Metric::kMEntropy:
      return true;
    case Metric::kConfidence:
      return false;
    case Metric::kCorrectness:
      break;
  }
  throw std::invalid_argument("member_if_below: correctness has no threshold");
}

const std::vector<double>& MetricScores::values(Metric metric) const {
  switch (metric) {
    case Metric::kLoss:
      return loss;
    case Metric::kConfidence:
      return confidence;
    case Metric::kEntropy:
      return entropy;
    case Metric::kMEntropy:
      return m_entropy;
    case Metric::kCorrectness:
      break;
  }
  throw std::invalid_argument("MetricScores: correctness is not a real score");
}

MetricScores compute_metric_scores(const nn::ParameterStore& params,
                                   const nn::ModelSpec& spec,
                                   const data::Dataset& records) {
  records.validate();
  const std::size_t n = records.size();
  const std::size_t k = static_cast<std::size_t>(records.num_classes);

  MetricScores scores;
  scores.correctness.resize(n);
  scores.loss.resize(n);
  scores.confidence.resize(n);
  scores.entropy.resize(n);
  scores.m_entropy.resize(n);

  constexpr std::size_t kBatch = 256;
  for (std::size_t start = 0; start < n; start += kBatch) {
    const std::size_t len = std::min(kBatch, n - start);
    Matrix batch(len, records.features.cols);
    std::vector<int> labels(len);
    for (std::size_t i = 0; i < len; ++i) {
      const auto src = records.features.row(start + i);
      std::copy(src.begin(), src.end(), batch.row(i).begin());
      labels[i] = records.labels[start + i];
    }
    const Matrix logits = nn::forward(params, spec, batch);
    const auto ce = nn::cross_entropy(logits, labels);

    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t r = start + i;
      const int y = labels[i];
      const auto probs = ce.probs.row(i);
      const auto logit_row = logits.row(i);

      scores.loss[r] = ce.per_example[i];
      scores.confidence[r] = probs[static_cast<std::size_t>(y)];

      const std::size_t argmax =
          std::max_element(logit_row.begin(), logit_row.end()) -
          logit_row.begin();
      scores.correctness[r] = static_cast<int>(argmax) == y ? 1 : 0;

      double entropy = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        if (probs[j] > 0.0) entropy -= probs[j] * std::log(probs[j]);
      }
      scores.entropy[r] = entropy;

      const double p_y = probs[static_cast<std::size_t>(y)];
      double m_entropy = -(1.0 - p_y) * std::log(std::max(p_y, kLogClamp));
      for (std::size_t j = 0; j < k; ++j) {
        if (static_cast<int>(j) == y) continue;
        m_entropy -= probs[j] * std::log(std::max(1.0 - probs[j], kLogClamp));
      }
      scores.m_entropy[r] = m_entropy;
    }
  }
  return scores;
}

namespace {

struct SweepResult {
  double threshold = 0.0;
  double balanced_accuracy = 0.0;
};

double balanced_from_counts(long long members_below, long long n_members,
                            long long nonmembers_below, long long n_nonmembers,
                            bool below_means_member) {
  const double tpr =
      below_means_member
          ? static_cast<double>(members_below) / static_cast<double>(n_members)
          : static_cast<double>(n_members - members_below) /
                static_cast<double>(n_members);
  const double tnr = below_means_member
                         ? static_cast<double>(n_nonmembers - nonmembers_below) /
                               static_cast<double>(n_nonmembers)
                         : static_cast<double>(nonmembers_below) /
                               static_cast<double>(n_nonmembers);
  return 0.5 * (tpr + tnr);
}

/// Best midpoint threshold for one metric over one group of records.
/// Requires both membership kinds to be present.
SweepResult sweep_threshold(const std::vector<double>& scores,
                            const std::vector<int>& membership,
                            bool below_means_member) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  long long n_members = 0;
  for (int m : membership) n_members += m;
  const long long n_nonmembers =
      static_cast<long long>(membership.size()) - n_members;
  if (n_members == 0 || n_nonmembers == 0) {
    throw std::invalid_argument("sweep_threshold: one-sided membership");
  }

  SweepResult best;
  bool have_best = false;
  long long members_below = 0;
  long long nonmembers_below = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double value = scores[order[i]];
    // Consume the whole group of equal scores.
    while (i < order.size() && scores[order[i]] == value) {
      if (membership[order[i]] == 1) {
        ++members_below;
      } else {
        ++nonmembers_below;
      }
      ++i;
    }
    if (i == order.size()) break;
    const double candidate = (value + scores[order[i]]) / 2.0;
    const double balanced =
        balanced_from_counts(members_below, n_members, nonmembers_below,
                             n_nonmembers, below_means_member);
    if (!have_best || balanced > best.balanced_accuracy) {
      best = {candidate, balanced};
      have_best = true;
    }
  }

  if (!have_best) {
    // All scores identical: no midpoints exist. Use the value itself; with
    // strict comparisons everything lands on the non-member side.
    best.threshold = scores[order[0]];
    best.balanced_accuracy = balanced_from_counts(
        0, n_members, 0, n_nonmembers, below_means_member);
  }
  return best;
}

}  // namespace

ThresholdTable calibrate_thresholds(const MetricScores& shadow_scores,
                                    const std::vector<int>& shadow_membership,
                                    const std::vector<int>& labels) {
  const std::size_t n = shadow_scores.size();
  if (n == 0) throw std::invalid_argument("calibrate_thresholds: empty scores");
  if (shadow_membership.size() != n || labels.size() != n) {
    throw std::invalid_argument("calibrate_thresholds: length mismatch");
  }
  {
    long long members = 0;
    for (int m : shadow_membership) members += m;
    if (members == 0 || members == static_cast<long long>(n)) {
      throw std::invalid_argument(
          "calibrate_thresholds: shadow set needs members and non-members");
    }
  }

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);

  ThresholdTable table;
  for (Metric metric : kThresholdMetrics) {
    const bool below = member_if_below(metric);
    const auto& all_scores = shadow_scores.values(metric);
    table.global[metric] =
        sweep_threshold(all_scores, shadow_membership, below).threshold;

    for (const auto& [label, indices] : by_class) {
      long long members = 0;
      for (std::size_t i : indices) members += shadow_membership[i];
      if (members == 0 || members == static_cast<long long>(indices.size())) {
        table.per_class[metric][label] = table.global[metric];
        continue;
      }
      std::vector<double> scores(indices.size());
      std::vector<int> membership(indices.size());
      for (std::size_t j = 0; j < indices.size(); ++j) {
        scores[j] = all_scores[indices[j]];
        membership[j] = shadow_membership[indices[j]];
      }
      table.per_class[metric][label] =
          sweep_threshold(scores, membership, below).threshold;
    }
  }
  return table;
}

std::vector<int> metric_attack(const MetricScores& scores,
                               const ThresholdTable& thresholds,
                               const std::vector<int>& labels, Metric metric) {
  const std::size_t n = scores.size();
  if (labels.size() != n) {
    throw std::invalid_argument("metric_attack: labels length mismatch");
  }
  std::vector<int> predictions(n, 0);
  if (metric == Metric::kCorrectness) {
    predictions = scores.correctness;
    return predictions;
  }

  const bool below = member_if_below(metric);
  const auto& values = scores.values(metric);
  const auto per_class_it = thresholds.per_class.find(metric);
  const auto global_it = thresholds.global.find(metric);
  if (global_it == thresholds.global.end()) {
    throw std::invalid_argument("metric_attack: table missing metric");
  }
  for (std::size_t i = 0; i < n; ++i) {
    double threshold = global_it->second;
    if (per_class_it != thresholds.per_class.end()) {
      const auto it = per_class_it->second.find(labels[i]);
      if (it != per_class_it->second.end()) threshold = it->second;
    }
    const bool member =
        below ? values[i] < threshold : values[i] > threshold;
    predictions[i] = member ? 1 : 0;
  }
  return predictions;
}

Matrix attack_features(const nn::ParameterStore& params,
                       const nn::ModelSpec& spec,
                       const data::Dataset& records) {
  records.validate();
  const std::size_t n = records.size();
  const std::size_t k = static_cast<std::size_t>(records.num_classes);
  Matrix features(n, 2 * k);

  constexpr std::size_t kBatch = 256;
  for (std::size_t start = 0; start < n; start += kBatch) {
    const std::size_t len = std::min(kBatch, n - start);
    Matrix batch(len, records.features.cols);
    std::vector<int> labels(len);
    for (std::size_t i = 0; i < len; ++i) {
      const auto src = records.features.row(start + i);
      std::copy(src.begin(), src.end(), batch.row(i).begin());
      labels[i] = records.labels[start + i];
    }
    const Matrix logits = nn::forward(params, spec, batch);
    const auto ce = nn::cross_entropy(logits, labels);
    for (std::size_t i = 0; i < len; ++i) {
      auto dst = features.row(start + i);
      const auto probs = ce.probs.row(i);
      for (std::size_t j = 0; j < k; ++j) dst[j] = probs[j];
      dst[k + static_cast<std::size_t>(labels[i])] = 1.0;
    }
  }
  return features;
}

NnAttackModel train_nn_attack(const Matrix& features,
                              const std::vector<int>& membership,
                              std::uint64_t seed) {
  if (features.rows == 0 || features.rows != membership.size()) {
    throw std::invalid_argument("train_nn_attack: bad feature/label shapes");
  }
  long long members = 0;
  for (int m : membership) {
    if (m != 0 && m != 1) {
      throw std::invalid_argument("train_nn_attack: membership not in {0,1}");
    }
    members += m;
  }
  if (members == 0 || members == static_cast<long long>(membership.size())) {
    throw std::invalid_argument(
        "train_nn_attack: degenerate single-class input");
  }

  NnAttackModel model;
  model.spec.input_dim = static_cast<int>(features.cols);
  model.spec.layer_widths = {kAttackHiddenWidth};
  model.spec.num_classes = 2;
  model.spec.activation = nn::Activation::kRelu;
  model.params =
      nn::init_model(model.spec, derive_seed(seed, seed_tag::kModelInit));

  nn::OptimHyper hyper;
  hyper.lr0 = 0.01;
  hyper.momentum = 0.9;
  hyper.weight_decay = 0.0;
  hyper.batch_size = 128;
  nn::OptimizerState state(model.params.size(), hyper);

  for (int epoch = 0; epoch < kAttackEpochs; ++epoch) {
    const double lr = nn::cosine_lr(epoch, kAttackEpochs, hyper.lr0);
    const auto batches =
        data::batch_indices(features.rows, hyper.batch_size, seed, epoch);
    for (const auto& indices : batches) {
      Matrix batch(indices.size(), features.cols);
      std::vector<int> labels(indices.size());
      for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto src = features.row(indices[i]);
        std::copy(src.begin(), src.end(), batch.row(i).begin());
        labels[i] = membership[indices[i]];
      }
      nn::BatchCache cache;
      const Matrix logits = nn::forward(model.params, model.spec, batch, &cache);
      const auto ce = nn::cross_entropy(logits, labels);
      const auto grad =
          nn::backward(model.params, model.spec, cache, ce.probs, labels);
      nn::sgd_step(model.params, grad, state, lr);
    }
  }
  return model;
}

std::vector<int> nn_attack_predict(const NnAttackModel& model,
                                   const Matrix& features) {
  const Matrix logits = nn::forward(model.params, model.spec, features);
  std::vector<int> predictions(features.rows);
  for (std::size_t i = 0; i < features.rows; ++i) {
    predictions[i] = logits(i, 1) > logits(i, 0) ? 1 : 0;
  }
  return predictions;
}

namespace {

AttackResult score_attack(std::vector<int> predictions,
                          const std::vector<int>& membership) {
  AttackResult result;
  result.advantage = metrics::attack_advantage(predictions, membership);
  long long correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == membership[i]) ++correct;
  }
  result.accuracy =
      static_cast<double>(correct) / static_cast<double>(predictions.size());
  result.predictions = std::move(predictions);
  return result;
}

}  // namespace

AttackReport run_attack_battery(const nn::ParameterStore& target_params,
                                const nn::ParameterStore& shadow_params,
                                const nn::ModelSpec& spec,
                                const QuerySet& target_query,
                                const QuerySet& shadow_query,
                                std::uint64_t seed) {
  target_query.validate();
  shadow_query.validate();

  const auto shadow_scores =
      compute_metric_scores(shadow_params, spec, shadow_query.records);
  const auto thresholds = calibrate_thresholds(
      shadow_scores, shadow_query.membership, shadow_query.records.labels);
  const auto target_scores =
      compute_metric_scores(target_params, spec, target_query.records);

  AttackReport report;
  const Metric all_metrics[] = {Metric::kCorrectness, Metric::kLoss,
                                Metric::kConfidence, Metric::kEntropy,
                                Metric::kMEntropy};
  for (Metric metric : all_metrics) {
    auto predictions = metric_attack(target_scores, thresholds,
                                     target_query.records.labels, metric);
    report.per_attack[metric_name(metric)] =
        score_attack(std::move(predictions), target_query.membership);
  }

  const Matrix shadow_features =
      attack_features(shadow_params, spec, shadow_query.records);
  const auto attack_model = train_nn_attack(
      shadow_features, shadow_query.membership, derive_seed(seed, seed_tag::kNnAttack));
  const Matrix target_features =
      attack_features(target_params, spec, target_query.records);
  report.per_attack["nn"] = score_attack(
      nn_attack_predict(attack_model, target_features), target_query.membership);

  report.max_advantage = report.per_attack.begin()->second.advantage;
  for (const auto& [name, result] : report.per_attack) {
    report.max_advantage = std::max(report.max_advantage, result.advantage);
  }
  return report;
}

}  // namespace past::mia
