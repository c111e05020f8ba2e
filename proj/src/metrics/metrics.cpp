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

#include "past/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace past::metrics {

double attack_advantage(const std::vector<int>& predictions,
                        const std::vector<int>& memberships) {
  if (predictions.empty()) {
    throw std::invalid_argument("attack_advantage: empty input");
  }
  if (predictions.size() != memberships.size()) {
    throw std::invalid_argument("attack_advantage: length mismatch");
  }
  long long correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int m = memberships[i];
    if (m != 0 && m != 1) {
      throw std::invalid_argument("attack_advantage: membership not in {0,1}");
    }
    if (predictions[i] == m) ++correct;
  }
  const long long j = static_cast<long long>(predictions.size());
  return static_cast<double>(2 * correct - j) / static_cast<double>(j);
}

double p1_score(double accuracy, double advantage) {
  const double privacy = 1.0 - std::clamp(advantage, 0.0, 1.0);
  const double denom = accuracy + privacy;
  if (denom <= 0.0) return 0.0;
  return 2.0 * accuracy * privacy / denom;
}

double gini_index(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("gini_index: empty vector");
  std::vector<double> magnitudes(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    magnitudes[i] = std::fabs(values[i]);
    total += magnitudes[i];
  }
  if (total <= 0.0) {
    throw std::invalid_argument("gini_index: all-zero vector");
  }
  std::sort(magnitudes.begin(), magnitudes.end());
  const double n = static_cast<double>(magnitudes.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < magnitudes.size(); ++k) {
    const double rank_weight = (n - static_cast<double>(k + 1) + 0.5) / n;
    acc += (magnitudes[k] / total) * rank_weight;
  }
  return 1.0 - 2.0 * acc;
}

double near_zero_fraction(std::span<const double> values, double tol) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("near_zero_fraction: tol must be > 0");
  }
  if (values.empty()) {
    throw std::invalid_argument("near_zero_fraction: empty vector");
  }
  std::size_t count = 0;
  for (double v : values) {
    if (std::fabs(v) < tol) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(values.size());
}

}  // namespace past::metrics
