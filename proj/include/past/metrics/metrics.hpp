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

#ifndef PAST_METRICS_METRICS_HPP_
#define PAST_METRICS_METRICS_HPP_

#include <span>
#include <vector>

namespace past::metrics {

/// 2 * Pr(prediction == membership) - 1, computed as (2*correct - J)/J so the
/// numerator stays an exact integer. On balanced query sets this equals
/// TPR - FPR bit-for-bit.
double attack_advantage(const std::vector<int>& predictions,
                        const std::vector<int>& memberships);

/// Harmonic mean of accuracy and (1 - advantage). Negative advantages are
/// floored at zero: an attacker worse than chance leaks nothing.
double p1_score(double accuracy, double advantage);

/// Gini sparsity index of parameter magnitudes (Hurley-Rickard): with the
/// magnitudes sorted ascending as c_1..c_N,
///   gini = 1 - 2 * sum_k (c_k / ||c||_1) * ((N - k + 0.5) / N).
/// 0 for a constant-magnitude vector, 1 - 1/N for a one-hot vector; higher
/// means sparser. Rejects empty and all-zero input.
double gini_index(std::span<const double> values);

/// Fraction of entries with |v| < tol.
double near_zero_fraction(std::span<const double> values, double tol = 1e-3);

}  // namespace past::metrics

#endif  // PAST_METRICS_METRICS_HPP_
