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

#include "past/metrics/summary.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "past/metrics/metrics.hpp"

namespace past::metrics {

EvalSummary summarize(const tuning::TuningTrace& trace,
                      const mia::AttackReport& report,
                      const nn::EvalResult& train_eval,
                      const nn::EvalResult& test_eval, double final_loss_gap,
                      const nn::ParameterStore& params) {
  if (trace.empty()) {
    throw std::invalid_argument("summarize: missing trace");
  }
  if (report.per_attack.empty()) {
    throw std::invalid_argument("summarize: missing attack report");
  }
  if (params.size() == 0) {
    throw std::invalid_argument("summarize: missing parameters");
  }

  EvalSummary summary;
  summary.test_accuracy = test_eval.accuracy;
  summary.train_accuracy = train_eval.accuracy;
  summary.loss_gap = final_loss_gap;
  summary.epochs_recorded = static_cast<int>(trace.size());

  summary.max_advantage = -std::numeric_limits<double>::infinity();
  for (const auto& [name, result] : report.per_attack) {
    summary.per_attack_advantage[name] = result.advantage;
    summary.per_attack_accuracy[name] = result.accuracy;
    summary.max_advantage = std::max(summary.max_advantage, result.advantage);
  }
  summary.p1 = p1_score(summary.test_accuracy, summary.max_advantage);

  double max_abs = 0.0;
  for (double v : params.values()) max_abs = std::max(max_abs, std::fabs(v));
  summary.gini = max_abs > 0.0
                     ? gini_index(params.values())
                     : std::numeric_limits<double>::quiet_NaN();
  summary.near_zero_fraction = near_zero_fraction(params.values());
  return summary;
}

}  // namespace past::metrics
