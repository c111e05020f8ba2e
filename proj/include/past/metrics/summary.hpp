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

#ifndef PAST_METRICS_SUMMARY_HPP_
#define PAST_METRICS_SUMMARY_HPP_

#include <map>
#include <string>

#include "past/mia/attacks.hpp"
#include "past/nn/model.hpp"
#include "past/tuning/train.hpp"

namespace past::metrics {

/// Headline numbers of one experiment.
struct EvalSummary {
  double test_accuracy = 0.0;
  double train_accuracy = 0.0;
  std::map<std::string, double> per_attack_advantage;
  std::map<std::string, double> per_attack_accuracy;
  double max_advantage = 0.0;
  double p1 = 0.0;  // from (test_accuracy, max_advantage clamped to [0,1])
  double gini = 0.0;
  double near_zero_fraction = 0.0;
  double loss_gap = 0.0;
  int epochs_recorded = 0;
};

/// Assembles the summary from one experiment's pieces. The trace must be
/// non-empty and the report must contain at least one attack.
EvalSummary summarize(const tuning::TuningTrace& trace,
                      const mia::AttackReport& report,
                      const nn::EvalResult& train_eval,
                      const nn::EvalResult& test_eval, double final_loss_gap,
                      const nn::ParameterStore& params);

}  // namespace past::metrics

#endif  // PAST_METRICS_SUMMARY_HPP_
