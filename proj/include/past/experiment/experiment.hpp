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

#ifndef PAST_EXPERIMENT_EXPERIMENT_HPP_
#define PAST_EXPERIMENT_EXPERIMENT_HPP_

#include <string>
#include <vector>

#include "past/data/dataset.hpp"
#include "past/experiment/config.hpp"
#include "past/experiment/snapshot.hpp"
#include "past/metrics/summary.hpp"
#include "past/mia/attacks.hpp"
#include "past/tuning/train.hpp"

namespace past::experiment {

/// File layout of one run directory. Every command writes all four artifact
/// kinds: metrics JSON, per-epoch trace CSV, sweep CSV (single-row for
/// non-sweep commands), and final parameter snapshots for both models.
struct RunPaths {
  std::string dir;

  std::string metrics_json() const { return dir + "/metrics.json"; }
  std::string trace_csv() const { return dir + "/trace.csv"; }
  std::string sweep_csv() const { return dir + "/sweep.csv"; }
  std::string target_snapshot() const { return dir + "/target_final.snap"; }
  std::string shadow_snapshot() const { return dir + "/shadow_final.snap"; }
  std::string config_ini() const { return dir + "/config_resolved.ini"; }
};

/// Deterministic dataset construction (synthesis or CSV load).
data::Dataset build_dataset(const ExperimentConfig& config);

/// Deterministic six-way split of the configured dataset.
data::SplitSet build_split(const ExperimentConfig& config,
                           const data::Dataset& dataset);

nn::ModelSpec resolve_model_spec(const ExperimentConfig& config,
                                 const data::Dataset& dataset);

/// Balanced member/non-member query set for one model (role 0 = target,
/// 1 = shadow): equal-size seeded samples of the train and test subsets.
mia::QuerySet build_query_set(const ExperimentConfig& config,
                              const data::SplitSet& split, int role);

/// One hyperparameter point of a sweep (also used as the single row emitted
/// by non-sweep commands).
struct SweepRow {
  int index = 0;
  Defense defense = Defense::kNone;
  double lambda = 0.0;
  double alpha = 0.0;
  double mu = 0.0;
  std::string status = "ok";
  metrics::EvalSummary summary;
};

/// Trains the target and shadow base models (standard epochs, lambda = 0),
/// snapshots both, evaluates the undefended target against the adaptive
/// attack battery, and writes all artifacts to config.out_dir.
RunPaths cmd_train(const ExperimentConfig& config);

/// Loads base snapshots from snapshot_dir, applies the configured defense to
/// BOTH models (the adaptive attacker mirrors the defense), reruns the attack
/// battery, and writes all artifacts to config.out_dir.
RunPaths cmd_tune(const ExperimentConfig& config,
                  const std::string& snapshot_dir);

/// Loads final snapshots from snapshot_dir and runs the attack battery only.
RunPaths cmd_attack(const ExperimentConfig& config,
                    const std::string& snapshot_dir);

/// Shared base training, then one tune+attack pipeline per grid point
/// (alpha_grid x lambda_grid; for the lossgap defense the lambda grid drives
/// mu). A failed point is recorded in its row and the sweep continues.
RunPaths cmd_sweep(const ExperimentConfig& config);

/// Derived plot series from existing run directories: loss gap and Gini per
/// epoch, per-module sensitivity per epoch, weight-magnitude histogram,
/// sensitivity distribution, and a combined utility-privacy scatter from any
/// sweep tables found.
void cmd_report(const ExperimentConfig& config,
                const std::vector<std::string>& run_dirs,
                const std::string& out_dir);

/// Weight-magnitude histogram: 64 log-spaced bins over [1e-8, 10]; values
/// outside the range are clamped into the edge bins so counts sum to p.
struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
};
std::vector<HistogramBin> weight_histogram(const std::vector<double>& values);

}  // namespace past::experiment

#endif  // PAST_EXPERIMENT_EXPERIMENT_HPP_
