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

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "past/experiment/config.hpp"
#include "past/experiment/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> defense;
  std::optional<std::string> alpha;
  std::optional<std::string> lambda;
};

void add_common_flags(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--config", flags->config_path, "Experiment config (INI)")
      ->required();
  cmd->add_option("--seed", flags->seed, "Override run.seed");
  cmd->add_option("--out", flags->out_dir, "Override run.out_dir");
  cmd->add_option("--defense", flags->defense,
                  "Override defense.name (none|past|l1|l2|lossgap)");
  cmd->add_option("--alpha", flags->alpha,
                  "Override defense.alpha; a comma list sets the sweep grid");
  cmd->add_option("--lambda", flags->lambda,
                  "Override defense.lambda; a comma list sets the sweep grid");
}

past::experiment::ExperimentConfig resolve_config(const CommonFlags& flags) {
  auto config = past::experiment::load_config(flags.config_path);
  if (flags.seed) config.seed = *flags.seed;
  if (flags.out_dir) config.out_dir = *flags.out_dir;
  if (flags.defense) config.defense = past::experiment::parse_defense(*flags.defense);
  if (flags.alpha) {
    const auto grid =
        past::experiment::parse_double_list(*flags.alpha, "--alpha");
    if (grid.empty()) throw std::runtime_error("--alpha: empty list");
    config.alpha = grid.front();
    config.alpha_grid = grid;
  }
  if (flags.lambda) {
    const auto grid =
        past::experiment::parse_double_list(*flags.lambda, "--lambda");
    if (grid.empty()) throw std::runtime_error("--lambda: empty list");
    config.lambda = grid.front();
    config.lambda_grid = grid;
  }
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Privacy-aware sparsity tuning and membership-inference evaluation"};
  app.require_subcommand(1);

  CommonFlags train_flags, tune_flags, attack_flags, sweep_flags, report_flags;
  std::string tune_snapshot, attack_snapshot, report_out;
  std::vector<std::string> report_runs;

  auto* train = app.add_subcommand(
      "train", "Train target and shadow base models (no defense)");
  add_common_flags(train, &train_flags);

  auto* tune = app.add_subcommand(
      "tune", "Apply the configured defense to a base snapshot, then attack");
  add_common_flags(tune, &tune_flags);
  tune->add_option("--snapshot", tune_snapshot,
                   "Run directory holding the base snapshots")
      ->required();

  auto* attack =
      app.add_subcommand("attack", "Run the attack battery on snapshots");
  add_common_flags(attack, &attack_flags);
  attack
      ->add_option("--snapshot", attack_snapshot,
                   "Run directory holding the snapshots to attack")
      ->required();

  auto* sweep = app.add_subcommand(
      "sweep", "Train once, then tune+attack per hyperparameter grid point");
  add_common_flags(sweep, &sweep_flags);

  auto* report = app.add_subcommand(
      "report", "Emit plot-series CSVs from finished run directories");
  add_common_flags(report, &report_flags);
  report->add_option("--run", report_runs, "Run directory (repeatable)")
      ->required();
  report->add_option("--report-out", report_out,
                     "Output directory for the series files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      past::experiment::cmd_train(resolve_config(train_flags));
    } else if (*tune) {
      past::experiment::cmd_tune(resolve_config(tune_flags), tune_snapshot);
    } else if (*attack) {
      past::experiment::cmd_attack(resolve_config(attack_flags),
                                   attack_snapshot);
    } else if (*sweep) {
      past::experiment::cmd_sweep(resolve_config(sweep_flags));
    } else if (*report) {
      auto config = resolve_config(report_flags);
      const std::string out =
          report_out.empty() ? config.out_dir + "/report" : report_out;
      past::experiment::cmd_report(config, report_runs, out);
    }
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
