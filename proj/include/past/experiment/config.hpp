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

#ifndef PAST_EXPERIMENT_CONFIG_HPP_
#define PAST_EXPERIMENT_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "past/data/dataset.hpp"
#include "past/nn/model.hpp"

namespace past::experiment {

enum class Defense { kNone, kPast, kL1, kL2, kLossGap };

std::string defense_name(Defense defense);
Defense parse_defense(const std::string& name);

struct DataConfig {
  enum class Source { kSynthetic, kCsv };
  Source source = Source::kSynthetic;
  data::SyntheticSpec synthetic;
  std::string csv_path;
  bool csv_has_header = false;
};

/// Full experiment description, loadable from an INI-style config file with
/// sections [data], [model], [optim], [defense], [run].
struct ExperimentConfig {
  DataConfig data;

  std::vector<int> hidden_widths = {64, 64};
  nn::Activation activation = nn::Activation::kRelu;

  nn::OptimHyper optim;

  Defense defense = Defense::kNone;
  double lambda = 1e-4;
  double alpha = 2.5;
  double mu = 0.1;
  std::vector<double> lambda_grid;
  std::vector<double> alpha_grid;
  std::optional<int> gap_batch_limit;

  int standard_epochs = 60;
  int tuning_epochs = 20;
  std::uint64_t seed = 1;
  std::string out_dir = "past_run";

  void validate() const;
};

/// Parses the INI config. Errors name the offending section.key.
ExperimentConfig load_config(const std::string& path);

/// Serialized form (stable ordering) used to echo the resolved config.
std::string config_to_ini(const ExperimentConfig& config);

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what);
std::vector<int> parse_int_list(const std::string& text,
                                const std::string& what);

}  // namespace past::experiment

#endif  // PAST_EXPERIMENT_CONFIG_HPP_
