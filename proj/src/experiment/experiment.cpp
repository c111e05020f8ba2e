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

#include "past/experiment/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "past/metrics/metrics.hpp"
#include "past/rng.hpp"
#include "past/tuning/sensitivity.hpp"

namespace past::experiment {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create directory '" + dir +
                             "': " + ec.message());
  }
}

/// Defense settings as applied to one model; recorded for both pipelines so
/// the shadow-symmetry requirement is checkable from the artifacts.
struct DefenseSettings {
  Defense defense = Defense::kNone;
  double lambda = 0.0;
  double alpha = 0.0;
  double mu = 0.0;
  int tuning_epochs = 0;

  bool operator==(const DefenseSettings&) const = default;

  nlohmann::json to_json() const {
    return {{"defense", defense_name(defense)},
            {"lambda", lambda},
            {"alpha", alpha},
            {"mu", mu},
            {"tuning_epochs", tuning_epochs}};
  }
};

DefenseSettings settings_from(const ExperimentConfig& config) {
  DefenseSettings s;
  s.defense = config.defense;
  s.lambda = config.lambda;
  s.alpha = config.alpha;
  s.mu = config.mu;
  s.tuning_epochs = config.defense == Defense::kNone ? 0 : config.tuning_epochs;
  return s;
}

struct PhasedTrace {
  tuning::TuningTrace standard;
  tuning::TuningTrace tuning;
};

std::vector<std::string> segment_names(const nn::ParameterStore& params) {
  std::vector<std::string> names;
  for (const auto& seg : params.segments()) names.push_back(seg.name);
  return names;
}

void write_trace_csv(const std::string& path, const PhasedTrace& trace,
                     const std::vector<std::string>& segments) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "'");
  out << "phase,epoch,lr,train_loss,train_acc,test_loss,test_acc,loss_gap,"
         "gini,near_zero_fraction,inference_leak_gap";
  for (const auto& name : segments) out << ",sens:" << name;
  out << '\n';

  const auto emit = [&](const char* phase, const tuning::TuningTrace& rows) {
    for (const auto& rec : rows) {
      out << phase << ',' << rec.epoch << ',' << fmt_double(rec.lr) << ','
          << fmt_double(rec.train_loss) << ',' << fmt_double(rec.train_acc)
          << ',' << fmt_double(rec.test_loss) << ',' << fmt_double(rec.test_acc)
          << ',' << fmt_double(rec.loss_gap) << ',' << fmt_double(rec.gini)
          << ',' << fmt_double(rec.near_zero_fraction) << ','
          << fmt_double(rec.inference_leak_gap);
      for (const auto& name : segments) {
        const auto it = rec.module_sensitivity.find(name);
        out << ','
            << fmt_double(it == rec.module_sensitivity.end()
                              ? std::numeric_limits<double>::quiet_NaN()
                              : it->second);
      }
      out << '\n';
    }
  };
  emit("standard", trace.standard);
  emit("tuning", trace.tuning);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

const char* kSweepHeader =
    "index,defense,lambda,alpha,mu,status,test_acc,train_acc,"
    "adv_correctness,adv_loss,adv_confidence,adv_entropy,adv_m_entropy,"
    "adv_nn,max_advantage,p1,loss_gap,gini,near_zero_fraction";

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "'");
  out << kSweepHeader << '\n';
  for (const auto& row : rows) {
    const auto adv = [&](const char* name) {
      const auto it = row.summary.per_attack_advantage.find(name);
      return fmt_double(it == row.summary.per_attack_advantage.end()
                            ? std::numeric_limits<double>::quiet_NaN()
                            : it->second);
    };
    out << row.index << ',' << defense_name(row.defense) << ','
        << fmt_double(row.lambda) << ',' << fmt_double(row.alpha) << ','
        << fmt_double(row.mu) << ',' << row.status << ','
        << fmt_double(row.summary.test_accuracy) << ','
        << fmt_double(row.summary.train_accuracy) << ','
        << adv("correctness") << ',' << adv("loss") << ',' << adv("confidence")
        << ',' << adv("entropy") << ',' << adv("m_entropy") << ','
        << adv("nn") << ',' << fmt_double(row.summary.max_advantage) << ','
        << fmt_double(row.summary.p1) << ','
        << fmt_double(row.summary.loss_gap) << ','
        << fmt_double(row.summary.gini) << ','
        << fmt_double(row.summary.near_zero_fraction) << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

nlohmann::json summary_to_json(const metrics::EvalSummary& summary) {
  return {{"test_accuracy", summary.test_accuracy},
          {"train_accuracy", summary.train_accuracy},
          {"per_attack_advantage", summary.per_attack_advantage},
          {"per_attack_accuracy", summary.per_attack_accuracy},
          {"max_advantage", summary.max_advantage},
          {"p1", summary.p1},
          {"gini", summary.gini},
          {"near_zero_fraction", summary.near_zero_fraction},
          {"loss_gap", summary.loss_gap},
          {"epochs_recorded", summary.epochs_recorded}};
}

void write_metrics_json(const std::string& path, const std::string& command,
                        const ExperimentConfig& config,
                        const DefenseSettings& target_settings,
                        const DefenseSettings& shadow_settings,
                        const metrics::EvalSummary& summary) {
  if (!(target_settings == shadow_settings)) {
    throw std::runtime_error(
        "shadow pipeline settings diverged from the target pipeline");
  }
  nlohmann::json doc;
  doc["command"] = command;
  doc["seed"] = config.seed;
  doc["target"] = target_settings.to_json();
  doc["shadow"] = shadow_settings.to_json();
  doc["shadow_matches_target"] = true;
  doc["summary"] = summary_to_json(summary);
  doc["config_ini"] = config_to_ini(config);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_config_echo(const std::string& path,
                       const ExperimentConfig& config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "'");
  out << config_to_ini(config);
}

struct SplitRefs {
  const data::Dataset& train;
  const data::Dataset& test;
  const data::Dataset& inference;
  const data::Dataset& leak_reference;
};

SplitRefs role_refs(const data::SplitSet& split, int role) {
  if (role == 0) {
    return {split.target_train, split.target_test, split.target_inference,
            split.shadow_test};
  }
  return {split.shadow_train, split.shadow_test, split.shadow_inference,
          split.target_test};
}

/// Applies the configured defense to one model. Returns the tuning-phase
/// trace (empty for defense none).
tuning::TuningTrace apply_defense(const ExperimentConfig& config,
                                  nn::ParameterStore& params,
                                  const nn::ModelSpec& spec,
                                  const data::SplitSet& split, int role) {
  const SplitRefs refs = role_refs(split, role);
  const tuning::SplitView view{refs.train, refs.test, refs.inference,
                               &refs.leak_reference};
  const std::uint64_t seed =
      derive_seed(config.seed, seed_tag::kTune, static_cast<std::uint64_t>(role));

  switch (config.defense) {
    case Defense::kNone:
      return {};
    case Defense::kPast: {
      tuning::PastConfig cfg;
      cfg.lambda = config.lambda;
      cfg.alpha = config.alpha;
      cfg.tuning_epochs = config.tuning_epochs;
      cfg.standard_epochs = config.standard_epochs;
      cfg.gap_batch_limit = config.gap_batch_limit;
      return tuning::past_tune(params, spec, view, cfg, config.optim, seed);
    }
    case Defense::kL1:
      return tuning::uniform_reg_tune(params, spec, view, config.lambda,
                                      tuning::NormOrder::kL1,
                                      config.tuning_epochs, config.optim, seed);
    case Defense::kL2:
      return tuning::uniform_reg_tune(params, spec, view, config.lambda,
                                      tuning::NormOrder::kL2,
                                      config.tuning_epochs, config.optim, seed);
    case Defense::kLossGap:
      return tuning::lossgap_reg_tune(params, spec, view, config.mu,
                                      config.tuning_epochs, config.optim, seed,
                                      config.gap_batch_limit);
  }
  throw std::invalid_argument("apply_defense: unknown defense");
}

metrics::EvalSummary build_summary(const tuning::TuningTrace& trace,
                                   const mia::AttackReport& report,
                                   const nn::ParameterStore& params,
                                   const nn::ModelSpec& spec,
                                   const SplitRefs& refs) {
  const auto train_eval = nn::evaluate(params, spec, refs.train);
  const auto test_eval = nn::evaluate(params, spec, refs.test);
  const auto inference_eval = nn::evaluate(params, spec, refs.inference);
  const double gap = std::fabs(train_eval.mean_loss - inference_eval.mean_loss);

  if (!trace.empty()) {
    return metrics::summarize(trace, report, train_eval, test_eval, gap, params);
  }

  // No training epochs ran (attack-only or defense=none): assemble directly.
  metrics::EvalSummary summary;
  summary.test_accuracy = test_eval.accuracy;
  summary.train_accuracy = train_eval.accuracy;
  summary.loss_gap = gap;
  summary.epochs_recorded = 0;
  summary.max_advantage = -std::numeric_limits<double>::infinity();
  for (const auto& [name, result] : report.per_attack) {
    summary.per_attack_advantage[name] = result.advantage;
    summary.per_attack_accuracy[name] = result.accuracy;
    summary.max_advantage = std::max(summary.max_advantage, result.advantage);
  }
  summary.p1 = metrics::p1_score(summary.test_accuracy, summary.max_advantage);
  double max_abs = 0.0;
  for (double v : params.values()) max_abs = std::max(max_abs, std::fabs(v));
  summary.gini = max_abs > 0.0 ? metrics::gini_index(params.values())
                               : std::numeric_limits<double>::quiet_NaN();
  summary.near_zero_fraction = metrics::near_zero_fraction(params.values());
  return summary;
}

SweepRow make_row(int index, const DefenseSettings& settings,
                  const metrics::EvalSummary& summary) {
  SweepRow row;
  row.index = index;
  row.defense = settings.defense;
  row.lambda = settings.lambda;
  row.alpha = settings.alpha;
  row.mu = settings.mu;
  row.summary = summary;
  return row;
}

}  // namespace

data::Dataset build_dataset(const ExperimentConfig& config) {
  config.validate();
  if (config.data.source == DataConfig::Source::kSynthetic) {
    return data::gen_synthetic(config.data.synthetic,
                               derive_seed(config.seed, seed_tag::kData));
  }
  return data::load_csv(config.data.csv_path, config.data.csv_has_header);
}

data::SplitSet build_split(const ExperimentConfig& config,
                           const data::Dataset& dataset) {
  return data::six_split(dataset, derive_seed(config.seed, seed_tag::kSplit));
}

nn::ModelSpec resolve_model_spec(const ExperimentConfig& config,
                                 const data::Dataset& dataset) {
  nn::ModelSpec spec;
  spec.input_dim = dataset.dim();
  spec.layer_widths = config.hidden_widths;
  spec.num_classes = dataset.num_classes;
  spec.activation = config.activation;
  spec.validate();
  return spec;
}

mia::QuerySet build_query_set(const ExperimentConfig& config,
                              const data::SplitSet& split, int role) {
  const SplitRefs refs = role_refs(split, role);
  const std::size_t q = std::min(refs.train.size(), refs.test.size());
  if (q == 0) {
    throw std::runtime_error(
        "build_query_set: cannot build a balanced query set (empty subset)");
  }

  Rng member_rng(
      derive_seed(config.seed, seed_tag::kQuery, 2 * static_cast<std::uint64_t>(role)));
  Rng nonmember_rng(derive_seed(config.seed, seed_tag::kQuery,
                                2 * static_cast<std::uint64_t>(role) + 1));
  const auto member_idx = sample_indices(refs.train.size(), q, member_rng);
  const auto nonmember_idx = sample_indices(refs.test.size(), q, nonmember_rng);

  const data::Dataset members = refs.train.subset(member_idx);
  const data::Dataset nonmembers = refs.test.subset(nonmember_idx);

  mia::QuerySet query;
  query.records.num_classes = members.num_classes;
  query.records.features = Matrix(2 * q, members.features.cols);
  query.records.labels.resize(2 * q);
  query.membership.resize(2 * q);
  for (std::size_t i = 0; i < q; ++i) {
    std::copy(members.features.row(i).begin(), members.features.row(i).end(),
              query.records.features.row(i).begin());
    query.records.labels[i] = members.labels[i];
    query.membership[i] = 1;
    std::copy(nonmembers.features.row(i).begin(),
              nonmembers.features.row(i).end(),
              query.records.features.row(q + i).begin());
    query.records.labels[q + i] = nonmembers.labels[i];
    query.membership[q + i] = 0;
  }
  return query;
}

namespace {

mia::AttackReport attack_battery(const ExperimentConfig& config,
                                 const data::SplitSet& split,
                                 const nn::ModelSpec& spec,
                                 const nn::ParameterStore& target_params,
                                 const nn::ParameterStore& shadow_params) {
  const auto target_query = build_query_set(config, split, 0);
  const auto shadow_query = build_query_set(config, split, 1);
  return mia::run_attack_battery(target_params, shadow_params, spec,
                                 target_query, shadow_query, config.seed);
}

void write_all_artifacts(const RunPaths& paths, const std::string& command,
                         const ExperimentConfig& config,
                         const DefenseSettings& target_settings,
                         const DefenseSettings& shadow_settings,
                         const metrics::EvalSummary& summary,
                         const PhasedTrace& trace,
                         const std::vector<SweepRow>& rows,
                         const Snapshot& target, const Snapshot& shadow) {
  ensure_dir(paths.dir);
  write_metrics_json(paths.metrics_json(), command, config, target_settings,
                     shadow_settings, summary);
  write_trace_csv(paths.trace_csv(), trace, segment_names(target.params));
  write_sweep_csv(paths.sweep_csv(), rows);
  save_snapshot(target, paths.target_snapshot());
  save_snapshot(shadow, paths.shadow_snapshot());
  write_config_echo(paths.config_ini(), config);
}

}  // namespace

RunPaths cmd_train(const ExperimentConfig& config) {
  config.validate();
  const auto dataset = build_dataset(config);
  const auto split = build_split(config, dataset);
  const auto spec = resolve_model_spec(config, dataset);

  PhasedTrace target_trace;
  PhasedTrace shadow_trace;
  nn::ParameterStore target_params;
  nn::ParameterStore shadow_params;
  for (int role = 0; role < 2; ++role) {
    const SplitRefs refs = role_refs(split, role);
    nn::ParameterStore params = nn::init_model(
        spec, derive_seed(config.seed, seed_tag::kModelInit,
                          static_cast<std::uint64_t>(role)));
    auto trace = tuning::standard_train(
        params, spec, refs.train, refs.test, refs.inference,
        config.standard_epochs, config.optim,
        derive_seed(config.seed, seed_tag::kStandardTrain,
                    static_cast<std::uint64_t>(role)));
    if (role == 0) {
      target_params = std::move(params);
      target_trace.standard = std::move(trace);
    } else {
      shadow_params = std::move(params);
      shadow_trace.standard = std::move(trace);
    }
  }

  const auto report =
      attack_battery(config, split, spec, target_params, shadow_params);
  const auto summary = build_summary(target_trace.standard, report,
                                     target_params, spec, role_refs(split, 0));

  // The base models carry no defense yet, whatever the config will apply.
  DefenseSettings base;
  const RunPaths paths{config.out_dir};
  write_all_artifacts(paths, "train", config, base, base, summary, target_trace,
                      {make_row(0, base, summary)}, {spec, target_params},
                      {spec, shadow_params});
  std::cout << "[train] " << config.out_dir
            << " test_acc=" << summary.test_accuracy
            << " loss_gap=" << summary.loss_gap
            << " max_adv=" << summary.max_advantage << "\n";
  return paths;
}

RunPaths cmd_tune(const ExperimentConfig& config,
                  const std::string& snapshot_dir) {
  config.validate();
  const RunPaths base_paths{snapshot_dir};
  Snapshot target = load_snapshot(base_paths.target_snapshot());
  Snapshot shadow = load_snapshot(base_paths.shadow_snapshot());

  const auto dataset = build_dataset(config);
  const auto split = build_split(config, dataset);
  const auto spec = resolve_model_spec(config, dataset);
  if (spec.param_count() != target.params.size()) {
    throw std::runtime_error(
        "cmd_tune: snapshot does not match the configured model");
  }

  PhasedTrace target_trace;
  PhasedTrace shadow_trace;
  target_trace.tuning = apply_defense(config, target.params, spec, split, 0);
  shadow_trace.tuning = apply_defense(config, shadow.params, spec, split, 1);

  const auto report =
      attack_battery(config, split, spec, target.params, shadow.params);
  const auto summary = build_summary(target_trace.tuning, report,
                                     target.params, spec, role_refs(split, 0));

  const DefenseSettings settings = settings_from(config);
  const RunPaths paths{config.out_dir};
  write_all_artifacts(paths, "tune", config, settings, settings, summary,
                      target_trace, {make_row(0, settings, summary)}, target,
                      shadow);
  std::cout << "[tune] " << config.out_dir << " defense="
            << defense_name(config.defense)
            << " test_acc=" << summary.test_accuracy
            << " loss_gap=" << summary.loss_gap
            << " max_adv=" << summary.max_advantage << "\n";
  return paths;
}

RunPaths cmd_attack(const ExperimentConfig& config,
                    const std::string& snapshot_dir) {
  config.validate();
  const RunPaths source_paths{snapshot_dir};
  Snapshot target = load_snapshot(source_paths.target_snapshot());
  Snapshot shadow = load_snapshot(source_paths.shadow_snapshot());

  const auto dataset = build_dataset(config);
  const auto split = build_split(config, dataset);
  const auto spec = resolve_model_spec(config, dataset);
  if (spec.param_count() != target.params.size()) {
    throw std::runtime_error(
        "cmd_attack: snapshot does not match the configured model");
  }

  const auto report =
      attack_battery(config, split, spec, target.params, shadow.params);
  const auto summary = build_summary({}, report, target.params, spec,
                                     role_refs(split, 0));

  const DefenseSettings settings = settings_from(config);
  const RunPaths paths{config.out_dir};
  write_all_artifacts(paths, "attack", config, settings, settings, summary, {},
                      {make_row(0, settings, summary)}, target, shadow);
  std::cout << "[attack] " << config.out_dir
            << " max_adv=" << summary.max_advantage << "\n";
  return paths;
}

RunPaths cmd_sweep(const ExperimentConfig& config) {
  config.validate();
  const std::vector<double> lambdas =
      config.lambda_grid.empty() ? std::vector<double>{config.lambda}
                                 : config.lambda_grid;
  const std::vector<double> alphas = config.alpha_grid.empty()
                                         ? std::vector<double>{config.alpha}
                                         : config.alpha_grid;

  // Shared base snapshot for every grid point.
  ExperimentConfig base_config = config;
  base_config.out_dir = config.out_dir + "/base";
  const RunPaths base_paths = cmd_train(base_config);

  std::vector<SweepRow> rows;
  int index = 0;
  for (double lambda : lambdas) {
    for (double alpha : alphas) {
      ExperimentConfig point_config = config;
      point_config.lambda = lambda;
      point_config.alpha = alpha;
      if (config.defense == Defense::kLossGap && !config.lambda_grid.empty()) {
        point_config.mu = lambda;  // the lambda grid drives mu for lossgap
      }
      point_config.out_dir =
          config.out_dir + "/point_" + std::to_string(index);

      SweepRow row = make_row(index, settings_from(point_config), {});
      try {
        cmd_tune(point_config, base_paths.dir);
        // Reload the point's own metrics for the row.
        std::ifstream in(RunPaths{point_config.out_dir}.metrics_json());
        const auto doc = nlohmann::json::parse(in);
        const auto& s = doc.at("summary");
        row.summary.test_accuracy = s.at("test_accuracy").get<double>();
        row.summary.train_accuracy = s.at("train_accuracy").get<double>();
        row.summary.max_advantage = s.at("max_advantage").get<double>();
        row.summary.p1 = s.at("p1").get<double>();
        row.summary.gini = s.at("gini").get<double>();
        row.summary.near_zero_fraction =
            s.at("near_zero_fraction").get<double>();
        row.summary.loss_gap = s.at("loss_gap").get<double>();
        row.summary.epochs_recorded = s.at("epochs_recorded").get<int>();
        for (const auto& [name, value] :
             s.at("per_attack_advantage").items()) {
          row.summary.per_attack_advantage[name] = value.get<double>();
        }
        for (const auto& [name, value] : s.at("per_attack_accuracy").items()) {
          row.summary.per_attack_accuracy[name] = value.get<double>();
        }
      } catch (const std::exception& e) {
        row.status = std::string("failed: ") + e.what();
        std::replace(row.status.begin(), row.status.end(), ',', ';');
        std::replace(row.status.begin(), row.status.end(), '\n', ' ');
      }
      rows.push_back(std::move(row));
      ++index;
    }
  }

  const RunPaths paths{config.out_dir};
  write_sweep_csv(paths.sweep_csv(), rows);
  std::cout << "[sweep] " << config.out_dir << " points=" << rows.size()
            << "\n";
  return paths;
}

std::vector<HistogramBin> weight_histogram(const std::vector<double>& values) {
  constexpr int kBins = 64;
  constexpr double kLow = 1e-8;
  constexpr double kHigh = 10.0;
  const double log_low = std::log10(kLow);
  const double log_high = std::log10(kHigh);
  const double step = (log_high - log_low) / kBins;

  std::vector<HistogramBin> bins(kBins);
  for (int b = 0; b < kBins; ++b) {
    bins[b].lower = std::pow(10.0, log_low + b * step);
    bins[b].upper = std::pow(10.0, log_low + (b + 1) * step);
  }
  for (double v : values) {
    const double magnitude = std::fabs(v);
    int b = 0;
    if (magnitude > 0.0) {
      b = static_cast<int>((std::log10(magnitude) - log_low) / step);
    }
    b = std::clamp(b, 0, kBins - 1);
    ++bins[b].count;
  }
  return bins;
}

namespace {

std::vector<std::map<std::string, std::string>> read_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("report: missing artifact '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("report: empty file '" + path + "'");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::map<std::string, std::string> row;
    std::size_t i = 0;
    while (std::getline(ss, cell, ',') && i < header.size()) {
      row[header[i++]] = cell;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string run_label(const std::string& dir) {
  const auto path = std::filesystem::path(dir);
  const auto name = path.filename().string();
  return name.empty() ? path.parent_path().filename().string() : name;
}

}  // namespace

void cmd_report(const ExperimentConfig& config,
                const std::vector<std::string>& run_dirs,
                const std::string& out_dir) {
  if (run_dirs.empty()) {
    throw std::runtime_error("report: no run directories given");
  }
  ensure_dir(out_dir);

  const auto dataset = build_dataset(config);
  const auto split = build_split(config, dataset);

  std::vector<SweepRow> scatter_sources;
  std::ofstream scatter(out_dir + "/tradeoff_scatter.csv");
  scatter << "run,index,defense,lambda,alpha,mu,status,test_acc,max_advantage,"
             "adv_loss,p1,loss_gap,gini,near_zero_fraction\n";

  for (const auto& dir : run_dirs) {
    const RunPaths paths{dir};
    const std::string label = run_label(dir);

    // Per-epoch series from the trace.
    const auto trace_rows = read_csv(paths.trace_csv());
    {
      std::ofstream gap(out_dir + "/" + label + "_loss_gap_vs_epoch.csv");
      gap << "phase,epoch,loss_gap\n";
      std::ofstream gini(out_dir + "/" + label + "_gini_vs_epoch.csv");
      gini << "phase,epoch,gini\n";
      std::ofstream module_sens(out_dir + "/" + label +
                                "_module_sensitivity.csv");
      module_sens << "phase,epoch,module,mean_sensitivity\n";
      for (const auto& row : trace_rows) {
        gap << row.at("phase") << ',' << row.at("epoch") << ','
            << row.at("loss_gap") << '\n';
        gini << row.at("phase") << ',' << row.at("epoch") << ','
             << row.at("gini") << '\n';
        for (const auto& [key, value] : row) {
          if (key.rfind("sens:", 0) == 0) {
            module_sens << row.at("phase") << ',' << row.at("epoch") << ','
                        << key.substr(5) << ',' << value << '\n';
          }
        }
      }
    }

    // Weight histogram and sensitivity distribution from the final snapshot.
    const Snapshot snapshot = load_snapshot(paths.target_snapshot());
    {
      std::ofstream hist(out_dir + "/" + label + "_weight_histogram.csv");
      hist << "bin_lower,bin_upper,count\n";
      for (const auto& bin : weight_histogram(snapshot.params.values())) {
        hist << fmt_double(bin.lower) << ',' << fmt_double(bin.upper) << ','
             << bin.count << '\n';
      }
    }
    {
      const auto raw = tuning::privacy_sensitivity(
          snapshot.params, snapshot.spec, split.target_train,
          split.target_inference, config.gap_batch_limit);
      const tuning::SensitivityConcentration concentration(raw);
      std::ofstream sens(out_dir + "/" + label +
                         "_sensitivity_distribution.csv");
      sens << "kind,x,value\n";
      for (double q : {0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0}) {
        sens << "top_quantile_share," << fmt_double(q) << ','
             << fmt_double(concentration.top_quantile_share(q)) << '\n';
      }
      for (double t : {1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
        sens << "fraction_below," << fmt_double(t) << ','
             << fmt_double(concentration.fraction_below(t)) << '\n';
      }
    }

    // Scatter rows from any sweep table in the run dir.
    for (const auto& row : read_csv(paths.sweep_csv())) {
      scatter << label << ',' << row.at("index") << ',' << row.at("defense")
              << ',' << row.at("lambda") << ',' << row.at("alpha") << ','
              << row.at("mu") << ',' << row.at("status") << ','
              << row.at("test_acc") << ',' << row.at("max_advantage") << ','
              << row.at("adv_loss") << ',' << row.at("p1") << ','
              << row.at("loss_gap") << ',' << row.at("gini") << ','
              << row.at("near_zero_fraction") << '\n';
    }
  }
  std::cout << "[report] " << out_dir << " runs=" << run_dirs.size() << "\n";
}

}  // namespace past::experiment
