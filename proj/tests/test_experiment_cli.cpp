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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "past/experiment/config.hpp"
#include "past/experiment/experiment.hpp"
#include "past/experiment/snapshot.hpp"
#include "past/rng.hpp"

using namespace past;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  return lines;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Tiny recipe that runs the full pipeline in well under a second.
experiment::ExperimentConfig tiny_config(const std::string& out_dir) {
  experiment::ExperimentConfig config;
  config.data.synthetic = {4, 8, 90, 0.8, 0.15};  // N = 360 -> six x 60
  config.hidden_widths = {16};
  config.optim = {0.05, 0.9, 0.0005, 16};
  config.defense = experiment::Defense::kPast;
  config.lambda = 1e-3;
  config.alpha = 2.0;
  config.standard_epochs = 6;
  config.tuning_epochs = 4;
  config.seed = 11;
  config.out_dir = out_dir;
  return config;
}

}  // namespace

TEST_CASE("config file parsing, defaults, and error paths") {
  const auto dir = fresh_dir("past_cfg_test");
  const std::string path = (dir / "config.ini").string();
  {
    std::ofstream out(path);
    out << "# comment\n"
        << "[data]\n"
        << "source = synthetic\n"
        << "classes = 5\n"
        << "dim = 12\n"
        << "per_class = 30\n"
        << "cluster_spread = 0.9\n"
        << "label_noise = 0.05\n"
        << "\n[model]\n"
        << "hidden = 24,16\n"
        << "activation = tanh\n"
        << "\n[optim]\n"
        << "lr0 = 0.02\n"
        << "batch_size = 32\n"
        << "\n[defense]\n"
        << "name = past\n"
        << "lambda = 0.0005\n"
        << "alpha_grid = 0.5, 1.5, 2.5\n"
        << "\n[run]\n"
        << "standard_epochs = 8\n"
        << "tuning_epochs = 3\n"
        << "seed = 42\n"
        << "out_dir = runs/demo\n";
  }
  const auto config = experiment::load_config(path);
  CHECK(config.data.synthetic.num_classes == 5);
  CHECK(config.data.synthetic.dim == 12);
  CHECK(config.hidden_widths == std::vector<int>{24, 16});
  CHECK(config.activation == nn::Activation::kTanh);
  CHECK(config.optim.lr0 == 0.02);
  CHECK(config.optim.momentum == 0.9);  // default preserved
  CHECK(config.defense == experiment::Defense::kPast);
  CHECK(config.lambda == 0.0005);
  CHECK(config.alpha_grid == std::vector<double>{0.5, 1.5, 2.5});
  CHECK(config.seed == 42);
  CHECK(config.standard_epochs == 8);

  // Round trip through the echo format.
  const std::string echoed = (dir / "echo.ini").string();
  {
    std::ofstream out(echoed);
    out << experiment::config_to_ini(config);
  }
  const auto reloaded = experiment::load_config(echoed);
  CHECK(experiment::config_to_ini(reloaded) == experiment::config_to_ini(config));

  // Errors carry the section.key path.
  {
    std::ofstream out(path);
    out << "[defense]\nlambda = banana\n";
  }
  CHECK_THROWS_WITH_AS(experiment::load_config(path),
                       doctest::Contains("defense.lambda"), std::runtime_error);
  {
    std::ofstream out(path);
    out << "[defense]\nmystery_knob = 1\n";
  }
  CHECK_THROWS_WITH_AS(experiment::load_config(path),
                       doctest::Contains("mystery_knob"), std::runtime_error);
}

TEST_CASE("snapshot save/load round-trips bit-exactly") {
  nn::ModelSpec spec{6, {5, 4}, 3, nn::Activation::kTanh};
  auto params = nn::init_model(spec, 123);
  // Exercise non-trivial bit patterns.
  params.mutable_values()[0] = -0.0;
  params.mutable_values()[1] = 1e-300;
  params.mutable_values()[2] = -12345.6789e200;

  const auto dir = fresh_dir("past_snap_test");
  const std::string path = (dir / "model.snap").string();
  experiment::save_snapshot({spec, params}, path);
  const auto loaded = experiment::load_snapshot(path);

  CHECK(loaded.spec.input_dim == spec.input_dim);
  CHECK(loaded.spec.layer_widths == spec.layer_widths);
  CHECK(loaded.spec.num_classes == spec.num_classes);
  CHECK(loaded.spec.activation == spec.activation);
  REQUIRE(loaded.params.size() == params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double a = params.values()[i];
    const double b = loaded.params.values()[i];
    CHECK(std::memcmp(&a, &b, sizeof(double)) == 0);
  }
  REQUIRE(loaded.params.segments().size() == params.segments().size());
  for (std::size_t i = 0; i < params.segments().size(); ++i) {
    CHECK(loaded.params.segments()[i].name == params.segments()[i].name);
    CHECK(loaded.params.segments()[i].offset == params.segments()[i].offset);
    CHECK(loaded.params.segments()[i].length == params.segments()[i].length);
  }

  CHECK_THROWS_AS(experiment::load_snapshot((dir / "missing.snap").string()),
                  std::runtime_error);
}

TEST_CASE("cmd_train writes all artifacts deterministically") {
  const auto dir = fresh_dir("past_train_test");
  auto config = tiny_config((dir / "run_a").string());
  const auto paths_a = experiment::cmd_train(config);

  CHECK(fs::exists(paths_a.metrics_json()));
  CHECK(fs::exists(paths_a.trace_csv()));
  CHECK(fs::exists(paths_a.sweep_csv()));
  CHECK(fs::exists(paths_a.target_snapshot()));
  CHECK(fs::exists(paths_a.shadow_snapshot()));

  // Trace has one row per standard epoch (plus header).
  CHECK(count_lines(read_file(paths_a.trace_csv())) ==
        static_cast<std::size_t>(config.standard_epochs) + 1);

  // Overfit recipe: final train accuracy well above test accuracy.
  const auto doc = nlohmann::json::parse(read_file(paths_a.metrics_json()));
  CHECK(doc.at("summary").at("train_accuracy").get<double>() >
        doc.at("summary").at("test_accuracy").get<double>() + 0.1);

  config.out_dir = (dir / "run_b").string();
  const auto paths_b = experiment::cmd_train(config);
  CHECK(read_file(paths_a.metrics_json()) == read_file(paths_b.metrics_json()));
  CHECK(read_file(paths_a.trace_csv()) == read_file(paths_b.trace_csv()));
  CHECK(read_file(paths_a.target_snapshot()) ==
        read_file(paths_b.target_snapshot()));
}

TEST_CASE("cmd_tune: defense none passes the snapshot through") {
  const auto dir = fresh_dir("past_tune_none_test");
  auto config = tiny_config((dir / "base").string());
  const auto base = experiment::cmd_train(config);

  config.defense = experiment::Defense::kNone;
  config.out_dir = (dir / "tuned").string();
  const auto tuned = experiment::cmd_tune(config, base.dir);

  const auto before = experiment::load_snapshot(base.target_snapshot());
  const auto after = experiment::load_snapshot(tuned.target_snapshot());
  CHECK(before.params.values() == after.params.values());

  const auto doc = nlohmann::json::parse(read_file(tuned.metrics_json()));
  CHECK(doc.at("summary").at("epochs_recorded").get<int>() == 0);
  CHECK(doc.at("shadow_matches_target").get<bool>());
}

TEST_CASE("cmd_tune: past with alpha 0 equals uniform l1") {
  const auto dir = fresh_dir("past_tune_alpha0_test");
  auto config = tiny_config((dir / "base").string());
  const auto base = experiment::cmd_train(config);

  config.defense = experiment::Defense::kPast;
  config.alpha = 0.0;
  config.out_dir = (dir / "past0").string();
  experiment::cmd_tune(config, base.dir);

  config.defense = experiment::Defense::kL1;
  config.out_dir = (dir / "l1").string();
  experiment::cmd_tune(config, base.dir);

  const auto past_snap = experiment::load_snapshot(
      experiment::RunPaths{(dir / "past0").string()}.target_snapshot());
  const auto l1_snap = experiment::load_snapshot(
      experiment::RunPaths{(dir / "l1").string()}.target_snapshot());
  double max_diff = 0.0;
  for (std::size_t i = 0; i < past_snap.params.size(); ++i) {
    max_diff = std::max(max_diff, std::fabs(past_snap.params.values()[i] -
                                            l1_snap.params.values()[i]));
  }
  CHECK(max_diff <= 1e-12);
}

TEST_CASE("cmd_attack: random-init snapshots show no membership signal") {
  const auto dir = fresh_dir("past_attack_test");
  auto config = tiny_config((dir / "out").string());
  config.data.synthetic.per_class_count = 300;  // bigger queries: 200/side

  // Hand-build random snapshots (never trained).
  const auto dataset = experiment::build_dataset(config);
  const auto spec = experiment::resolve_model_spec(config, dataset);
  const auto snap_dir = (dir / "snaps").string();
  fs::create_directories(snap_dir);
  const experiment::RunPaths snap_paths{snap_dir};
  experiment::save_snapshot({spec, nn::init_model(spec, 500)},
                            snap_paths.target_snapshot());
  experiment::save_snapshot({spec, nn::init_model(spec, 501)},
                            snap_paths.shadow_snapshot());

  const auto out = experiment::cmd_attack(config, snap_dir);
  const auto doc = nlohmann::json::parse(read_file(out.metrics_json()));
  for (const auto& [name, adv] :
       doc.at("summary").at("per_attack_advantage").items()) {
    INFO(name);
    CHECK(std::fabs(adv.get<double>()) < 0.15);
  }
  CHECK(fs::exists(out.trace_csv()));  // header-only trace still written
  CHECK(count_lines(read_file(out.trace_csv())) == 1);

  CHECK_THROWS_AS(experiment::cmd_attack(config, (dir / "nowhere").string()),
                  std::runtime_error);
}

TEST_CASE("cmd_sweep: rows per grid point, failures recorded") {
  const auto dir = fresh_dir("past_sweep_test");
  auto config = tiny_config((dir / "sweep").string());
  config.alpha_grid = {0.0, 1.0, -1.0};  // last point is invalid on purpose
  const auto paths = experiment::cmd_sweep(config);

  const auto sweep = read_file(paths.sweep_csv());
  CHECK(count_lines(sweep) == 4);  // header + one row per grid point
  CHECK(sweep.find("failed:") != std::string::npos);
  std::size_t ok_rows = 0;
  std::istringstream lines(sweep);
  std::string line;
  std::getline(lines, line);  // header
  while (std::getline(lines, line)) {
    if (line.find(",ok,") != std::string::npos) ++ok_rows;
  }
  CHECK(ok_rows == 2);

  // Each successful point produced its own full artifact set.
  CHECK(fs::exists(dir / "sweep" / "base" / "metrics.json"));
  CHECK(fs::exists(dir / "sweep" / "point_0" / "metrics.json"));
  CHECK(fs::exists(dir / "sweep" / "point_1" / "target_final.snap"));
}

TEST_CASE("weight_histogram covers every parameter") {
  Rng rng(600);
  std::vector<double> values(5000);
  for (double& v : values) {
    v = rng.normal() * std::pow(10.0, rng.uniform(-10, 2));
  }
  values[0] = 0.0;     // below range
  values[1] = 1e9;     // above range
  const auto bins = experiment::weight_histogram(values);
  REQUIRE(bins.size() == 64);
  std::size_t total = 0;
  for (const auto& bin : bins) total += bin.count;
  CHECK(total == values.size());
  CHECK(bins.front().lower == doctest::Approx(1e-8));
  CHECK(bins.back().upper == doctest::Approx(10.0));
}

TEST_CASE("cmd_report emits the derived series") {
  const auto dir = fresh_dir("past_report_test");
  auto config = tiny_config((dir / "run").string());
  const auto base = experiment::cmd_train(config);
  config.out_dir = (dir / "tuned").string();
  experiment::cmd_tune(config, base.dir);

  const std::string report_dir = (dir / "report").string();
  experiment::cmd_report(config, {config.out_dir}, report_dir);

  CHECK(fs::exists(report_dir + "/tuned_loss_gap_vs_epoch.csv"));
  CHECK(fs::exists(report_dir + "/tuned_gini_vs_epoch.csv"));
  CHECK(fs::exists(report_dir + "/tuned_module_sensitivity.csv"));
  CHECK(fs::exists(report_dir + "/tradeoff_scatter.csv"));

  // Histogram counts sum to the parameter count.
  const auto hist = read_file(report_dir + "/tuned_weight_histogram.csv");
  std::istringstream lines(hist);
  std::string line;
  std::getline(lines, line);  // header
  std::size_t total = 0;
  while (std::getline(lines, line)) {
    const auto last_comma = line.rfind(',');
    total += std::stoull(line.substr(last_comma + 1));
  }
  const auto snap = experiment::load_snapshot(
      experiment::RunPaths{config.out_dir}.target_snapshot());
  CHECK(total == snap.params.size());

  // Sensitivity series includes the full-share anchor row.
  const auto sens = read_file(report_dir + "/tuned_sensitivity_distribution.csv");
  CHECK(sens.find("top_quantile_share,1,1\n") != std::string::npos);

  // Scatter row count equals the number of sweep rows (one per run here).
  const auto scatter = read_file(report_dir + "/tradeoff_scatter.csv");
  CHECK(count_lines(scatter) == 2);  // header + single point

  CHECK_THROWS_WITH_AS(
      experiment::cmd_report(config, {(dir / "missing").string()}, report_dir),
      doctest::Contains("missing"), std::runtime_error);
}

TEST_CASE("build_query_set is balanced and deterministic") {
  auto config = tiny_config("unused");
  const auto dataset = experiment::build_dataset(config);
  const auto split = experiment::build_split(config, dataset);
  const auto query = experiment::build_query_set(config, split, 0);
  REQUIRE(query.records.size() == 120);  // 60 members + 60 non-members
  long long members = 0;
  for (int m : query.membership) members += m;
  CHECK(members == 60);
  const auto again = experiment::build_query_set(config, split, 0);
  CHECK(query.records.features.data == again.records.features.data);
  CHECK(query.membership == again.membership);
  const auto shadow = experiment::build_query_set(config, split, 1);
  CHECK(query.records.features.data != shadow.records.features.data);
}
