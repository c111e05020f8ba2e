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

#include "past/experiment/config.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace past::experiment {

std::string defense_name(Defense defense) {
  switch (defense) {
    case Defense::kNone:
      return "none";
    case Defense::kPast:
      return "past";
    case Defense::kL1:
      return "l1";
    case Defense::kL2:
      return "l2";
    case Defense::kLossGap:
      return "lossgap";
  }
  throw std::invalid_argument("defense_name: unknown defense");
}

Defense parse_defense(const std::string& name) {
  if (name == "none") return Defense::kNone;
  if (name == "past") return Defense::kPast;
  if (name == "l1") return Defense::kL1;
  if (name == "l2") return Defense::kL2;
  if (name == "lossgap") return Defense::kLossGap;
  throw std::invalid_argument(
      "unknown defense '" + name + "' (expected none|past|l1|l2|lossgap)");
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

class IniValues {
 public:
  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert({key, true});
    return it->second;
  }

  double get_double(const std::string& key, double fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert({key, true});
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error("config: " + key + ": expected a number, got '" +
                               it->second + "'");
    }
  }

  long long get_int(const std::string& key, long long fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert({key, true});
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error("config: " + key +
                               ": expected an integer, got '" + it->second +
                               "'");
    }
  }

  bool get_bool(const std::string& key, bool fallback) {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    consumed_.insert({key, true});
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::runtime_error("config: " + key + ": expected true/false, got '" +
                             it->second + "'");
  }

  void check_all_consumed() const {
    for (const auto& [key, value] : values_) {
      if (!consumed_.count(key)) {
        throw std::runtime_error("config: unknown key '" + key + "'");
      }
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> consumed_;
};

}  // namespace

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    token = trim(token);
    if (token.empty()) continue;
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(token, &pos));
      if (pos != token.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::runtime_error(what + ": expected comma-separated numbers, got '" +
                               text + "'");
    }
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text,
                                const std::string& what) {
  std::vector<int> out;
  for (double v : parse_double_list(text, what)) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
      throw std::runtime_error(what + ": expected integers, got '" + text + "'");
    }
    out.push_back(i);
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (data.source == DataConfig::Source::kSynthetic) {
    data.synthetic.validate();
  } else if (data.csv_path.empty()) {
    throw std::runtime_error("config: data.csv_path: required when source=csv");
  }
  if (hidden_widths.empty()) {
    throw std::runtime_error("config: model.hidden: must be non-empty");
  }
  for (int w : hidden_widths) {
    if (w < 1) throw std::runtime_error("config: model.hidden: widths must be >= 1");
  }
  optim.validate();
  if (lambda < 0.0) throw std::runtime_error("config: defense.lambda: must be >= 0");
  if (alpha < 0.0) throw std::runtime_error("config: defense.alpha: must be >= 0");
  if (mu < 0.0) throw std::runtime_error("config: defense.mu: must be >= 0");
  if (gap_batch_limit && *gap_batch_limit < 1) {
    throw std::runtime_error("config: defense.gap_batch_limit: must be >= 1");
  }
  if (standard_epochs < 1) {
    throw std::runtime_error("config: run.standard_epochs: must be >= 1");
  }
  if (tuning_epochs < 1) {
    throw std::runtime_error("config: run.tuning_epochs: must be >= 1");
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");

  std::map<std::string, IniValues> sections;
  std::string section;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::runtime_error("config: line " + std::to_string(line_number) +
                                 ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config: line " + std::to_string(line_number) +
                               ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw std::runtime_error("config: line " + std::to_string(line_number) +
                               ": key outside of any [section]");
    }
    sections[section].set(section + "." + key, value);
  }

  ExperimentConfig config;
  auto& data = sections["data"];
  const std::string source = data.get_string("data.source", "synthetic");
  if (source == "synthetic") {
    config.data.source = DataConfig::Source::kSynthetic;
  } else if (source == "csv") {
    config.data.source = DataConfig::Source::kCsv;
  } else {
    throw std::runtime_error("config: data.source: expected synthetic or csv");
  }
  config.data.synthetic.num_classes =
      static_cast<int>(data.get_int("data.classes", config.data.synthetic.num_classes));
  config.data.synthetic.dim =
      static_cast<int>(data.get_int("data.dim", config.data.synthetic.dim));
  config.data.synthetic.per_class_count = static_cast<int>(
      data.get_int("data.per_class", config.data.synthetic.per_class_count));
  config.data.synthetic.cluster_spread = data.get_double(
      "data.cluster_spread", config.data.synthetic.cluster_spread);
  config.data.synthetic.label_noise =
      data.get_double("data.label_noise", config.data.synthetic.label_noise);
  config.data.csv_path = data.get_string("data.csv_path", "");
  config.data.csv_has_header = data.get_bool("data.csv_has_header", false);
  data.check_all_consumed();

  auto& model = sections["model"];
  if (model.has("model.hidden")) {
    config.hidden_widths = parse_int_list(
        model.get_string("model.hidden", ""), "config: model.hidden");
  }
  config.activation = nn::parse_activation(
      model.get_string("model.activation", nn::activation_name(config.activation)));
  model.check_all_consumed();

  auto& optim = sections["optim"];
  config.optim.lr0 = optim.get_double("optim.lr0", config.optim.lr0);
  config.optim.momentum = optim.get_double("optim.momentum", config.optim.momentum);
  config.optim.weight_decay =
      optim.get_double("optim.weight_decay", config.optim.weight_decay);
  config.optim.batch_size = static_cast<int>(
      optim.get_int("optim.batch_size", config.optim.batch_size));
  optim.check_all_consumed();

  auto& defense = sections["defense"];
  config.defense = parse_defense(
      defense.get_string("defense.name", defense_name(config.defense)));
  config.lambda = defense.get_double("defense.lambda", config.lambda);
  config.alpha = defense.get_double("defense.alpha", config.alpha);
  config.mu = defense.get_double("defense.mu", config.mu);
  if (defense.has("defense.lambda_grid")) {
    config.lambda_grid =
        parse_double_list(defense.get_string("defense.lambda_grid", ""),
                          "config: defense.lambda_grid");
  }
  if (defense.has("defense.alpha_grid")) {
    config.alpha_grid = parse_double_list(
        defense.get_string("defense.alpha_grid", ""), "config: defense.alpha_grid");
  }
  const long long limit = defense.get_int("defense.gap_batch_limit", 0);
  if (limit > 0) config.gap_batch_limit = static_cast<int>(limit);
  defense.check_all_consumed();

  auto& run = sections["run"];
  config.standard_epochs = static_cast<int>(
      run.get_int("run.standard_epochs", config.standard_epochs));
  config.tuning_epochs =
      static_cast<int>(run.get_int("run.tuning_epochs", config.tuning_epochs));
  config.seed = static_cast<std::uint64_t>(
      run.get_int("run.seed", static_cast<long long>(config.seed)));
  config.out_dir = run.get_string("run.out_dir", config.out_dir);
  run.check_all_consumed();

  config.validate();
  return config;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
std::string join_list(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    if constexpr (std::is_same_v<T, double>) {
      out += fmt_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

}  // namespace

std::string config_to_ini(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "[data]\n";
  out << "source = "
      << (config.data.source == DataConfig::Source::kSynthetic ? "synthetic"
                                                               : "csv")
      << "\n";
  if (config.data.source == DataConfig::Source::kSynthetic) {
    out << "classes = " << config.data.synthetic.num_classes << "\n";
    out << "dim = " << config.data.synthetic.dim << "\n";
    out << "per_class = " << config.data.synthetic.per_class_count << "\n";
    out << "cluster_spread = " << fmt_double(config.data.synthetic.cluster_spread)
        << "\n";
    out << "label_noise = " << fmt_double(config.data.synthetic.label_noise)
        << "\n";
  } else {
    out << "csv_path = " << config.data.csv_path << "\n";
    out << "csv_has_header = " << (config.data.csv_has_header ? "true" : "false")
        << "\n";
  }
  out << "\n[model]\n";
  out << "hidden = " << join_list(config.hidden_widths) << "\n";
  out << "activation = " << nn::activation_name(config.activation) << "\n";
  out << "\n[optim]\n";
  out << "lr0 = " << fmt_double(config.optim.lr0) << "\n";
  out << "momentum = " << fmt_double(config.optim.momentum) << "\n";
  out << "weight_decay = " << fmt_double(config.optim.weight_decay) << "\n";
  out << "batch_size = " << config.optim.batch_size << "\n";
  out << "\n[defense]\n";
  out << "name = " << defense_name(config.defense) << "\n";
  out << "lambda = " << fmt_double(config.lambda) << "\n";
  out << "alpha = " << fmt_double(config.alpha) << "\n";
  out << "mu = " << fmt_double(config.mu) << "\n";
  if (!config.lambda_grid.empty()) {
    out << "lambda_grid = " << join_list(config.lambda_grid) << "\n";
  }
  if (!config.alpha_grid.empty()) {
    out << "alpha_grid = " << join_list(config.alpha_grid) << "\n";
  }
  if (config.gap_batch_limit) {
    out << "gap_batch_limit = " << *config.gap_batch_limit << "\n";
  }
  // out_dir is a location, not an experiment parameter; leaving it out keeps
  // the echo (and hence metrics.json) byte-identical across run directories.
  out << "\n[run]\n";
  out << "standard_epochs = " << config.standard_epochs << "\n";
  out << "tuning_epochs = " << config.tuning_epochs << "\n";
  out << "seed = " << config.seed << "\n";
  return out.str();
}

}  // namespace past::experiment
