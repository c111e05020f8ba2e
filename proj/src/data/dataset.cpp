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

#include "past/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "past/rng.hpp"

namespace past::data {

void Dataset::validate() const {
  if (labels.empty()) throw std::invalid_argument("Dataset: empty");
  if (features.rows != labels.size()) {
    throw std::invalid_argument("Dataset: feature/label row count mismatch");
  }
  if (num_classes < 2) {
    throw std::invalid_argument("Dataset: num_classes must be >= 2");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw std::invalid_argument("Dataset: label out of [0, K)");
    }
  }
  for (double v : features.data) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("Dataset: non-finite feature value");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.num_classes = num_classes;
  out.features = Matrix(indices.size(), features.cols);
  out.labels.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t src = indices[i];
    if (src >= size()) {
      throw std::invalid_argument("Dataset::subset: index out of range");
    }
    std::copy(features.row(src).begin(), features.row(src).end(),
              out.features.row(i).begin());
    out.labels[i] = labels[src];
  }
  return out;
}

void SyntheticSpec::validate() const {
  if (num_classes < 2) {
    throw std::invalid_argument("SyntheticSpec: num_classes must be >= 2");
  }
  if (dim < 1) throw std::invalid_argument("SyntheticSpec: dim must be >= 1");
  if (per_class_count < 1) {
    throw std::invalid_argument("SyntheticSpec: per_class_count must be >= 1");
  }
  if (!(cluster_spread > 0.0)) {
    throw std::invalid_argument("SyntheticSpec: cluster_spread must be > 0");
  }
  if (label_noise < 0.0 || label_noise >= 0.5) {
    throw std::invalid_argument("SyntheticSpec: label_noise must be in [0, 0.5)");
  }
}

Dataset gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);

  // Unit-norm cluster centers.
  std::vector<std::vector<double>> centers(spec.num_classes,
                                           std::vector<double>(spec.dim));
  for (auto& center : centers) {
    double norm_sq = 0.0;
    for (double& c : center) {
      c = rng.normal();
      norm_sq += c * c;
    }
    double norm = std::sqrt(norm_sq);
    if (norm < 1e-12) {
      center[0] = 1.0;
      norm = 1.0;
    }
    for (double& c : center) c /= norm;
  }

  const std::size_t n =
      static_cast<std::size_t>(spec.num_classes) * spec.per_class_count;
  Dataset out;
  out.num_classes = spec.num_classes;
  out.features = Matrix(n, spec.dim);
  out.labels.resize(n);

  std::size_t row = 0;
  for (int k = 0; k < spec.num_classes; ++k) {
    for (int i = 0; i < spec.per_class_count; ++i, ++row) {
      auto dst = out.features.row(row);
      for (int j = 0; j < spec.dim; ++j) {
        dst[j] = centers[k][j] + spec.cluster_spread * rng.normal();
      }
      out.labels[row] = k;
    }
  }

  // Noisy labels are resampled to a *different* class, so the noisy fraction
  // is observable by comparing against a noise-free generation.
  if (spec.label_noise > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.uniform() < spec.label_noise) {
        const int shift =
            1 + static_cast<int>(rng.below(spec.num_classes - 1));
        out.labels[i] = (out.labels[i] + shift) % spec.num_classes;
      }
    }
  }
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, std::size_t row, std::size_t col) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("load_csv: non-numeric cell at row " +
                             std::to_string(row) + ", column " +
                             std::to_string(col) + ": '" + text + "'");
  }
  while (pos < text.size() &&
         (text[pos] == ' ' || text[pos] == '\r' || text[pos] == '\t')) {
    ++pos;
  }
  if (pos != text.size()) {
    throw std::runtime_error("load_csv: non-numeric cell at row " +
                             std::to_string(row) + ", column " +
                             std::to_string(col) + ": '" + text + "'");
  }
  return value;
}

}  // namespace

Dataset load_csv(const std::string& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");

  Dataset out;
  std::map<long long, int> label_map;  // raw label -> dense index
  std::vector<double> feature_buffer;
  std::size_t dim = 0;
  std::size_t row_number = 0;
  std::string line;
  bool skipped_header = false;

  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (has_header && !skipped_header) {
      skipped_header = true;
      continue;
    }
    if (line.empty()) continue;

    const auto fields = split_fields(line);
    if (fields.size() < 2) {
      throw std::runtime_error("load_csv: row " + std::to_string(row_number) +
                               " has fewer than 2 fields");
    }
    if (dim == 0) {
      dim = fields.size() - 1;
    } else if (fields.size() - 1 != dim) {
      throw std::runtime_error(
          "load_csv: ragged row " + std::to_string(row_number) + " (expected " +
          std::to_string(dim + 1) + " fields, got " +
          std::to_string(fields.size()) + ")");
    }

    const double raw_label = parse_double(fields[0], row_number, 0);
    const long long label_key = static_cast<long long>(std::llround(raw_label));
    if (static_cast<double>(label_key) != raw_label) {
      throw std::runtime_error("load_csv: non-integer label at row " +
                               std::to_string(row_number));
    }
    auto [it, inserted] =
        label_map.try_emplace(label_key, static_cast<int>(label_map.size()));
    (void)inserted;
    out.labels.push_back(it->second);

    for (std::size_t j = 1; j < fields.size(); ++j) {
      feature_buffer.push_back(parse_double(fields[j], row_number, j));
    }
  }

  if (out.labels.empty()) {
    throw std::runtime_error("load_csv: no data rows in '" + path + "'");
  }
  out.num_classes = static_cast<int>(label_map.size());
  out.features = Matrix(out.labels.size(), dim);
  out.features.data = std::move(feature_buffer);
  return out;
}

void save_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream outfile(path);
  if (!outfile) throw std::runtime_error("save_csv: cannot open '" + path + "'");
  char buf[64];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    outfile << dataset.labels[i];
    for (double v : dataset.features.row(i)) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      outfile << ',' << buf;
    }
    outfile << '\n';
  }
  if (!outfile) throw std::runtime_error("save_csv: write failed for '" + path + "'");
}

SplitSet six_split(const Dataset& dataset, std::uint64_t seed) {
  dataset.validate();
  const std::size_t n = dataset.size();
  if (n < 6) throw std::invalid_argument("six_split: need at least 6 examples");

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  rng.shuffle(perm);

  const std::size_t base = n / 6;
  const std::size_t remainder = n % 6;
  std::vector<Dataset> parts;
  std::size_t offset = 0;
  for (std::size_t s = 0; s < 6; ++s) {
    const std::size_t len = base + (s < remainder ? 1 : 0);
    parts.push_back(dataset.subset(
        std::span<const std::size_t>(perm.data() + offset, len)));
    offset += len;
  }

  SplitSet split;
  split.target_train = std::move(parts[0]);
  split.target_test = std::move(parts[1]);
  split.target_inference = std::move(parts[2]);
  split.shadow_train = std::move(parts[3]);
  split.shadow_test = std::move(parts[4]);
  split.shadow_inference = std::move(parts[5]);
  return split;
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t n,
                                                    int batch_size,
                                                    std::uint64_t seed,
                                                    int epoch) {
  if (batch_size < 1) {
    throw std::invalid_argument("batch_indices: batch_size must be >= 1");
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(derive_seed(seed, seed_tag::kBatch, static_cast<std::uint64_t>(epoch)));
  rng.shuffle(perm);

  std::vector<std::vector<std::size_t>> batches;
  const std::size_t bs = static_cast<std::size_t>(batch_size);
  for (std::size_t start = 0; start < n; start += bs) {
    const std::size_t len = std::min(bs, n - start);
    batches.emplace_back(perm.begin() + start, perm.begin() + start + len);
  }
  return batches;
}

}  // namespace past::data
