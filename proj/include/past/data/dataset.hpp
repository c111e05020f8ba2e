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

#ifndef PAST_DATA_DATASET_HPP_
#define PAST_DATA_DATASET_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "past/matrix.hpp"

namespace past::data {

/// Labeled classification dataset. Labels are dense indices in [0, K).
struct Dataset {
  Matrix features;           // [N x d]
  std::vector<int> labels;   // length N
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }
  int dim() const { return static_cast<int>(features.cols); }

  /// Throws if shapes disagree, labels are out of range, or features are
  /// non-finite.
  void validate() const;

  /// Gathers the given rows into a new dataset (indices may repeat).
  Dataset subset(std::span<const std::size_t> indices) const;
};

/// The six-subset protocol: disjoint slices alternately serving as the
/// training, testing, and inference sets of the target and shadow models.
struct SplitSet {
  Dataset target_train;
  Dataset target_test;
  Dataset target_inference;
  Dataset shadow_train;
  Dataset shadow_test;
  Dataset shadow_inference;
};

/// Gaussian mixture recipe: K clusters with unit-norm random centers.
/// A label_noise fraction of examples gets relabeled to a different class,
/// which makes memorization (and hence the membership signal) tunable.
struct SyntheticSpec {
  int num_classes = 10;
  int dim = 32;
  int per_class_count = 600;
  double cluster_spread = 1.2;
  double label_noise = 0.1;

  void validate() const;
};

Dataset gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// CSV layout: one row per example, label first, then d numeric features.
/// Labels are remapped to dense [0, K) indices in order of first appearance.
Dataset load_csv(const std::string& path, bool has_header);

/// Writes label-first CSV with features at 17 significant digits, so that
/// load_csv(save_csv(x)) round-trips finite values bit-exactly.
void save_csv(const Dataset& dataset, const std::string& path);

/// Seeded permutation, then six equal contiguous slices; any remainder goes
/// to the leading slices. Requires N >= 6. Not class-stratified.
SplitSet six_split(const Dataset& dataset, std::uint64_t seed);

/// Mini-batch index order for one epoch: a shuffle keyed by (seed, epoch)
/// chunked into batches, the last one possibly partial.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t n,
                                                    int batch_size,
                                                    std::uint64_t seed,
                                                    int epoch);

}  // namespace past::data

#endif  // PAST_DATA_DATASET_HPP_
