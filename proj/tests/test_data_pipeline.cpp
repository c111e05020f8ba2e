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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "past/data/dataset.hpp"
#include "past/rng.hpp"

using namespace past;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("gen_synthetic is deterministic per seed") {
  data::SyntheticSpec spec{4, 6, 50, 0.8, 0.1};
  const auto a = data::gen_synthetic(spec, 99);
  const auto b = data::gen_synthetic(spec, 99);
  CHECK(a.features.data == b.features.data);
  CHECK(a.labels == b.labels);
  const auto c = data::gen_synthetic(spec, 100);
  CHECK(a.features.data != c.features.data);
}

TEST_CASE("gen_synthetic: label histogram uniform before noise") {
  data::SyntheticSpec spec{10, 8, 600, 1.0, 0.0};
  const auto dataset = data::gen_synthetic(spec, 5);
  CHECK(dataset.size() == 6000);
  std::vector<int> counts(10, 0);
  for (int y : dataset.labels) ++counts[y];
  for (int c : counts) CHECK(c == 600);
}

TEST_CASE("gen_synthetic: noisy-label fraction is near the configured rate") {
  data::SyntheticSpec noisy{5, 6, 1200, 1.0, 0.1};  // N = 6000
  data::SyntheticSpec clean = noisy;
  clean.label_noise = 0.0;
  const auto noisy_set = data::gen_synthetic(noisy, 7);
  const auto clean_set = data::gen_synthetic(clean, 7);
  REQUIRE(noisy_set.size() == clean_set.size());

  std::size_t flipped = 0;
  for (std::size_t i = 0; i < noisy_set.size(); ++i) {
    if (noisy_set.labels[i] != clean_set.labels[i]) ++flipped;
  }
  const double n = static_cast<double>(noisy_set.size());
  const double fraction = static_cast<double>(flipped) / n;
  const double slack = 2.0 * std::sqrt(0.1 / n);
  CHECK(fraction > 0.1 - slack);
  CHECK(fraction < 0.1 + slack);
}

TEST_CASE("gen_synthetic: near-degenerate clusters are linearly separable") {
  data::SyntheticSpec spec{4, 8, 100, 1e-6, 0.0};
  const auto dataset = data::gen_synthetic(spec, 17);

  // Nearest-centroid oracle classifier built from class means.
  std::vector<std::vector<double>> centroids(4, std::vector<double>(8, 0.0));
  std::vector<int> counts(4, 0);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const int y = dataset.labels[i];
    ++counts[y];
    for (int j = 0; j < 8; ++j) centroids[y][j] += dataset.features(i, j);
  }
  for (int k = 0; k < 4; ++k) {
    for (double& c : centroids[k]) c /= counts[k];
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 4; ++k) {
      double dist = 0.0;
      for (int j = 0; j < 8; ++j) {
        const double d = dataset.features(i, j) - centroids[k][j];
        dist += d * d;
      }
      if (dist < best_dist) {
        best_dist = dist;
        best = k;
      }
    }
    if (best == dataset.labels[i]) ++correct;
  }
  CHECK(correct == dataset.size());
}

TEST_CASE("gen_synthetic rejects invalid specs") {
  CHECK_THROWS_AS(data::gen_synthetic({1, 8, 10, 1.0, 0.0}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(data::gen_synthetic({4, 8, 10, 0.0, 0.0}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(data::gen_synthetic({4, 8, 10, 1.0, 0.6}, 1),
                  std::invalid_argument);
}

TEST_CASE("load_csv: hand-written fixture loads exactly") {
  const std::string path = temp_path("past_fixture.csv");
  {
    std::ofstream out(path);
    out << "label,f0,f1\n";
    out << "5,0.5,-1.25\n";
    out << "9,2,3\n";
    out << "5,-0.0625,4\n";
  }
  const auto dataset = data::load_csv(path, true);
  CHECK(dataset.size() == 3);
  CHECK(dataset.dim() == 2);
  CHECK(dataset.num_classes == 2);
  // Labels {5, 9, 5} remap to {0, 1, 0} by first appearance.
  CHECK(dataset.labels == std::vector<int>{0, 1, 0});
  CHECK(dataset.features(0, 0) == 0.5);
  CHECK(dataset.features(0, 1) == -1.25);
  CHECK(dataset.features(2, 0) == -0.0625);
  std::remove(path.c_str());
}

TEST_CASE("load_csv names the offending row") {
  const std::string path = temp_path("past_ragged.csv");
  {
    std::ofstream out(path);
    out << "1,0.5,2.0\n";
    out << "2,1.0\n";  // ragged
  }
  CHECK_THROWS_WITH_AS(data::load_csv(path, false),
                       doctest::Contains("row 2"), std::runtime_error);
  {
    std::ofstream out(path);
    out << "1,0.5,2.0\n";
    out << "2,abc,2.0\n";
  }
  CHECK_THROWS_WITH_AS(data::load_csv(path, false),
                       doctest::Contains("row 2"), std::runtime_error);
  {
    std::ofstream out(path);
  }
  CHECK_THROWS_AS(data::load_csv(path, false), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("save_csv / load_csv round-trips bit-exactly") {
  Rng rng(31);
  data::Dataset dataset;
  dataset.num_classes = 3;
  dataset.features = Matrix(40, 5);
  dataset.labels.resize(40);
  for (std::size_t i = 0; i < 40; ++i) {
    dataset.labels[i] = static_cast<int>(i % 3);
    for (std::size_t j = 0; j < 5; ++j) {
      // Mix of scales and signs, including subnormal-ish magnitudes.
      dataset.features(i, j) = rng.normal() * std::pow(10.0, rng.uniform(-30, 30));
    }
  }
  const std::string path = temp_path("past_roundtrip.csv");
  data::save_csv(dataset, path);
  const auto reloaded = data::load_csv(path, false);
  CHECK(reloaded.labels == dataset.labels);
  REQUIRE(reloaded.features.data.size() == dataset.features.data.size());
  for (std::size_t i = 0; i < dataset.features.data.size(); ++i) {
    CHECK(reloaded.features.data[i] == dataset.features.data[i]);
  }
  std::remove(path.c_str());
}

TEST_CASE("six_split: equal sizes and remainder rule") {
  data::SyntheticSpec spec{2, 3, 6, 1.0, 0.0};  // N = 12
  const auto dataset = data::gen_synthetic(spec, 3);
  const auto split = data::six_split(dataset, 1);
  CHECK(split.target_train.size() == 2);
  CHECK(split.target_test.size() == 2);
  CHECK(split.target_inference.size() == 2);
  CHECK(split.shadow_train.size() == 2);
  CHECK(split.shadow_test.size() == 2);
  CHECK(split.shadow_inference.size() == 2);

  // N = 13: sizes [3,2,2,2,2,2].
  data::Dataset thirteen = dataset;
  thirteen.features = Matrix(13, 3);
  thirteen.labels.assign(13, 0);
  for (std::size_t i = 0; i < 13; ++i) {
    thirteen.labels[i] = static_cast<int>(i % 2);
    for (std::size_t j = 0; j < 3; ++j) {
      thirteen.features(i, j) = static_cast<double>(i * 3 + j);
    }
  }
  const auto odd = data::six_split(thirteen, 4);
  CHECK(odd.target_train.size() == 3);
  CHECK(odd.target_test.size() == 2);
  CHECK(odd.shadow_inference.size() == 2);
}

TEST_CASE("six_split: subsets are disjoint and exhaustive for any N, seed") {
  for (std::size_t n : {6u, 13u, 100u, 101u}) {
    data::Dataset dataset;
    dataset.num_classes = 2;
    dataset.features = Matrix(n, 1);
    dataset.labels.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      dataset.features(i, 0) = static_cast<double>(i);  // row identity
      dataset.labels[i] = static_cast<int>(i % 2);
    }
    for (std::uint64_t seed : {1ull, 7ull, 123456789ull}) {
      const auto split = data::six_split(dataset, seed);
      std::multiset<double> seen;
      for (const auto* part :
           {&split.target_train, &split.target_test, &split.target_inference,
            &split.shadow_train, &split.shadow_test, &split.shadow_inference}) {
        for (std::size_t i = 0; i < part->size(); ++i) {
          seen.insert(part->features(i, 0));
        }
      }
      REQUIRE(seen.size() == n);
      std::size_t i = 0;
      for (double v : seen) CHECK(v == static_cast<double>(i++));
    }
  }
}

TEST_CASE("six_split: same seed twice gives identical splits") {
  data::SyntheticSpec spec{3, 4, 20, 1.0, 0.0};
  const auto dataset = data::gen_synthetic(spec, 8);
  const auto a = data::six_split(dataset, 77);
  const auto b = data::six_split(dataset, 77);
  CHECK(a.target_train.features.data == b.target_train.features.data);
  CHECK(a.shadow_inference.features.data == b.shadow_inference.features.data);
  CHECK_THROWS_AS(
      data::six_split(data::gen_synthetic({2, 2, 2, 1.0, 0.0}, 1), 1),
      std::invalid_argument);
}

TEST_CASE("batch_indices: permutation chunked into batches") {
  const auto batches = data::batch_indices(23, 5, 9, 0);
  CHECK(batches.size() == 5);
  CHECK(batches.back().size() == 3);  // last partial batch kept
  std::set<std::size_t> seen;
  for (const auto& batch : batches) {
    for (std::size_t idx : batch) {
      CHECK(idx < 23);
      CHECK(seen.insert(idx).second);  // no duplicates
    }
  }
  CHECK(seen.size() == 23);
}

TEST_CASE("batch_indices: keyed by (seed, epoch)") {
  CHECK(data::batch_indices(50, 8, 3, 2) == data::batch_indices(50, 8, 3, 2));
  CHECK(data::batch_indices(50, 8, 3, 2) != data::batch_indices(50, 8, 3, 3));
  CHECK(data::batch_indices(50, 8, 4, 2) != data::batch_indices(50, 8, 3, 2));
}

TEST_CASE("batch_indices: batch_size >= N gives one whole batch") {
  const auto batches = data::batch_indices(7, 100, 1, 0);
  REQUIRE(batches.size() == 1);
  CHECK(batches[0].size() == 7);
  CHECK_THROWS_AS(data::batch_indices(7, 0, 1, 0), std::invalid_argument);
}
