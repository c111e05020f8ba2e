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

#ifndef PAST_EXPERIMENT_SNAPSHOT_HPP_
#define PAST_EXPERIMENT_SNAPSHOT_HPP_

#include <string>

#include "past/nn/model.hpp"

namespace past::experiment {

struct Snapshot {
  nn::ModelSpec spec;
  nn::ParameterStore params;
};

/// Snapshot file format: a magic line, a one-line JSON header carrying the
/// model spec and the segment manifest, then the raw parameter vector as
/// little-endian 64-bit floats.
void save_snapshot(const Snapshot& snapshot, const std::string& path);
Snapshot load_snapshot(const std::string& path);

}  // namespace past::experiment

#endif  // PAST_EXPERIMENT_SNAPSHOT_HPP_
