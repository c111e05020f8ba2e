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

#include "past/experiment/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace past::experiment {

namespace {

constexpr char kMagic[] = "PASTSNAP1";

void write_le_doubles(std::ofstream& out, const std::vector<double>& values) {
  for (double v : values) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof(bits));
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) {
      bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(bytes), 8);
  }
}

std::vector<double> read_le_doubles(std::ifstream& in, std::size_t count) {
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    if (!in) throw std::runtime_error("snapshot: truncated parameter blob");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    }
    double v = 0.0;
    std::memcpy(&v, &bits, sizeof(v));
    values[i] = v;
  }
  return values;
}

}  // namespace

void save_snapshot(const Snapshot& snapshot, const std::string& path) {
  snapshot.spec.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("snapshot: cannot open '" + path + "'");

  nlohmann::json header;
  header["param_count"] = snapshot.params.size();
  header["model"] = {
      {"input_dim", snapshot.spec.input_dim},
      {"hidden", snapshot.spec.layer_widths},
      {"num_classes", snapshot.spec.num_classes},
      {"activation", nn::activation_name(snapshot.spec.activation)},
  };
  nlohmann::json segments = nlohmann::json::array();
  for (const auto& seg : snapshot.params.segments()) {
    segments.push_back(
        {{"name", seg.name}, {"offset", seg.offset}, {"length", seg.length}});
  }
  header["segments"] = segments;

  out << kMagic << '\n' << header.dump() << '\n';
  write_le_doubles(out, snapshot.params.values());
  if (!out) throw std::runtime_error("snapshot: write failed for '" + path + "'");
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("snapshot: cannot open '" + path + "'");

  std::string magic;
  if (!std::getline(in, magic) || magic != kMagic) {
    throw std::runtime_error("snapshot: bad magic in '" + path + "'");
  }
  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw std::runtime_error("snapshot: missing header in '" + path + "'");
  }

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("snapshot: malformed header: " + std::string(e.what()));
  }

  Snapshot snapshot;
  try {
    snapshot.spec.input_dim = header.at("model").at("input_dim").get<int>();
    snapshot.spec.layer_widths =
        header.at("model").at("hidden").get<std::vector<int>>();
    snapshot.spec.num_classes = header.at("model").at("num_classes").get<int>();
    snapshot.spec.activation = nn::parse_activation(
        header.at("model").at("activation").get<std::string>());

    const std::size_t count = header.at("param_count").get<std::size_t>();
    std::vector<nn::Segment> segments;
    for (const auto& seg : header.at("segments")) {
      segments.push_back({seg.at("name").get<std::string>(),
                          seg.at("offset").get<std::size_t>(),
                          seg.at("length").get<std::size_t>()});
    }
    snapshot.params = nn::ParameterStore(read_le_doubles(in, count),
                                         std::move(segments));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("snapshot: incomplete header: " + std::string(e.what()));
  }

  snapshot.spec.validate();
  if (snapshot.params.size() != snapshot.spec.param_count()) {
    throw std::runtime_error("snapshot: parameter count does not match model");
  }
  return snapshot;
}

}  // namespace past::experiment
