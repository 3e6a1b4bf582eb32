// Copyright 2026 The BSVD Stream Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace bsvd {

inline constexpr const char* kEngineVersion = "bsvd-stream 1.0.0";

// Everything needed to re-run a command and check that it reproduces its
// outputs bit for bit.
struct RunManifest {
  std::string engine_version = kEngineVersion;
  std::string command;  // "gen" or "denoise"

  // gen
  std::optional<int> frames;
  std::optional<int> height;
  std::optional<int> width;
  std::optional<std::string> pattern;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma;
  std::optional<double> het_a;
  std::optional<double> het_b;

  // denoise
  std::optional<std::string> model;
  std::optional<std::string> weights;
  std::optional<std::string> input;
  std::optional<std::string> mode;
  std::optional<std::string> flush;
  std::optional<int> t_clip;

  // output path -> FNV-1a digest of its bytes
  std::map<std::string, std::string> outputs;

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);

  void save(const std::filesystem::path& path) const;
  static RunManifest load(const std::filesystem::path& path);
};

std::filesystem::path manifest_path_for(const std::filesystem::path& output);

}  // namespace bsvd
