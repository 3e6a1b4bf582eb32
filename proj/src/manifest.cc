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

#include "bsvd/manifest.h"

#include <fstream>
#include <sstream>

#include "bsvd/errors.h"
#include "json.hpp"

namespace bsvd {

namespace {

template <typename T>
void put(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
void get(const nlohmann::json& j, const char* key, std::optional<T>& v) {
  if (j.contains(key) && !j[key].is_null()) v = j[key].get<T>();
}

}  // namespace

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["engine_version"] = engine_version;
  j["command"] = command;
  put(j, "frames", frames);
  put(j, "height", height);
  put(j, "width", width);
  put(j, "pattern", pattern);
  put(j, "seed", seed);
  put(j, "sigma", sigma);
  put(j, "het_a", het_a);
  put(j, "het_b", het_b);
  put(j, "model", model);
  put(j, "weights", weights);
  put(j, "input", input);
  put(j, "mode", mode);
  put(j, "flush", flush);
  put(j, "t_clip", t_clip);
  j["outputs"] = outputs;
  return j.dump(2);
}

RunManifest RunManifest::from_json(const std::string& text) {
  RunManifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.engine_version = j.at("engine_version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    get(j, "frames", m.frames);
    get(j, "height", m.height);
    get(j, "width", m.width);
    get(j, "pattern", m.pattern);
    get(j, "seed", m.seed);
    get(j, "sigma", m.sigma);
    get(j, "het_a", m.het_a);
    get(j, "het_b", m.het_b);
    get(j, "model", m.model);
    get(j, "weights", m.weights);
    get(j, "input", m.input);
    get(j, "mode", m.mode);
    get(j, "flush", m.flush);
    get(j, "t_clip", m.t_clip);
    if (j.contains("outputs")) m.outputs = j["outputs"].get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  return m;
}

void RunManifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write manifest " + path.string());
  out << to_json() << "\n";
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
  return std::filesystem::path(output.string() + ".manifest.json");
}

}  // namespace bsvd
