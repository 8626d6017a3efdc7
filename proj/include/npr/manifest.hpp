// Copyright 2026 the npr-toolkit authors
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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include <json.hpp>

#include "npr/error.hpp"
#include "npr/rng.hpp"
#include "npr/version.hpp"

namespace npr {

/// Reproducibility sidecar: one manifest per artifact-producing run, written
/// beside the outputs. A run is re-creatable from subcommand + flags +
/// the fingerprinted inputs.
struct RunManifest {
  std::string subcommand;
  std::map<std::string, std::string> flags;
  std::map<std::string, std::string> input_hashes;  // path -> fnv1a64 hex
  std::uint64_t seed = 0;
  std::string version = kToolkitVersion;
  std::string started_utc;
  std::string finished_utc;

  void add_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot hash input file: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
      h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
      if (!in) break;
    }
    char hex[20];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    input_hashes[path.string()] = hex;
  }

  void write(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["flags"] = flags;
    j["input_hashes"] = input_hashes;
    j["seed"] = seed;
    j["version"] = version;
    j["started_utc"] = started_utc;
    j["finished_utc"] = finished_utc;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write manifest: " + path.string());
    out << j.dump(2) << '\n';
  }
};

}  // namespace npr
