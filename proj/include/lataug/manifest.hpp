/* Copyright 2026 The Lataug Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef LATAUG_MANIFEST_HPP_
#define LATAUG_MANIFEST_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lataug/types.hpp"

namespace lataug {

// How an augmented utterance was produced; carried on output manifests so
// every generated corpus is traceable to its operation and seed.
struct Provenance {
  std::string operation;               // "reconstruct" | "replace" | "perturb"
  std::optional<std::string> partner_id;
  std::optional<std::string> variant;  // perturbation variant name
  std::optional<double> gamma;
  std::optional<int> rank;
  std::uint64_t seed = 0;
};

struct ManifestEntry {
  std::string id;
  std::optional<std::string> audio_path;   // exactly one of audio_path /
  std::optional<std::string> feature_key;  // feature_key is set
  Domain domain = Domain::kSource;
  std::optional<std::string> transcript;
  std::optional<Provenance> provenance;
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  const ManifestEntry* find(const std::string& id) const;
};

// Parses a JSON-lines manifest. Rejects duplicate ids, unknown domain
// values and entries with neither audio_path nor feature_key; errors name
// the offending line.
Manifest read_manifest(const std::string& path);

// Writes one JSON object per line, entry order preserved.
void write_manifest(const Manifest& manifest, const std::string& path);

}  // namespace lataug

#endif  // LATAUG_MANIFEST_HPP_
