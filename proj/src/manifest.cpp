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

#include "lataug/manifest.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "lataug/common.hpp"

namespace lataug {

using nlohmann::json;

std::string domain_name(Domain d) {
  return d == Domain::kSource ? "source" : "target";
}

Domain parse_domain(const std::string& name) {
  if (name == "source") return Domain::kSource;
  if (name == "target") return Domain::kTarget;
  throw DataError("unknown domain value \"" + name +
                  "\" (expected \"source\" or \"target\")");
}

const ManifestEntry* Manifest::find(const std::string& id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

namespace {

Provenance parse_provenance(const json& j, const std::string& where) {
  Provenance p;
  if (!j.is_object()) throw DataError(where + ": provenance must be an object");
  p.operation = j.at("operation").get<std::string>();
  if (j.contains("partner_id")) p.partner_id = j["partner_id"].get<std::string>();
  if (j.contains("variant")) p.variant = j["variant"].get<std::string>();
  if (j.contains("gamma")) p.gamma = j["gamma"].get<double>();
  if (j.contains("rank")) p.rank = j["rank"].get<int>();
  if (j.contains("seed")) p.seed = j["seed"].get<std::uint64_t>();
  return p;
}

json provenance_to_json(const Provenance& p) {
  json j;
  j["operation"] = p.operation;
  if (p.partner_id) j["partner_id"] = *p.partner_id;
  if (p.variant) j["variant"] = *p.variant;
  if (p.gamma) j["gamma"] = *p.gamma;
  if (p.rank) j["rank"] = *p.rank;
  j["seed"] = p.seed;
  return j;
}

}  // namespace

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);

  Manifest manifest;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);

    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": JSON parse error: " + e.what());
    }
    if (!j.is_object()) throw DataError(where + ": expected a JSON object");

    ManifestEntry e;
    try {
      if (!j.contains("id") || !j["id"].is_string()) {
        throw DataError(where + ": missing required string field \"id\"");
      }
      e.id = j["id"].get<std::string>();
      if (e.id.empty()) throw DataError(where + ": id must be non-empty");
      if (!seen_ids.insert(e.id).second) {
        throw DataError(where + ": duplicate id \"" + e.id + "\"");
      }

      if (!j.contains("domain") || !j["domain"].is_string()) {
        throw DataError(where + ": missing required string field \"domain\"");
      }
      e.domain = parse_domain(j["domain"].get<std::string>());

      if (j.contains("audio_path")) e.audio_path = j["audio_path"].get<std::string>();
      if (j.contains("feature_key")) e.feature_key = j["feature_key"].get<std::string>();
      if (!e.audio_path && !e.feature_key) {
        throw DataError(where + ": entry needs either \"audio_path\" or \"feature_key\"");
      }
      if (e.audio_path && e.feature_key) {
        throw DataError(where + ": \"audio_path\" and \"feature_key\" are exclusive");
      }

      if (j.contains("transcript")) e.transcript = j["transcript"].get<std::string>();
      if (j.contains("provenance")) e.provenance = parse_provenance(j["provenance"], where);
    } catch (const json::exception& err) {
      throw DataError(where + ": malformed entry: " + err.what());
    } catch (const DataError& err) {
      const std::string msg = err.what();
      throw DataError(msg.rfind(where, 0) == 0 ? msg : where + ": " + msg);
    }

    manifest.entries.push_back(std::move(e));
  }
  if (in.bad()) throw DataError("read failed: " + path);
  return manifest;
}

void write_manifest(const Manifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open manifest for writing: " + path);
  for (const auto& e : manifest.entries) {
    json j;
    j["id"] = e.id;
    j["domain"] = domain_name(e.domain);
    if (e.audio_path) j["audio_path"] = *e.audio_path;
    if (e.feature_key) j["feature_key"] = *e.feature_key;
    if (e.transcript) j["transcript"] = *e.transcript;
    if (e.provenance) j["provenance"] = provenance_to_json(*e.provenance);
    out << j.dump() << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace lataug
