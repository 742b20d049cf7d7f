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

#include "lataug/feature_archive.hpp"

#include <unordered_map>

#include "lataug/common.hpp"
#include "lataug/manifest.hpp"

namespace lataug {

namespace {
constexpr char kMagic[4] = {'V', 'F', 'A', '1'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_feature_archive(const FeatureArchive& archive, const std::string& path) {
  const std::uint32_t feat_dim = archive.header.feature_dim;
  std::string buf;
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u32(buf, feat_dim);
  put_u32(buf, archive.header.frame_shift_ms);
  put_u32(buf, archive.header.frame_length_ms);
  for (const Utterance& utt : archive.utterances) {
    if (static_cast<std::uint32_t>(utt.frames.cols()) != feat_dim) {
      throw DataError("feature archive: utterance '" + utt.id + "' has " +
                      std::to_string(utt.frames.cols()) + " channels, header says " +
                      std::to_string(feat_dim));
    }
    put_u32(buf, static_cast<std::uint32_t>(utt.id.size()));
    buf.append(utt.id);
    put_u32(buf, static_cast<std::uint32_t>(utt.frames.rows()));
    for (Eigen::Index t = 0; t < utt.frames.rows(); ++t) {
      for (Eigen::Index f = 0; f < utt.frames.cols(); ++f) {
        put_f32(buf, static_cast<float>(utt.frames(t, f)));
      }
    }
  }
  write_file_bytes(path, buf);
}

FeatureArchive read_feature_archive(const std::string& path, std::uint64_t record_byte_cap) {
  const std::string bytes = read_file_bytes(path);
  ByteReader reader(bytes, path);

  const std::string magic = reader.get_bytes(4);
  if (magic != std::string(kMagic, 4)) {
    throw DataError(path + ": bad magic, not a feature archive");
  }
  const std::uint32_t version = reader.get_u32();
  if (version != kVersion) {
    throw DataError(path + ": unsupported archive version " + std::to_string(version));
  }

  FeatureArchive archive;
  archive.header.feature_dim = reader.get_u32();
  archive.header.frame_shift_ms = reader.get_u32();
  archive.header.frame_length_ms = reader.get_u32();
  if (archive.header.feature_dim == 0) {
    throw DataError(path + ": header feature dimension is zero");
  }

  const std::uint64_t feat_dim = archive.header.feature_dim;
  while (!reader.done()) {
    const std::uint32_t id_len = reader.get_u32();
    if (id_len > record_byte_cap) {
      throw DataError(path + ": record id length " + std::to_string(id_len) +
                      " exceeds allocation cap");
    }
    const std::string id = reader.get_bytes(id_len);
    const std::uint32_t num_frames = reader.get_u32();
    const std::uint64_t payload = static_cast<std::uint64_t>(num_frames) * feat_dim * 4u;
    if (payload > record_byte_cap) {
      throw DataError(path + ": record '" + id + "' payload of " + std::to_string(payload) +
                      " bytes exceeds allocation cap");
    }
    Utterance utt;
    utt.id = id;
    utt.frames.resize(num_frames, static_cast<Eigen::Index>(feat_dim));
    for (std::uint32_t t = 0; t < num_frames; ++t) {
      for (std::uint64_t f = 0; f < feat_dim; ++f) {
        utt.frames(t, static_cast<Eigen::Index>(f)) = static_cast<double>(reader.get_f32());
      }
    }
    archive.utterances.push_back(std::move(utt));
  }
  return archive;
}

void apply_manifest_metadata(FeatureArchive& archive, const Manifest& manifest) {
  std::unordered_map<std::string, const ManifestEntry*> by_id;
  for (const ManifestEntry& entry : manifest.entries) {
    by_id.emplace(entry.id, &entry);
  }
  for (Utterance& utt : archive.utterances) {
    auto it = by_id.find(utt.id);
    if (it == by_id.end()) {
      throw DataError("feature archive record '" + utt.id + "' has no manifest entry");
    }
    utt.domain = it->second->domain;
    utt.transcript = it->second->transcript;
  }
}

Corpus load_corpus(const std::string& archive_path, const std::string& manifest_path,
                   std::uint64_t record_byte_cap) {
  FeatureArchive archive = read_feature_archive(archive_path, record_byte_cap);
  Corpus corpus;
  corpus.manifest = read_manifest(manifest_path);
  apply_manifest_metadata(archive, corpus.manifest);
  corpus.header = archive.header;
  corpus.utterances = std::move(archive.utterances);
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& archive_path,
                 const std::string& manifest_path) {
  FeatureArchive archive;
  archive.header = corpus.header;
  if (archive.header.feature_dim == 0) {
    for (const Utterance& utt : corpus.utterances) {
      if (utt.frames.cols() > 0) {
        archive.header.feature_dim = static_cast<std::uint32_t>(utt.frames.cols());
        break;
      }
    }
  }
  archive.utterances = corpus.utterances;
  write_feature_archive(archive, archive_path);
  write_manifest(corpus.manifest, manifest_path);
}

}  // namespace lataug
