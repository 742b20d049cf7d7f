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

#ifndef LATAUG_FEATURE_ARCHIVE_HPP_
#define LATAUG_FEATURE_ARCHIVE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "lataug/manifest.hpp"
#include "lataug/types.hpp"

// Binary feature archive, little-endian throughout:
//   magic "VFA1", u32 version=1, u32 F, u32 frame_shift_ms, u32 frame_length_ms
//   per record: u32 id_len, id bytes, u32 T, T*F f32 row-major
// Feature values are stored as f32; the in-memory matrices are double, so a
// round trip through an archive is bit-exact at f32 resolution.

namespace lataug {

struct ArchiveHeader {
  std::uint32_t feature_dim = 0;
  std::uint32_t frame_shift_ms = 10;
  std::uint32_t frame_length_ms = 25;
};

struct FeatureArchive {
  ArchiveHeader header;
  std::vector<Utterance> utterances;  // record order = manifest order
};

inline constexpr std::uint64_t kDefaultRecordByteCap = 1ull << 30;  // 1 GiB

// Requires uniform F across utterances (error otherwise). Domain and
// transcript are not stored; they live in the accompanying manifest.
void write_feature_archive(const FeatureArchive& archive, const std::string& path);

// Record id/T/F lengths are validated against record_byte_cap before any
// allocation.
FeatureArchive read_feature_archive(const std::string& path,
                                    std::uint64_t record_byte_cap = kDefaultRecordByteCap);

// Reattaches domain/transcript from a manifest to archive records (matched
// by id; entries missing from the manifest are an error).
void apply_manifest_metadata(FeatureArchive& archive, const Manifest& manifest);

// A feature archive paired with its manifest; utterances carry the
// domain/transcript metadata and appear in archive record order.
struct Corpus {
  std::vector<Utterance> utterances;
  Manifest manifest;
  ArchiveHeader header;
};

Corpus load_corpus(const std::string& archive_path, const std::string& manifest_path,
                   std::uint64_t record_byte_cap = kDefaultRecordByteCap);
void save_corpus(const Corpus& corpus, const std::string& archive_path,
                 const std::string& manifest_path);

}  // namespace lataug

#endif  // LATAUG_FEATURE_ARCHIVE_HPP_
