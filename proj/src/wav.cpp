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

#include "lataug/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "lataug/common.hpp"

namespace lataug {

namespace {

constexpr std::uint16_t kFormatPcm = 1;

std::uint16_t get_u16(ByteReader& r) {
  // fmt fields are 16-bit; compose from a byte pair.
  const std::string b = r.get_bytes(2);
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[0]) |
                                    (static_cast<unsigned char>(b[1]) << 8));
}

}  // namespace

WavData read_wav(const std::string& path) {
  const std::string bytes = read_file_bytes(path);
  ByteReader r(bytes, path);

  if (r.get_bytes(4) != "RIFF") throw DataError(path + ": not a RIFF file");
  r.get_u32();  // declared riff size; trust chunk sizes instead
  if (r.get_bytes(4) != "WAVE") throw DataError(path + ": not a WAVE file");

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0, format = 0;
  std::uint32_t sample_rate = 0;
  WavData wav;
  bool have_data = false;

  while (r.remaining() >= 8) {
    const std::string chunk_id = r.get_bytes(4);
    const std::uint32_t chunk_size = r.get_u32();
    if (chunk_id == "fmt ") {
      if (chunk_size < 16) throw DataError(path + ": fmt chunk too small");
      const std::size_t before = r.remaining();
      format = get_u16(r);
      channels = get_u16(r);
      sample_rate = r.get_u32();
      r.get_u32();  // byte rate
      get_u16(r);   // block align
      bits = get_u16(r);
      const std::size_t consumed = before - r.remaining();
      r.get_bytes(chunk_size - consumed);
      have_fmt = true;
    } else if (chunk_id == "data") {
      if (!have_fmt) throw DataError(path + ": data chunk before fmt chunk");
      if (format != kFormatPcm) {
        throw DataError(path + ": unsupported encoding (PCM only, got format tag " +
                        std::to_string(format) + ")");
      }
      if (channels != 1) {
        throw DataError(path + ": unsupported channel count " +
                        std::to_string(channels) + " (mono only)");
      }
      if (bits != 16) {
        throw DataError(path + ": unsupported sample width " +
                        std::to_string(bits) + " (16-bit only)");
      }
      if (chunk_size % 2 != 0) throw DataError(path + ": odd PCM16 data size");
      const std::string data = r.get_bytes(chunk_size);
      const std::size_t n = chunk_size / 2;
      wav.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::int16_t s = static_cast<std::int16_t>(
            static_cast<unsigned char>(data[2 * i]) |
            (static_cast<unsigned char>(data[2 * i + 1]) << 8));
        wav.samples[i] = static_cast<double>(s) / 32768.0;
      }
      wav.sample_rate = static_cast<int>(sample_rate);
      have_data = true;
    } else {
      r.get_bytes(chunk_size);  // skip LIST, fact, ...
    }
    if (chunk_size % 2 == 1 && r.remaining() > 0) r.get_bytes(1);  // pad byte
  }

  if (!have_data) throw DataError(path + ": no data chunk");
  return wav;
}

void write_wav(const std::string& path, const std::vector<double>& samples,
               int sample_rate) {
  const std::uint32_t data_size = static_cast<std::uint32_t>(samples.size() * 2);
  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put_u32(out, 36 + data_size);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  auto put_u16 = [&out](std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
  };
  put_u16(kFormatPcm);
  put_u16(1);  // mono
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  put_u16(2);   // block align
  put_u16(16);  // bits per sample
  out += "data";
  put_u32(out, data_size);
  for (double x : samples) {
    const long q = std::lrint(std::clamp(x, -1.0, 1.0) * 32768.0);
    const std::int16_t s = static_cast<std::int16_t>(std::clamp<long>(q, -32768, 32767));
    out.push_back(static_cast<char>(s & 0xff));
    out.push_back(static_cast<char>((s >> 8) & 0xff));
  }
  write_file_bytes(path, out);
}

}  // namespace lataug
