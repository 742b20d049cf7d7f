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

#ifndef LATAUG_WAV_HPP_
#define LATAUG_WAV_HPP_

#include <string>
#include <vector>

namespace lataug {

struct WavData {
  std::vector<double> samples;  // in [-1, 1], PCM16 values scaled by 1/32768
  int sample_rate = 0;
};

// Reads a mono PCM16 RIFF/WAVE file. Rejects other encodings, channel
// counts and truncated files.
WavData read_wav(const std::string& path);

// Writes mono PCM16; samples are clamped to [-1, 1] and quantized with
// round-to-nearest so that read_wav(write_wav(x)) is the PCM16 grid value.
void write_wav(const std::string& path, const std::vector<double>& samples,
               int sample_rate);

}  // namespace lataug

#endif  // LATAUG_WAV_HPP_
