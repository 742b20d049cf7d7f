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

#ifndef LATAUG_DSP_HPP_
#define LATAUG_DSP_HPP_

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lataug/types.hpp"

namespace lataug {

struct DspConfig {
  int frame_length_ms = 25;
  int frame_shift_ms = 10;
  int n_mels = 40;
  int fft_size = 512;
  int sample_rate = 16000;
  double log_floor = 1e-10;

  int frame_length_samples() const { return sample_rate * frame_length_ms / 1000; }
  int frame_shift_samples() const { return sample_rate * frame_shift_ms / 1000; }
  void validate() const;  // throws DataError on inconsistent settings
};

// In-place iterative radix-2 FFT; x.size() must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& x);

// Symmetric Hamming window 0.54 - 0.46*cos(2*pi*n/(N-1)).
Eigen::VectorXd hamming_window(int length);

// Triangular filters equally spaced on the mel scale from 0 Hz to Nyquist,
// sampled at FFT bin frequencies. Every filter covers at least one bin.
class MelFilterbank {
 public:
  MelFilterbank(int n_mels, int fft_size, double sample_rate);

  // n_mels x (fft_size/2 + 1)
  const Eigen::MatrixXd& weights() const { return weights_; }
  Eigen::VectorXd apply(const Eigen::VectorXd& power_spectrum) const;

  static double hz_to_mel(double hz);
  static double mel_to_hz(double mel);

 private:
  Eigen::MatrixXd weights_;
};

// Per frame: Hamming window, zero-pad to fft_size, power spectrum |X|^2 with
// every bin floored at log_floor, mel filter bank, natural log. Returns a
// T x n_mels matrix with T = floor((len - frame_len)/shift) + 1 (0 when the
// signal is shorter than one frame).
Eigen::MatrixXd extract_fbank(const std::vector<double>& samples, int sample_rate,
                              const DspConfig& config);

inline constexpr int kSegmentLen = 20;

// Non-overlapping consecutive blocks from frame 0; trailing remainder dropped.
std::vector<Segment> segment_utterance(const Eigen::MatrixXd& frames,
                                       const std::string& utterance_id,
                                       int segment_len = kSegmentLen);

struct NormStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;  // floored at 1e-8
};

inline constexpr double kStdFloor = 1e-8;

// Global per-channel statistics over every frame of the corpus (population
// standard deviation). Throws DataError on an empty corpus.
NormStats compute_norm_stats(const std::vector<Utterance>& utterances);

Eigen::MatrixXd normalize_frames(const Eigen::MatrixXd& frames, const NormStats& stats);
Eigen::MatrixXd denormalize_frames(const Eigen::MatrixXd& frames, const NormStats& stats);

// In-place (x - mean)/std over the whole corpus; returns the statistics used.
NormStats normalize_corpus(std::vector<Utterance>& utterances);

void save_norm_stats(const NormStats& stats, const std::string& path);
NormStats load_norm_stats(const std::string& path);

}  // namespace lataug

#endif  // LATAUG_DSP_HPP_
