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

#include "lataug/dsp.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lataug/common.hpp"

namespace lataug {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void DspConfig::validate() const {
  if (frame_shift_ms <= 0 || frame_length_ms <= frame_shift_ms) {
    throw DataError("dsp config: need frame_length_ms > frame_shift_ms > 0");
  }
  if (sample_rate <= 0) throw DataError("dsp config: sample_rate must be positive");
  if (fft_size <= 0 || (fft_size & (fft_size - 1)) != 0) {
    throw DataError("dsp config: fft_size must be a power of two");
  }
  if (n_mels <= 0 || n_mels > fft_size / 2) {
    throw DataError("dsp config: need 0 < n_mels <= fft_size/2");
  }
  if (fft_size < frame_length_samples()) {
    throw DataError("dsp config: fft_size smaller than the analysis frame");
  }
  if (!(log_floor > 0.0)) throw DataError("dsp config: log_floor must be positive");
}

void fft_radix2(std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw DataError("fft: length must be a nonzero power of two");
  }
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wn(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = x[i + k];
        const std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wn;
      }
    }
  }
}

Eigen::VectorXd hamming_window(int length) {
  Eigen::VectorXd w(length);
  if (length == 1) {
    w(0) = 1.0;
    return w;
  }
  for (int n = 0; n < length; ++n) {
    w(n) = 0.54 - 0.46 * std::cos(2.0 * kPi * n / (length - 1));
  }
  return w;
}

double MelFilterbank::hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double MelFilterbank::mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank::MelFilterbank(int n_mels, int fft_size, double sample_rate) {
  const int n_bins = fft_size / 2 + 1;
  weights_ = Eigen::MatrixXd::Zero(n_mels, n_bins);

  const double high_mel = hz_to_mel(sample_rate / 2.0);
  std::vector<double> hz_points(static_cast<std::size_t>(n_mels) + 2);
  for (int j = 0; j < n_mels + 2; ++j) {
    hz_points[j] = mel_to_hz(high_mel * j / (n_mels + 1));
  }

  for (int m = 0; m < n_mels; ++m) {
    const double f_lo = hz_points[m];
    const double f_center = hz_points[m + 1];
    const double f_hi = hz_points[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = k * sample_rate / fft_size;
      if (f > f_lo && f < f_center) {
        weights_(m, k) = (f - f_lo) / (f_center - f_lo);
      } else if (f >= f_center && f <= f_hi) {
        weights_(m, k) = (f_hi - f) / (f_hi - f_center);
      }
    }
    if (weights_.row(m).sum() <= 0.0) {
      throw DataError("mel filter bank: filter " + std::to_string(m) +
                      " covers no FFT bin; increase fft_size or reduce n_mels");
    }
  }
}

Eigen::VectorXd MelFilterbank::apply(const Eigen::VectorXd& power_spectrum) const {
  if (power_spectrum.size() != weights_.cols()) {
    throw DataError("mel filter bank: power spectrum size mismatch");
  }
  return weights_ * power_spectrum;
}

Eigen::MatrixXd extract_fbank(const std::vector<double>& samples, int sample_rate,
                              const DspConfig& config) {
  config.validate();
  if (samples.empty()) throw DataError("extract_fbank: empty signal");
  if (sample_rate != config.sample_rate) {
    throw DataError("extract_fbank: signal sample rate " + std::to_string(sample_rate) +
                    " does not match configured " + std::to_string(config.sample_rate));
  }
  for (double s : samples) {
    if (!std::isfinite(s)) throw DataError("extract_fbank: non-finite sample value");
  }

  const int frame_len = config.frame_length_samples();
  const int shift = config.frame_shift_samples();
  const int n_bins = config.fft_size / 2 + 1;
  const std::int64_t len = static_cast<std::int64_t>(samples.size());
  const std::int64_t num_frames = len >= frame_len ? (len - frame_len) / shift + 1 : 0;

  Eigen::MatrixXd out(num_frames, config.n_mels);
  if (num_frames == 0) return out;

  const Eigen::VectorXd window = hamming_window(frame_len);
  const MelFilterbank bank(config.n_mels, config.fft_size, config.sample_rate);

  std::vector<std::complex<double>> spectrum(config.fft_size);
  Eigen::VectorXd power(n_bins);
  for (std::int64_t t = 0; t < num_frames; ++t) {
    const std::int64_t start = t * shift;
    for (int n = 0; n < frame_len; ++n) {
      spectrum[n] = std::complex<double>(samples[start + n] * window(n), 0.0);
    }
    for (int n = frame_len; n < config.fft_size; ++n) spectrum[n] = {0.0, 0.0};
    fft_radix2(spectrum);
    for (int k = 0; k < n_bins; ++k) {
      power(k) = std::max(std::norm(spectrum[k]), config.log_floor);
    }
    out.row(t) = bank.apply(power).array().log().transpose();
  }
  return out;
}

std::vector<Segment> segment_utterance(const Eigen::MatrixXd& frames,
                                       const std::string& utterance_id, int segment_len) {
  if (segment_len <= 0) throw DataError("segment_utterance: segment length must be positive");
  const Eigen::Index count = frames.rows() / segment_len;
  std::vector<Segment> segments;
  segments.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) {
    Segment seg;
    seg.frames = frames.middleRows(i * segment_len, segment_len);
    seg.utterance_id = utterance_id;
    seg.index_in_utterance = static_cast<int>(i);
    segments.push_back(std::move(seg));
  }
  return segments;
}

NormStats compute_norm_stats(const std::vector<Utterance>& utterances) {
  Eigen::Index feat_dim = -1;
  std::int64_t total_frames = 0;
  for (const Utterance& utt : utterances) {
    if (feat_dim < 0 && utt.frames.cols() > 0) feat_dim = utt.frames.cols();
    total_frames += utt.frames.rows();
  }
  if (feat_dim < 0 || total_frames == 0) {
    throw DataError("normalization: corpus has no frames");
  }

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(feat_dim);
  for (const Utterance& utt : utterances) {
    if (utt.frames.rows() > 0 && utt.frames.cols() != feat_dim) {
      throw DataError("normalization: utterance '" + utt.id + "' channel count differs");
    }
    sum += utt.frames.colwise().sum().transpose();
  }
  NormStats stats;
  stats.mean = sum / static_cast<double>(total_frames);

  Eigen::VectorXd sq = Eigen::VectorXd::Zero(feat_dim);
  for (const Utterance& utt : utterances) {
    if (utt.frames.rows() == 0) continue;
    const Eigen::MatrixXd centered = utt.frames.rowwise() - stats.mean.transpose();
    sq += centered.array().square().colwise().sum().matrix().transpose();
  }
  stats.std = (sq / static_cast<double>(total_frames)).array().sqrt().max(kStdFloor);
  return stats;
}

Eigen::MatrixXd normalize_frames(const Eigen::MatrixXd& frames, const NormStats& stats) {
  return ((frames.rowwise() - stats.mean.transpose()).array().rowwise() /
          stats.std.transpose().array())
      .matrix();
}

Eigen::MatrixXd denormalize_frames(const Eigen::MatrixXd& frames, const NormStats& stats) {
  return ((frames.array().rowwise() * stats.std.transpose().array()).matrix().rowwise() +
          stats.mean.transpose());
}

NormStats normalize_corpus(std::vector<Utterance>& utterances) {
  NormStats stats = compute_norm_stats(utterances);
  for (Utterance& utt : utterances) {
    if (utt.frames.rows() > 0) utt.frames = normalize_frames(utt.frames, stats);
  }
  return stats;
}

void save_norm_stats(const NormStats& stats, const std::string& path) {
  nlohmann::json j;
  j["mean"] = std::vector<double>(stats.mean.data(), stats.mean.data() + stats.mean.size());
  j["std"] = std::vector<double>(stats.std.data(), stats.std.data() + stats.std.size());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw DataError("failed writing " + path);
}

NormStats load_norm_stats(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  if (!j.contains("mean") || !j.contains("std")) {
    throw DataError(path + ": missing mean/std fields");
  }
  const auto mean = j["mean"].get<std::vector<double>>();
  const auto stdv = j["std"].get<std::vector<double>>();
  if (mean.size() != stdv.size() || mean.empty()) {
    throw DataError(path + ": inconsistent statistics lengths");
  }
  NormStats stats;
  stats.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  stats.std = Eigen::Map<const Eigen::VectorXd>(stdv.data(), static_cast<Eigen::Index>(stdv.size()));
  return stats;
}

}  // namespace lataug
