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

#ifndef LATAUG_EVAL_HPP_
#define LATAUG_EVAL_HPP_

#include <string>
#include <vector>

#include "lataug/dsp.hpp"
#include "lataug/model.hpp"

namespace lataug {

struct ReconstructionReport {
  struct PerUtterance {
    std::string id;
    double mse = 0.0;          // normalized feature space
    std::int64_t values = 0;   // frames * channels compared
  };
  std::vector<PerUtterance> utterances;
  double mean_mse = 0.0;    // weighted by compared values
  double median_mse = 0.0;  // over utterances
};

// Deterministic (mean-encoded) reconstruction error over every full segment
// of every utterance; frames are raw and normalized internally. Utterances
// shorter than one segment are skipped.
ReconstructionReport reconstruction_report(const VaeModel& model,
                                           const std::vector<Utterance>& utterances,
                                           const NormStats& stats, int threads = 1);

void write_reconstruction_csv(const ReconstructionReport& report, const std::string& path);

// Per-channel diagonal-Gaussian fit (population variance, floored at 1e-8).
struct ChannelGaussian {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

ChannelGaussian fit_channel_gaussian(const std::vector<Utterance>& utterances);

inline constexpr double kVarianceFloor = 1e-8;

struct DomainShiftReport {
  double score = 0.0;           // sum of per-channel values
  Eigen::VectorXd per_channel;  // symmetric KL contribution per channel
};

// Symmetric KL (both directions summed) between the per-channel Gaussian
// fits of two corpora, summed over channels: zero iff the fits coincide,
// and 1.0 per unit-variance channel displaced by one standard deviation.
DomainShiftReport domain_shift_report(const std::vector<Utterance>& corpus_a,
                                      const std::vector<Utterance>& corpus_b);

double domain_shift_score(const std::vector<Utterance>& corpus_a,
                          const std::vector<Utterance>& corpus_b);

void write_domain_shift_csv(const DomainShiftReport& report, const std::string& path);

}  // namespace lataug

#endif  // LATAUG_EVAL_HPP_
