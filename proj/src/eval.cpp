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

#include "lataug/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace lataug {

ReconstructionReport reconstruction_report(const VaeModel& model,
                                           const std::vector<Utterance>& utterances,
                                           const NormStats& stats, int threads) {
  struct Entry {
    std::string id;
    double sse = 0.0;
    std::int64_t values = 0;
    bool used = false;
  };
  std::vector<Entry> entries(utterances.size());

  parallel_for(static_cast<int>(utterances.size()), threads, [&](int i) {
    const Utterance& utt = utterances[static_cast<std::size_t>(i)];
    Entry& entry = entries[static_cast<std::size_t>(i)];
    entry.id = utt.id;
    const Eigen::MatrixXd normalized = normalize_frames(utt.frames, stats);
    const std::vector<Segment> segments =
        segment_utterance(normalized, utt.id, model.config.segment_len);
    if (segments.empty()) return;
    for (const Segment& seg : segments) {
      const Eigen::MatrixXd recon = reconstruct(model, seg.frames, true, nullptr);
      entry.sse += (recon - seg.frames).squaredNorm();
      entry.values += seg.frames.size();
    }
    entry.used = true;
  });

  ReconstructionReport report;
  double total_sse = 0.0;
  std::int64_t total_values = 0;
  std::vector<double> mses;
  for (const Entry& entry : entries) {
    if (!entry.used) continue;
    ReconstructionReport::PerUtterance row;
    row.id = entry.id;
    row.values = entry.values;
    row.mse = entry.sse / static_cast<double>(entry.values);
    total_sse += entry.sse;
    total_values += entry.values;
    mses.push_back(row.mse);
    report.utterances.push_back(std::move(row));
  }
  if (total_values == 0) throw DataError("reconstruction report: no full segments in corpus");
  report.mean_mse = total_sse / static_cast<double>(total_values);

  std::sort(mses.begin(), mses.end());
  const std::size_t n = mses.size();
  report.median_mse =
      (n % 2 == 1) ? mses[n / 2] : 0.5 * (mses[n / 2 - 1] + mses[n / 2]);
  return report;
}

void write_reconstruction_csv(const ReconstructionReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "id,mse,values\n";
  char buf[64];
  for (const auto& row : report.utterances) {
    std::snprintf(buf, sizeof(buf), "%.17g", row.mse);
    out << row.id << ',' << buf << ',' << row.values << '\n';
  }
  if (!out) throw DataError("failed writing " + path);
}

ChannelGaussian fit_channel_gaussian(const std::vector<Utterance>& utterances) {
  Eigen::Index feat_dim = -1;
  std::int64_t total = 0;
  for (const Utterance& utt : utterances) {
    if (feat_dim < 0 && utt.frames.cols() > 0) feat_dim = utt.frames.cols();
    total += utt.frames.rows();
  }
  if (feat_dim < 0 || total == 0) throw DataError("gaussian fit: corpus has no frames");

  ChannelGaussian fit;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(feat_dim);
  for (const Utterance& utt : utterances) {
    if (utt.frames.rows() == 0) continue;
    if (utt.frames.cols() != feat_dim) {
      throw DataError("gaussian fit: channel count differs at '" + utt.id + "'");
    }
    sum += utt.frames.colwise().sum().transpose();
  }
  fit.mean = sum / static_cast<double>(total);

  Eigen::VectorXd sq = Eigen::VectorXd::Zero(feat_dim);
  for (const Utterance& utt : utterances) {
    if (utt.frames.rows() == 0) continue;
    const Eigen::MatrixXd centered = utt.frames.rowwise() - fit.mean.transpose();
    sq += centered.array().square().colwise().sum().matrix().transpose();
  }
  fit.var = (sq / static_cast<double>(total)).array().max(kVarianceFloor);
  return fit;
}

DomainShiftReport domain_shift_report(const std::vector<Utterance>& corpus_a,
                                      const std::vector<Utterance>& corpus_b) {
  const ChannelGaussian a = fit_channel_gaussian(corpus_a);
  const ChannelGaussian b = fit_channel_gaussian(corpus_b);
  if (a.mean.size() != b.mean.size()) {
    throw DataError("domain shift: corpora have different channel counts");
  }
  DomainShiftReport report;
  report.per_channel.resize(a.mean.size());
  for (Eigen::Index c = 0; c < a.mean.size(); ++c) {
    const double delta2 = (a.mean(c) - b.mean(c)) * (a.mean(c) - b.mean(c));
    // KL(A||B) + KL(B||A); the log-variance terms cancel.
    report.per_channel(c) = 0.5 * ((a.var(c) + delta2) / b.var(c) +
                                   (b.var(c) + delta2) / a.var(c) - 2.0);
  }
  report.score = report.per_channel.sum();
  return report;
}

double domain_shift_score(const std::vector<Utterance>& corpus_a,
                          const std::vector<Utterance>& corpus_b) {
  return domain_shift_report(corpus_a, corpus_b).score;
}

void write_domain_shift_csv(const DomainShiftReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "channel,symmetric_kl\n";
  char buf[64];
  for (Eigen::Index c = 0; c < report.per_channel.size(); ++c) {
    std::snprintf(buf, sizeof(buf), "%.17g", report.per_channel(c));
    out << c << ',' << buf << '\n';
  }
  std::snprintf(buf, sizeof(buf), "%.17g", report.score);
  out << "total," << buf << '\n';
  if (!out) throw DataError("failed writing " + path);
}

}  // namespace lataug
