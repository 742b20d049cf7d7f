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

#include "lataug/latent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "lataug/dsp.hpp"

namespace lataug {

Eigen::VectorXd latent_attribute_representation(const std::vector<LatentCode>& codes,
                                                const std::vector<std::string>& labels,
                                                const std::string& r) {
  if (codes.size() != labels.size()) {
    throw DataError("attribute representation: codes and labels differ in length");
  }
  Eigen::VectorXd sum;
  std::int64_t count = 0;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (labels[i] != r) continue;
    if (count == 0) {
      sum = codes[i].mean;
    } else {
      sum += codes[i].mean;
    }
    ++count;
  }
  if (count == 0) throw DataError("attribute representation: no segment labeled '" + r + "'");
  return sum / static_cast<double>(count);
}

NuisanceRepresentation nuisance_representation(const VaeModel& model,
                                               const std::vector<Segment>& utterance_segments) {
  if (utterance_segments.empty()) {
    throw DataError("nuisance representation: utterance has no segments");
  }
  NuisanceRepresentation rep;
  rep.utterance_id = utterance_segments.front().utterance_id;
  rep.segment_count = static_cast<int>(utterance_segments.size());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(model.config.latent_dim);
  Eigen::VectorXd mean, logvar;
  for (const Segment& seg : utterance_segments) {
    encode(model, seg.frames, &mean, &logvar);
    sum += mean;
  }
  rep.mean = sum / static_cast<double>(utterance_segments.size());
  return rep;
}

std::vector<NuisanceRepresentation> corpus_nuisance_representations(
    const VaeModel& model, const std::vector<Utterance>& utterances, int threads) {
  std::vector<std::vector<Segment>> per_utt(utterances.size());
  std::vector<int> with_segments;
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    per_utt[i] = segment_utterance(utterances[i].frames, utterances[i].id,
                                   model.config.segment_len);
    if (!per_utt[i].empty()) with_segments.push_back(static_cast<int>(i));
  }
  std::vector<NuisanceRepresentation> reps(with_segments.size());
  parallel_for(static_cast<int>(with_segments.size()), threads, [&](int j) {
    reps[static_cast<std::size_t>(j)] = nuisance_representation(
        model, per_utt[static_cast<std::size_t>(with_segments[static_cast<std::size_t>(j)])]);
  });
  return reps;
}

void jacobi_eigen_symmetric(Eigen::MatrixXd a, Eigen::VectorXd* eigenvalues,
                            Eigen::MatrixXd* eigenvectors, double tol, int max_sweeps) {
  const Eigen::Index n = a.rows();
  if (n != a.cols()) throw NumericError("jacobi: matrix must be square");
  if (!a.allFinite()) throw NumericError("jacobi: non-finite matrix entry");

  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = 1.0 + a.norm();

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(2.0 * off) < tol * scale) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  *eigenvalues = a.diagonal();
  *eigenvectors = std::move(v);
}

NuisanceSubspace fit_nuisance_subspace(
    const std::vector<NuisanceRepresentation>& representations) {
  const std::size_t m = representations.size();
  if (m < 2) {
    throw DataError("subspace fit: need at least 2 representations, have " + std::to_string(m));
  }
  const Eigen::Index dim = representations.front().mean.size();
  for (const NuisanceRepresentation& rep : representations) {
    if (rep.mean.size() != dim) throw DataError("subspace fit: dimension mismatch");
    if (!rep.mean.allFinite()) {
      throw DataError("subspace fit: non-finite representation for '" + rep.utterance_id + "'");
    }
  }

  NuisanceSubspace subspace;
  subspace.sample_count = static_cast<int>(m);
  subspace.center = Eigen::VectorXd::Zero(dim);
  for (const NuisanceRepresentation& rep : representations) subspace.center += rep.mean;
  subspace.center /= static_cast<double>(m);

  Eigen::MatrixXd centered(static_cast<Eigen::Index>(m), dim);
  for (std::size_t i = 0; i < m; ++i) {
    centered.row(static_cast<Eigen::Index>(i)) =
        (representations[i].mean - subspace.center).transpose();
  }
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(m);

  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  jacobi_eigen_symmetric(cov, &values, &vectors);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });

  subspace.eigenvalues.resize(dim);
  subspace.eigenvectors.resize(dim, dim);
  for (Eigen::Index d = 0; d < dim; ++d) {
    subspace.eigenvalues(d) = std::max(0.0, values(order[static_cast<std::size_t>(d)]));
    Eigen::VectorXd col = vectors.col(order[static_cast<std::size_t>(d)]);
    Eigen::Index peak = 0;
    col.cwiseAbs().maxCoeff(&peak);
    if (col(peak) < 0.0) col = -col;
    subspace.eigenvectors.col(d) = col;
  }
  return subspace;
}

std::vector<std::pair<int, double>> eigen_spectrum(const NuisanceSubspace& subspace) {
  std::vector<std::pair<int, double>> out;
  out.reserve(static_cast<std::size_t>(subspace.eigenvalues.size()));
  for (Eigen::Index d = 0; d < subspace.eigenvalues.size(); ++d) {
    out.emplace_back(static_cast<int>(d) + 1, subspace.eigenvalues(d));
  }
  return out;
}

void write_eigen_spectrum_csv(const NuisanceSubspace& subspace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "d,eigenvalue\n";
  char buf[64];
  for (const auto& [d, value] : eigen_spectrum(subspace)) {
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out << d << ',' << buf << '\n';
  }
  if (!out) throw DataError("failed writing " + path);
}

}  // namespace lataug
