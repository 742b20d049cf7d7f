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

#ifndef LATAUG_LATENT_HPP_
#define LATAUG_LATENT_HPP_

#include <string>
#include <utility>
#include <vector>

#include "lataug/model.hpp"

namespace lataug {

// Mean of per-segment posterior means over one utterance.
struct NuisanceRepresentation {
  std::string utterance_id;
  Eigen::VectorXd mean;  // D
  int segment_count = 0;
};

// PCA of per-utterance representations. Columns of eigenvectors are the
// principal directions, orthonormal, paired with descending nonnegative
// eigenvalues. Sign convention: each column's largest-magnitude coordinate
// is positive.
struct NuisanceSubspace {
  Eigen::VectorXd center;        // D
  Eigen::MatrixXd eigenvectors;  // D x D
  Eigen::VectorXd eigenvalues;   // D, descending, clamped at 0
  int sample_count = 0;          // representations used for the fit

  int dim() const { return static_cast<int>(center.size()); }
};

// Mean of the posterior means of every code whose label equals r. Throws
// DataError when no code carries the label.
Eigen::VectorXd latent_attribute_representation(const std::vector<LatentCode>& codes,
                                                const std::vector<std::string>& labels,
                                                const std::string& r);

// Specialization to one utterance: average the encoder means of its
// segments. Requires at least one segment.
NuisanceRepresentation nuisance_representation(const VaeModel& model,
                                               const std::vector<Segment>& utterance_segments);

// One representation per utterance with at least one full segment, in input
// order; utterances too short to segment are skipped. Frames must already be
// normalized.
std::vector<NuisanceRepresentation> corpus_nuisance_representations(
    const VaeModel& model, const std::vector<Utterance>& utterances, int threads = 1);

// Cyclic Jacobi eigendecomposition of a symmetric matrix; deterministic,
// converges when the off-diagonal Frobenius mass falls below
// tol * (1 + ||A||_F). Eigenvalues/vectors are returned unsorted.
void jacobi_eigen_symmetric(Eigen::MatrixXd a, Eigen::VectorXd* eigenvalues,
                            Eigen::MatrixXd* eigenvectors, double tol = 1e-12,
                            int max_sweeps = 100);

// Centered PCA with the biased (divide-by-M) covariance. Needs M >= 2 finite
// representations. Eigenvalues are sorted descending with a stable tie
// order and clamped at zero; eigenvector signs follow the convention above.
NuisanceSubspace fit_nuisance_subspace(const std::vector<NuisanceRepresentation>& representations);

// Descending (d, eigenvalue) pairs, d starting at 1.
std::vector<std::pair<int, double>> eigen_spectrum(const NuisanceSubspace& subspace);

void write_eigen_spectrum_csv(const NuisanceSubspace& subspace, const std::string& path);

}  // namespace lataug

#endif  // LATAUG_LATENT_HPP_
