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

#ifndef LATAUG_AUGMENT_HPP_
#define LATAUG_AUGMENT_HPP_

#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "lataug/dsp.hpp"
#include "lataug/feature_archive.hpp"
#include "lataug/latent.hpp"
#include "lataug/model.hpp"

// Encode -> modify latents uniformly across an utterance -> decode. Two
// modification families: replacing the utterance's nuisance representation
// with one drawn from a domain pool, and adding one random vector sampled
// from the fitted nuisance subspace. Reconstruction (no modification) is the
// baseline through the same pipeline.

namespace lataug {

enum class PerturbVariant { kSoft, kUniform, kReverse, kHard };

std::string perturb_variant_name(PerturbVariant v);
PerturbVariant parse_perturb_variant(const std::string& name);  // throws DataError

struct PerturbationSpec {
  PerturbVariant variant = PerturbVariant::kSoft;
  double gamma = 1.0;  // perturbation ratio, >= 0
  int rank = 1;        // top-k directions, hard variant only
  std::uint64_t seed = 0;
};

struct ReplacementSpec {
  Domain pool = Domain::kTarget;  // draw partners from this domain
  std::uint64_t seed = 0;
};

struct ReconstructSpec {
  std::uint64_t seed = 0;
};

using AugmentMode = std::variant<ReconstructSpec, ReplacementSpec, PerturbationSpec>;

// Shifts every latent by the same (mu_tar - mu_src). An exactly zero shift
// returns the inputs untouched, so self-replacement is an exact identity.
std::vector<Eigen::VectorXd> replace_nuisance(const std::vector<Eigen::VectorXd>& z_list,
                                              const Eigen::VectorXd& mu_src,
                                              const Eigen::VectorXd& mu_tar);

// One random subspace vector. With sigma_d = sqrt(eigenvalue_d) and
// psi_d ~ N(0,1) drawn fresh from rng:
//   soft:    p = gamma * sum_d psi_d * sigma_d * e_d
//   uniform: every sigma_d replaced by sqrt(sum sigma^2 / D)
//   reverse: direction e_d paired with sigma_{D+1-d} (order exactly flipped)
//   hard:    soft restricted to the top `rank` directions
// All variants share E[|p|^2] = gamma^2 * sum_d sigma_d^2. gamma = 0 returns
// an exact zero vector (the psi draws still advance rng).
Eigen::VectorXd sample_perturbation(const NuisanceSubspace& subspace,
                                    const PerturbationSpec& spec, Rng& rng);

// Adds the same p to every latent; an exactly zero p returns the inputs
// untouched.
std::vector<Eigen::VectorXd> perturb_utterance(const std::vector<Eigen::VectorXd>& z_list,
                                               const Eigen::VectorXd& p);

// Per utterance: segment, normalize, encode (sampled z by default, posterior
// means when stochastic_encode is false), apply one modification across all
// segments, decode means, denormalize, concatenate. Transcripts are copied
// byte for byte and a provenance record is attached. Randomness comes from
// per-utterance streams seeded by (mode seed, fold, utterance id), so output
// is independent of processing order and thread count. Utterances shorter
// than one segment are skipped.
Corpus augment_corpus(const VaeModel& model, const std::vector<Utterance>& source_utterances,
                      const NormStats& stats,
                      const std::vector<NuisanceRepresentation>& reps,
                      const std::unordered_map<std::string, Domain>& rep_domains,
                      const NuisanceSubspace& subspace, const AugmentMode& mode,
                      bool stochastic_encode, std::uint64_t fold = 0, int threads = 1);

// Manifest-ordered concatenation; ids gain a "-f<k>" suffix (k = corpus
// index) and must be unique afterwards.
Corpus concat_corpora(const std::vector<Corpus>& corpora);

}  // namespace lataug

#endif  // LATAUG_AUGMENT_HPP_
