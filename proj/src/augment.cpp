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

#include "lataug/augment.hpp"

#include <cmath>

namespace lataug {

std::string perturb_variant_name(PerturbVariant v) {
  switch (v) {
    case PerturbVariant::kSoft: return "soft";
    case PerturbVariant::kUniform: return "uniform";
    case PerturbVariant::kReverse: return "reverse";
    case PerturbVariant::kHard: return "hard";
  }
  throw DataError("unknown perturbation variant value");
}

PerturbVariant parse_perturb_variant(const std::string& name) {
  if (name == "soft") return PerturbVariant::kSoft;
  if (name == "uniform") return PerturbVariant::kUniform;
  if (name == "reverse") return PerturbVariant::kReverse;
  if (name == "hard") return PerturbVariant::kHard;
  throw DataError("unknown perturbation variant '" + name + "'");
}

std::vector<Eigen::VectorXd> replace_nuisance(const std::vector<Eigen::VectorXd>& z_list,
                                              const Eigen::VectorXd& mu_src,
                                              const Eigen::VectorXd& mu_tar) {
  if (mu_src.size() != mu_tar.size()) {
    throw DataError("replace_nuisance: representation dimensions differ");
  }
  const Eigen::VectorXd shift = mu_tar - mu_src;
  if (shift.isZero(0.0)) return z_list;
  std::vector<Eigen::VectorXd> out;
  out.reserve(z_list.size());
  for (const Eigen::VectorXd& z : z_list) {
    if (z.size() != shift.size()) {
      throw DataError("replace_nuisance: latent dimension mismatch");
    }
    out.push_back(z + shift);
  }
  return out;
}

Eigen::VectorXd sample_perturbation(const NuisanceSubspace& subspace,
                                    const PerturbationSpec& spec, Rng& rng) {
  const Eigen::Index dim = subspace.center.size();
  if (dim == 0 || subspace.eigenvectors.rows() != dim || subspace.eigenvalues.size() != dim) {
    throw DataError("sample_perturbation: subspace is not fitted");
  }
  if (spec.gamma < 0.0) throw DataError("sample_perturbation: gamma must be nonnegative");

  Eigen::Index active = dim;
  if (spec.variant == PerturbVariant::kHard) {
    if (spec.rank < 1 || spec.rank > dim) {
      throw DataError("sample_perturbation: hard rank must lie in [1, " + std::to_string(dim) +
                      "]");
    }
    active = spec.rank;
  }

  const Eigen::VectorXd sigma = subspace.eigenvalues.cwiseSqrt();
  const double sigma_uni = std::sqrt(subspace.eigenvalues.sum() / static_cast<double>(dim));

  Eigen::VectorXd p = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index d = 0; d < active; ++d) {
    const double psi = rng.normal();
    double scale = 0.0;
    switch (spec.variant) {
      case PerturbVariant::kSoft:
      case PerturbVariant::kHard:
        scale = sigma(d);
        break;
      case PerturbVariant::kUniform:
        scale = sigma_uni;
        break;
      case PerturbVariant::kReverse:
        scale = sigma(dim - 1 - d);
        break;
    }
    p += (spec.gamma * psi * scale) * subspace.eigenvectors.col(d);
  }
  if (spec.gamma == 0.0) return Eigen::VectorXd::Zero(dim);
  return p;
}

std::vector<Eigen::VectorXd> perturb_utterance(const std::vector<Eigen::VectorXd>& z_list,
                                               const Eigen::VectorXd& p) {
  if (p.isZero(0.0)) return z_list;
  std::vector<Eigen::VectorXd> out;
  out.reserve(z_list.size());
  for (const Eigen::VectorXd& z : z_list) {
    if (z.size() != p.size()) throw DataError("perturb_utterance: dimension mismatch");
    out.push_back(z + p);
  }
  return out;
}

namespace {

std::uint64_t mode_seed(const AugmentMode& mode) {
  return std::visit([](const auto& spec) { return spec.seed; }, mode);
}

const char* mode_name(const AugmentMode& mode) {
  if (std::holds_alternative<ReconstructSpec>(mode)) return "reconstruct";
  if (std::holds_alternative<ReplacementSpec>(mode)) return "replace";
  return "perturb";
}

}  // namespace

Corpus augment_corpus(const VaeModel& model, const std::vector<Utterance>& source_utterances,
                      const NormStats& stats,
                      const std::vector<NuisanceRepresentation>& reps,
                      const std::unordered_map<std::string, Domain>& rep_domains,
                      const NuisanceSubspace& subspace, const AugmentMode& mode,
                      bool stochastic_encode, std::uint64_t fold, int threads) {
  const int latent = model.config.latent_dim;
  const int segment_len = model.config.segment_len;

  // Resolve prerequisites up front so errors surface before any work.
  std::unordered_map<std::string, const NuisanceRepresentation*> rep_by_id;
  std::vector<const NuisanceRepresentation*> pool;
  const ReplacementSpec* replacement = std::get_if<ReplacementSpec>(&mode);
  if (replacement != nullptr) {
    for (const NuisanceRepresentation& rep : reps) rep_by_id.emplace(rep.utterance_id, &rep);
    for (const NuisanceRepresentation& rep : reps) {
      auto it = rep_domains.find(rep.utterance_id);
      if (it == rep_domains.end()) {
        throw DataError("augment: no domain known for representation '" + rep.utterance_id +
                        "'");
      }
      if (it->second == replacement->pool) pool.push_back(&rep);
    }
    if (pool.empty()) {
      throw DataError("augment: replacement pool '" + domain_name(replacement->pool) +
                      "' is empty");
    }
  }
  const PerturbationSpec* perturbation = std::get_if<PerturbationSpec>(&mode);
  if (perturbation != nullptr && subspace.center.size() != latent) {
    throw DataError("augment: subspace dimension does not match the model");
  }

  std::vector<const Utterance*> selected;
  for (const Utterance& utt : source_utterances) {
    if (utt.frames.rows() < segment_len) continue;  // nothing to encode
    if (!utt.transcript.has_value()) {
      throw DataError("augment: utterance '" + utt.id + "' has no transcript");
    }
    if (replacement != nullptr && rep_by_id.find(utt.id) == rep_by_id.end()) {
      throw DataError("augment: no nuisance representation for utterance '" + utt.id + "'");
    }
    selected.push_back(&utt);
  }

  const std::uint64_t seed = mode_seed(mode);
  Corpus out;
  out.utterances.resize(selected.size());
  out.manifest.entries.resize(selected.size());
  out.header.feature_dim = static_cast<std::uint32_t>(model.config.feature_dim);

  parallel_for(static_cast<int>(selected.size()), threads, [&](int idx) {
    const Utterance& utt = *selected[static_cast<std::size_t>(idx)];
    Rng rng(derive_seed(seed, fold, utt.id));

    const Eigen::MatrixXd normalized = normalize_frames(utt.frames, stats);
    const std::vector<Segment> segments = segment_utterance(normalized, utt.id, segment_len);

    // Draw order is fixed: per-segment encoder noise first, then the
    // modification draws, so the stream layout is mode-independent.
    std::vector<Eigen::VectorXd> z_list;
    z_list.reserve(segments.size());
    Eigen::VectorXd mean, logvar;
    for (const Segment& seg : segments) {
      encode(model, seg.frames, &mean, &logvar);
      if (stochastic_encode) {
        Eigen::VectorXd eps(latent);
        for (int d = 0; d < latent; ++d) eps(d) = rng.normal();
        z_list.push_back(reparameterize(mean, logvar, eps));
      } else {
        z_list.push_back(mean);
      }
    }

    Provenance provenance;
    provenance.operation = mode_name(mode);
    provenance.seed = seed;
    if (replacement != nullptr) {
      const NuisanceRepresentation& partner =
          *pool[rng.uniform_int(static_cast<std::uint64_t>(pool.size()))];
      const NuisanceRepresentation& own = *rep_by_id.at(utt.id);
      z_list = replace_nuisance(z_list, own.mean, partner.mean);
      provenance.partner_id = partner.utterance_id;
    } else if (perturbation != nullptr) {
      const Eigen::VectorXd p = sample_perturbation(subspace, *perturbation, rng);
      z_list = perturb_utterance(z_list, p);
      provenance.variant = perturb_variant_name(perturbation->variant);
      provenance.gamma = perturbation->gamma;
      if (perturbation->variant == PerturbVariant::kHard) provenance.rank = perturbation->rank;
    }

    Eigen::MatrixXd decoded(static_cast<Eigen::Index>(z_list.size()) * segment_len,
                            model.config.feature_dim);
    Eigen::MatrixXd mean_frames, logvar_frames;
    for (std::size_t s = 0; s < z_list.size(); ++s) {
      decode(model, z_list[s], &mean_frames, &logvar_frames);
      decoded.middleRows(static_cast<Eigen::Index>(s) * segment_len, segment_len) = mean_frames;
    }

    Utterance result;
    result.id = utt.id;
    result.domain = utt.domain;
    result.transcript = utt.transcript;
    result.frames = denormalize_frames(decoded, stats);
    out.utterances[static_cast<std::size_t>(idx)] = std::move(result);

    ManifestEntry entry;
    entry.id = utt.id;
    entry.feature_key = utt.id;
    entry.domain = utt.domain;
    entry.transcript = utt.transcript;
    entry.provenance = std::move(provenance);
    out.manifest.entries[static_cast<std::size_t>(idx)] = std::move(entry);
  });
  return out;
}

Corpus concat_corpora(const std::vector<Corpus>& corpora) {
  if (corpora.empty()) throw DataError("concat: no corpora given");
  Corpus out;
  Eigen::Index feat_dim = -1;
  std::unordered_map<std::string, bool> seen;
  for (std::size_t k = 0; k < corpora.size(); ++k) {
    const Corpus& corpus = corpora[k];
    if (corpus.utterances.size() != corpus.manifest.entries.size()) {
      throw DataError("concat: corpus " + std::to_string(k) +
                      " has misaligned archive and manifest");
    }
    if (k == 0) out.header = corpus.header;
    const std::string suffix = "-f" + std::to_string(k);
    for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
      Utterance utt = corpus.utterances[i];
      ManifestEntry entry = corpus.manifest.entries[i];
      if (utt.id != entry.id) {
        throw DataError("concat: archive/manifest id mismatch at record '" + utt.id + "'");
      }
      if (utt.frames.cols() > 0) {
        if (feat_dim < 0) feat_dim = utt.frames.cols();
        if (utt.frames.cols() != feat_dim) {
          throw DataError("concat: channel count mismatch at '" + utt.id + "'");
        }
      }
      utt.id += suffix;
      entry.id = utt.id;
      if (entry.feature_key.has_value()) entry.feature_key = utt.id;
      if (!seen.emplace(utt.id, true).second) {
        throw DataError("concat: duplicate id '" + utt.id + "' after fold suffixing");
      }
      out.utterances.push_back(std::move(utt));
      out.manifest.entries.push_back(std::move(entry));
    }
  }
  if (feat_dim > 0) out.header.feature_dim = static_cast<std::uint32_t>(feat_dim);
  return out;
}

}  // namespace lataug
