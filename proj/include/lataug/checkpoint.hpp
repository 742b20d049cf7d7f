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

#ifndef LATAUG_CHECKPOINT_HPP_
#define LATAUG_CHECKPOINT_HPP_

#include <string>

#include "lataug/dsp.hpp"
#include "lataug/latent.hpp"
#include "lataug/trainer.hpp"

// One self-describing binary container backs both training checkpoints and
// latent-analysis artifacts: magic "VAE1", u32 version, a JSON metadata
// block (architecture, training configuration, RNG state, counters), and a
// named table of 64-bit float tensors (column-major). Parameter tensors,
// optimizer moments, and training history round-trip bit-exactly, so a run
// resumed from a checkpoint replays the uninterrupted run.

namespace lataug {

struct TrainerCheckpoint {
  TrainerState state;
  NormStats norm_stats;  // feature statistics the model was trained under
};

void save_checkpoint(const TrainerCheckpoint& checkpoint, const std::string& path);
TrainerCheckpoint load_checkpoint(const std::string& path);

struct AnalysisArtifacts {
  std::vector<NuisanceRepresentation> representations;
  NuisanceSubspace subspace;
};

void save_analysis(const AnalysisArtifacts& artifacts, const std::string& path);
AnalysisArtifacts load_analysis(const std::string& path);

}  // namespace lataug

#endif  // LATAUG_CHECKPOINT_HPP_
