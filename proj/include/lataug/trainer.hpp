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

#ifndef LATAUG_TRAINER_HPP_
#define LATAUG_TRAINER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "lataug/model.hpp"

namespace lataug {

struct TrainConfig {
  int batch_size = 128;
  int patience = 50;        // epochs without dev improvement before stopping
  double dev_fraction = 0.10;
  AdamConfig adam;
  std::uint64_t seed = 0;
  int max_epochs = 10000;
  bool stochastic = true;   // false forces eps = 0 during training
  bool use_kl = true;       // false optimizes the reconstruction term alone

  void validate() const;
};

struct EpochStats {
  int epoch = 0;  // 1-based full passes over the training set
  double train_elbo = 0.0;
  double train_kl = 0.0;
  double train_recon = 0.0;
  double dev_elbo = 0.0;
  double dev_kl = 0.0;
  double dev_recon = 0.0;
};

// Everything needed to continue training bit-identically after a reload.
struct TrainerState {
  TrainConfig config;
  VaeModel model;       // current parameters
  VaeModel best_model;  // parameters at the best dev ELBO so far
  AdamState adam;
  Rng rng;
  int epoch = 0;
  double best_dev_elbo = 0.0;  // -inf until the first evaluation
  int epochs_since_improve = 0;
  bool stopped = false;
  std::vector<EpochStats> history;
};

// Deterministic seeded shuffle split into (1 - dev_fraction) train and
// dev_fraction dev segments; both parts are guaranteed nonempty.
void split_segments(const std::vector<Segment>& all, double dev_fraction, std::uint64_t seed,
                    std::vector<Segment>* train, std::vector<Segment>* dev);

// Minimizes the mean negative ELBO over seeded shuffled minibatches, with one
// noise draw per segment per epoch, evaluating the dev set with eps = 0 after
// every epoch and keeping the best-dev parameters. All randomness flows from
// the single Rng held in TrainerState, so an interrupted run resumed from a
// saved state replays the uninterrupted run exactly.
class Trainer {
 public:
  // Fresh start: initializes the model from config.seed.
  Trainer(const VaeConfig& arch, const TrainConfig& config, std::vector<Segment> train_segments,
          std::vector<Segment> dev_segments);

  // Resume from a saved state.
  Trainer(TrainerState state, std::vector<Segment> train_segments,
          std::vector<Segment> dev_segments);

  // Runs up to max_new_epochs more epochs, fewer if the patience rule or
  // config.max_epochs stops training. Returns the stats of the epochs run.
  // A non-finite loss aborts with a NumericError naming the last completed
  // epoch; the state keeps the best parameters seen.
  std::vector<EpochStats> run(int max_new_epochs);

  bool stopped() const { return state_.stopped; }
  const TrainerState& state() const { return state_; }
  TrainerState& state() { return state_; }
  const VaeModel& best_model() const { return state_.best_model; }
  const std::vector<EpochStats>& history() const { return state_.history; }

  // Mean ELBO terms over a segment set with eps = 0 (per-segment averages).
  ElboTerms evaluate(const std::vector<Segment>& segments) const;

 private:
  EpochStats run_one_epoch();

  TrainerState state_;
  std::vector<Segment> train_segments_;
  std::vector<Segment> dev_segments_;
};

// Columns: epoch,train_elbo,train_kl,train_recon,dev_elbo,dev_kl,dev_recon.
void write_history_csv(const std::vector<EpochStats>& history, const std::string& path);

}  // namespace lataug

#endif  // LATAUG_TRAINER_HPP_
