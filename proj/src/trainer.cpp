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

#include "lataug/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

namespace lataug {

void TrainConfig::validate() const {
  if (batch_size < 1) throw DataError("train config: batch_size must be >= 1");
  if (patience < 1) throw DataError("train config: patience must be >= 1");
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0)) {
    throw DataError("train config: dev_fraction must lie in (0, 1)");
  }
  if (max_epochs < 1) throw DataError("train config: max_epochs must be >= 1");
}

void split_segments(const std::vector<Segment>& all, double dev_fraction, std::uint64_t seed,
                    std::vector<Segment>* train, std::vector<Segment>* dev) {
  if (all.size() < 2) {
    throw DataError("segment split: need at least 2 segments, have " +
                    std::to_string(all.size()));
  }
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(order, rng);

  std::size_t dev_count = static_cast<std::size_t>(
      std::llround(dev_fraction * static_cast<double>(all.size())));
  dev_count = std::max<std::size_t>(1, std::min(dev_count, all.size() - 1));

  train->clear();
  dev->clear();
  const std::size_t train_count = all.size() - dev_count;
  for (std::size_t i = 0; i < all.size(); ++i) {
    (i < train_count ? train : dev)->push_back(all[order[i]]);
  }
}

Trainer::Trainer(const VaeConfig& arch, const TrainConfig& config,
                 std::vector<Segment> train_segments, std::vector<Segment> dev_segments)
    : train_segments_(std::move(train_segments)), dev_segments_(std::move(dev_segments)) {
  config.validate();
  if (train_segments_.empty() || dev_segments_.empty()) {
    throw DataError("trainer: train and dev segment sets must be nonempty");
  }
  state_.config = config;
  state_.rng = Rng(config.seed);
  state_.model.init(arch, state_.rng);
  state_.best_model = state_.model;
  state_.adam.init(state_.model.tensors());
  state_.best_dev_elbo = -std::numeric_limits<double>::infinity();
}

Trainer::Trainer(TrainerState state, std::vector<Segment> train_segments,
                 std::vector<Segment> dev_segments)
    : state_(std::move(state)),
      train_segments_(std::move(train_segments)),
      dev_segments_(std::move(dev_segments)) {
  state_.config.validate();
  if (train_segments_.empty() || dev_segments_.empty()) {
    throw DataError("trainer: train and dev segment sets must be nonempty");
  }
}

ElboTerms Trainer::evaluate(const std::vector<Segment>& segments) const {
  if (segments.empty()) throw DataError("trainer: cannot evaluate an empty segment set");
  const int latent = state_.model.config.latent_dim;
  ElboTerms total;
  std::vector<int> batch;
  for (std::size_t start = 0; start < segments.size();
       start += static_cast<std::size_t>(state_.config.batch_size)) {
    const std::size_t end =
        std::min(segments.size(), start + static_cast<std::size_t>(state_.config.batch_size));
    batch.clear();
    for (std::size_t i = start; i < end; ++i) batch.push_back(static_cast<int>(i));
    const std::vector<Eigen::MatrixXd> frames = stack_segments(segments, batch);
    const Eigen::MatrixXd eps =
        Eigen::MatrixXd::Zero(latent, static_cast<Eigen::Index>(batch.size()));
    const ElboTerms terms = vae_forward(state_.model, frames, eps, nullptr);
    total.elbo += terms.elbo;
    total.kl += terms.kl;
    total.recon += terms.recon;
  }
  const double n = static_cast<double>(segments.size());
  return {total.elbo / n, total.kl / n, total.recon / n};
}

EpochStats Trainer::run_one_epoch() {
  const int latent = state_.model.config.latent_dim;

  std::vector<std::size_t> order(train_segments_.size());
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, state_.rng);

  VaeGrads grads;
  grads.resize_like(state_.model);
  VaeForwardCache cache;

  ElboTerms total;
  std::vector<int> batch;
  for (std::size_t start = 0; start < order.size();
       start += static_cast<std::size_t>(state_.config.batch_size)) {
    const std::size_t end =
        std::min(order.size(), start + static_cast<std::size_t>(state_.config.batch_size));
    batch.clear();
    for (std::size_t i = start; i < end; ++i) batch.push_back(static_cast<int>(order[i]));

    const std::vector<Eigen::MatrixXd> frames = stack_segments(train_segments_, batch);
    Eigen::MatrixXd eps(latent, static_cast<Eigen::Index>(batch.size()));
    if (state_.config.stochastic) {
      for (Eigen::Index b = 0; b < eps.cols(); ++b) {
        for (Eigen::Index d = 0; d < eps.rows(); ++d) eps(d, b) = state_.rng.normal();
      }
    } else {
      eps.setZero();
    }

    const ElboTerms terms = vae_forward(state_.model, frames, eps, &cache);
    total.elbo += terms.elbo;
    total.kl += terms.kl;
    total.recon += terms.recon;

    grads.set_zero();
    vae_backward(state_.model, cache, 1.0 / static_cast<double>(batch.size()), &grads,
                 state_.config.use_kl ? 1.0 : 0.0);
    adam_step(state_.model.tensors(), grads.tensors(), state_.adam, state_.config.adam);
  }

  const double n = static_cast<double>(train_segments_.size());
  const ElboTerms dev = evaluate(dev_segments_);

  EpochStats stats;
  stats.epoch = state_.epoch + 1;
  stats.train_elbo = total.elbo / n;
  stats.train_kl = total.kl / n;
  stats.train_recon = total.recon / n;
  stats.dev_elbo = dev.elbo;
  stats.dev_kl = dev.kl;
  stats.dev_recon = dev.recon;
  return stats;
}

std::vector<EpochStats> Trainer::run(int max_new_epochs) {
  std::vector<EpochStats> out;
  try {
    while (!state_.stopped && static_cast<int>(out.size()) < max_new_epochs &&
           state_.epoch < state_.config.max_epochs) {
      const EpochStats stats = run_one_epoch();
      state_.epoch = stats.epoch;
      state_.history.push_back(stats);
      out.push_back(stats);

      if (stats.dev_elbo > state_.best_dev_elbo) {
        state_.best_dev_elbo = stats.dev_elbo;
        state_.best_model = state_.model;
        state_.epochs_since_improve = 0;
      } else {
        state_.epochs_since_improve += 1;
        if (state_.epochs_since_improve >= state_.config.patience) state_.stopped = true;
      }
    }
  } catch (const NumericError& e) {
    throw NumericError(std::string(e.what()) + "; training aborted after epoch " +
                       std::to_string(state_.epoch) +
                       ", best parameters (dev ELBO " + std::to_string(state_.best_dev_elbo) +
                       ") retained in the trainer state");
  }
  return out;
}

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "epoch,train_elbo,train_kl,train_recon,dev_elbo,dev_kl,dev_recon\n";
  char buf[64];
  for (const EpochStats& row : history) {
    out << row.epoch;
    for (double v : {row.train_elbo, row.train_kl, row.train_recon, row.dev_elbo, row.dev_kl,
                     row.dev_recon}) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path);
}

}  // namespace lataug
