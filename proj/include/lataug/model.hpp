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

#ifndef LATAUG_MODEL_HPP_
#define LATAUG_MODEL_HPP_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lataug/adam.hpp"
#include "lataug/lstm.hpp"
#include "lataug/types.hpp"

// Sequence-to-sequence LSTM variational autoencoder over fixed-length
// feature segments. The encoder runs a stacked LSTM over the frames and
// feeds the concatenated final-step hidden outputs of every layer into a
// Gaussian parameter layer (latent mean and log-variance). The decoder
// receives the sampled latent vector as its input at every step, starting
// from a zero state, and maps each top-layer output through a second
// Gaussian parameter layer to per-frame means and log-variances.

namespace lataug {

struct VaeConfig {
  int latent_dim = 64;
  int encoder_layers = 2;
  int decoder_layers = 2;
  int hidden = 512;
  int segment_len = 20;
  int feature_dim = 40;

  void validate() const;  // throws DataError on non-positive fields
};

struct ConstNamedTensor {
  std::string name;
  const Eigen::MatrixXd* value;
};
using ConstTensorList = std::vector<ConstNamedTensor>;

struct VaeModel {
  VaeConfig config;
  std::vector<LstmLayerParams> encoder;
  GaussianHeadParams encoder_head;  // (encoder_layers*hidden) -> latent_dim
  std::vector<LstmLayerParams> decoder;
  GaussianHeadParams decoder_head;  // hidden -> feature_dim

  void init(const VaeConfig& cfg, Rng& rng);

  // Stable (name, tensor) views in a fixed order shared with VaeGrads,
  // AdamState, and the checkpoint format.
  ConstTensorList tensors() const;
  TensorList tensors();
};

struct VaeGrads {
  std::vector<LstmGrads> encoder;
  GaussianHeadGrads encoder_head;
  std::vector<LstmGrads> decoder;
  GaussianHeadGrads decoder_head;

  void resize_like(const VaeModel& model);  // zero tensors shaped like model
  void set_zero();
  TensorList tensors();
};

// Sums over the batch; lower_bound = recon_loglik - kl per segment.
struct ElboTerms {
  double elbo = 0.0;
  double kl = 0.0;
  double recon = 0.0;
};

struct VaeForwardCache {
  std::vector<Eigen::MatrixXd> frames;  // segment_len entries of F x B (targets)
  std::vector<LstmCache> encoder_caches;
  std::vector<std::vector<Eigen::MatrixXd>> encoder_hiddens;  // per layer, per step
  GaussianHeadCache encoder_head_cache;
  Eigen::MatrixXd post_mean;    // D x B
  Eigen::MatrixXd post_logvar;  // D x B
  Eigen::MatrixXd eps;          // D x B
  Eigen::MatrixXd z;            // D x B
  std::vector<LstmCache> decoder_caches;
  std::vector<GaussianHeadCache> decoder_head_caches;  // per step
  std::vector<Eigen::MatrixXd> out_mean;               // per step F x B
  std::vector<Eigen::MatrixXd> out_logvar;             // per step F x B
};

// Batched training forward. frames is time-major (segment_len entries of
// F x B), eps is one standard-normal draw per latent coordinate per segment.
// Throws NumericError if the bound goes non-finite.
ElboTerms vae_forward(const VaeModel& model, const std::vector<Eigen::MatrixXd>& frames,
                      const Eigen::MatrixXd& eps, VaeForwardCache* cache);

// Gradient of loss = -scale * (recon - kl_weight * kl) accumulated into
// grads; pass scale = 1/batch for the mean-negative-ELBO training loss.
// kl_weight = 0 trains a plain deterministic autoencoder objective.
void vae_backward(const VaeModel& model, const VaeForwardCache& cache, double scale,
                  VaeGrads* grads, double kl_weight = 1.0);

// Single-segment interfaces. Segments are frame-major (segment_len x F),
// already normalized.
void encode(const VaeModel& model, const Eigen::MatrixXd& segment, Eigen::VectorXd* mean,
            Eigen::VectorXd* logvar);

Eigen::VectorXd reparameterize(const Eigen::VectorXd& mean, const Eigen::VectorXd& logvar,
                               const Eigen::VectorXd& eps);

void decode(const VaeModel& model, const Eigen::VectorXd& z, Eigen::MatrixXd* mean_frames,
            Eigen::MatrixXd* logvar_frames);

// KL(N(mean, diag(exp(logvar))) || N(0, I)) in closed form.
double gaussian_kl(const Eigen::VectorXd& mean, const Eigen::VectorXd& logvar);

ElboTerms elbo(const VaeModel& model, const Eigen::MatrixXd& segment, const Eigen::VectorXd& eps);

// Encode, take z = mean (deterministic) or a reparameterized sample drawn
// from rng, decode, and return the decoded per-frame means.
Eigen::MatrixXd reconstruct(const VaeModel& model, const Eigen::MatrixXd& segment,
                            bool deterministic, Rng* rng);

// Columns of the batch are segments[indices]; time-major output for
// vae_forward.
std::vector<Eigen::MatrixXd> stack_segments(const std::vector<Segment>& segments,
                                            const std::vector<int>& indices);

}  // namespace lataug

#endif  // LATAUG_MODEL_HPP_
