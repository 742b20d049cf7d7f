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

#include "lataug/model.hpp"

#include <cmath>

namespace lataug {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)
}

void VaeConfig::validate() const {
  if (latent_dim <= 0 || encoder_layers <= 0 || decoder_layers <= 0 || hidden <= 0 ||
      segment_len <= 0 || feature_dim <= 0) {
    throw DataError("vae config: all dimensions must be positive");
  }
}

void VaeModel::init(const VaeConfig& cfg, Rng& rng) {
  cfg.validate();
  config = cfg;
  encoder.resize(config.encoder_layers);
  for (int l = 0; l < config.encoder_layers; ++l) {
    encoder[l].init(l == 0 ? config.feature_dim : config.hidden, config.hidden, rng);
  }
  encoder_head.init(config.encoder_layers * config.hidden, config.latent_dim, rng);
  decoder.resize(config.decoder_layers);
  for (int l = 0; l < config.decoder_layers; ++l) {
    decoder[l].init(l == 0 ? config.latent_dim : config.hidden, config.hidden, rng);
  }
  decoder_head.init(config.hidden, config.feature_dim, rng);
}

ConstTensorList VaeModel::tensors() const {
  ConstTensorList out;
  for (std::size_t l = 0; l < encoder.size(); ++l) {
    const std::string prefix = "enc.l" + std::to_string(l) + ".";
    out.push_back({prefix + "w_input", &encoder[l].w_input});
    out.push_back({prefix + "w_recurrent", &encoder[l].w_recurrent});
    out.push_back({prefix + "bias", &encoder[l].bias});
  }
  out.push_back({"enc.head.w_mean", &encoder_head.w_mean});
  out.push_back({"enc.head.b_mean", &encoder_head.b_mean});
  out.push_back({"enc.head.w_logvar", &encoder_head.w_logvar});
  out.push_back({"enc.head.b_logvar", &encoder_head.b_logvar});
  for (std::size_t l = 0; l < decoder.size(); ++l) {
    const std::string prefix = "dec.l" + std::to_string(l) + ".";
    out.push_back({prefix + "w_input", &decoder[l].w_input});
    out.push_back({prefix + "w_recurrent", &decoder[l].w_recurrent});
    out.push_back({prefix + "bias", &decoder[l].bias});
  }
  out.push_back({"dec.head.w_mean", &decoder_head.w_mean});
  out.push_back({"dec.head.b_mean", &decoder_head.b_mean});
  out.push_back({"dec.head.w_logvar", &decoder_head.w_logvar});
  out.push_back({"dec.head.b_logvar", &decoder_head.b_logvar});
  return out;
}

TensorList VaeModel::tensors() {
  // The object is mutable here, so dropping const from the views is sound.
  TensorList out;
  for (const ConstNamedTensor& t : static_cast<const VaeModel&>(*this).tensors()) {
    out.push_back({t.name, const_cast<Eigen::MatrixXd*>(t.value)});
  }
  return out;
}

void VaeGrads::resize_like(const VaeModel& model) {
  encoder.resize(model.encoder.size());
  for (std::size_t l = 0; l < model.encoder.size(); ++l) {
    encoder[l].resize_like(model.encoder[l]);
  }
  encoder_head.resize_like(model.encoder_head);
  decoder.resize(model.decoder.size());
  for (std::size_t l = 0; l < model.decoder.size(); ++l) {
    decoder[l].resize_like(model.decoder[l]);
  }
  decoder_head.resize_like(model.decoder_head);
}

void VaeGrads::set_zero() {
  for (LstmGrads& g : encoder) {
    g.w_input.setZero();
    g.w_recurrent.setZero();
    g.bias.setZero();
  }
  encoder_head.w_mean.setZero();
  encoder_head.b_mean.setZero();
  encoder_head.w_logvar.setZero();
  encoder_head.b_logvar.setZero();
  for (LstmGrads& g : decoder) {
    g.w_input.setZero();
    g.w_recurrent.setZero();
    g.bias.setZero();
  }
  decoder_head.w_mean.setZero();
  decoder_head.b_mean.setZero();
  decoder_head.w_logvar.setZero();
  decoder_head.b_logvar.setZero();
}

TensorList VaeGrads::tensors() {
  TensorList out;
  for (std::size_t l = 0; l < encoder.size(); ++l) {
    const std::string prefix = "enc.l" + std::to_string(l) + ".";
    out.push_back({prefix + "w_input", &encoder[l].w_input});
    out.push_back({prefix + "w_recurrent", &encoder[l].w_recurrent});
    out.push_back({prefix + "bias", &encoder[l].bias});
  }
  out.push_back({"enc.head.w_mean", &encoder_head.w_mean});
  out.push_back({"enc.head.b_mean", &encoder_head.b_mean});
  out.push_back({"enc.head.w_logvar", &encoder_head.w_logvar});
  out.push_back({"enc.head.b_logvar", &encoder_head.b_logvar});
  for (std::size_t l = 0; l < decoder.size(); ++l) {
    const std::string prefix = "dec.l" + std::to_string(l) + ".";
    out.push_back({prefix + "w_input", &decoder[l].w_input});
    out.push_back({prefix + "w_recurrent", &decoder[l].w_recurrent});
    out.push_back({prefix + "bias", &decoder[l].bias});
  }
  out.push_back({"dec.head.w_mean", &decoder_head.w_mean});
  out.push_back({"dec.head.b_mean", &decoder_head.b_mean});
  out.push_back({"dec.head.w_logvar", &decoder_head.w_logvar});
  out.push_back({"dec.head.b_logvar", &decoder_head.b_logvar});
  return out;
}

namespace {

// Runs the encoder stack and Gaussian head over a time-major batch.
// Caches are filled only when cache is non-null.
void encode_batch(const VaeModel& model, const std::vector<Eigen::MatrixXd>& frames,
                  Eigen::MatrixXd* mean, Eigen::MatrixXd* logvar, VaeForwardCache* cache) {
  const int hidden = model.config.hidden;
  const Eigen::Index batch = frames.front().cols();
  const Eigen::MatrixXd zero_state = Eigen::MatrixXd::Zero(hidden, batch);

  if (cache != nullptr) {
    cache->encoder_caches.resize(model.encoder.size());
    cache->encoder_hiddens.resize(model.encoder.size());
  }
  std::vector<Eigen::MatrixXd> layer_input = frames;
  Eigen::MatrixXd concat(static_cast<Eigen::Index>(model.encoder.size()) * hidden, batch);
  for (std::size_t l = 0; l < model.encoder.size(); ++l) {
    LstmCache* layer_cache = cache != nullptr ? &cache->encoder_caches[l] : nullptr;
    std::vector<Eigen::MatrixXd> hiddens =
        lstm_forward(model.encoder[l], layer_input, zero_state, zero_state, layer_cache);
    concat.middleRows(static_cast<Eigen::Index>(l) * hidden, hidden) = hiddens.back();
    if (cache != nullptr) cache->encoder_hiddens[l] = hiddens;
    layer_input = std::move(hiddens);
  }
  gaussian_head_forward(model.encoder_head, concat, mean, logvar,
                        cache != nullptr ? &cache->encoder_head_cache : nullptr);
}

// Feeds z at every decoder step from a zero state; per-step head outputs.
void decode_batch(const VaeModel& model, const Eigen::MatrixXd& z,
                  std::vector<Eigen::MatrixXd>* out_mean,
                  std::vector<Eigen::MatrixXd>* out_logvar, VaeForwardCache* cache) {
  const int hidden = model.config.hidden;
  const int steps = model.config.segment_len;
  const Eigen::Index batch = z.cols();
  const Eigen::MatrixXd zero_state = Eigen::MatrixXd::Zero(hidden, batch);

  std::vector<Eigen::MatrixXd> layer_input(static_cast<std::size_t>(steps), z);
  if (cache != nullptr) cache->decoder_caches.resize(model.decoder.size());
  for (std::size_t l = 0; l < model.decoder.size(); ++l) {
    LstmCache* layer_cache = cache != nullptr ? &cache->decoder_caches[l] : nullptr;
    layer_input =
        lstm_forward(model.decoder[l], layer_input, zero_state, zero_state, layer_cache);
  }

  out_mean->resize(static_cast<std::size_t>(steps));
  out_logvar->resize(static_cast<std::size_t>(steps));
  if (cache != nullptr) cache->decoder_head_caches.resize(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    gaussian_head_forward(model.decoder_head, layer_input[t], &(*out_mean)[t],
                          &(*out_logvar)[t],
                          cache != nullptr ? &cache->decoder_head_caches[t] : nullptr);
  }
}

}  // namespace

ElboTerms vae_forward(const VaeModel& model, const std::vector<Eigen::MatrixXd>& frames,
                      const Eigen::MatrixXd& eps, VaeForwardCache* cache) {
  if (static_cast<int>(frames.size()) != model.config.segment_len) {
    throw DataError("vae_forward: expected " + std::to_string(model.config.segment_len) +
                       " frames per segment, got " + std::to_string(frames.size()));
  }
  const Eigen::Index batch = frames.front().cols();
  for (const Eigen::MatrixXd& f : frames) {
    if (f.rows() != model.config.feature_dim || f.cols() != batch) {
      throw DataError("vae_forward: frame batch shape mismatch");
    }
  }
  if (eps.rows() != model.config.latent_dim || eps.cols() != batch) {
    throw DataError("vae_forward: epsilon shape mismatch");
  }

  Eigen::MatrixXd post_mean, post_logvar;
  encode_batch(model, frames, &post_mean, &post_logvar, cache);

  const Eigen::MatrixXd z =
      (post_mean.array() + (post_logvar.array() / 2.0).exp() * eps.array()).matrix();

  std::vector<Eigen::MatrixXd> out_mean, out_logvar;
  VaeForwardCache* decode_cache = cache;
  decode_batch(model, z, &out_mean, &out_logvar, decode_cache);

  const double kl =
      0.5 * (post_logvar.array().exp() + post_mean.array().square() - 1.0 -
             post_logvar.array())
                .sum();
  double recon = 0.0;
  for (std::size_t t = 0; t < out_mean.size(); ++t) {
    const Eigen::ArrayXXd diff = frames[t].array() - out_mean[t].array();
    recon += (-0.5 * kLog2Pi - 0.5 * out_logvar[t].array() -
              0.5 * diff.square() * (-out_logvar[t].array()).exp())
                 .sum();
  }

  ElboTerms terms;
  terms.kl = kl;
  terms.recon = recon;
  terms.elbo = recon - kl;
  if (!std::isfinite(terms.elbo)) {
    throw NumericError("vae_forward: non-finite lower bound (recon=" + std::to_string(recon) +
                       ", kl=" + std::to_string(kl) + ")");
  }

  if (cache != nullptr) {
    cache->frames = frames;
    cache->post_mean = post_mean;
    cache->post_logvar = post_logvar;
    cache->eps = eps;
    cache->z = z;
    cache->out_mean = std::move(out_mean);
    cache->out_logvar = std::move(out_logvar);
  }
  return terms;
}

void vae_backward(const VaeModel& model, const VaeForwardCache& cache, double scale,
                  VaeGrads* grads, double kl_weight) {
  const int hidden = model.config.hidden;
  const int steps = model.config.segment_len;
  const Eigen::Index batch = cache.z.cols();

  // Reconstruction term: loss = -scale * sum log N(x | m, exp(lv)).
  std::vector<Eigen::MatrixXd> d_hidden(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    const Eigen::ArrayXXd inv_var = (-cache.out_logvar[t].array()).exp();
    const Eigen::ArrayXXd diff = cache.out_mean[t].array() - cache.frames[t].array();
    const Eigen::MatrixXd d_mean = (scale * diff * inv_var).matrix();
    const Eigen::MatrixXd d_logvar =
        (scale * 0.5 * (1.0 - diff.square() * inv_var)).matrix();
    gaussian_head_backward(model.decoder_head, cache.decoder_head_caches[t], d_mean, d_logvar,
                           &grads->decoder_head, &d_hidden[t]);
  }

  // Decoder stack, top to bottom; the bottom layer's input gradients are the
  // per-step gradients wrt z.
  std::vector<Eigen::MatrixXd> d_lower;
  for (std::size_t l = model.decoder.size(); l-- > 0;) {
    lstm_backward(model.decoder[l], cache.decoder_caches[l], d_hidden, &grads->decoder[l],
                  &d_lower);
    d_hidden = std::move(d_lower);
  }
  Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(model.config.latent_dim, batch);
  for (const Eigen::MatrixXd& g : d_hidden) dz += g;

  // KL term plus the reparameterization path through z.
  const double kl_scale = scale * kl_weight;
  const Eigen::ArrayXXd std_half = (cache.post_logvar.array() / 2.0).exp();
  Eigen::MatrixXd d_post_mean = (kl_scale * cache.post_mean.array() + dz.array()).matrix();
  Eigen::MatrixXd d_post_logvar =
      (kl_scale * 0.5 * (cache.post_logvar.array().exp() - 1.0) +
       dz.array() * cache.eps.array() * 0.5 * std_half)
          .matrix();

  Eigen::MatrixXd d_concat;
  gaussian_head_backward(model.encoder_head, cache.encoder_head_cache, d_post_mean,
                         d_post_logvar, &grads->encoder_head, &d_concat);

  // Encoder stack, top to bottom. Every layer's final step receives its slice
  // of the concatenated summary gradient; non-top layers also receive the
  // per-step input gradients of the layer above.
  std::vector<Eigen::MatrixXd> from_above;
  for (std::size_t l = model.encoder.size(); l-- > 0;) {
    std::vector<Eigen::MatrixXd> d_hid(static_cast<std::size_t>(steps),
                                       Eigen::MatrixXd::Zero(hidden, batch));
    if (!from_above.empty()) {
      for (int t = 0; t < steps; ++t) d_hid[t] = from_above[t];
    }
    d_hid.back() += d_concat.middleRows(static_cast<Eigen::Index>(l) * hidden, hidden);
    std::vector<Eigen::MatrixXd>* d_inputs = l > 0 ? &from_above : nullptr;
    lstm_backward(model.encoder[l], cache.encoder_caches[l], d_hid, &grads->encoder[l],
                  d_inputs);
  }
}

void encode(const VaeModel& model, const Eigen::MatrixXd& segment, Eigen::VectorXd* mean,
            Eigen::VectorXd* logvar) {
  if (segment.rows() != model.config.segment_len || segment.cols() != model.config.feature_dim) {
    throw DataError("encode: segment shape mismatch");
  }
  std::vector<Eigen::MatrixXd> frames(static_cast<std::size_t>(segment.rows()));
  for (Eigen::Index t = 0; t < segment.rows(); ++t) frames[t] = segment.row(t).transpose();
  Eigen::MatrixXd m, lv;
  encode_batch(model, frames, &m, &lv, nullptr);
  *mean = m.col(0);
  *logvar = lv.col(0);
}

Eigen::VectorXd reparameterize(const Eigen::VectorXd& mean, const Eigen::VectorXd& logvar,
                               const Eigen::VectorXd& eps) {
  if (mean.size() != logvar.size() || mean.size() != eps.size()) {
    throw DataError("reparameterize: dimension mismatch");
  }
  return (mean.array() + (logvar.array() / 2.0).exp() * eps.array()).matrix();
}

void decode(const VaeModel& model, const Eigen::VectorXd& z, Eigen::MatrixXd* mean_frames,
            Eigen::MatrixXd* logvar_frames) {
  if (z.size() != model.config.latent_dim) throw DataError("decode: latent size mismatch");
  std::vector<Eigen::MatrixXd> out_mean, out_logvar;
  decode_batch(model, z, &out_mean, &out_logvar, nullptr);
  mean_frames->resize(model.config.segment_len, model.config.feature_dim);
  logvar_frames->resize(model.config.segment_len, model.config.feature_dim);
  for (int t = 0; t < model.config.segment_len; ++t) {
    mean_frames->row(t) = out_mean[t].col(0).transpose();
    logvar_frames->row(t) = out_logvar[t].col(0).transpose();
  }
}

double gaussian_kl(const Eigen::VectorXd& mean, const Eigen::VectorXd& logvar) {
  if (mean.size() != logvar.size()) throw DataError("gaussian_kl: dimension mismatch");
  return 0.5 *
         (logvar.array().exp() + mean.array().square() - 1.0 - logvar.array()).sum();
}

ElboTerms elbo(const VaeModel& model, const Eigen::MatrixXd& segment,
               const Eigen::VectorXd& eps) {
  std::vector<Eigen::MatrixXd> frames(static_cast<std::size_t>(segment.rows()));
  for (Eigen::Index t = 0; t < segment.rows(); ++t) frames[t] = segment.row(t).transpose();
  return vae_forward(model, frames, eps, nullptr);
}

Eigen::MatrixXd reconstruct(const VaeModel& model, const Eigen::MatrixXd& segment,
                            bool deterministic, Rng* rng) {
  Eigen::VectorXd mean, logvar;
  encode(model, segment, &mean, &logvar);
  Eigen::VectorXd z;
  if (deterministic) {
    z = mean;
  } else {
    if (rng == nullptr) throw DataError("reconstruct: stochastic mode needs an RNG");
    Eigen::VectorXd eps(mean.size());
    for (Eigen::Index d = 0; d < eps.size(); ++d) eps(d) = rng->normal();
    z = reparameterize(mean, logvar, eps);
  }
  Eigen::MatrixXd mean_frames, logvar_frames;
  decode(model, z, &mean_frames, &logvar_frames);
  return mean_frames;
}

std::vector<Eigen::MatrixXd> stack_segments(const std::vector<Segment>& segments,
                                            const std::vector<int>& indices) {
  if (indices.empty()) throw DataError("stack_segments: empty batch");
  const Eigen::Index steps = segments[static_cast<std::size_t>(indices[0])].frames.rows();
  const Eigen::Index feat = segments[static_cast<std::size_t>(indices[0])].frames.cols();
  std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(steps));
  for (Eigen::Index t = 0; t < steps; ++t) {
    out[t].resize(feat, static_cast<Eigen::Index>(indices.size()));
    for (std::size_t j = 0; j < indices.size(); ++j) {
      out[t].col(static_cast<Eigen::Index>(j)) =
          segments[static_cast<std::size_t>(indices[j])].frames.row(t).transpose();
    }
  }
  return out;
}

}  // namespace lataug
