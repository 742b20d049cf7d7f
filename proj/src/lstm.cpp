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

#include "lataug/lstm.hpp"

namespace lataug {

namespace {

void fill_uniform(Eigen::MatrixXd& m, Rng& rng, double lo, double hi) {
  double* data = m.data();
  const Eigen::Index n = m.size();
  for (Eigen::Index i = 0; i < n; ++i) data[i] = rng.uniform_range(lo, hi);
}

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& a) { return 1.0 / (1.0 + (-a).exp()); }

}  // namespace

void LstmLayerParams::init(int input, int hidden, Rng& rng) {
  w_input.resize(4 * hidden, input);
  w_recurrent.resize(4 * hidden, hidden);
  bias = Eigen::MatrixXd::Zero(4 * hidden, 1);
  fill_uniform(w_input, rng, -0.05, 0.05);
  fill_uniform(w_recurrent, rng, -0.05, 0.05);
  bias.block(hidden, 0, hidden, 1).setOnes();  // forget gate opens by default
}

void LstmGrads::resize_like(const LstmLayerParams& params) {
  w_input = Eigen::MatrixXd::Zero(params.w_input.rows(), params.w_input.cols());
  w_recurrent = Eigen::MatrixXd::Zero(params.w_recurrent.rows(), params.w_recurrent.cols());
  bias = Eigen::MatrixXd::Zero(params.bias.rows(), 1);
}

std::vector<Eigen::MatrixXd> lstm_forward(const LstmLayerParams& params,
                                          const std::vector<Eigen::MatrixXd>& inputs,
                                          const Eigen::MatrixXd& h0, const Eigen::MatrixXd& c0,
                                          LstmCache* cache) {
  if (inputs.empty()) throw DataError("lstm_forward: empty input sequence");
  const int hidden = params.hidden_size();
  const Eigen::Index batch = inputs.front().cols();
  if (inputs.front().rows() != params.input_size()) {
    throw DataError("lstm_forward: input width does not match parameters");
  }
  if (h0.rows() != hidden || h0.cols() != batch || c0.rows() != hidden || c0.cols() != batch) {
    throw DataError("lstm_forward: initial state shape mismatch");
  }

  if (cache != nullptr) {
    cache->steps.clear();
    cache->steps.resize(inputs.size());
  }

  std::vector<Eigen::MatrixXd> hiddens(inputs.size());
  Eigen::MatrixXd h = h0;
  Eigen::MatrixXd c = c0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const Eigen::MatrixXd& x = inputs[t];
    if (x.rows() != params.input_size() || x.cols() != batch) {
      throw DataError("lstm_forward: inconsistent step shape at t=" + std::to_string(t));
    }
    Eigen::MatrixXd pre = params.w_input * x + params.w_recurrent * h;
    pre.colwise() += Eigen::VectorXd(params.bias.col(0));

    const Eigen::ArrayXXd gate_i = sigmoid(pre.topRows(hidden).array());
    const Eigen::ArrayXXd gate_f = sigmoid(pre.middleRows(hidden, hidden).array());
    const Eigen::ArrayXXd gate_g = pre.middleRows(2 * hidden, hidden).array().tanh();
    const Eigen::ArrayXXd gate_o = sigmoid(pre.bottomRows(hidden).array());

    const Eigen::MatrixXd c_next =
        (gate_f * c.array() + gate_i * gate_g).matrix();
    const Eigen::MatrixXd tanh_c = c_next.array().tanh().matrix();
    const Eigen::MatrixXd h_next = (gate_o * tanh_c.array()).matrix();

    if (cache != nullptr) {
      LstmStepCache& step = cache->steps[t];
      step.x = x;
      step.h_prev = h;
      step.c_prev = c;
      step.gate_i = gate_i.matrix();
      step.gate_f = gate_f.matrix();
      step.gate_g = gate_g.matrix();
      step.gate_o = gate_o.matrix();
      step.c = c_next;
      step.tanh_c = tanh_c;
      step.h = h_next;
    }
    h = h_next;
    c = c_next;
    hiddens[t] = h;
  }
  return hiddens;
}

void lstm_backward(const LstmLayerParams& params, const LstmCache& cache,
                   const std::vector<Eigen::MatrixXd>& d_hidden, LstmGrads* grads,
                   std::vector<Eigen::MatrixXd>* d_inputs) {
  const std::size_t steps = cache.steps.size();
  if (steps == 0) throw DataError("lstm_backward: empty cache");
  if (d_hidden.size() != steps) {
    throw DataError("lstm_backward: gradient sequence length mismatch");
  }
  const int hidden = params.hidden_size();
  const Eigen::Index batch = cache.steps.front().x.cols();
  if (d_inputs != nullptr) d_inputs->assign(steps, Eigen::MatrixXd());

  Eigen::MatrixXd dh_next = Eigen::MatrixXd::Zero(hidden, batch);
  Eigen::MatrixXd dc_next = Eigen::MatrixXd::Zero(hidden, batch);
  Eigen::MatrixXd d_pre(4 * hidden, batch);

  for (std::size_t ti = steps; ti-- > 0;) {
    const LstmStepCache& step = cache.steps[ti];
    if (d_hidden[ti].rows() != hidden || d_hidden[ti].cols() != batch) {
      throw DataError("lstm_backward: gradient shape mismatch at t=" + std::to_string(ti));
    }
    const Eigen::ArrayXXd dh = d_hidden[ti].array() + dh_next.array();

    const Eigen::ArrayXXd d_gate_o = dh * step.tanh_c.array();
    const Eigen::ArrayXXd dc =
        dh * step.gate_o.array() * (1.0 - step.tanh_c.array().square()) + dc_next.array();
    const Eigen::ArrayXXd d_gate_i = dc * step.gate_g.array();
    const Eigen::ArrayXXd d_gate_g = dc * step.gate_i.array();
    const Eigen::ArrayXXd d_gate_f = dc * step.c_prev.array();

    d_pre.topRows(hidden) =
        (d_gate_i * step.gate_i.array() * (1.0 - step.gate_i.array())).matrix();
    d_pre.middleRows(hidden, hidden) =
        (d_gate_f * step.gate_f.array() * (1.0 - step.gate_f.array())).matrix();
    d_pre.middleRows(2 * hidden, hidden) =
        (d_gate_g * (1.0 - step.gate_g.array().square())).matrix();
    d_pre.bottomRows(hidden) =
        (d_gate_o * step.gate_o.array() * (1.0 - step.gate_o.array())).matrix();

    grads->w_input.noalias() += d_pre * step.x.transpose();
    grads->w_recurrent.noalias() += d_pre * step.h_prev.transpose();
    grads->bias.col(0) += d_pre.rowwise().sum();

    if (d_inputs != nullptr) (*d_inputs)[ti] = params.w_input.transpose() * d_pre;
    dh_next.noalias() = params.w_recurrent.transpose() * d_pre;
    dc_next = (dc * step.gate_f.array()).matrix();
  }
}

void GaussianHeadParams::init(int input, int output, Rng& rng) {
  w_mean.resize(output, input);
  w_logvar.resize(output, input);
  b_mean = Eigen::MatrixXd::Zero(output, 1);
  b_logvar = Eigen::MatrixXd::Zero(output, 1);
  fill_uniform(w_mean, rng, -0.05, 0.05);
  fill_uniform(w_logvar, rng, -0.05, 0.05);
}

void GaussianHeadGrads::resize_like(const GaussianHeadParams& params) {
  w_mean = Eigen::MatrixXd::Zero(params.w_mean.rows(), params.w_mean.cols());
  b_mean = Eigen::MatrixXd::Zero(params.b_mean.rows(), 1);
  w_logvar = Eigen::MatrixXd::Zero(params.w_logvar.rows(), params.w_logvar.cols());
  b_logvar = Eigen::MatrixXd::Zero(params.b_logvar.rows(), 1);
}

void gaussian_head_forward(const GaussianHeadParams& params, const Eigen::MatrixXd& input,
                           Eigen::MatrixXd* mean, Eigen::MatrixXd* logvar,
                           GaussianHeadCache* cache) {
  if (input.rows() != params.input_size()) {
    throw DataError("gaussian head: input width does not match parameters");
  }
  *mean = params.w_mean * input;
  mean->colwise() += Eigen::VectorXd(params.b_mean.col(0));
  Eigen::MatrixXd raw = params.w_logvar * input;
  raw.colwise() += Eigen::VectorXd(params.b_logvar.col(0));

  const Eigen::ArrayXXd pass =
      (raw.array() >= -kLogvarClamp && raw.array() <= kLogvarClamp).cast<double>();
  *logvar = raw.array().min(kLogvarClamp).max(-kLogvarClamp).matrix();
  if (cache != nullptr) {
    cache->input = input;
    cache->clamp_pass = pass;
  }
}

void gaussian_head_backward(const GaussianHeadParams& params, const GaussianHeadCache& cache,
                            const Eigen::MatrixXd& d_mean, const Eigen::MatrixXd& d_logvar,
                            GaussianHeadGrads* grads, Eigen::MatrixXd* d_input) {
  if (d_mean.cols() != cache.input.cols() || d_logvar.cols() != cache.input.cols()) {
    throw DataError("gaussian head: gradient batch size mismatch");
  }
  const Eigen::MatrixXd d_raw = (d_logvar.array() * cache.clamp_pass).matrix();

  grads->w_mean.noalias() += d_mean * cache.input.transpose();
  grads->b_mean.col(0) += d_mean.rowwise().sum();
  grads->w_logvar.noalias() += d_raw * cache.input.transpose();
  grads->b_logvar.col(0) += d_raw.rowwise().sum();

  if (d_input != nullptr) {
    *d_input = params.w_mean.transpose() * d_mean + params.w_logvar.transpose() * d_raw;
  }
}

}  // namespace lataug
