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

#include "lataug/adam.hpp"

#include <cmath>

#include "lataug/common.hpp"

namespace lataug {

void AdamState::init(const TensorList& params) {
  m.clear();
  v.clear();
  step = 0;
  m.reserve(params.size());
  v.reserve(params.size());
  for (const NamedTensor& p : params) {
    m.push_back(Eigen::MatrixXd::Zero(p.value->rows(), p.value->cols()));
    v.push_back(Eigen::MatrixXd::Zero(p.value->rows(), p.value->cols()));
  }
}

void adam_step(const TensorList& params, const TensorList& grads, AdamState& state,
               const AdamConfig& config) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size()) {
    throw NumericError("adam: parameter/gradient/state tensor counts differ");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));

  for (std::size_t i = 0; i < params.size(); ++i) {
    Eigen::MatrixXd& p = *params[i].value;
    const Eigen::MatrixXd& g_raw = *grads[i].value;
    if (p.rows() != g_raw.rows() || p.cols() != g_raw.cols()) {
      throw NumericError("adam: shape mismatch for tensor '" + params[i].name + "'");
    }
    if (!g_raw.allFinite()) {
      throw NumericError("adam: non-finite gradient in tensor '" + grads[i].name + "'");
    }
    const Eigen::ArrayXXd g = g_raw.array() + config.l2_weight * p.array();
    state.m[i] = config.beta1 * state.m[i].array() + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i].array() + (1.0 - config.beta2) * g.square();
    const Eigen::ArrayXXd m_hat = state.m[i].array() / bc1;
    const Eigen::ArrayXXd v_hat = state.v[i].array() / bc2;
    p.array() -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
  }
}

}  // namespace lataug
