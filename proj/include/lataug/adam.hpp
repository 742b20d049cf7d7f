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

#ifndef LATAUG_ADAM_HPP_
#define LATAUG_ADAM_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lataug {

// Uniform mutable view over a model's parameter matrices; names are stable
// identifiers used by checkpoints and diagnostics.
struct NamedTensor {
  std::string name;
  Eigen::MatrixXd* value;
};

using TensorList = std::vector<NamedTensor>;

struct AdamConfig {
  double beta1 = 0.95;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-3;
  double l2_weight = 1e-4;
};

struct AdamState {
  std::vector<Eigen::MatrixXd> m;
  std::vector<Eigen::MatrixXd> v;
  std::int64_t step = 0;

  void init(const TensorList& params);  // zero moments shaped like params
};

// Bias-corrected Adam update in place. L2 regularization is realized as
// l2_weight * param added to each gradient before the moment updates, so the
// stored gradient tensors are left untouched. A non-finite gradient aborts
// with a NumericError naming the offending tensor.
void adam_step(const TensorList& params, const TensorList& grads, AdamState& state,
               const AdamConfig& config);

}  // namespace lataug

#endif  // LATAUG_ADAM_HPP_
