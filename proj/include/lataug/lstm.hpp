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

#ifndef LATAUG_LSTM_HPP_
#define LATAUG_LSTM_HPP_

#include <vector>

#include <Eigen/Dense>

#include "lataug/common.hpp"

// Standard LSTM cell, sigmoid gates, tanh candidate and cell output, no
// peepholes. Packed gate rows in order [input, forget, candidate, output].
// All sequence APIs are time-major: one matrix per step, columns are the
// batch. Biases are stored as n x 1 matrices so every parameter shares one
// tensor type.

namespace lataug {

struct LstmLayerParams {
  Eigen::MatrixXd w_input;      // 4H x X
  Eigen::MatrixXd w_recurrent;  // 4H x H
  Eigen::MatrixXd bias;         // 4H x 1

  int input_size() const { return static_cast<int>(w_input.cols()); }
  int hidden_size() const { return static_cast<int>(w_recurrent.cols()); }

  // Weights uniform(-0.05, 0.05), zero biases except forget-gate bias +1.
  void init(int input, int hidden, Rng& rng);
};

struct LstmGrads {
  Eigen::MatrixXd w_input;
  Eigen::MatrixXd w_recurrent;
  Eigen::MatrixXd bias;

  void resize_like(const LstmLayerParams& params);
};

struct LstmStepCache {
  Eigen::MatrixXd x;       // X x B
  Eigen::MatrixXd h_prev;  // H x B
  Eigen::MatrixXd c_prev;  // H x B
  Eigen::MatrixXd gate_i;  // H x B, post-sigmoid
  Eigen::MatrixXd gate_f;  // H x B, post-sigmoid
  Eigen::MatrixXd gate_g;  // H x B, post-tanh
  Eigen::MatrixXd gate_o;  // H x B, post-sigmoid
  Eigen::MatrixXd c;       // H x B
  Eigen::MatrixXd tanh_c;  // H x B
  Eigen::MatrixXd h;       // H x B
};

struct LstmCache {
  std::vector<LstmStepCache> steps;
};

// Runs the recurrence from (h0, c0); pass zero matrices for a cold start.
// cache may be null when no backward pass will follow.
std::vector<Eigen::MatrixXd> lstm_forward(const LstmLayerParams& params,
                                          const std::vector<Eigen::MatrixXd>& inputs,
                                          const Eigen::MatrixXd& h0, const Eigen::MatrixXd& c0,
                                          LstmCache* cache);

// Full backpropagation through time. d_hidden holds the loss gradient wrt
// each step's hidden output (zero matrices for unused steps). Parameter
// gradients are accumulated (+=) into grads; d_inputs, when non-null, is
// overwritten with the loss gradient wrt each input step.
void lstm_backward(const LstmLayerParams& params, const LstmCache& cache,
                   const std::vector<Eigen::MatrixXd>& d_hidden, LstmGrads* grads,
                   std::vector<Eigen::MatrixXd>* d_inputs);

inline constexpr double kLogvarClamp = 8.0;

// Two affine heads over a shared input: mean = Wm*h + bm and
// logvar = clamp(Wv*h + bv, [-kLogvarClamp, kLogvarClamp]); the clamp has
// zero gradient outside its range.
struct GaussianHeadParams {
  Eigen::MatrixXd w_mean;    // D x In
  Eigen::MatrixXd b_mean;    // D x 1
  Eigen::MatrixXd w_logvar;  // D x In
  Eigen::MatrixXd b_logvar;  // D x 1

  int input_size() const { return static_cast<int>(w_mean.cols()); }
  int output_size() const { return static_cast<int>(w_mean.rows()); }

  void init(int input, int output, Rng& rng);
};

struct GaussianHeadGrads {
  Eigen::MatrixXd w_mean;
  Eigen::MatrixXd b_mean;
  Eigen::MatrixXd w_logvar;
  Eigen::MatrixXd b_logvar;

  void resize_like(const GaussianHeadParams& params);
};

struct GaussianHeadCache {
  Eigen::MatrixXd input;       // In x B
  Eigen::ArrayXXd clamp_pass;  // D x B, 1 inside the clamp, 0 outside
};

void gaussian_head_forward(const GaussianHeadParams& params, const Eigen::MatrixXd& input,
                           Eigen::MatrixXd* mean, Eigen::MatrixXd* logvar,
                           GaussianHeadCache* cache);

// Accumulates (+=) into grads; d_input, when non-null, is overwritten.
void gaussian_head_backward(const GaussianHeadParams& params, const GaussianHeadCache& cache,
                            const Eigen::MatrixXd& d_mean, const Eigen::MatrixXd& d_logvar,
                            GaussianHeadGrads* grads, Eigen::MatrixXd* d_input);

}  // namespace lataug

#endif  // LATAUG_LSTM_HPP_
