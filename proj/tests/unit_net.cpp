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

#include <cmath>
#include <vector>

#include <doctest.h>

#include "lataug/adam.hpp"
#include "lataug/common.hpp"
#include "lataug/gradcheck.hpp"
#include "lataug/lstm.hpp"

namespace {

using lataug::AdamConfig;
using lataug::AdamState;
using lataug::GaussianHeadCache;
using lataug::GaussianHeadGrads;
using lataug::GaussianHeadParams;
using lataug::LstmCache;
using lataug::LstmGrads;
using lataug::LstmLayerParams;
using lataug::Rng;

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

LstmLayerParams zero_lstm(int input, int hidden) {
  LstmLayerParams p;
  p.w_input = Eigen::MatrixXd::Zero(4 * hidden, input);
  p.w_recurrent = Eigen::MatrixXd::Zero(4 * hidden, hidden);
  p.bias = Eigen::MatrixXd::Zero(4 * hidden, 1);
  return p;
}

LstmLayerParams random_lstm(int input, int hidden, Rng& rng) {
  LstmLayerParams p = zero_lstm(input, hidden);
  for (Eigen::MatrixXd* m : {&p.w_input, &p.w_recurrent, &p.bias}) {
    for (Eigen::Index i = 0; i < m->size(); ++i) {
      m->data()[i] = rng.uniform_range(-0.4, 0.4);
    }
  }
  return p;
}

std::vector<Eigen::MatrixXd> random_inputs(int steps, int input, int batch, Rng& rng) {
  std::vector<Eigen::MatrixXd> xs;
  for (int t = 0; t < steps; ++t) {
    Eigen::MatrixXd x(input, batch);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    xs.push_back(std::move(x));
  }
  return xs;
}

// Scalar loss used by the gradient checks: fixed random projection of every
// hidden step, so all gates influence it.
double projected_loss(const std::vector<Eigen::MatrixXd>& hiddens,
                      const std::vector<Eigen::MatrixXd>& proj) {
  double loss = 0.0;
  for (std::size_t t = 0; t < hiddens.size(); ++t) {
    loss += (hiddens[t].array() * proj[t].array()).sum();
  }
  return loss;
}

}  // namespace

TEST_CASE("zero weights and inputs give zero hidden states") {
  const LstmLayerParams params = zero_lstm(3, 4);
  const std::vector<Eigen::MatrixXd> inputs(5, Eigen::MatrixXd::Zero(3, 2));
  const Eigen::MatrixXd h0 = Eigen::MatrixXd::Zero(4, 2);
  const auto hiddens = lataug::lstm_forward(params, inputs, h0, h0, nullptr);
  REQUIRE(hiddens.size() == 5);
  for (const auto& h : hiddens) CHECK(h.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single scalar step matches hand-computed gate arithmetic") {
  LstmLayerParams params = zero_lstm(1, 1);
  params.w_input << 0.5, -0.3, 0.8, 0.2;   // rows [i, f, g, o]
  params.w_recurrent << 0.1, 0.4, -0.6, 0.9;
  params.bias << 0.1, 1.0, -0.2, 0.3;

  const double x = 0.7;
  std::vector<Eigen::MatrixXd> inputs{Eigen::MatrixXd::Constant(1, 1, x)};
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
  LstmCache cache;
  const auto hiddens = lataug::lstm_forward(params, inputs, zero, zero, &cache);

  const double i = sigmoid(0.5 * x + 0.1);
  const double f = sigmoid(-0.3 * x + 1.0);
  const double g = std::tanh(0.8 * x - 0.2);
  const double o = sigmoid(0.2 * x + 0.3);
  const double c = i * g;  // zero previous cell
  const double h = o * std::tanh(c);

  CHECK(cache.steps[0].gate_i(0, 0) == doctest::Approx(i).epsilon(1e-15));
  CHECK(cache.steps[0].gate_f(0, 0) == doctest::Approx(f).epsilon(1e-15));
  CHECK(cache.steps[0].gate_g(0, 0) == doctest::Approx(g).epsilon(1e-15));
  CHECK(cache.steps[0].gate_o(0, 0) == doctest::Approx(o).epsilon(1e-15));
  CHECK(cache.steps[0].c(0, 0) == doctest::Approx(c).epsilon(1e-15));
  CHECK(hiddens[0](0, 0) == doctest::Approx(h).epsilon(1e-15));
}

TEST_CASE("a three step sequence equals chained single steps") {
  Rng rng(2);
  const LstmLayerParams params = random_lstm(3, 4, rng);
  const auto inputs = random_inputs(3, 3, 2, rng);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 2);

  const auto full = lataug::lstm_forward(params, inputs, zero, zero, nullptr);

  Eigen::MatrixXd h = zero;
  Eigen::MatrixXd c = zero;
  for (int t = 0; t < 3; ++t) {
    LstmCache cache;
    const auto step = lataug::lstm_forward(params, {inputs[static_cast<std::size_t>(t)]},
                                           h, c, &cache);
    h = step[0];
    c = cache.steps[0].c;
    CHECK((full[static_cast<std::size_t>(t)] - h).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("forward rejects shape mismatches") {
  Rng rng(3);
  const LstmLayerParams params = random_lstm(3, 4, rng);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 2);
  CHECK_THROWS_AS(
      lataug::lstm_forward(params, {Eigen::MatrixXd::Zero(2, 2)}, zero, zero, nullptr),
      lataug::DataError);
  CHECK_THROWS_AS(lataug::lstm_forward(params, {Eigen::MatrixXd::Zero(3, 2)},
                                       Eigen::MatrixXd::Zero(3, 2), zero, nullptr),
                  lataug::DataError);
}

TEST_CASE("zero output gradients give zero parameter gradients") {
  Rng rng(4);
  const LstmLayerParams params = random_lstm(2, 3, rng);
  const auto inputs = random_inputs(4, 2, 2, rng);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 2);
  LstmCache cache;
  lataug::lstm_forward(params, inputs, zero, zero, &cache);

  LstmGrads grads;
  grads.resize_like(params);
  const std::vector<Eigen::MatrixXd> d_hidden(4, Eigen::MatrixXd::Zero(3, 2));
  std::vector<Eigen::MatrixXd> d_inputs;
  lataug::lstm_backward(params, cache, d_hidden, &grads, &d_inputs);
  CHECK(grads.w_input.cwiseAbs().maxCoeff() == 0.0);
  CHECK(grads.w_recurrent.cwiseAbs().maxCoeff() == 0.0);
  CHECK(grads.bias.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& d : d_inputs) CHECK(d.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("candidate bias gradient of a silent one-unit net is 0.25") {
  // All-zero weights, one step: h = sigma(0) * tanh(sigma(0) * tanh(b_g)),
  // so only the candidate bias moves the output at the origin:
  // dh/db_g = 0.5 * 1 * 0.5 = 0.25, all other bias gradients vanish.
  const LstmLayerParams params = zero_lstm(1, 1);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
  LstmCache cache;
  lataug::lstm_forward(params, {zero}, zero, zero, &cache);

  LstmGrads grads;
  grads.resize_like(params);
  lataug::lstm_backward(params, cache, {Eigen::MatrixXd::Ones(1, 1)}, &grads, nullptr);
  CHECK(grads.bias(0, 0) == doctest::Approx(0.0).epsilon(1e-15));  // input gate
  CHECK(grads.bias(1, 0) == doctest::Approx(0.0).epsilon(1e-15));  // forget gate
  CHECK(grads.bias(2, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(grads.bias(3, 0) == doctest::Approx(0.0).epsilon(1e-15));  // output gate
}

TEST_CASE("backward matches finite differences across many seeds") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    LstmLayerParams params = random_lstm(3, 4, rng);
    const auto inputs = random_inputs(4, 3, 2, rng);
    const auto proj = random_inputs(4, 4, 2, rng);
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 2);

    LstmCache cache;
    const auto hiddens = lataug::lstm_forward(params, inputs, zero, zero, &cache);
    LstmGrads grads;
    grads.resize_like(params);
    lataug::lstm_backward(params, cache, proj, &grads, nullptr);

    const lataug::TensorList tensors{{"w_input", &params.w_input},
                                     {"w_recurrent", &params.w_recurrent},
                                     {"bias", &params.bias}};
    const auto loss = [&]() {
      return projected_loss(lataug::lstm_forward(params, inputs, zero, zero, nullptr), proj);
    };
    const lataug::GradCheckResult result = lataug::finite_difference_check(
        loss, tensors, {&grads.w_input, &grads.w_recurrent, &grads.bias});
    CHECK(result.max_rel_error < 1e-4);
  }
}

TEST_CASE("input gradients match finite differences") {
  Rng rng(31);
  LstmLayerParams params = random_lstm(2, 3, rng);
  auto inputs = random_inputs(3, 2, 1, rng);
  const auto proj = random_inputs(3, 3, 1, rng);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 1);

  LstmCache cache;
  lataug::lstm_forward(params, inputs, zero, zero, &cache);
  LstmGrads grads;
  grads.resize_like(params);
  std::vector<Eigen::MatrixXd> d_inputs;
  lataug::lstm_backward(params, cache, proj, &grads, &d_inputs);

  const double eps = 1e-6;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    for (Eigen::Index k = 0; k < inputs[t].size(); ++k) {
      const double saved = inputs[t].data()[k];
      inputs[t].data()[k] = saved + eps;
      const double up = projected_loss(lataug::lstm_forward(params, inputs, zero, zero, nullptr), proj);
      inputs[t].data()[k] = saved - eps;
      const double down = projected_loss(lataug::lstm_forward(params, inputs, zero, zero, nullptr), proj);
      inputs[t].data()[k] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = d_inputs[t].data()[k];
      CHECK(std::abs(analytic - numeric) /
                (std::abs(analytic) + std::abs(numeric) + 1e-12) < 1e-4);
    }
  }
}

TEST_CASE("initialization sets the forget bias to one") {
  Rng rng(9);
  LstmLayerParams params;
  params.init(3, 4, rng);
  REQUIRE(params.bias.rows() == 16);
  for (int r = 0; r < 16; ++r) {
    const bool forget_row = r >= 4 && r < 8;
    CHECK(params.bias(r, 0) == (forget_row ? 1.0 : 0.0));
  }
  CHECK(params.w_input.cwiseAbs().maxCoeff() <= 0.05);
  CHECK(params.w_recurrent.cwiseAbs().maxCoeff() <= 0.05);
  CHECK(params.w_input.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("gaussian head with zero parameters outputs zero mean and logvar") {
  GaussianHeadParams params;
  params.w_mean = Eigen::MatrixXd::Zero(2, 3);
  params.b_mean = Eigen::MatrixXd::Zero(2, 1);
  params.w_logvar = Eigen::MatrixXd::Zero(2, 3);
  params.b_logvar = Eigen::MatrixXd::Zero(2, 1);

  Eigen::MatrixXd mean, logvar;
  lataug::gaussian_head_forward(params, Eigen::MatrixXd::Random(3, 4), &mean, &logvar, nullptr);
  CHECK(mean.cwiseAbs().maxCoeff() == 0.0);
  CHECK(logvar.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("logvar output is clamped with zero gradient outside the range") {
  GaussianHeadParams params;
  params.w_mean = Eigen::MatrixXd::Zero(1, 1);
  params.b_mean = Eigen::MatrixXd::Zero(1, 1);
  params.w_logvar = Eigen::MatrixXd::Zero(1, 1);
  params.b_logvar = Eigen::MatrixXd::Constant(1, 1, 15.0);

  Eigen::MatrixXd mean, logvar;
  GaussianHeadCache cache;
  lataug::gaussian_head_forward(params, Eigen::MatrixXd::Ones(1, 1), &mean, &logvar, &cache);
  CHECK(logvar(0, 0) == 8.0);

  GaussianHeadGrads grads;
  grads.resize_like(params);
  lataug::gaussian_head_backward(params, cache, Eigen::MatrixXd::Zero(1, 1),
                                 Eigen::MatrixXd::Ones(1, 1), &grads, nullptr);
  CHECK(grads.b_logvar(0, 0) == 0.0);
  CHECK(grads.w_logvar(0, 0) == 0.0);

  params.b_logvar(0, 0) = -15.0;
  lataug::gaussian_head_forward(params, Eigen::MatrixXd::Ones(1, 1), &mean, &logvar, &cache);
  CHECK(logvar(0, 0) == -8.0);
}

TEST_CASE("gaussian head backward matches finite differences inside the clamp") {
  Rng rng(12);
  GaussianHeadParams params;
  params.init(3, 2, rng);
  // init draws tiny weights; scale up so the check is not near-degenerate
  params.w_mean *= 10.0;
  params.w_logvar *= 10.0;

  Eigen::MatrixXd input(3, 2);
  for (Eigen::Index i = 0; i < input.size(); ++i) input.data()[i] = rng.normal();
  Eigen::MatrixXd proj_mean(2, 2), proj_logvar(2, 2);
  for (Eigen::Index i = 0; i < proj_mean.size(); ++i) {
    proj_mean.data()[i] = rng.normal();
    proj_logvar.data()[i] = rng.normal();
  }

  Eigen::MatrixXd mean, logvar;
  GaussianHeadCache cache;
  lataug::gaussian_head_forward(params, input, &mean, &logvar, &cache);
  GaussianHeadGrads grads;
  grads.resize_like(params);
  lataug::gaussian_head_backward(params, cache, proj_mean, proj_logvar, &grads, nullptr);

  const lataug::TensorList tensors{{"w_mean", &params.w_mean},
                                   {"b_mean", &params.b_mean},
                                   {"w_logvar", &params.w_logvar},
                                   {"b_logvar", &params.b_logvar}};
  const auto loss = [&]() {
    Eigen::MatrixXd m, lv;
    lataug::gaussian_head_forward(params, input, &m, &lv, nullptr);
    return (m.array() * proj_mean.array()).sum() + (lv.array() * proj_logvar.array()).sum();
  };
  const lataug::GradCheckResult result = lataug::finite_difference_check(
      loss, tensors, {&grads.w_mean, &grads.b_mean, &grads.w_logvar, &grads.b_logvar});
  CHECK(result.max_rel_error < 1e-4);
}

TEST_CASE("adam with zero gradients and zero decay is the identity") {
  Eigen::MatrixXd p = Eigen::MatrixXd::Random(3, 2);
  const Eigen::MatrixXd before = p;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 2);
  const lataug::TensorList params{{"p", &p}};
  const lataug::TensorList grads{{"p", &g}};

  AdamState state;
  state.init(params);
  AdamConfig config;
  config.l2_weight = 0.0;
  lataug::adam_step(params, grads, state, config);
  CHECK((p.array() == before.array()).all());
  CHECK(state.step == 1);
}

TEST_CASE("first adam step matches the closed-form update") {
  Eigen::MatrixXd p(1, 2);
  p << 2.0, -3.0;
  Eigen::MatrixXd g(1, 2);
  g << 0.5, -0.25;
  const lataug::TensorList params{{"p", &p}};
  const lataug::TensorList grads{{"p", &g}};

  AdamState state;
  state.init(params);
  AdamConfig config;
  config.l2_weight = 0.0;
  lataug::adam_step(params, grads, state, config);

  // After one step from zero moments the bias corrections cancel exactly:
  // delta = -lr * g / (|g| + eps).
  for (int c = 0; c < 2; ++c) {
    const double expected =
        (c == 0 ? 2.0 : -3.0) -
        config.learning_rate * g(0, c) / (std::abs(g(0, c)) + config.epsilon);
    CHECK(p(0, c) == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(state.m[0](0, 0) == doctest::Approx(0.05 * 0.5).epsilon(1e-12));
  CHECK(state.v[0](0, 0) == doctest::Approx(0.001 * 0.25).epsilon(1e-9));
}

TEST_CASE("weight decay acts through the gradient") {
  Eigen::MatrixXd p(1, 1);
  p << 4.0;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(1, 1);
  const lataug::TensorList params{{"p", &p}};
  const lataug::TensorList grads{{"p", &g}};

  AdamState state;
  state.init(params);
  AdamConfig config;  // l2_weight 1e-4
  lataug::adam_step(params, grads, state, config);
  const double effective = 1e-4 * 4.0;
  const double expected = 4.0 - config.learning_rate * effective / (effective + config.epsilon);
  CHECK(p(0, 0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(g(0, 0) == 0.0);  // stored gradient untouched
}

TEST_CASE("non-finite gradients abort and name the tensor") {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
  g(1, 1) = std::nan("");
  const lataug::TensorList params{{"dec.head.w_mean", &p}};
  const lataug::TensorList grads{{"dec.head.w_mean", &g}};
  AdamState state;
  state.init(params);
  AdamConfig config;
  CHECK_THROWS_WITH_AS(lataug::adam_step(params, grads, state, config),
                       doctest::Contains("dec.head.w_mean"), lataug::NumericError);
}

TEST_CASE("gradient checker is near-exact on a quadratic") {
  Eigen::MatrixXd p = Eigen::MatrixXd::Random(5, 4);
  Eigen::MatrixXd analytic = p;
  const lataug::TensorList params{{"p", &p}};
  const auto loss = [&]() { return 0.5 * p.squaredNorm(); };
  const lataug::GradCheckResult result =
      lataug::finite_difference_check(loss, params, {&analytic});
  CHECK(result.coordinates_checked == 20);
  CHECK(result.max_rel_error < 1e-8);
}

TEST_CASE("gradient checker rejects a non-deterministic loss") {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd analytic = Eigen::MatrixXd::Zero(2, 2);
  const lataug::TensorList params{{"p", &p}};
  int calls = 0;
  const auto loss = [&]() { return static_cast<double>(++calls); };
  CHECK_THROWS_AS(lataug::finite_difference_check(loss, params, {&analytic}),
                  lataug::NumericError);
}

TEST_CASE("capped gradient checks still cover 200 coordinates") {
  Eigen::MatrixXd p = Eigen::MatrixXd::Random(30, 10);
  Eigen::MatrixXd analytic = p;
  const lataug::TensorList params{{"p", &p}};
  lataug::GradCheckOptions options;
  options.max_coordinates = 10;
  const auto loss = [&]() { return 0.5 * p.squaredNorm(); };
  const lataug::GradCheckResult result =
      lataug::finite_difference_check(loss, params, {&analytic}, options);
  CHECK(result.coordinates_checked == 200);
  // The summed loss is ~50, so difference-quotient rounding noise reaches
  // ~1e-7 relative on the smallest coordinates.
  CHECK(result.max_rel_error < 1e-6);
}
