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

#include "lataug/gradcheck.hpp"

#include <cmath>
#include <numeric>

#include "lataug/common.hpp"

namespace lataug {

GradCheckResult finite_difference_check(const std::function<double()>& loss_fn,
                                        const TensorList& params,
                                        const std::vector<const Eigen::MatrixXd*>& analytic,
                                        const GradCheckOptions& options) {
  if (params.size() != analytic.size()) {
    throw NumericError("gradient check: parameter/gradient tensor counts differ");
  }
  const double first = loss_fn();
  const double second = loss_fn();
  if (!(first == second)) {
    throw NumericError("gradient check: loss function is not deterministic (" +
                       std::to_string(first) + " vs " + std::to_string(second) + ")");
  }

  struct Coord {
    std::size_t tensor;
    Eigen::Index flat;
  };
  std::vector<Coord> coords;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (analytic[i]->rows() != params[i].value->rows() ||
        analytic[i]->cols() != params[i].value->cols()) {
      throw NumericError("gradient check: shape mismatch for tensor '" + params[i].name + "'");
    }
    for (Eigen::Index k = 0; k < params[i].value->size(); ++k) coords.push_back({i, k});
  }
  if (coords.empty()) throw NumericError("gradient check: no parameters to check");

  if (options.max_coordinates > 0 && coords.size() > options.max_coordinates) {
    const std::size_t keep = std::max(options.max_coordinates, kGradCheckMinCoordinates);
    if (coords.size() > keep) {
      Rng rng(options.seed);
      // Partial Fisher-Yates: the first `keep` entries become the sample.
      for (std::size_t i = 0; i < keep; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(
                                      static_cast<std::uint64_t>(coords.size() - i)));
        std::swap(coords[i], coords[j]);
      }
      coords.resize(keep);
    }
  }

  GradCheckResult result;
  double total = 0.0;
  for (const Coord& c : coords) {
    double* cell = params[c.tensor].value->data() + c.flat;
    const double saved = *cell;
    *cell = saved + options.epsilon;
    const double loss_plus = loss_fn();
    *cell = saved - options.epsilon;
    const double loss_minus = loss_fn();
    *cell = saved;

    const double numeric = (loss_plus - loss_minus) / (2.0 * options.epsilon);
    const double analytic_value = *(analytic[c.tensor]->data() + c.flat);
    const double rel = std::abs(analytic_value - numeric) /
                       (std::abs(analytic_value) + std::abs(numeric) + 1e-12);
    result.max_rel_error = std::max(result.max_rel_error, rel);
    total += rel;
  }
  result.coordinates_checked = coords.size();
  result.mean_rel_error = total / static_cast<double>(coords.size());
  return result;
}

}  // namespace lataug
