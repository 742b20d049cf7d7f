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

#ifndef LATAUG_GRADCHECK_HPP_
#define LATAUG_GRADCHECK_HPP_

#include <cstdint>
#include <functional>

#include "lataug/adam.hpp"

namespace lataug {

struct GradCheckOptions {
  double epsilon = 1e-5;
  std::size_t max_coordinates = 0;  // 0 checks every coordinate
  std::uint64_t seed = 1;           // subset sampling when capped
};

inline constexpr std::size_t kGradCheckMinCoordinates = 200;

struct GradCheckResult {
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  std::size_t coordinates_checked = 0;
};

// Central-difference check of analytic gradients. loss_fn must evaluate the
// loss at the current parameter values and be deterministic: it is run twice
// up front and a NumericError is thrown if the results differ. analytic[i]
// holds the gradient for params[i]. Parameters are perturbed one coordinate
// at a time and restored exactly; when max_coordinates caps the work, a
// random subset of at least kGradCheckMinCoordinates coordinates is checked.
// Relative error per coordinate: |a - n| / (|a| + |n| + 1e-12).
GradCheckResult finite_difference_check(const std::function<double()>& loss_fn,
                                        const TensorList& params,
                                        const std::vector<const Eigen::MatrixXd*>& analytic,
                                        const GradCheckOptions& options = {});

}  // namespace lataug

#endif  // LATAUG_GRADCHECK_HPP_
