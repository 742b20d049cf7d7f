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

#ifndef LATAUG_TYPES_HPP_
#define LATAUG_TYPES_HPP_

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

namespace lataug {

enum class Domain { kSource, kTarget };

std::string domain_name(Domain d);
Domain parse_domain(const std::string& name);  // throws DataError on unknown

// One utterance: T frames of F filter bank channels, rows are frames.
struct Utterance {
  std::string id;
  Domain domain = Domain::kSource;
  Eigen::MatrixXd frames;  // T x F
  std::optional<std::string> transcript;
};

// A fixed-length block of consecutive frames, the unit the VAE encodes.
struct Segment {
  Eigen::MatrixXd frames;  // segment_len x F
  std::string utterance_id;
  int index_in_utterance = 0;
};

// Posterior parameters and the sampled latent for one segment.
struct LatentCode {
  Eigen::VectorXd mean;
  Eigen::VectorXd logvar;
  Eigen::VectorXd z;
  std::string utterance_id;
  int segment_index = 0;
};

}  // namespace lataug

#endif  // LATAUG_TYPES_HPP_
