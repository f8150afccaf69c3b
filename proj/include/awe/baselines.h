// Copyright 2026 The AWE Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AWE_BASELINES_H_
#define AWE_BASELINES_H_

#include <string_view>

#include <Eigen/Core>

#include "awe/data_io.h"

namespace awe {

enum class LocalDistance { kCosine, kEuclidean, kSquaredEuclidean };

std::string_view ToString(LocalDistance d);
LocalDistance ParseLocalDistance(std::string_view text);

struct DtwConfig {
  LocalDistance local_distance = LocalDistance::kCosine;
  bool normalize_by_path_length = true;
};

// Concatenation of k frames sampled at positions i * (T - 1) / (k - 1),
// linearly interpolated between neighbouring frames. Length k * D.
Eigen::VectorXd DownsampleEmbed(const FrameMatrix& x, int k = 10);

// Frame-level distance between rows. Cosine distance treats a zero-norm frame
// as distance 1.
double LocalCost(const FrameMatrix& a, Eigen::Index i, const FrameMatrix& b,
                 Eigen::Index j, LocalDistance d);

// Cost of the best monotone alignment using diagonal, horizontal and vertical
// steps. With normalization the cost is divided by the number of cells on
// the optimal path; among equal-cost paths the shortest is taken.
double DtwCost(const FrameMatrix& a, const FrameMatrix& b,
               const DtwConfig& cfg);

}  // namespace awe

#endif  // AWE_BASELINES_H_
