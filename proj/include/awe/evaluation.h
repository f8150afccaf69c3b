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

#ifndef AWE_EVALUATION_H_
#define AWE_EVALUATION_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "awe/baselines.h"
#include "awe/data_io.h"
#include "awe/models.h"

namespace awe {

// 1 - u.v / (|u| |v|); 1 if either vector has zero norm.
double CosineDistance(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

struct ScoredPair {
  int index_a = 0;
  int index_b = 0;
  double distance = 0.0;
  bool same_type = false;
  bool same_speaker = false;
};

// All n(n-1)/2 unordered token pairs, index_a < index_b.
std::vector<ScoredPair> ScoreAllPairs(
    std::span<const EvalToken> tokens,
    const std::function<double(size_t, size_t)>& distance);

// Cosine distances between the rows of `embeddings`.
std::vector<ScoredPair> ScoreAllPairs(std::span<const EvalToken> tokens,
                                      const Matrix& embeddings);

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct PrCurve {
  // One point per distinct distance, in increasing threshold order.
  std::vector<PrPoint> points;
  double ap = 0.0;
};

// Area under the precision-recall curve traced by sweeping a distance
// threshold: the mean precision at the ranks of the positive pairs, where
// pairs at equal distance are admitted together. Throws DataError when there
// are no positive pairs.
PrCurve AveragePrecision(std::span<const ScoredPair> pairs);

enum class EmbedderKind { kModel, kDownsample, kDtw, kPrecomputed };

struct EmbedderSpec {
  EmbedderKind kind = EmbedderKind::kDownsample;
  const Checkpoint* model = nullptr;            // kModel
  const Matrix* embeddings = nullptr;           // kPrecomputed, one row/token
  DtwConfig dtw;                                // kDtw
  int downsample_frames = 10;                   // kDownsample
};

struct SameDifferentResult {
  PrCurve curve;
  double ap = 0.0;
  // Supplementary: AP restricted to same-speaker / cross-speaker pairs.
  std::optional<double> ap_same_speaker;
  std::optional<double> ap_different_speaker;
  size_t num_tokens = 0;
  size_t num_pairs = 0;
  size_t num_positive = 0;
  double embed_seconds = 0.0;
  double score_seconds = 0.0;
};

// Extracts every token's segment, embeds it (or keeps the raw frames for
// DTW), scores all pairs and computes AP.
SameDifferentResult SameDifferentEval(const FeatureArchive& archive,
                                      std::span<const EvalToken> tokens,
                                      const EmbedderSpec& embedder);

// Same as above for pairs that are already scored.
SameDifferentResult SummarizePairs(std::vector<ScoredPair> pairs,
                                   size_t num_tokens);

}  // namespace awe

#endif  // AWE_EVALUATION_H_
