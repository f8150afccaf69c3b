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

#include "awe/evaluation.h"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "awe/error.h"

namespace awe {

double CosineDistance(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size())
    throw std::invalid_argument("CosineDistance: length mismatch");
  const double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 1.0;
  return 1.0 - u.dot(v) / (nu * nv);
}

std::vector<ScoredPair> ScoreAllPairs(
    std::span<const EvalToken> tokens,
    const std::function<double(size_t, size_t)>& distance) {
  const size_t n = tokens.size();
  std::vector<ScoredPair> pairs;
  pairs.reserve(n * (n - (n > 0)) / 2);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      pairs.push_back({static_cast<int>(i), static_cast<int>(j),
                       distance(i, j),
                       tokens[i].word_type == tokens[j].word_type,
                       tokens[i].speaker == tokens[j].speaker});
  return pairs;
}

std::vector<ScoredPair> ScoreAllPairs(std::span<const EvalToken> tokens,
                                      const Matrix& embeddings) {
  if (static_cast<size_t>(embeddings.rows()) != tokens.size())
    throw DataError("have " + std::to_string(embeddings.rows()) +
                    " embeddings for " + std::to_string(tokens.size()) +
                    " tokens");
  // Normalize once; zero rows stay zero and are special-cased below.
  Eigen::VectorXd norms = embeddings.rowwise().norm();
  Matrix unit = embeddings;
  for (Eigen::Index i = 0; i < unit.rows(); ++i)
    if (norms(i) > 0) unit.row(i) /= norms(i);
  return ScoreAllPairs(tokens, [&](size_t i, size_t j) {
    if (norms(i) == 0.0 || norms(j) == 0.0) return 1.0;
    return 1.0 - unit.row(i).dot(unit.row(j));
  });
}

PrCurve AveragePrecision(std::span<const ScoredPair> pairs) {
  std::vector<const ScoredPair*> order;
  order.reserve(pairs.size());
  size_t positives = 0;
  for (const auto& p : pairs) {
    if (!std::isfinite(p.distance))
      throw DataError("non-finite distance in scored pairs");
    order.push_back(&p);
    positives += p.same_type;
  }
  if (positives == 0)
    throw DataError("average precision is undefined without positive pairs");
  std::sort(order.begin(), order.end(),
            [](const ScoredPair* a, const ScoredPair* b) {
              return a->distance < b->distance;
            });

  PrCurve curve;
  size_t tp = 0, seen = 0;
  for (size_t i = 0; i < order.size();) {
    size_t j = i, group_pos = 0;
    while (j < order.size() && order[j]->distance == order[i]->distance) {
      group_pos += order[j]->same_type;
      ++j;
    }
    tp += group_pos;
    seen = j;
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    curve.ap += static_cast<double>(group_pos) /
                static_cast<double>(positives) * precision;
    curve.points.push_back({order[i]->distance, precision, recall});
    i = j;
  }
  return curve;
}

SameDifferentResult SummarizePairs(std::vector<ScoredPair> pairs,
                                   size_t num_tokens) {
  SameDifferentResult result;
  result.num_tokens = num_tokens;
  result.num_pairs = pairs.size();
  std::vector<ScoredPair> same_spk, diff_spk;
  for (const auto& p : pairs) {
    result.num_positive += p.same_type;
    (p.same_speaker ? same_spk : diff_spk).push_back(p);
  }
  result.curve = AveragePrecision(pairs);
  result.ap = result.curve.ap;
  auto subset_ap = [](const std::vector<ScoredPair>& subset)
      -> std::optional<double> {
    for (const auto& p : subset)
      if (p.same_type) return AveragePrecision(subset).ap;
    return std::nullopt;
  };
  result.ap_same_speaker = subset_ap(same_spk);
  result.ap_different_speaker = subset_ap(diff_spk);
  return result;
}

SameDifferentResult SameDifferentEval(const FeatureArchive& archive,
                                      std::span<const EvalToken> tokens,
                                      const EmbedderSpec& embedder) {
  using Clock = std::chrono::steady_clock;
  auto seconds_since = [](Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };

  auto embed_start = Clock::now();
  std::vector<FrameMatrix> segments;
  segments.reserve(tokens.size());
  for (const auto& t : tokens)
    segments.push_back(ExtractSegment(archive, t.segment).frames);

  Matrix embeddings;
  switch (embedder.kind) {
    case EmbedderKind::kModel: {
      if (!embedder.model) throw UsageError("model embedder needs a checkpoint");
      if (embedder.model->config.input_dim != archive.dim())
        throw DataError("checkpoint expects " +
                        std::to_string(embedder.model->config.input_dim) +
                        "-dim features, archive has " +
                        std::to_string(archive.dim()));
      std::vector<const FrameMatrix*> ptrs;
      for (const auto& s : segments) ptrs.push_back(&s);
      embeddings = EmbedAll(embedder.model->params, embedder.model->config, ptrs);
      break;
    }
    case EmbedderKind::kDownsample: {
      embeddings.resize(static_cast<Eigen::Index>(segments.size()),
                        embedder.downsample_frames * archive.dim());
      for (size_t i = 0; i < segments.size(); ++i)
        embeddings.row(static_cast<Eigen::Index>(i)) =
            DownsampleEmbed(segments[i], embedder.downsample_frames)
                .transpose();
      break;
    }
    case EmbedderKind::kPrecomputed:
      if (!embedder.embeddings)
        throw UsageError("precomputed embedder needs an embedding matrix");
      embeddings = *embedder.embeddings;
      break;
    case EmbedderKind::kDtw:
      break;
  }
  const double embed_seconds = seconds_since(embed_start);

  auto score_start = Clock::now();
  std::vector<ScoredPair> pairs =
      embedder.kind == EmbedderKind::kDtw
          ? ScoreAllPairs(tokens,
                          [&](size_t i, size_t j) {
                            return DtwCost(segments[i], segments[j],
                                           embedder.dtw);
                          })
          : ScoreAllPairs(tokens, embeddings);
  const double score_seconds = seconds_since(score_start);

  SameDifferentResult result = SummarizePairs(std::move(pairs), tokens.size());
  result.embed_seconds = embed_seconds;
  result.score_seconds = score_seconds;
  return result;
}

}  // namespace awe
