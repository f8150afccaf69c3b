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

#include "awe/baselines.h"

#include <cmath>
#include <limits>
#include <vector>

#include "awe/error.h"

namespace awe {

std::string_view ToString(LocalDistance d) {
  switch (d) {
    case LocalDistance::kCosine: return "cosine";
    case LocalDistance::kEuclidean: return "euclidean";
    case LocalDistance::kSquaredEuclidean: return "sqeuclidean";
  }
  return "?";
}

LocalDistance ParseLocalDistance(std::string_view text) {
  if (text == "cosine") return LocalDistance::kCosine;
  if (text == "euclidean") return LocalDistance::kEuclidean;
  if (text == "sqeuclidean") return LocalDistance::kSquaredEuclidean;
  throw UsageError("unknown local distance '" + std::string(text) +
                   "' (expected cosine, euclidean or sqeuclidean)");
}

Eigen::VectorXd DownsampleEmbed(const FrameMatrix& x, int k) {
  if (x.rows() < 1) throw DataError("cannot downsample an empty segment");
  if (k < 1) throw std::invalid_argument("downsample factor must be >= 1");
  const Eigen::Index t = x.rows(), d = x.cols();
  Eigen::VectorXd out(k * d);
  for (int i = 0; i < k; ++i) {
    const double pos =
        (k == 1 || t == 1)
            ? 0.0
            : static_cast<double>(i * (t - 1)) / static_cast<double>(k - 1);
    const auto lo = static_cast<Eigen::Index>(std::floor(pos));
    const Eigen::Index hi = std::min(lo + 1, t - 1);
    const double frac = pos - static_cast<double>(lo);
    out.segment(i * d, d) =
        ((1.0 - frac) * x.row(lo).cast<double>() +
         frac * x.row(hi).cast<double>())
            .transpose();
  }
  return out;
}

double LocalCost(const FrameMatrix& a, Eigen::Index i, const FrameMatrix& b,
                 Eigen::Index j, LocalDistance d) {
  switch (d) {
    case LocalDistance::kCosine: {
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        const double x = a(i, c), y = b(j, c);
        dot += x * y;
        na += x * x;
        nb += y * y;
      }
      if (na == 0.0 || nb == 0.0) return 1.0;
      return 1.0 - dot / std::sqrt(na * nb);
    }
    case LocalDistance::kEuclidean:
    case LocalDistance::kSquaredEuclidean: {
      double ss = 0.0;
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        const double diff = static_cast<double>(a(i, c)) - b(j, c);
        ss += diff * diff;
      }
      return d == LocalDistance::kEuclidean ? std::sqrt(ss) : ss;
    }
  }
  return 0.0;
}

double DtwCost(const FrameMatrix& a, const FrameMatrix& b,
               const DtwConfig& cfg) {
  if (a.rows() < 1 || b.rows() < 1)
    throw DataError("DTW needs non-empty sequences");
  if (a.cols() != b.cols())
    throw DataError("DTW sequences differ in dimension");
  struct Cell {
    double cost;
    int length;
    bool operator<(const Cell& o) const {
      return cost < o.cost || (cost == o.cost && length < o.length);
    }
  };
  const Eigen::Index n = a.rows(), m = b.rows();
  const Cell kInf{std::numeric_limits<double>::infinity(), 0};
  std::vector<Cell> prev(m, kInf), cur(m, kInf);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      Cell best = kInf;
      if (i == 0 && j == 0) {
        best = {0.0, 0};
      } else {
        if (i > 0 && j > 0 && prev[j - 1] < best) best = prev[j - 1];
        if (i > 0 && prev[j] < best) best = prev[j];
        if (j > 0 && cur[j - 1] < best) best = cur[j - 1];
      }
      cur[j] = {best.cost + LocalCost(a, i, b, j, cfg.local_distance),
                best.length + 1};
    }
    std::swap(prev, cur);
  }
  const Cell& end = prev[m - 1];
  return cfg.normalize_by_path_length ? end.cost / end.length : end.cost;
}

}  // namespace awe
