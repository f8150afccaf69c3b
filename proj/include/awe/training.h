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

#ifndef AWE_TRAINING_H_
#define AWE_TRAINING_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "awe/data_io.h"
#include "awe/models.h"
#include "awe/numerics.h"

namespace awe {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  ParamCollection first_moment;
  ParamCollection second_moment;
  int64_t step = 0;

  static AdamState For(const ParamCollection& params, AdamConfig config = {});
};

// One bias-corrected Adam update. Throws NumericalError if any gradient is
// non-finite; params and state are left untouched in that case.
void AdamStep(AdamState* state, ParamCollection* params,
              const ParamCollection& grads);

// Rescales grads so their global L2 norm is at most max_norm. Returns the
// norm before clipping.
double ClipGlobalNorm(ParamCollection* grads, double max_norm);

// Shuffles indices 0..n-1 deterministically from (seed, epoch) and cuts them
// into batches of at most batch_size.
std::vector<std::vector<size_t>> MakeBatches(size_t n, int batch_size,
                                             uint64_t seed, int epoch,
                                             bool shuffle = true);

struct TrainConfig {
  int batch_size = 32;
  int max_epochs = 100;
  // Early stopping on validation AP; 0 disables it.
  int patience = 5;
  // AE epochs before switching to the correspondence loss.
  int pretrain_epochs = 15;
  uint64_t seed = 1;
  double clip_norm = 5.0;
  bool shuffle = true;
  AdamConfig adam;

  void Validate() const;
};

struct EarlyStopDecision {
  bool stop = false;
  int best_epoch = 1;  // 1-based
};

// Stops once the last `patience` entries all fail to beat the best AP seen
// before them.
EarlyStopDecision EarlyStopCheck(std::span<const double> ap_history,
                                 int patience);

struct EpochRecord {
  int epoch = 0;  // 1-based, continuous across phases
  std::string phase;
  double mean_loss = 0.0;
  std::optional<double> validation_ap;
};

struct TrainResult {
  ParamCollection params;
  std::vector<EpochRecord> epochs;
  // Epoch whose parameters were returned.
  int best_epoch = 0;
};

// Scores a parameter snapshot on held-out data (higher is better).
using Validator = std::function<double(const ParamCollection&)>;

// Minibatch Adam on the AE loss (or the VAE loss when model.variational())
// over the given segments.
TrainResult TrainAutoencoder(const FeatureArchive& archive,
                             std::span<const SegmentRef> segments,
                             ParamCollection params, const ModelConfig& model,
                             const TrainConfig& cfg,
                             const Validator& validator = nullptr);

// Distinct segments of all pairs, in first-appearance order.
std::vector<SegmentRef> PretrainSegments(std::span<const PairEntry> pairs);

// Input/target directions for correspondence training: (a, b) then (b, a)
// for every pair.
std::vector<PairEntry> CorrespondenceDirections(
    std::span<const PairEntry> pairs);

// Phase 1: AE training on the distinct segments of all pairs for
// cfg.pretrain_epochs. Phase 2: correspondence training where every pair
// contributes a->b and b->a, for up to cfg.max_epochs with early stopping.
TrainResult TrainCorrespondence(const FeatureArchive& archive,
                                std::span<const PairEntry> pairs,
                                ParamCollection params,
                                const ModelConfig& model,
                                const TrainConfig& cfg,
                                const Validator& validator = nullptr);

// "epoch, mean_loss[, val_ap]" per line.
std::string FormatTrainingLog(std::span<const EpochRecord> epochs);

struct SeedResult {
  uint64_t seed = 0;
  double ap = 0.0;
  std::vector<EpochRecord> epochs;
};

struct RunReport {
  std::vector<SeedResult> runs;
  double mean_ap = 0.0;
  // Sample standard deviation; absent for a single run.
  std::optional<double> std_ap;
};

RunReport SummarizeRuns(std::vector<SeedResult> runs);

// Runs `run` once per seed, at most `threads` at a time, and summarizes.
RunReport MultiSeedRun(std::span<const uint64_t> seeds,
                       const std::function<SeedResult(uint64_t)>& run,
                       int threads = 1);

}  // namespace awe

#endif  // AWE_TRAINING_H_
