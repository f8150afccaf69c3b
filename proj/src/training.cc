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

#include "awe/training.h"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "awe/error.h"

namespace awe {

AdamState AdamState::For(const ParamCollection& params, AdamConfig config) {
  return {config, params.ZerosLike(), params.ZerosLike(), 0};
}

void AdamStep(AdamState* state, ParamCollection* params,
              const ParamCollection& grads) {
  if (!grads.AllFinite())
    throw NumericalError("non-finite gradient at Adam step " +
                         std::to_string(state->step + 1));
  if (!params->SameShapes(grads) ||
      !params->SameShapes(state->first_moment))
    throw std::invalid_argument("AdamStep: shape mismatch");
  const AdamConfig& c = state->config;
  state->step += 1;
  const double correct1 = 1.0 - std::pow(c.beta1, state->step);
  const double correct2 = 1.0 - std::pow(c.beta2, state->step);
  for (size_t i = 0; i < params->size(); ++i) {
    Matrix& m = state->first_moment.value(i);
    Matrix& v = state->second_moment.value(i);
    const Matrix& g = grads.value(i);
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseAbs2();
    params->value(i).array() -=
        c.learning_rate * (m.array() / correct1) /
        ((v.array() / correct2).sqrt() + c.epsilon);
  }
}

double ClipGlobalNorm(ParamCollection* grads, double max_norm) {
  const double norm = std::sqrt(grads->SquaredNorm());
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (size_t i = 0; i < grads->size(); ++i) grads->value(i) *= scale;
  }
  return norm;
}

std::vector<std::vector<size_t>> MakeBatches(size_t n, int batch_size,
                                             uint64_t seed, int epoch,
                                             bool shuffle) {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (shuffle) {
    std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                      static_cast<uint32_t>(epoch)};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<std::vector<size_t>> batches;
  for (size_t begin = 0; begin < n; begin += batch_size)
    batches.emplace_back(order.begin() + begin,
                         order.begin() + std::min(n, begin + batch_size));
  return batches;
}

void TrainConfig::Validate() const {
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (max_epochs < 0) throw UsageError("max_epochs must be >= 0");
  if (patience < 0) throw UsageError("patience must be >= 0 (0 disables)");
  if (pretrain_epochs < 0) throw UsageError("pretrain_epochs must be >= 0");
  if (!(clip_norm > 0)) throw UsageError("clip_norm must be positive");
}

EarlyStopDecision EarlyStopCheck(std::span<const double> ap_history,
                                 int patience) {
  if (ap_history.empty())
    throw std::invalid_argument("EarlyStopCheck: empty history");
  size_t best = 0;
  for (size_t i = 1; i < ap_history.size(); ++i)
    if (ap_history[i] > ap_history[best]) best = i;
  const size_t since_best = ap_history.size() - 1 - best;
  return {patience > 0 && since_best >= static_cast<size_t>(patience),
          static_cast<int>(best) + 1};
}

namespace {

// Segment matrices extracted once and shared by all epochs.
class SegmentStore {
 public:
  explicit SegmentStore(const FeatureArchive& archive) : archive_(archive) {}

  const FrameMatrix* Get(const SegmentRef& ref) {
    auto key = std::make_tuple(ref.utterance_id, ref.start, ref.end);
    auto it = cache_.find(key);
    if (it == cache_.end())
      it = cache_.emplace(key, ExtractSegment(archive_, ref).frames).first;
    return &it->second;
  }

 private:
  const FeatureArchive& archive_;
  std::map<std::tuple<std::string, int, int>, FrameMatrix> cache_;
};

Matrix DrawNoise(int rows, int cols, uint64_t seed, int epoch, size_t batch) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(epoch), static_cast<uint32_t>(batch),
                    0x6e6f6973u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  Matrix noise(rows, cols);
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise(i) = normal(rng);
  return noise;
}

class Trainer {
 public:
  Trainer(ParamCollection params, const ModelConfig& model,
          const TrainConfig& cfg, const Validator& validator)
      : model_(model),
        cfg_(cfg),
        validator_(validator),
        adam_(AdamState::For(params, cfg.adam)) {
    model_.Validate();
    cfg_.Validate();
    result_.params = std::move(params);
  }

  // Runs `epochs` epochs over `items`. Returns false once early stopping
  // has fired.
  bool RunPhase(const std::string& phase, std::span<const TrainingItem> items,
                int epochs, bool early_stopping, ModelKind loss_kind) {
    if (items.empty()) throw DataError("no training items");
    ModelConfig loss_model = model_;
    loss_model.kind = loss_kind;
    for (int e = 0; e < epochs; ++e) {
      const int epoch = static_cast<int>(result_.epochs.size()) + 1;
      double total = 0.0;
      auto batches = MakeBatches(items.size(), cfg_.batch_size, cfg_.seed,
                                 epoch, cfg_.shuffle);
      for (size_t b = 0; b < batches.size(); ++b) {
        std::vector<TrainingItem> batch;
        for (size_t i : batches[b]) batch.push_back(items[i]);
        Matrix noise;
        if (loss_model.variational())
          noise = DrawNoise(model_.embedding_dim,
                            static_cast<int>(batch.size()), cfg_.seed, epoch,
                            b);
        ParamCollection grads;
        const double loss =
            BatchLoss(result_.params, loss_model, batch,
                      loss_model.variational() ? &noise : nullptr, &grads);
        total += loss * static_cast<double>(batch.size());
        if (!grads.AllFinite())
          throw NumericalError("non-finite gradient in epoch " +
                               std::to_string(epoch));
        ClipGlobalNorm(&grads, cfg_.clip_norm);
        AdamStep(&adam_, &result_.params, grads);
      }
      EpochRecord record{epoch, phase,
                         total / static_cast<double>(items.size()),
                         std::nullopt};
      if (validator_) record.validation_ap = validator_(result_.params);
      result_.epochs.push_back(record);

      if (!record.validation_ap || !early_stopping || cfg_.patience == 0) {
        best_params_.reset();
        result_.best_epoch = epoch;
        continue;
      }
      history_.push_back(*record.validation_ap);
      auto decision = EarlyStopCheck(history_, cfg_.patience);
      if (decision.best_epoch == static_cast<int>(history_.size())) {
        best_params_ = result_.params;
        result_.best_epoch = epoch;
      }
      if (decision.stop) return false;
    }
    return true;
  }

  TrainResult Finish() && {
    if (best_params_) result_.params = std::move(*best_params_);
    return std::move(result_);
  }

 private:
  ModelConfig model_;
  TrainConfig cfg_;
  Validator validator_;
  AdamState adam_;
  TrainResult result_;
  std::vector<double> history_;
  std::optional<ParamCollection> best_params_;
};

}  // namespace

TrainResult TrainAutoencoder(const FeatureArchive& archive,
                             std::span<const SegmentRef> segments,
                             ParamCollection params, const ModelConfig& model,
                             const TrainConfig& cfg,
                             const Validator& validator) {
  SegmentStore store(archive);
  std::vector<TrainingItem> items;
  for (const auto& ref : segments) {
    const FrameMatrix* x = store.Get(ref);
    items.push_back({x, x});
  }
  Trainer trainer(std::move(params), model, cfg, validator);
  trainer.RunPhase(std::string(ToString(model.kind)), items, cfg.max_epochs,
                   true, model.kind);
  return std::move(trainer).Finish();
}

std::vector<SegmentRef> PretrainSegments(std::span<const PairEntry> pairs) {
  std::set<std::tuple<std::string, int, int>> seen;
  std::vector<SegmentRef> out;
  for (const auto& p : pairs)
    for (const SegmentRef* r : {&p.a, &p.b})
      if (seen.emplace(r->utterance_id, r->start, r->end).second)
        out.push_back(*r);
  return out;
}

std::vector<PairEntry> CorrespondenceDirections(
    std::span<const PairEntry> pairs) {
  std::vector<PairEntry> out;
  out.reserve(2 * pairs.size());
  for (const auto& p : pairs) {
    out.push_back({p.a, p.b});
    out.push_back({p.b, p.a});
  }
  return out;
}

TrainResult TrainCorrespondence(const FeatureArchive& archive,
                                std::span<const PairEntry> pairs,
                                ParamCollection params,
                                const ModelConfig& model,
                                const TrainConfig& cfg,
                                const Validator& validator) {
  if (pairs.empty()) throw DataError("no training pairs");
  SegmentStore store(archive);
  std::vector<TrainingItem> pretrain, correspondence;
  for (const auto& ref : PretrainSegments(pairs)) {
    const FrameMatrix* x = store.Get(ref);
    pretrain.push_back({x, x});
  }
  for (const auto& dir : CorrespondenceDirections(pairs))
    correspondence.push_back({store.Get(dir.a), store.Get(dir.b)});

  Trainer trainer(std::move(params), model, cfg, validator);
  // Pretraining comes on top of the max_epochs budget, so pretrain_epochs=0
  // changes nothing else about the correspondence phase.
  if (cfg.pretrain_epochs > 0)
    trainer.RunPhase("pretrain", pretrain, cfg.pretrain_epochs, false,
                     ModelKind::kAe);
  trainer.RunPhase("cae", correspondence, cfg.max_epochs, true,
                   ModelKind::kCae);
  return std::move(trainer).Finish();
}

std::string FormatTrainingLog(std::span<const EpochRecord> epochs) {
  std::ostringstream out;
  out.precision(10);
  for (const auto& e : epochs) {
    out << e.epoch << ", " << e.mean_loss;
    if (e.validation_ap) out << ", " << *e.validation_ap;
    out << "\n";
  }
  return out.str();
}

RunReport SummarizeRuns(std::vector<SeedResult> runs) {
  RunReport report;
  report.runs = std::move(runs);
  if (report.runs.empty()) return report;
  const double n = static_cast<double>(report.runs.size());
  double sum = 0.0;
  for (const auto& r : report.runs) sum += r.ap;
  report.mean_ap = sum / n;
  if (report.runs.size() >= 2) {
    double ss = 0.0;
    for (const auto& r : report.runs)
      ss += (r.ap - report.mean_ap) * (r.ap - report.mean_ap);
    report.std_ap = std::sqrt(ss / (n - 1.0));
  }
  return report;
}

RunReport MultiSeedRun(std::span<const uint64_t> seeds,
                       const std::function<SeedResult(uint64_t)>& run,
                       int threads) {
  if (seeds.empty()) throw UsageError("need at least one seed");
  threads = std::max(1, threads);
  std::vector<SeedResult> results(seeds.size());
  for (size_t begin = 0; begin < seeds.size(); begin += threads) {
    const size_t end = std::min(seeds.size(), begin + threads);
    if (end - begin == 1) {
      results[begin] = run(seeds[begin]);
      continue;
    }
    std::vector<std::future<SeedResult>> pending;
    for (size_t i = begin; i < end; ++i)
      pending.push_back(std::async(std::launch::async, run, seeds[i]));
    for (size_t i = begin; i < end; ++i) results[i] = pending[i - begin].get();
  }
  return SummarizeRuns(std::move(results));
}

}  // namespace awe
