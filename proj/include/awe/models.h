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

#ifndef AWE_MODELS_H_
#define AWE_MODELS_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "awe/data_io.h"
#include "awe/numerics.h"

namespace awe {

enum class ModelKind { kAe, kVae, kCae };

std::string_view ToString(ModelKind kind);
// Throws UsageError for anything but "ae", "vae" or "cae".
ModelKind ParseModelKind(std::string_view text);

struct ModelConfig {
  ModelKind kind = ModelKind::kCae;
  int input_dim = 13;
  int hidden_size = 400;
  int encoder_layers = 3;
  int decoder_layers = 3;
  int embedding_dim = 130;
  // Standard deviation of the Gaussian decoder output (VAE only).
  double vae_sigma = 1e-5;

  bool variational() const { return kind == ModelKind::kVae; }
  void Validate() const;
};

// Parameter names. A GRU layer is the nine entries "<prefix>.W_z", "W_r",
// "W_h" (input weights), "U_z", "U_r", "U_h" (recurrent weights) and "b_z",
// "b_r", "b_h".
std::string EncoderLayerPrefix(int layer);
std::string DecoderLayerPrefix(int layer);
inline constexpr const char* kEmbedHead = "encoder.embed";    // also the VAE mean
inline constexpr const char* kLogVarHead = "encoder.logvar";  // VAE only
inline constexpr const char* kOutputHead = "decoder.out";

void AddGruLayer(ParamCollection* params, const std::string& prefix,
                 int input_size, int hidden_size);

// Glorot-uniform weights, zero biases.
ParamCollection InitParams(const ModelConfig& cfg, uint64_t seed);

// ---------------------------------------------------------------------------
// Single-sequence evaluation. Frames are rows of a FrameMatrix; vectors are
// column vectors.

Eigen::VectorXd GruStep(const ParamCollection& params,
                        const std::string& prefix,
                        const Eigen::VectorXd& h_prev,
                        const Eigen::VectorXd& x);

// Final top-layer state of the stacked encoder, mapped through the affine
// embedding head.
Eigen::VectorXd Encode(const ParamCollection& params, const ModelConfig& cfg,
                       const FrameMatrix& x);

struct GaussianParams {
  Eigen::VectorXd mu;
  Eigen::VectorXd log_var;
};
GaussianParams EncodeVariational(const ParamCollection& params,
                                 const ModelConfig& cfg, const FrameMatrix& x);

// mu + exp(log_var / 2) * noise
Eigen::VectorXd Reparameterize(const Eigen::VectorXd& mu,
                               const Eigen::VectorXd& log_var,
                               const Eigen::VectorXd& noise);

// Runs the decoder for `steps` steps with z as the input at every step and
// returns one output frame per row.
Matrix Decode(const ParamCollection& params, const ModelConfig& cfg,
              const Eigen::VectorXd& z, int steps);

// KL(N(mu, diag(exp(log_var))) || N(0, I)).
double KlDiagGaussianToStandard(const Eigen::VectorXd& mu,
                                const Eigen::VectorXd& log_var);

double AeLoss(const ParamCollection& params, const ModelConfig& cfg,
              const FrameMatrix& x);
// Encodes x_a, decodes x_b.rows() frames and scores them against x_b.
double CaeLoss(const ParamCollection& params, const ModelConfig& cfg,
               const FrameMatrix& x_a, const FrameMatrix& x_b);
// Sum over frames of ||x_t - f_t(z')||^2 / (2 sigma^2) + KL, z' sampled with
// the supplied standard-normal noise.
double VaeLoss(const ParamCollection& params, const ModelConfig& cfg,
               const FrameMatrix& x, const Eigen::VectorXd& noise);

// AE/CAE: Encode; VAE: the mean head. Never samples.
Eigen::VectorXd Embed(const ParamCollection& params, const ModelConfig& cfg,
                      const FrameMatrix& x);

// Embeds many sequences, one row per sequence, processing them in padded
// batches.
Matrix EmbedAll(const ParamCollection& params, const ModelConfig& cfg,
                std::span<const FrameMatrix* const> sequences,
                int batch_size = 64);

// ---------------------------------------------------------------------------
// Batched evaluation on a Tape.

// Sequences of different lengths, time-major and zero-padded: steps[t] is
// D x B, column b valid while t < lengths[b].
struct SequenceBatch {
  std::vector<Matrix> steps;
  std::vector<int> lengths;

  int batch_size() const { return static_cast<int>(lengths.size()); }
  int max_length() const { return static_cast<int>(steps.size()); }
  bool full_at(int t) const;
  // rows x B matrix, 1 where column b is valid at step t.
  Matrix Mask(int t, int rows) const;
};

SequenceBatch MakeSequenceBatch(std::span<const FrameMatrix* const> sequences);

Var GruStepOnTape(Tape& tape, const ParamCollection& params,
                  const std::string& prefix, Var h_prev, Var x);

// Top-layer hidden state after each column's last valid frame (H x B).
Var EncodeFinalState(Tape& tape, const ParamCollection& params,
                     const ModelConfig& cfg, const SequenceBatch& batch);

// Decoder outputs for `steps` steps, each D x B.
std::vector<Var> DecodeOnTape(Tape& tape, const ParamCollection& params,
                              const ModelConfig& cfg, Var z, int steps);

Var KlOnTape(Tape& tape, Var mu, Var log_var, const Matrix& weights);

// One training item: encode `input`, reconstruct `target`. An AE item has
// input == target.
struct TrainingItem {
  const FrameMatrix* input = nullptr;
  const FrameMatrix* target = nullptr;
};

enum class Reduction { kSum, kMean };

// Loss over a padded batch (per-sequence losses summed or averaged). Padded
// frames contribute nothing. When cfg.variational(), `noise` must be M x B;
// it is ignored otherwise. Fills `grads` when non-null. Throws
// NumericalError on a non-finite loss.
double BatchLoss(const ParamCollection& params, const ModelConfig& cfg,
                 std::span<const TrainingItem> items, const Matrix* noise,
                 ParamCollection* grads, Reduction reduction = Reduction::kMean);

// ---------------------------------------------------------------------------
// Checkpoints: "AWEM", u32 version (1), u32 metadata length, metadata text
// (key=value lines), u32 parameter count, then per parameter u32 name length,
// name, u32 rows, u32 cols and rows*cols float32 values in row-major order.

struct Checkpoint {
  ModelConfig config;
  ParamCollection params;
  std::string config_hash;
};

void SaveCheckpoint(const Checkpoint& checkpoint,
                    const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace awe

#endif  // AWE_MODELS_H_
