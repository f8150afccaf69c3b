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

#include "awe/models.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "awe/error.h"

namespace awe {

std::string_view ToString(ModelKind kind) {
  switch (kind) {
    case ModelKind::kAe: return "ae";
    case ModelKind::kVae: return "vae";
    case ModelKind::kCae: return "cae";
  }
  return "?";
}

ModelKind ParseModelKind(std::string_view text) {
  if (text == "ae") return ModelKind::kAe;
  if (text == "vae") return ModelKind::kVae;
  if (text == "cae") return ModelKind::kCae;
  throw UsageError("unknown model kind '" + std::string(text) +
                   "' (expected ae, vae or cae)");
}

void ModelConfig::Validate() const {
  if (input_dim < 1 || hidden_size < 1 || embedding_dim < 1)
    throw UsageError("model dimensions must be positive");
  if (encoder_layers < 1 || decoder_layers < 1)
    throw UsageError("need at least one encoder and one decoder layer");
  if (!(vae_sigma > 0)) throw UsageError("vae sigma must be positive");
}

std::string EncoderLayerPrefix(int layer) {
  return "encoder." + std::to_string(layer);
}

std::string DecoderLayerPrefix(int layer) {
  return "decoder." + std::to_string(layer);
}

void AddGruLayer(ParamCollection* params, const std::string& prefix,
                 int input_size, int hidden_size) {
  for (const char* gate : {"z", "r", "h"}) {
    params->Add(prefix + ".W_" + gate, Matrix::Zero(hidden_size, input_size));
    params->Add(prefix + ".U_" + gate, Matrix::Zero(hidden_size, hidden_size));
    params->Add(prefix + ".b_" + gate, Matrix::Zero(hidden_size, 1));
  }
}

ParamCollection InitParams(const ModelConfig& cfg, uint64_t seed) {
  cfg.Validate();
  ParamCollection params;
  const int h = cfg.hidden_size, m = cfg.embedding_dim;
  for (int l = 0; l < cfg.encoder_layers; ++l)
    AddGruLayer(&params, EncoderLayerPrefix(l), l == 0 ? cfg.input_dim : h, h);
  params.Add(std::string(kEmbedHead) + ".W", Matrix::Zero(m, h));
  params.Add(std::string(kEmbedHead) + ".b", Matrix::Zero(m, 1));
  if (cfg.variational()) {
    params.Add(std::string(kLogVarHead) + ".W", Matrix::Zero(m, h));
    params.Add(std::string(kLogVarHead) + ".b", Matrix::Zero(m, 1));
  }
  for (int l = 0; l < cfg.decoder_layers; ++l)
    AddGruLayer(&params, DecoderLayerPrefix(l), l == 0 ? m : h, h);
  params.Add(std::string(kOutputHead) + ".W", Matrix::Zero(cfg.input_dim, h));
  params.Add(std::string(kOutputHead) + ".b", Matrix::Zero(cfg.input_dim, 1));

  std::mt19937_64 rng(seed);
  for (size_t i = 0; i < params.size(); ++i) {
    Matrix& w = params.value(i);
    if (w.cols() == 1) continue;  // biases stay zero
    const double r = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> dist(-r, r);
    for (Eigen::Index k = 0; k < w.size(); ++k) w(k) = dist(rng);
  }
  return params;
}

// ---------------------------------------------------------------------------
// Tape-level building blocks

bool SequenceBatch::full_at(int t) const {
  return std::all_of(lengths.begin(), lengths.end(),
                     [t](int len) { return t < len; });
}

Matrix SequenceBatch::Mask(int t, int rows) const {
  Matrix mask(rows, batch_size());
  for (int b = 0; b < batch_size(); ++b)
    mask.col(b).setConstant(t < lengths[b] ? 1.0 : 0.0);
  return mask;
}

SequenceBatch MakeSequenceBatch(std::span<const FrameMatrix* const> sequences) {
  if (sequences.empty()) throw std::invalid_argument("empty batch");
  SequenceBatch batch;
  const Eigen::Index dim = sequences[0]->cols();
  int max_len = 0;
  for (const FrameMatrix* s : sequences) {
    if (s->rows() < 1) throw DataError("empty sequence in batch");
    if (s->cols() != dim)
      throw std::invalid_argument("sequences in a batch differ in dimension");
    batch.lengths.push_back(static_cast<int>(s->rows()));
    max_len = std::max(max_len, static_cast<int>(s->rows()));
  }
  const int b = static_cast<int>(sequences.size());
  batch.steps.assign(max_len, Matrix::Zero(dim, b));
  for (int j = 0; j < b; ++j)
    for (int t = 0; t < batch.lengths[j]; ++t)
      batch.steps[t].col(j) = sequences[j]->row(t).transpose().cast<double>();
  return batch;
}

namespace {

struct GateInputs {
  Var z, r, h;
};

GateInputs ProjectInput(Tape& tape, const ParamCollection& params,
                        const std::string& prefix, Var x) {
  auto proj = [&](const char* gate) {
    return tape.Affine(tape.Param(params, prefix + ".W_" + gate), x,
                       tape.Param(params, prefix + ".b_" + gate));
  };
  return {proj("z"), proj("r"), proj("h")};
}

Var GruRecurrence(Tape& tape, const ParamCollection& params,
                  const std::string& prefix, Var h_prev, const GateInputs& in) {
  auto u = [&](const char* gate) {
    return tape.Param(params, prefix + ".U_" + gate);
  };
  Var update = tape.Sigmoid(tape.Add(in.z, tape.MatMul(u("z"), h_prev)));
  Var reset = tape.Sigmoid(tape.Add(in.r, tape.MatMul(u("r"), h_prev)));
  Var candidate = tape.Tanh(
      tape.Add(in.h, tape.MatMul(u("h"), tape.Mul(reset, h_prev))));
  // (1 - update) * h_prev + update * candidate
  return tape.Add(h_prev, tape.Mul(update, tape.Sub(candidate, h_prev)));
}

Var AffineHead(Tape& tape, const ParamCollection& params,
               const std::string& head, Var x) {
  return tape.Affine(tape.Param(params, head + ".W"), x,
                     tape.Param(params, head + ".b"));
}

void CheckInputDim(const ModelConfig& cfg, Eigen::Index dim) {
  if (dim != cfg.input_dim)
    throw DataError("feature dimension " + std::to_string(dim) +
                    " does not match model input dimension " +
                    std::to_string(cfg.input_dim));
}

}  // namespace

Var GruStepOnTape(Tape& tape, const ParamCollection& params,
                  const std::string& prefix, Var h_prev, Var x) {
  return GruRecurrence(tape, params, prefix, h_prev,
                       ProjectInput(tape, params, prefix, x));
}

Var EncodeFinalState(Tape& tape, const ParamCollection& params,
                     const ModelConfig& cfg, const SequenceBatch& batch) {
  CheckInputDim(cfg, batch.steps.at(0).rows());
  const int b = batch.batch_size();
  std::vector<Var> state(cfg.encoder_layers,
                         tape.Constant(Matrix::Zero(cfg.hidden_size, b),
                                       "initial_state"));
  for (int t = 0; t < batch.max_length(); ++t) {
    const bool full = batch.full_at(t);
    Var mask = full ? Var{} : tape.Constant(batch.Mask(t, cfg.hidden_size),
                                            "mask");
    Var x = tape.Constant(batch.steps[t], "frame");
    for (int l = 0; l < cfg.encoder_layers; ++l) {
      Var next = GruStepOnTape(tape, params, EncoderLayerPrefix(l), state[l], x);
      // Finished columns keep their state.
      if (!full)
        next = tape.Add(state[l],
                        tape.Mul(mask, tape.Sub(next, state[l])));
      state[l] = next;
      x = next;
    }
  }
  return state.back();
}

std::vector<Var> DecodeOnTape(Tape& tape, const ParamCollection& params,
                              const ModelConfig& cfg, Var z, int steps) {
  if (steps < 1) throw std::invalid_argument("decode needs at least 1 step");
  const Eigen::Index b = tape.value(z).cols();
  std::vector<Var> state(cfg.decoder_layers,
                         tape.Constant(Matrix::Zero(cfg.hidden_size, b),
                                       "initial_state"));
  // z is the first layer's input at every step, so its projection is shared.
  const GateInputs from_z = ProjectInput(tape, params, DecoderLayerPrefix(0), z);
  std::vector<Var> outputs;
  outputs.reserve(steps);
  for (int t = 0; t < steps; ++t) {
    state[0] = GruRecurrence(tape, params, DecoderLayerPrefix(0), state[0],
                             from_z);
    for (int l = 1; l < cfg.decoder_layers; ++l)
      state[l] = GruStepOnTape(tape, params, DecoderLayerPrefix(l), state[l],
                               state[l - 1]);
    outputs.push_back(AffineHead(tape, params, kOutputHead, state.back()));
  }
  return outputs;
}

Var KlOnTape(Tape& tape, Var mu, Var log_var, const Matrix& weights) {
  Var per_dim = tape.AddScalar(
      tape.Sub(tape.Add(tape.Mul(mu, mu), tape.Exp(log_var)), log_var), -1.0);
  return tape.Scale(
      tape.Sum(tape.Mul(per_dim, tape.Constant(weights, "kl_weights"))), 0.5);
}

namespace {

// Summed loss over the batch.
Var LossOnTape(Tape& tape, const ParamCollection& params,
               const ModelConfig& cfg, const SequenceBatch& input,
               const SequenceBatch& target, const Matrix* noise) {
  CheckInputDim(cfg, target.steps.at(0).rows());
  Var hidden = EncodeFinalState(tape, params, cfg, input);
  Var mu = AffineHead(tape, params, kEmbedHead, hidden);
  Var z = mu;
  Var kl;
  if (cfg.variational()) {
    if (!noise || noise->rows() != cfg.embedding_dim ||
        noise->cols() != input.batch_size())
      throw std::invalid_argument("VAE loss needs an M x B noise matrix");
    Var log_var = AffineHead(tape, params, kLogVarHead, hidden);
    Var scale = tape.Exp(tape.Scale(log_var, 0.5));
    z = tape.Add(mu, tape.Mul(scale, tape.Constant(*noise, "noise")));
    // The KL term is counted once per target frame.
    Matrix weights(cfg.embedding_dim, target.batch_size());
    for (int j = 0; j < target.batch_size(); ++j)
      weights.col(j).setConstant(target.lengths[j]);
    kl = KlOnTape(tape, mu, log_var, weights);
  }

  std::vector<Var> outputs =
      DecodeOnTape(tape, params, cfg, z, target.max_length());
  Var reconstruction;
  for (int t = 0; t < target.max_length(); ++t) {
    Var diff = tape.Sub(tape.Constant(target.steps[t], "target"), outputs[t]);
    if (!target.full_at(t))
      diff = tape.Mul(diff,
                      tape.Constant(target.Mask(t, cfg.input_dim), "mask"));
    Var term = tape.SumSquares(diff);
    reconstruction = t == 0 ? term : tape.Add(reconstruction, term);
  }
  if (!cfg.variational()) return reconstruction;
  const double weight = 1.0 / (2.0 * cfg.vae_sigma * cfg.vae_sigma);
  return tape.Add(tape.Scale(reconstruction, weight), kl);
}

SequenceBatch SingleBatch(const FrameMatrix& x) {
  const FrameMatrix* p = &x;
  return MakeSequenceBatch(std::span<const FrameMatrix* const>(&p, 1));
}

double CheckedLoss(const Tape& tape, Var loss) {
  double v = tape.scalar(loss);
  if (!std::isfinite(v))
    throw NumericalError("non-finite loss (" + std::to_string(v) + ")");
  return v;
}

}  // namespace

double BatchLoss(const ParamCollection& params, const ModelConfig& cfg,
                 std::span<const TrainingItem> items, const Matrix* noise,
                 ParamCollection* grads, Reduction reduction) {
  std::vector<const FrameMatrix*> inputs, targets;
  for (const auto& item : items) {
    inputs.push_back(item.input);
    targets.push_back(item.target);
  }
  SequenceBatch in = MakeSequenceBatch(inputs);
  SequenceBatch out = MakeSequenceBatch(targets);
  Tape tape;
  Var loss = LossOnTape(tape, params, cfg, in, out, noise);
  if (reduction == Reduction::kMean)
    loss = tape.Scale(loss, 1.0 / static_cast<double>(items.size()));
  const double value = CheckedLoss(tape, loss);
  if (grads) *grads = tape.Backward(loss, params);
  return value;
}

// ---------------------------------------------------------------------------
// Single-sequence API

Eigen::VectorXd GruStep(const ParamCollection& params,
                        const std::string& prefix,
                        const Eigen::VectorXd& h_prev,
                        const Eigen::VectorXd& x) {
  Tape tape;
  Var h = GruStepOnTape(tape, params, prefix, tape.Constant(h_prev, "h_prev"),
                        tape.Constant(x, "x"));
  return tape.value(h);
}

Eigen::VectorXd Encode(const ParamCollection& params, const ModelConfig& cfg,
                       const FrameMatrix& x) {
  Tape tape;
  Var hidden = EncodeFinalState(tape, params, cfg, SingleBatch(x));
  return tape.value(AffineHead(tape, params, kEmbedHead, hidden));
}

GaussianParams EncodeVariational(const ParamCollection& params,
                                 const ModelConfig& cfg, const FrameMatrix& x) {
  Tape tape;
  Var hidden = EncodeFinalState(tape, params, cfg, SingleBatch(x));
  return {tape.value(AffineHead(tape, params, kEmbedHead, hidden)),
          tape.value(AffineHead(tape, params, kLogVarHead, hidden))};
}

Eigen::VectorXd Reparameterize(const Eigen::VectorXd& mu,
                               const Eigen::VectorXd& log_var,
                               const Eigen::VectorXd& noise) {
  if (mu.size() != log_var.size() || mu.size() != noise.size())
    throw std::invalid_argument("Reparameterize: length mismatch");
  return mu + (0.5 * log_var.array()).exp().matrix().cwiseProduct(noise);
}

Matrix Decode(const ParamCollection& params, const ModelConfig& cfg,
              const Eigen::VectorXd& z, int steps) {
  Tape tape;
  std::vector<Var> out = DecodeOnTape(tape, params, cfg, tape.Constant(z, "z"),
                                      steps);
  Matrix frames(steps, cfg.input_dim);
  for (int t = 0; t < steps; ++t) frames.row(t) = tape.value(out[t]).transpose();
  return frames;
}

double KlDiagGaussianToStandard(const Eigen::VectorXd& mu,
                                const Eigen::VectorXd& log_var) {
  if (mu.size() != log_var.size())
    throw std::invalid_argument("KL: length mismatch");
  return 0.5 * (mu.array().square() + log_var.array().exp() - log_var.array() -
                1.0)
                   .sum();
}

double CaeLoss(const ParamCollection& params, const ModelConfig& cfg,
               const FrameMatrix& x_a, const FrameMatrix& x_b) {
  const TrainingItem item{&x_a, &x_b};
  return BatchLoss(params, cfg, std::span<const TrainingItem>(&item, 1),
                   nullptr, nullptr, Reduction::kSum);
}

double AeLoss(const ParamCollection& params, const ModelConfig& cfg,
              const FrameMatrix& x) {
  return CaeLoss(params, cfg, x, x);
}

double VaeLoss(const ParamCollection& params, const ModelConfig& cfg,
               const FrameMatrix& x, const Eigen::VectorXd& noise) {
  if (!cfg.variational())
    throw std::invalid_argument("VaeLoss needs a variational config");
  const TrainingItem item{&x, &x};
  const Matrix n = noise;
  return BatchLoss(params, cfg, std::span<const TrainingItem>(&item, 1), &n,
                   nullptr, Reduction::kSum);
}

Eigen::VectorXd Embed(const ParamCollection& params, const ModelConfig& cfg,
                      const FrameMatrix& x) {
  return Encode(params, cfg, x);
}

Matrix EmbedAll(const ParamCollection& params, const ModelConfig& cfg,
                std::span<const FrameMatrix* const> sequences, int batch_size) {
  Matrix out(sequences.size(), cfg.embedding_dim);
  for (size_t begin = 0; begin < sequences.size(); begin += batch_size) {
    size_t count = std::min<size_t>(batch_size, sequences.size() - begin);
    Tape tape;
    Var hidden = EncodeFinalState(
        tape, params, cfg, MakeSequenceBatch(sequences.subspan(begin, count)));
    out.middleRows(begin, count) =
        tape.value(AffineHead(tape, params, kEmbedHead, hidden)).transpose();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kCheckpointMagic[4] = {'A', 'W', 'E', 'M'};

void PutU32(std::ostream& os, uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}

uint32_t GetU32(std::istream& is) {
  uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), 4))
    throw DataError("truncated checkpoint");
  return v;
}

std::string FormatDouble(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

}  // namespace

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little);
  const ModelConfig& c = ckpt.config;
  std::ostringstream meta;
  meta << "kind=" << ToString(c.kind) << "\n"
       << "input_dim=" << c.input_dim << "\n"
       << "hidden_size=" << c.hidden_size << "\n"
       << "encoder_layers=" << c.encoder_layers << "\n"
       << "decoder_layers=" << c.decoder_layers << "\n"
       << "embedding_dim=" << c.embedding_dim << "\n"
       << "vae_sigma=" << FormatDouble(c.vae_sigma) << "\n"
       << "config_hash=" << ckpt.config_hash << "\n";
  const std::string text = meta.str();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kCheckpointMagic, 4);
  PutU32(out, 1);
  PutU32(out, static_cast<uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  PutU32(out, static_cast<uint32_t>(ckpt.params.size()));
  for (size_t i = 0; i < ckpt.params.size(); ++i) {
    const std::string& name = ckpt.params.name(i);
    const Matrix& m = ckpt.params.value(i);
    PutU32(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    PutU32(out, static_cast<uint32_t>(m.rows()));
    PutU32(out, static_cast<uint32_t>(m.cols()));
    FrameMatrix values = m.cast<float>();
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(float)));
  }
  if (!out) throw DataError("write failed for " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw DataError(path.string() + ": not a model checkpoint");
  if (GetU32(in) != 1) throw DataError(path.string() + ": unsupported version");
  std::string text(GetU32(in), '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(text.size())))
    throw DataError("truncated checkpoint metadata");

  Checkpoint ckpt;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    ModelConfig& c = ckpt.config;
    if (key == "kind") c.kind = ParseModelKind(value);
    else if (key == "input_dim") c.input_dim = std::stoi(value);
    else if (key == "hidden_size") c.hidden_size = std::stoi(value);
    else if (key == "encoder_layers") c.encoder_layers = std::stoi(value);
    else if (key == "decoder_layers") c.decoder_layers = std::stoi(value);
    else if (key == "embedding_dim") c.embedding_dim = std::stoi(value);
    else if (key == "vae_sigma") c.vae_sigma = std::stod(value);
    else if (key == "config_hash") ckpt.config_hash = value;
  }

  const uint32_t count = GetU32(in);
  for (uint32_t i = 0; i < count; ++i) {
    std::string name(GetU32(in), '\0');
    if (!in.read(name.data(), static_cast<std::streamsize>(name.size())))
      throw DataError("truncated checkpoint");
    const uint32_t rows = GetU32(in), cols = GetU32(in);
    FrameMatrix values(rows, cols);
    if (!in.read(reinterpret_cast<char*>(values.data()),
                 static_cast<std::streamsize>(values.size() * sizeof(float))))
      throw DataError("truncated checkpoint");
    ckpt.params.Add(name, values.cast<double>());
  }
  // Shapes must match what the metadata describes.
  ParamCollection expected = InitParams(ckpt.config, 0);
  if (!expected.SameShapes(ckpt.params))
    throw DataError(path.string() +
                    ": parameters do not match the stored model config");
  return ckpt;
}

}  // namespace awe
