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

#ifndef AWE_COMMANDS_H_
#define AWE_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "awe/config.h"
#include "awe/evaluation.h"
#include "awe/models.h"
#include "awe/training.h"

namespace awe {

namespace fs = std::filesystem;

// One AWEF record per *.wav file in wav_dir (sorted by name), id = file stem.
void CmdExtract(const Config& config, const fs::path& wav_dir,
                const fs::path& out_archive);

// Writes the synthetic corpus files into out_dir (see WriteSynthCorpus).
void CmdSynth(const Config& config, uint64_t seed, const fs::path& out_dir);

struct TrainOptions {
  ModelKind kind = ModelKind::kCae;
  fs::path archive;
  // cae: mandatory. ae/vae: when given, the distinct pair segments are the
  // training segments.
  std::optional<fs::path> pairs;
  // ae/vae: explicit segment list instead of random sampling.
  std::optional<fs::path> segments;
  // Restricts random segment sampling to utterances with this id prefix.
  std::string utterance_prefix;
  // Eval-format list used for early stopping and the reported AP.
  std::optional<fs::path> validation_list;
  fs::path out_dir;
};

// Trains one model per seed in train.seeds. Writes model.seed<N>.ckpt,
// train.seed<N>.log and report.txt into out_dir.
RunReport CmdTrain(const Config& config, const TrainOptions& options);

struct EmbedOptions {
  std::optional<fs::path> checkpoint;  // otherwise downsampling
  fs::path archive;
  fs::path segment_list;
  fs::path out_archive;
};

// One 1 x M record per listed segment, in list order.
void CmdEmbed(const Config& config, const EmbedOptions& options);

struct EvalOptions {
  enum class Mode { kEmbeddings, kCheckpoint, kDownsample, kDtw };
  Mode mode = Mode::kDownsample;
  std::optional<fs::path> embeddings;
  std::optional<fs::path> checkpoint;
  fs::path eval_list;
  fs::path archive;
  fs::path out;
  std::optional<fs::path> pr_tsv;
};

SameDifferentResult CmdEval(const Config& config, const EvalOptions& options);

// Full command-line entry point. Returns the process exit code: 0 success,
// 1 usage error, 2 data error, 3 numerical divergence.
int RunCli(int argc, const char* const* argv);

}  // namespace awe

#endif  // AWE_COMMANDS_H_
