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

#ifndef AWE_SYNTH_H_
#define AWE_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "awe/data_io.h"

namespace awe {

// Synthetic word corpus. Word types are smooth trajectories through a small
// inventory of "phone" targets; every token is a randomly time-warped copy of
// its type's template passed through its speaker's affine channel, plus
// frame noise.
struct SynthConfig {
  int types = 20;
  int tokens_per_type = 40;        // evaluation tokens
  int dev_tokens_per_type = 10;    // validation tokens
  int train_tokens_per_type = 20;  // tokens available for pairs
  int train_pairs = 1000;
  int speakers = 5;
  int dim = 13;
  int phones = 4;  // a small inventory keeps word types confusable
  int words_per_utterance = 5;

  int min_phones_per_word = 3;
  int max_phones_per_word = 6;
  int min_frames_per_phone = 4;
  int max_frames_per_phone = 8;
  int gap_frames = 3;  // silence between words in an utterance

  // Templates are offset + phone_scale * trajectory; the shared offset makes
  // the per-speaker gains act as a strong channel effect.
  double offset_scale = 3.0;
  double phone_scale = 0.5;

  double min_length_factor = 0.7;
  double max_length_factor = 1.4;
  double min_gain = 0.8;
  double max_gain = 1.2;
  double bias_std = 0.1;
  double noise_std = 0.05;

  void Validate() const;
};

struct SynthCorpus {
  FeatureArchive archive;
  std::vector<PairEntry> pairs;         // same-type training pairs
  std::vector<EvalToken> train_tokens;  // ground truth for the pair tokens
  std::vector<EvalToken> dev_tokens;
  std::vector<EvalToken> eval_tokens;
};

SynthCorpus GenerateSynthCorpus(const SynthConfig& cfg, uint64_t seed);

// features.awef, pairs.txt, train.list, dev.list and eval.list in dir.
void WriteSynthCorpus(const SynthCorpus& corpus,
                      const std::filesystem::path& dir);

}  // namespace awe

#endif  // AWE_SYNTH_H_
