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

#include "awe/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "awe/error.h"

namespace awe {

void SynthConfig::Validate() const {
  if (types < 2) throw UsageError("synth needs at least 2 word types");
  if (tokens_per_type < 2 || train_tokens_per_type < 2)
    throw UsageError("synth needs at least 2 tokens per type");
  if (dev_tokens_per_type < 0) throw UsageError("negative dev token count");
  if (train_pairs < 1) throw UsageError("synth needs at least one pair");
  if (speakers < 1 || dim < 1 || phones < 2 || words_per_utterance < 1)
    throw UsageError("bad synth corpus sizes");
  if (min_phones_per_word < 1 || max_phones_per_word < min_phones_per_word ||
      min_frames_per_phone < 1 || max_frames_per_phone < min_frames_per_phone)
    throw UsageError("bad synth word shape settings");
  if (offset_scale < 0 || !(phone_scale > 0) || noise_std < 0 || bias_std < 0)
    throw UsageError("synth scales must be nonnegative (phone_scale positive)");
  if (!(min_length_factor > 0) || max_length_factor < min_length_factor ||
      min_gain > max_gain)
    throw UsageError("bad synth length factor or gain range");
}

namespace {

using Rng = std::mt19937_64;

Eigen::MatrixXd RandomNormal(Rng& rng, int rows, int cols, double std) {
  std::normal_distribution<double> n(0.0, std);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = n(rng);
  return m;
}

int UniformInt(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double Uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Row-wise linear interpolation of `x` at fractional row position `pos`.
Eigen::RowVectorXd Interpolate(const Eigen::MatrixXd& x, double pos) {
  const auto last = static_cast<double>(x.rows() - 1);
  pos = std::clamp(pos, 0.0, last);
  const auto lo = static_cast<Eigen::Index>(std::floor(pos));
  const Eigen::Index hi = std::min<Eigen::Index>(lo + 1, x.rows() - 1);
  const double frac = pos - static_cast<double>(lo);
  return (1.0 - frac) * x.row(lo) + frac * x.row(hi);
}

// Phone targets held at segment centers, linearly interpolated in between.
Eigen::MatrixXd MakeTemplate(const SynthConfig& cfg,
                             const Eigen::MatrixXd& phones, Rng& rng) {
  const int n = UniformInt(rng, cfg.min_phones_per_word,
                           cfg.max_phones_per_word);
  std::vector<int> ids;
  std::vector<double> centers;
  int frames = 0;
  for (int i = 0; i < n; ++i) {
    int id;
    do {
      id = UniformInt(rng, 0, static_cast<int>(phones.rows()) - 1);
    } while (!ids.empty() && id == ids.back());
    const int dur = UniformInt(rng, cfg.min_frames_per_phone,
                               cfg.max_frames_per_phone);
    ids.push_back(id);
    centers.push_back(frames + 0.5 * (dur - 1));
    frames += dur;
  }
  Eigen::MatrixXd out(frames, phones.cols());
  for (int t = 0; t < frames; ++t) {
    size_t k = 0;
    while (k + 1 < centers.size() && centers[k + 1] <= t) ++k;
    if (t <= centers.front()) {
      out.row(t) = phones.row(ids.front());
    } else if (k + 1 >= centers.size()) {
      out.row(t) = phones.row(ids.back());
    } else {
      const double w = (t - centers[k]) / (centers[k + 1] - centers[k]);
      out.row(t) = (1.0 - w) * phones.row(ids[k]) + w * phones.row(ids[k + 1]);
    }
  }
  return out;
}

// Random monotone resampling to round(L * factor) frames.
Eigen::MatrixXd TimeWarp(const SynthConfig& cfg, const Eigen::MatrixXd& tmpl,
                         Rng& rng) {
  const double factor =
      Uniform(rng, cfg.min_length_factor, cfg.max_length_factor);
  const int len = std::max(
      2, static_cast<int>(std::lround(static_cast<double>(tmpl.rows()) * factor)));
  std::vector<double> pos(len, 0.0);
  for (int t = 1; t < len; ++t) pos[t] = pos[t - 1] + Uniform(rng, 0.5, 1.5);
  const double scale = static_cast<double>(tmpl.rows() - 1) / pos.back();
  Eigen::MatrixXd out(len, tmpl.cols());
  for (int t = 0; t < len; ++t) out.row(t) = Interpolate(tmpl, pos[t] * scale);
  return out;
}

struct Channel {
  Eigen::RowVectorXd gain;
  Eigen::RowVectorXd bias;
};

struct Token {
  int type;
  int speaker;
};

// Builds utterances for one split and returns the token list.
std::vector<EvalToken> MakeSplit(const SynthConfig& cfg, const char* split,
                                 const Eigen::RowVectorXd& offset,
                                 int tokens_per_type,
                                 const std::vector<Eigen::MatrixXd>& templates,
                                 const std::vector<Channel>& channels,
                                 Rng& rng, std::vector<FeatureSequence>* utts) {
  std::vector<Token> tokens;
  for (int w = 0; w < cfg.types; ++w)
    for (int k = 0; k < tokens_per_type; ++k)
      tokens.push_back({w, k % cfg.speakers});
  std::shuffle(tokens.begin(), tokens.end(), rng);
  std::stable_sort(tokens.begin(), tokens.end(),
                   [](const Token& a, const Token& b) {
                     return a.speaker < b.speaker;
                   });

  std::vector<EvalToken> out;
  std::normal_distribution<double> noise(0.0, cfg.noise_std);
  auto noisy = [&](Eigen::MatrixXd x, const Channel& ch) {
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
      x.row(t) = x.row(t).cwiseProduct(ch.gain) + ch.bias;
      for (Eigen::Index d = 0; d < x.cols(); ++d) x(t, d) += noise(rng);
    }
    return x;
  };

  for (size_t begin = 0; begin < tokens.size();) {
    const int speaker = tokens[begin].speaker;
    size_t end = begin;
    while (end < tokens.size() && end - begin < static_cast<size_t>(cfg.words_per_utterance) &&
           tokens[end].speaker == speaker)
      ++end;
    char id[64];
    std::snprintf(id, sizeof(id), "%s_s%02d_%05zu", split, speaker + 1,
                  utts->size());
    const Channel& ch = channels[speaker];
    std::vector<Eigen::MatrixXd> pieces;
    std::vector<SegmentRef> refs;
    int frames = 0;
    const Eigen::MatrixXd gap =
        offset.replicate(cfg.gap_frames, 1);
    for (size_t i = begin; i < end; ++i) {
      if (cfg.gap_frames > 0) {
        pieces.push_back(noisy(gap, ch));
        frames += cfg.gap_frames;
      }
      pieces.push_back(noisy(TimeWarp(cfg, templates[tokens[i].type], rng), ch));
      refs.push_back({id, frames, frames + static_cast<int>(pieces.back().rows())});
      frames += static_cast<int>(pieces.back().rows());
    }
    if (cfg.gap_frames > 0) {
      pieces.push_back(noisy(gap, ch));
      frames += cfg.gap_frames;
    }
    FeatureSequence utt{id, FrameMatrix(frames, cfg.dim)};
    int row = 0;
    for (const auto& p : pieces) {
      utt.frames.middleRows(row, p.rows()) = p.cast<float>();
      row += static_cast<int>(p.rows());
    }
    utts->push_back(std::move(utt));
    for (size_t i = begin; i < end; ++i) {
      char word[16], spk[16];
      std::snprintf(word, sizeof(word), "w%02d", tokens[i].type);
      std::snprintf(spk, sizeof(spk), "s%02d", tokens[i].speaker + 1);
      out.push_back({refs[i - begin], word, spk});
    }
    begin = end;
  }
  return out;
}

}  // namespace

SynthCorpus GenerateSynthCorpus(const SynthConfig& cfg, uint64_t seed) {
  cfg.Validate();
  Rng rng(seed);
  const Eigen::RowVectorXd offset =
      RandomNormal(rng, 1, cfg.dim, cfg.offset_scale);
  const Eigen::MatrixXd phones =
      RandomNormal(rng, cfg.phones, cfg.dim, cfg.phone_scale);
  std::vector<Eigen::MatrixXd> templates;
  for (int w = 0; w < cfg.types; ++w) {
    templates.push_back(MakeTemplate(cfg, phones, rng));
    templates.back().rowwise() += offset;
  }
  std::vector<Channel> channels;
  for (int s = 0; s < cfg.speakers; ++s) {
    Channel ch{Eigen::RowVectorXd(cfg.dim),
               RandomNormal(rng, 1, cfg.dim, cfg.bias_std)};
    for (int d = 0; d < cfg.dim; ++d)
      ch.gain(d) = Uniform(rng, cfg.min_gain, cfg.max_gain);
    channels.push_back(ch);
  }

  SynthCorpus corpus;
  std::vector<FeatureSequence> utts;
  corpus.train_tokens = MakeSplit(cfg, "train", offset, cfg.train_tokens_per_type,
                                  templates, channels, rng, &utts);
  if (cfg.dev_tokens_per_type > 0)
    corpus.dev_tokens = MakeSplit(cfg, "dev", offset, cfg.dev_tokens_per_type,
                                  templates, channels, rng, &utts);
  corpus.eval_tokens = MakeSplit(cfg, "test", offset, cfg.tokens_per_type, templates,
                                 channels, rng, &utts);
  corpus.archive = FeatureArchive(std::move(utts));

  // Distinct same-type pairs among the training tokens.
  std::vector<std::vector<size_t>> by_type(cfg.types);
  for (size_t i = 0; i < corpus.train_tokens.size(); ++i)
    by_type[std::stoi(corpus.train_tokens[i].word_type.substr(1))].push_back(i);
  size_t available = 0;
  for (const auto& v : by_type) available += v.size() * (v.size() - 1) / 2;
  const size_t wanted = std::min<size_t>(cfg.train_pairs, available);
  std::set<std::pair<size_t, size_t>> chosen;
  while (chosen.size() < wanted) {
    const auto& members = by_type[UniformInt(rng, 0, cfg.types - 1)];
    size_t a = members[UniformInt(rng, 0, static_cast<int>(members.size()) - 1)];
    size_t b = members[UniformInt(rng, 0, static_cast<int>(members.size()) - 1)];
    if (a == b) continue;
    if (!chosen.emplace(std::min(a, b), std::max(a, b)).second) continue;
    corpus.pairs.push_back({corpus.train_tokens[a].segment,
                            corpus.train_tokens[b].segment});
  }
  return corpus;
}

void WriteSynthCorpus(const SynthCorpus& corpus,
                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  WriteFeatureArchive(corpus.archive, dir / "features.awef");
  SavePairList(corpus.pairs, dir / "pairs.txt");
  SaveEvalList(corpus.train_tokens, dir / "train.list");
  SaveEvalList(corpus.dev_tokens, dir / "dev.list");
  SaveEvalList(corpus.eval_tokens, dir / "eval.list");
}

}  // namespace awe
