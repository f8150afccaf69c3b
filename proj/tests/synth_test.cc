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

#include <gtest/gtest.h>

#include <map>
#include <set>

#include "awe/error.h"
#include "awe/evaluation.h"
#include "test_support.h"

namespace awe {
namespace {

class SynthTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { corpus_ = new SynthCorpus(GenerateSynthCorpus({}, 7)); }
  static void TearDownTestSuite() { delete corpus_; }
  static SynthCorpus* corpus_;
};
SynthCorpus* SynthTest::corpus_ = nullptr;

TEST_F(SynthTest, SplitSizesAndBalance) {
  const SynthCorpus& c = *corpus_;
  EXPECT_EQ(c.eval_tokens.size(), 20u * 40);
  EXPECT_EQ(c.dev_tokens.size(), 20u * 10);
  EXPECT_EQ(c.train_tokens.size(), 20u * 20);
  EXPECT_EQ(c.pairs.size(), 1000u);
  EXPECT_EQ(c.archive.dim(), 13);
  std::map<std::string, int> per_type, per_speaker;
  for (const auto& t : c.eval_tokens) {
    ++per_type[t.word_type];
    ++per_speaker[t.speaker];
  }
  EXPECT_EQ(per_type.size(), 20u);
  for (const auto& [w, n] : per_type) EXPECT_EQ(n, 40) << w;
  EXPECT_EQ(per_speaker.size(), 5u);
  for (const auto& [s, n] : per_speaker) EXPECT_EQ(n, 160) << s;
}

TEST_F(SynthTest, TokensAreValidAndSplitsDisjoint) {
  const SynthCorpus& c = *corpus_;
  auto check = [&](const std::vector<EvalToken>& toks, const std::string& pre) {
    for (const auto& t : toks) {
      EXPECT_NO_THROW(ValidateSegment(c.archive, t.segment));
      EXPECT_EQ(t.segment.utterance_id.rfind(pre, 0), 0u);
      // 3..6 phones of 4..8 frames, stretched by 0.7..1.4.
      EXPECT_GE(t.segment.length(), 8);
      EXPECT_LE(t.segment.length(), 68);
      // Utterances hold one speaker.
      EXPECT_NE(t.segment.utterance_id.find("_" + t.speaker + "_"),
                std::string::npos);
    }
  };
  check(c.train_tokens, "train_");
  check(c.dev_tokens, "dev_");
  check(c.eval_tokens, "test_");
}

TEST_F(SynthTest, PairsAreDistinctSameTypeTrainTokens) {
  const SynthCorpus& c = *corpus_;
  std::map<std::tuple<std::string, int, int>, std::string> type_of;
  for (const auto& t : c.train_tokens)
    type_of[{t.segment.utterance_id, t.segment.start, t.segment.end}] =
        t.word_type;
  std::set<std::pair<std::tuple<std::string, int, int>,
                     std::tuple<std::string, int, int>>>
      seen;
  for (const auto& p : c.pairs) {
    auto ka = std::make_tuple(p.a.utterance_id, p.a.start, p.a.end);
    auto kb = std::make_tuple(p.b.utterance_id, p.b.start, p.b.end);
    ASSERT_TRUE(type_of.count(ka) && type_of.count(kb));
    EXPECT_EQ(type_of[ka], type_of[kb]);
    EXPECT_NE(ka, kb);
    EXPECT_TRUE(seen.insert({std::min(ka, kb), std::max(ka, kb)}).second);
  }
}

TEST_F(SynthTest, SeedDeterminesCorpus) {
  SynthConfig small;
  small.types = 4;
  small.tokens_per_type = 6;
  small.dev_tokens_per_type = 2;
  small.train_tokens_per_type = 4;
  small.train_pairs = 10;
  SynthCorpus a = GenerateSynthCorpus(small, 3), b = GenerateSynthCorpus(small, 3),
              d = GenerateSynthCorpus(small, 4);
  ASSERT_EQ(a.archive.size(), b.archive.size());
  for (size_t i = 0; i < a.archive.size(); ++i)
    EXPECT_TRUE(a.archive.entries()[i].frames == b.archive.entries()[i].frames);
  EXPECT_FALSE(a.archive.entries()[0].frames.rows() ==
                   d.archive.entries()[0].frames.rows() &&
               a.archive.entries()[0].frames == d.archive.entries()[0].frames);
}

TEST_F(SynthTest, WordIdentityIsRecoverableButNotTrivial) {
  const SynthCorpus& c = *corpus_;
  EmbedderSpec down;
  SameDifferentResult r = SameDifferentEval(c.archive, c.eval_tokens, down);
  const double chance =
      static_cast<double>(r.num_positive) / static_cast<double>(r.num_pairs);
  EXPECT_GT(r.ap, 3.0 * chance);
  EXPECT_LT(r.ap, 0.95);
}

TEST_F(SynthTest, WriteProducesReadableFiles) {
  testing::ScratchDir dir("synth");
  WriteSynthCorpus(*corpus_, dir.path());
  FeatureArchive a = ReadFeatureArchive(dir / "features.awef");
  EXPECT_EQ(a.size(), corpus_->archive.size());
  EXPECT_EQ(LoadPairList(dir / "pairs.txt").size(), 1000u);
  EXPECT_EQ(LoadEvalList(dir / "eval.list").size(), 800u);
  EXPECT_EQ(LoadEvalList(dir / "dev.list").size(), 200u);
  EXPECT_EQ(LoadEvalList(dir / "train.list").size(), 400u);
}

TEST(SynthConfigTest, Validation) {
  SynthConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.types = 1;
  EXPECT_THROW(c.Validate(), UsageError);
  c = {};
  c.phone_scale = 0;
  EXPECT_THROW(c.Validate(), UsageError);
  c = {};
  c.min_gain = 2.0;
  EXPECT_THROW(c.Validate(), UsageError);
}

}  // namespace
}  // namespace awe
