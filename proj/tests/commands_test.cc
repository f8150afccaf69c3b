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


#include "awe/commands.h"

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "awe/features.h"
#include "test_support.h"

namespace awe {
namespace {

int Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "awe");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return RunCli(static_cast<int>(argv.size()), argv.data());
}

std::map<std::string, std::string> ReadKeyValues(const fs::path& p) {
  std::map<std::string, std::string> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string k, v;
    ss >> k >> v;
    out[k] = v;
  }
  return out;
}

std::string ReadAll(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// A small corpus keeps the end-to-end commands fast.
const std::vector<std::string> kSmall = {
    "--set", "synth.types=4",          "--set", "synth.tokens_per_type=6",
    "--set", "synth.dev_tokens_per_type=3", "--set",
    "synth.train_tokens_per_type=4",   "--set", "synth.train_pairs=12"};

std::vector<std::string> With(std::vector<std::string> head,
                              const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

TEST(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(Cli({}), 1);
  EXPECT_EQ(Cli({"dance"}), 1);
  EXPECT_EQ(Cli({"eval", "--archive", "a"}), 1);
  EXPECT_EQ(Cli({"--set", "nope=1", "synth", "--out-dir", "/tmp/x"}), 1);
  EXPECT_EQ(Cli({"eval", "--dtw", "--downsample", "--archive", "a",
                 "--eval-list", "b", "--out", "c"}),
            1);
  EXPECT_EQ(Cli({"--help"}), 0);
}

TEST(CliTest, MissingDataExitsTwo) {
  testing::ScratchDir dir("cli");
  EXPECT_EQ(Cli({"eval", "--downsample", "--archive",
                 (dir / "none.awef").string(), "--eval-list",
                 (dir / "none.list").string(), "--out",
                 (dir / "r.txt").string()}),
            2);
  EXPECT_EQ(Cli({"extract", "--wav-dir", (dir / "nowhere").string(), "--out",
                 (dir / "f.awef").string()}),
            2);
}

TEST(CliTest, ExtractWritesArchiveAndSidecar) {
  testing::ScratchDir dir("cli");
  fs::create_directories(dir / "wav");
  for (const char* name : {"b", "a"}) {
    Waveform w;
    for (int i = 0; i < 8000; ++i)
      w.samples.push_back(3000.0 * std::sin(0.05 * i * (name[0] - 'a' + 1)));
    WriteWav(w, dir / "wav" / (std::string(name) + ".wav"));
  }
  ASSERT_EQ(Cli({"--set", "mfcc.cmvn=utterance", "extract", "--wav-dir",
                 (dir / "wav").string(), "--out", (dir / "f.awef").string()}),
            0);
  FeatureArchive a = ReadFeatureArchive(dir / "f.awef");
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a.entries()[0].utterance_id, "a");
  EXPECT_EQ(a.dim(), 13);
  EXPECT_EQ(a.entries()[0].num_frames(), 48);
  EXPECT_NE(ReadAll(dir / "f.awef.meta").find("config_hash="),
            std::string::npos);
}

TEST(CliTest, SynthEvalAndEmbedPipeline) {
  testing::ScratchDir dir("cli");
  const std::string c = (dir / "corpus").string();
  ASSERT_EQ(Cli(With(kSmall, {"synth", "--seed", "3", "--out-dir", c})), 0);
  const std::string archive = c + "/features.awef";
  const std::string list = c + "/eval.list";

  // Global options may also follow the subcommand.
  const std::string c2 = (dir / "corpus2").string();
  ASSERT_EQ(Cli(With({"synth", "--seed", "3", "--out-dir", c2}, kSmall)), 0);
  EXPECT_EQ(ReadAll(c2 + "/features.awef"), ReadAll(archive));

  ASSERT_EQ(Cli({"eval", "--downsample", "--archive", archive, "--eval-list",
                 list, "--out", (dir / "down.txt").string(), "--pr-tsv",
                 (dir / "pr.tsv").string()}),
            0);
  auto down = ReadKeyValues(dir / "down.txt");
  EXPECT_EQ(down["tokens"], "24");
  EXPECT_EQ(down["pairs"], "276");
  EXPECT_EQ(down["positive_pairs"], "60");
  EXPECT_EQ(down["model"], "downsample");
  EXPECT_EQ(down["config_hash"].size(), 16u);
  EXPECT_NE(ReadAll(dir / "pr.tsv").find("threshold\tprecision\trecall"),
            std::string::npos);

  // Embedding with the same method and scoring the result gives the same AP.
  ASSERT_EQ(Cli({"embed", "--downsample", "--archive", archive, "--segments",
                 list, "--out", (dir / "emb.awef").string()}),
            0);
  FeatureArchive emb = ReadFeatureArchive(dir / "emb.awef");
  EXPECT_EQ(emb.size(), 24u);
  EXPECT_EQ(emb.dim(), 130);
  EXPECT_TRUE(fs::exists(dir / "emb.awef.meta"));
  ASSERT_EQ(Cli({"eval", "--embeddings", (dir / "emb.awef").string(),
                 "--archive", archive, "--eval-list", list, "--out",
                 (dir / "emb.txt").string()}),
            0);
  EXPECT_NEAR(std::stod(ReadKeyValues(dir / "emb.txt")["AP"]),
              std::stod(down["AP"]), 1e-6);

  ASSERT_EQ(Cli({"--set", "dtw.local_distance=euclidean", "eval", "--dtw",
                 "--archive", archive, "--eval-list", list, "--out",
                 (dir / "dtw.txt").string()}),
            0);
  EXPECT_EQ(ReadKeyValues(dir / "dtw.txt")["model"], "dtw");
}

TEST(CliTest, TrainWritesCheckpointsLogsAndReport) {
  testing::ScratchDir dir("cli");
  const std::string c = (dir / "corpus").string();
  ASSERT_EQ(Cli(With(kSmall, {"synth", "--out-dir", c})), 0);
  const std::vector<std::string> tiny = {
      "--set", "model.hidden_size=4",  "--set", "model.encoder_layers=1",
      "--set", "model.decoder_layers=1", "--set", "model.embedding_dim=3",
      "--set", "train.max_epochs=2"};
  const std::string out = (dir / "cae").string();
  ASSERT_EQ(Cli(With(tiny, {"train", "--model", "cae", "--archive",
                            c + "/features.awef", "--pairs", c + "/pairs.txt",
                            "--val-list", c + "/dev.list", "--seeds", "1,2",
                            "--pretrain-epochs", "1", "--out-dir", out})),
            0);
  for (const char* f : {"model.seed1.ckpt", "model.seed2.ckpt",
                        "train.seed1.log", "train.seed2.log", "report.txt"})
    EXPECT_TRUE(fs::exists(dir / "cae" / f)) << f;
  std::string log = ReadAll(dir / "cae" / "train.seed1.log");
  EXPECT_EQ(log.rfind("# model=cae seed=1 config_hash=", 0), 0u) << log;
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 4);  // header + 3
  auto report = ReadKeyValues(dir / "cae" / "report.txt");
  EXPECT_TRUE(report.count("mean_ap"));
  EXPECT_TRUE(report.count("std_ap"));

  Checkpoint ck = LoadCheckpoint(dir / "cae" / "model.seed1.ckpt");
  EXPECT_EQ(ck.config.hidden_size, 4);
  EXPECT_EQ(ck.config.kind, ModelKind::kCae);
  ASSERT_EQ(Cli({"eval", "--checkpoint", out + "/model.seed1.ckpt",
                 "--archive", c + "/features.awef", "--eval-list",
                 c + "/eval.list", "--out", (dir / "r.txt").string()}),
            0);
  EXPECT_EQ(ReadKeyValues(dir / "r.txt")["model"], "checkpoint:cae");

  // The AE baseline samples its own segments from training utterances.
  ASSERT_EQ(Cli(With(tiny, {"--set", "train.num_segments=20", "train",
                            "--model", "ae", "--archive",
                            c + "/features.awef", "--utt-prefix", "train_",
                            "--seeds", "1", "--out-dir",
                            (dir / "ae").string()})),
            0);
  EXPECT_TRUE(fs::exists(dir / "ae" / "model.seed1.ckpt"));
  EXPECT_EQ(Cli(With(tiny, {"train", "--model", "cae", "--archive",
                            c + "/features.awef", "--out-dir",
                            (dir / "x").string()})),
            1);
}

TEST(CliTest, DivergenceExitsThree) {
  testing::ScratchDir dir("cli");
  const std::string c = (dir / "corpus").string();
  ASSERT_EQ(Cli(With(kSmall, {"synth", "--out-dir", c})), 0);
  EXPECT_EQ(Cli({"--set", "model.hidden_size=4", "--set",
                 "model.encoder_layers=1", "--set", "model.decoder_layers=1",
                 "--set", "model.embedding_dim=3", "--set",
                 "train.max_epochs=3", "--set", "train.learning_rate=1e300",
                 "train", "--model", "cae", "--archive",
                 c + "/features.awef", "--pairs", c + "/pairs.txt", "--seeds",
                 "1", "--pretrain-epochs", "0", "--out-dir",
                 (dir / "boom").string()}),
            3);
}

}  // namespace
}  // namespace awe
