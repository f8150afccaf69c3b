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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "awe/data_io.h"
#include "awe/error.h"
#include "awe/features.h"
#include "awe/synth.h"

namespace awe {

namespace {

TimeUnit UnitFromConfig(const Config& config) {
  const std::string& v = config.Get("data.time_unit");
  if (v == "frames") return TimeUnit::kFrames;
  if (v == "seconds") return TimeUnit::kSeconds;
  throw UsageError("data.time_unit must be frames or seconds");
}

// AWEF has no metadata slot, so archives get a small text sidecar.
void WriteSidecar(const fs::path& artifact, const Config& config,
                  const std::string& extra) {
  std::ofstream out(artifact.string() + ".meta");
  if (!out) throw DataError("cannot write " + artifact.string() + ".meta");
  out << "config_hash=" << config.Hash() << "\n" << extra;
}

std::ofstream OpenText(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(10);
  return out;
}

std::string FormatOptional(const std::optional<double>& v) {
  if (!v) return "na";
  std::ostringstream ss;
  ss.precision(10);
  ss << *v;
  return ss.str();
}

FeatureArchive FilterByPrefix(const FeatureArchive& archive,
                              const std::string& prefix) {
  if (prefix.empty()) return archive;
  FeatureArchive out;
  for (const auto& e : archive.entries())
    if (e.utterance_id.starts_with(prefix)) out.Add(e);
  if (out.empty())
    throw DataError("no utterance id starts with '" + prefix + "'");
  return out;
}

class Validation {
 public:
  Validation(const FeatureArchive& archive, std::vector<EvalToken> tokens)
      : tokens_(std::move(tokens)) {
    for (const auto& t : tokens_)
      segments_.push_back(ExtractSegment(archive, t.segment).frames);
  }

  double Ap(const ParamCollection& params, const ModelConfig& model) const {
    std::vector<const FrameMatrix*> ptrs;
    for (const auto& s : segments_) ptrs.push_back(&s);
    Matrix emb = EmbedAll(params, model, ptrs);
    return AveragePrecision(ScoreAllPairs(tokens_, emb)).ap;
  }

 private:
  std::vector<EvalToken> tokens_;
  std::vector<FrameMatrix> segments_;
};

}  // namespace

void CmdExtract(const Config& config, const fs::path& wav_dir,
                const fs::path& out_archive) {
  if (!fs::is_directory(wav_dir))
    throw DataError(wav_dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(wav_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".wav")
      files.push_back(entry.path());
  if (files.empty()) throw DataError("no input files in " + wav_dir.string());
  std::sort(files.begin(), files.end());

  const MfccConfig mfcc = MfccFromConfig(config);
  const CmvnMode cmvn = CmvnFromConfig(config);
  std::vector<FeatureSequence> entries;
  for (const auto& f : files)
    entries.push_back(
        Cmvn(ComputeMfcc(ReadWav(f), mfcc, f.stem().string()), cmvn));
  WriteFeatureArchive(entries, out_archive);
  WriteSidecar(out_archive, config, "records=" + std::to_string(entries.size()) + "\n");
}

void CmdSynth(const Config& config, uint64_t seed, const fs::path& out_dir) {
  SynthCorpus corpus = GenerateSynthCorpus(SynthFromConfig(config), seed);
  WriteSynthCorpus(corpus, out_dir);
  WriteSidecar(out_dir / "features.awef", config,
               "synth_seed=" + std::to_string(seed) + "\n");
}

RunReport CmdTrain(const Config& config, const TrainOptions& options) {
  const FeatureArchive archive = ReadFeatureArchive(options.archive);
  const ModelConfig model = ModelFromConfig(config, options.kind, archive.dim());
  const TrainConfig base = TrainFromConfig(config);
  const std::vector<uint64_t> seeds = config.GetSeeds("train.seeds");
  const TimeUnit unit = UnitFromConfig(config);

  std::vector<PairEntry> pairs;
  if (options.pairs) {
    pairs = FilterPairsByDuration(LoadPairList(*options.pairs, unit),
                                  config.GetInt("train.pair_min_frames"),
                                  config.GetInt("train.pair_max_frames"));
    for (const auto& p : pairs) {
      ValidateSegment(archive, p.a);
      ValidateSegment(archive, p.b);
    }
    if (pairs.empty()) throw DataError("pair list is empty after filtering");
  } else if (options.kind == ModelKind::kCae) {
    throw UsageError("cae training needs --pairs");
  }

  std::vector<SegmentRef> fixed_segments;
  if (options.kind != ModelKind::kCae) {
    if (options.segments) {
      fixed_segments = LoadSegmentList(*options.segments, unit);
    } else if (options.pairs) {
      fixed_segments = PretrainSegments(pairs);
    }
    for (const auto& s : fixed_segments) ValidateSegment(archive, s);
  }
  const FeatureArchive sampling_pool =
      options.kind != ModelKind::kCae && fixed_segments.empty()
          ? FilterByPrefix(archive, options.utterance_prefix)
          : FeatureArchive();

  std::optional<Validation> validation;
  if (options.validation_list)
    validation.emplace(archive, LoadEvalList(*options.validation_list, unit));

  fs::create_directories(options.out_dir);
  auto run = [&](uint64_t seed) {
    TrainConfig cfg = base;
    cfg.seed = seed;
    Validator validator;
    if (validation)
      validator = [&](const ParamCollection& p) {
        return validation->Ap(p, model);
      };
    TrainResult result;
    if (options.kind == ModelKind::kCae) {
      result = TrainCorrespondence(archive, pairs, InitParams(model, seed),
                                   model, cfg, validator);
    } else {
      std::vector<SegmentRef> segments = fixed_segments;
      if (segments.empty())
        segments = SampleRandomSegments(
            sampling_pool, config.GetInt("train.num_segments"),
            config.GetInt("train.min_frames"),
            config.GetInt("train.max_frames"), seed);
      result = TrainAutoencoder(archive, segments, InitParams(model, seed),
                                model, cfg, validator);
    }
    const std::string stem = "seed" + std::to_string(seed);
    SaveCheckpoint({model, result.params, config.Hash()},
                   options.out_dir / ("model." + stem + ".ckpt"));
    auto log = OpenText(options.out_dir / ("train." + stem + ".log"));
    log << "# model=" << ToString(model.kind) << " seed=" << seed
        << " config_hash=" << config.Hash() << "\n"
        << FormatTrainingLog(result.epochs);
    SeedResult out{seed, std::nan(""), result.epochs};
    if (validation) out.ap = validation->Ap(result.params, model);
    return out;
  };
  RunReport report =
      MultiSeedRun(seeds, run, std::max(1, config.GetInt("run.threads")));

  auto out = OpenText(options.out_dir / "report.txt");
  out << "# model=" << ToString(model.kind)
      << " config_hash=" << config.Hash() << "\n";
  for (const auto& r : report.runs)
    out << "seed " << r.seed << " epochs " << r.epochs.size()
        << " final_loss " << (r.epochs.empty() ? 0.0 : r.epochs.back().mean_loss)
        << " ap " << FormatOptional(validation ? std::optional(r.ap)
                                               : std::nullopt)
        << "\n";
  if (validation) {
    out << "mean_ap " << report.mean_ap << "\n"
        << "std_ap " << FormatOptional(report.std_ap) << "\n";
  }
  return report;
}

void CmdEmbed(const Config& config, const EmbedOptions& options) {
  const FeatureArchive archive = ReadFeatureArchive(options.archive);
  const std::vector<SegmentRef> refs =
      LoadSegmentList(options.segment_list, UnitFromConfig(config));
  std::vector<FrameMatrix> segments;
  for (const auto& r : refs) segments.push_back(ExtractSegment(archive, r).frames);

  Matrix emb;
  std::string source;
  if (options.checkpoint) {
    Checkpoint ckpt = LoadCheckpoint(*options.checkpoint);
    if (ckpt.config.input_dim != archive.dim())
      throw DataError("checkpoint expects " +
                      std::to_string(ckpt.config.input_dim) +
                      "-dim features, archive has " +
                      std::to_string(archive.dim()));
    std::vector<const FrameMatrix*> ptrs;
    for (const auto& s : segments) ptrs.push_back(&s);
    emb = EmbedAll(ckpt.params, ckpt.config, ptrs);
    source = "checkpoint=" + options.checkpoint->string() + "\n";
  } else {
    const int k = config.GetInt("downsample.frames");
    emb.resize(static_cast<Eigen::Index>(segments.size()), k * archive.dim());
    for (size_t i = 0; i < segments.size(); ++i)
      emb.row(static_cast<Eigen::Index>(i)) =
          DownsampleEmbed(segments[i], k).transpose();
    source = "downsample=" + std::to_string(k) + "\n";
  }

  std::vector<FeatureSequence> records;
  for (size_t i = 0; i < refs.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "%06zu_", i);
    records.push_back({id + refs[i].utterance_id + "_" +
                           std::to_string(refs[i].start) + "_" +
                           std::to_string(refs[i].end),
                       emb.row(static_cast<Eigen::Index>(i)).cast<float>()});
  }
  WriteFeatureArchive(records, options.out_archive);
  WriteSidecar(options.out_archive, config, source);
}

SameDifferentResult CmdEval(const Config& config, const EvalOptions& options) {
  using Mode = EvalOptions::Mode;
  const FeatureArchive archive = ReadFeatureArchive(options.archive);
  const std::vector<EvalToken> tokens =
      LoadEvalList(options.eval_list, UnitFromConfig(config));

  EmbedderSpec spec;
  std::optional<Checkpoint> ckpt;
  Matrix precomputed;
  std::string name;
  switch (options.mode) {
    case Mode::kEmbeddings: {
      if (!options.embeddings) throw UsageError("missing --embeddings");
      FeatureArchive emb = ReadFeatureArchive(*options.embeddings);
      if (emb.size() != tokens.size())
        throw DataError("embedding archive has " + std::to_string(emb.size()) +
                        " records for " + std::to_string(tokens.size()) +
                        " tokens");
      precomputed.resize(static_cast<Eigen::Index>(emb.size()), emb.dim());
      for (size_t i = 0; i < emb.size(); ++i) {
        const FrameMatrix& f = emb.entries()[i].frames;
        if (f.rows() != 1) throw DataError("embedding records must be 1 x M");
        precomputed.row(static_cast<Eigen::Index>(i)) = f.row(0).cast<double>();
      }
      spec.kind = EmbedderKind::kPrecomputed;
      spec.embeddings = &precomputed;
      name = "embeddings:" + options.embeddings->string();
      break;
    }
    case Mode::kCheckpoint:
      if (!options.checkpoint) throw UsageError("missing --checkpoint");
      ckpt = LoadCheckpoint(*options.checkpoint);
      spec.kind = EmbedderKind::kModel;
      spec.model = &*ckpt;
      name = "checkpoint:" + std::string(ToString(ckpt->config.kind));
      break;
    case Mode::kDownsample:
      spec.kind = EmbedderKind::kDownsample;
      spec.downsample_frames = config.GetInt("downsample.frames");
      name = "downsample";
      break;
    case Mode::kDtw:
      spec.kind = EmbedderKind::kDtw;
      spec.dtw = DtwFromConfig(config);
      name = "dtw";
      break;
  }

  SameDifferentResult result = SameDifferentEval(archive, tokens, spec);
  auto out = OpenText(options.out);
  out << "# same-different evaluation\n"
      << "model " << name << "\n"
      << "config_hash " << config.Hash() << "\n"
      << "tokens " << result.num_tokens << "\n"
      << "pairs " << result.num_pairs << "\n"
      << "positive_pairs " << result.num_positive << "\n"
      << "AP " << result.ap << "\n"
      << "AP_same_speaker " << FormatOptional(result.ap_same_speaker) << "\n"
      << "AP_different_speaker " << FormatOptional(result.ap_different_speaker)
      << "\n"
      << "embed_seconds " << result.embed_seconds << "\n"
      << "score_seconds " << result.score_seconds << "\n";
  if (options.pr_tsv) {
    auto tsv = OpenText(*options.pr_tsv);
    tsv << "# config_hash " << config.Hash() << "\n"
        << "threshold\tprecision\trecall\n";
    for (const auto& p : result.curve.points)
      tsv << p.threshold << "\t" << p.precision << "\t" << p.recall << "\n";
  }
  return result;
}

int RunCli(int argc, const char* const* argv) {
  CLI::App app{"Acoustic word embedding toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  std::string config_file;
  std::vector<std::string> overrides;
  int threads = 0;
  app.add_option("--config", config_file, "key=value config file");
  app.add_option("--set", overrides, "override one key: --set key=value")
      ->take_all();
  app.add_option("--threads", threads, "worker cap")->check(CLI::PositiveNumber);

  // extract
  std::string wav_dir, out_path;
  auto* extract = app.add_subcommand("extract", "WAV directory -> MFCC archive");
  extract->add_option("--wav-dir", wav_dir)->required();
  extract->add_option("--out", out_path)->required();

  // synth
  uint64_t synth_seed = 1;
  std::string out_dir;
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--seed", synth_seed);
  synth->add_option("--out-dir", out_dir)->required();

  // train
  std::string kind, archive, pairs, segments, val_list, utt_prefix, seeds;
  int pretrain_epochs = -1;
  auto* train = app.add_subcommand("train", "train ae, vae or cae models");
  train->add_option("--model", kind)->required();
  train->add_option("--archive", archive)->required();
  train->add_option("--pairs", pairs);
  train->add_option("--segments", segments);
  train->add_option("--utt-prefix", utt_prefix);
  train->add_option("--val-list", val_list);
  train->add_option("--seeds", seeds, "comma-separated seed list");
  train->add_option("--pretrain-epochs", pretrain_epochs);
  train->add_option("--out-dir", out_dir)->required();

  // embed
  std::string checkpoint, segment_list;
  bool downsample = false;
  auto* embed = app.add_subcommand("embed", "embed a list of segments");
  auto* embed_ckpt = embed->add_option("--checkpoint", checkpoint);
  embed->add_flag("--downsample", downsample)->excludes(embed_ckpt);
  embed->add_option("--archive", archive)->required();
  embed->add_option("--segments", segment_list)->required();
  embed->add_option("--out", out_path)->required();

  // eval
  std::string embeddings, eval_list, pr_tsv;
  bool dtw = false;
  auto* eval = app.add_subcommand("eval", "same-different evaluation");
  auto* eval_emb = eval->add_option("--embeddings", embeddings);
  auto* eval_ckpt = eval->add_option("--checkpoint", checkpoint);
  auto* eval_dtw = eval->add_flag("--dtw", dtw);
  auto* eval_down = eval->add_flag("--downsample", downsample);
  eval_emb->excludes(eval_ckpt)->excludes(eval_dtw)->excludes(eval_down);
  eval_ckpt->excludes(eval_dtw)->excludes(eval_down);
  eval_dtw->excludes(eval_down);
  eval->add_option("--eval-list", eval_list)->required();
  eval->add_option("--archive", archive)->required();
  eval->add_option("--out", out_path)->required();
  eval->add_option("--pr-tsv", pr_tsv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    Config config;
    if (!config_file.empty()) config.LoadFile(config_file);
    for (const auto& o : overrides) config.Set(std::string_view(o));
    if (threads > 0) config.Set("run.threads", std::to_string(threads));

    if (*extract) {
      CmdExtract(config, wav_dir, out_path);
    } else if (*synth) {
      CmdSynth(config, synth_seed, out_dir);
    } else if (*train) {
      if (!seeds.empty()) config.Set("train.seeds", seeds);
      if (pretrain_epochs >= 0)
        config.Set("train.pretrain_epochs", std::to_string(pretrain_epochs));
      TrainOptions opt;
      opt.kind = ParseModelKind(kind);
      opt.archive = archive;
      if (!pairs.empty()) opt.pairs = pairs;
      if (!segments.empty()) opt.segments = segments;
      if (!val_list.empty()) opt.validation_list = val_list;
      opt.utterance_prefix = utt_prefix;
      opt.out_dir = out_dir;
      RunReport report = CmdTrain(config, opt);
      if (opt.validation_list) {
        std::cout << "mean_ap " << report.mean_ap << " std_ap "
                  << FormatOptional(report.std_ap) << "\n";
      }
    } else if (*embed) {
      if (checkpoint.empty() && !downsample)
        throw UsageError("embed needs --checkpoint or --downsample");
      EmbedOptions opt;
      if (!checkpoint.empty()) opt.checkpoint = checkpoint;
      opt.archive = archive;
      opt.segment_list = segment_list;
      opt.out_archive = out_path;
      CmdEmbed(config, opt);
    } else if (*eval) {
      EvalOptions opt;
      if (!embeddings.empty()) {
        opt.mode = EvalOptions::Mode::kEmbeddings;
        opt.embeddings = embeddings;
      } else if (!checkpoint.empty()) {
        opt.mode = EvalOptions::Mode::kCheckpoint;
        opt.checkpoint = checkpoint;
      } else if (dtw) {
        opt.mode = EvalOptions::Mode::kDtw;
      } else if (downsample) {
        opt.mode = EvalOptions::Mode::kDownsample;
      } else {
        throw UsageError(
            "eval needs one of --embeddings, --checkpoint, --dtw, --downsample");
      }
      opt.eval_list = eval_list;
      opt.archive = archive;
      opt.out = out_path;
      if (!pr_tsv.empty()) opt.pr_tsv = pr_tsv;
      SameDifferentResult r = CmdEval(config, opt);
      std::cout << "AP " << r.ap << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace awe
