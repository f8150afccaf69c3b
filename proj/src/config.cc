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

#include "awe/config.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "awe/error.h"
#include "awe/synth.h"

namespace awe {

namespace {

const std::map<std::string, std::string>& Defaults() {
  static const std::map<std::string, std::string> defaults = {
      {"mfcc.window_ms", "25"},
      {"mfcc.hop_ms", "10"},
      {"mfcc.fft_size", "512"},
      {"mfcc.mel_filters", "24"},
      {"mfcc.num_ceps", "13"},
      {"mfcc.pre_emphasis", "0.97"},
      {"mfcc.log_floor", "1e-10"},
      {"mfcc.cmvn", "none"},
      {"model.hidden_size", "400"},
      {"model.encoder_layers", "3"},
      {"model.decoder_layers", "3"},
      {"model.embedding_dim", "130"},
      {"vae.sigma", "1e-5"},
      {"train.batch_size", "32"},
      {"train.max_epochs", "100"},
      {"train.patience", "5"},
      {"train.pretrain_epochs", "15"},
      {"train.learning_rate", "0.001"},
      {"train.clip_norm", "5.0"},
      {"train.seeds", "1,2,3,4,5"},
      {"train.num_segments", "10000"},
      {"train.min_frames", "20"},
      {"train.max_frames", "100"},
      {"train.pair_min_frames", "0"},
      {"train.pair_max_frames", "0"},
      {"data.time_unit", "frames"},
      {"dtw.local_distance", "cosine"},
      {"dtw.normalize", "true"},
      {"downsample.frames", "10"},
      {"synth.types", "20"},
      {"synth.tokens_per_type", "40"},
      {"synth.dev_tokens_per_type", "10"},
      {"synth.train_tokens_per_type", "20"},
      {"synth.train_pairs", "1000"},
      {"synth.speakers", "5"},
      {"synth.dim", "13"},
      {"synth.phones", "4"},
      {"synth.words_per_utterance", "5"},
      {"synth.offset_scale", "3.0"},
      {"synth.phone_scale", "0.5"},
      {"run.threads", "1"},
  };
  return defaults;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config::Config() : values_(Defaults()) {}

void Config::Set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
  it->second = value;
}

void Config::Set(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw UsageError("expected key=value, got '" + std::string(assignment) +
                     "'");
  Set(Trim(std::string(assignment.substr(0, eq))),
      Trim(std::string(assignment.substr(eq + 1))));
}

void Config::LoadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = Trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    try {
      Set(std::string_view(line));
    } catch (const UsageError& e) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
}

const std::string& Config::Get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
  return it->second;
}

int Config::GetInt(const std::string& key) const {
  const std::string& v = Get(key);
  try {
    size_t used = 0;
    int out = std::stoi(v, &used);
    if (used == v.size()) return out;
  } catch (const std::logic_error&) {
  }
  throw UsageError("config key " + key + " expects an integer, got '" + v +
                   "'");
}

double Config::GetDouble(const std::string& key) const {
  const std::string& v = Get(key);
  try {
    size_t used = 0;
    double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::logic_error&) {
  }
  throw UsageError("config key " + key + " expects a number, got '" + v + "'");
}

bool Config::GetBool(const std::string& key) const {
  const std::string& v = Get(key);
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw UsageError("config key " + key + " expects true/false, got '" + v +
                   "'");
}

std::vector<uint64_t> Config::GetSeeds(const std::string& key) const {
  std::vector<uint64_t> seeds;
  std::stringstream ss(Get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (item.empty()) continue;
    try {
      size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError("bad seed '" + item + "' in " + key);
    }
  }
  if (seeds.empty()) throw UsageError(key + " lists no seeds");
  return seeds;
}

std::string Config::Resolved() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::string Config::Hash() const {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : Resolved()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

MfccConfig MfccFromConfig(const Config& c) {
  MfccConfig m;
  m.window_ms = c.GetDouble("mfcc.window_ms");
  m.hop_ms = c.GetDouble("mfcc.hop_ms");
  m.fft_size = c.GetInt("mfcc.fft_size");
  m.mel_filters = c.GetInt("mfcc.mel_filters");
  m.num_ceps = c.GetInt("mfcc.num_ceps");
  m.pre_emphasis = c.GetDouble("mfcc.pre_emphasis");
  m.log_floor = c.GetDouble("mfcc.log_floor");
  return m;
}

CmvnMode CmvnFromConfig(const Config& c) {
  const std::string& v = c.Get("mfcc.cmvn");
  if (v == "none") return CmvnMode::kNone;
  if (v == "utterance") return CmvnMode::kUtterance;
  throw UsageError("mfcc.cmvn must be none or utterance");
}

ModelConfig ModelFromConfig(const Config& c, ModelKind kind, int input_dim) {
  ModelConfig m;
  m.kind = kind;
  m.input_dim = input_dim;
  m.hidden_size = c.GetInt("model.hidden_size");
  m.encoder_layers = c.GetInt("model.encoder_layers");
  m.decoder_layers = c.GetInt("model.decoder_layers");
  m.embedding_dim = c.GetInt("model.embedding_dim");
  m.vae_sigma = c.GetDouble("vae.sigma");
  m.Validate();
  return m;
}

TrainConfig TrainFromConfig(const Config& c) {
  TrainConfig t;
  t.batch_size = c.GetInt("train.batch_size");
  t.max_epochs = c.GetInt("train.max_epochs");
  t.patience = c.GetInt("train.patience");
  t.pretrain_epochs = c.GetInt("train.pretrain_epochs");
  t.adam.learning_rate = c.GetDouble("train.learning_rate");
  t.clip_norm = c.GetDouble("train.clip_norm");
  t.Validate();
  return t;
}

DtwConfig DtwFromConfig(const Config& c) {
  return {ParseLocalDistance(c.Get("dtw.local_distance")),
          c.GetBool("dtw.normalize")};
}

SynthConfig SynthFromConfig(const Config& c) {
  SynthConfig s;
  s.types = c.GetInt("synth.types");
  s.tokens_per_type = c.GetInt("synth.tokens_per_type");
  s.dev_tokens_per_type = c.GetInt("synth.dev_tokens_per_type");
  s.train_tokens_per_type = c.GetInt("synth.train_tokens_per_type");
  s.train_pairs = c.GetInt("synth.train_pairs");
  s.speakers = c.GetInt("synth.speakers");
  s.dim = c.GetInt("synth.dim");
  s.phones = c.GetInt("synth.phones");
  s.words_per_utterance = c.GetInt("synth.words_per_utterance");
  s.offset_scale = c.GetDouble("synth.offset_scale");
  s.phone_scale = c.GetDouble("synth.phone_scale");
  s.Validate();
  return s;
}

}  // namespace awe
