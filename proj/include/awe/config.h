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

#ifndef AWE_CONFIG_H_
#define AWE_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "awe/baselines.h"
#include "awe/features.h"
#include "awe/models.h"
#include "awe/training.h"

namespace awe {

struct SynthConfig;

// Flat key=value settings. Every key has a default; unknown keys are
// rejected. The resolved settings hash identifies a run in every output.
class Config {
 public:
  Config();

  // key=value lines, '#' comments. Throws UsageError on unknown keys or
  // malformed lines.
  void LoadFile(const std::filesystem::path& path);
  // Applies one "key=value" override.
  void Set(std::string_view assignment);
  void Set(const std::string& key, const std::string& value);

  const std::string& Get(const std::string& key) const;
  int GetInt(const std::string& key) const;
  double GetDouble(const std::string& key) const;
  bool GetBool(const std::string& key) const;
  std::vector<uint64_t> GetSeeds(const std::string& key) const;

  // Canonical "key=value\n" text in key order.
  std::string Resolved() const;
  // FNV-1a 64 of Resolved(), as 16 hex digits.
  std::string Hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

MfccConfig MfccFromConfig(const Config& c);
CmvnMode CmvnFromConfig(const Config& c);
ModelConfig ModelFromConfig(const Config& c, ModelKind kind, int input_dim);
TrainConfig TrainFromConfig(const Config& c);
DtwConfig DtwFromConfig(const Config& c);
SynthConfig SynthFromConfig(const Config& c);

}  // namespace awe

#endif  // AWE_CONFIG_H_
