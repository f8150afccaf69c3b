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

#include "awe/data_io.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "awe/error.h"

namespace awe {

static_assert(std::endian::native == std::endian::little,
              "AWEF I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'A', 'W', 'E', 'F'};
constexpr uint32_t kVersion = 1;

void PutU32(std::ostream& os, uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t GetU32(std::istream& is, const std::string& what) {
  uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(v)))
    throw DataError("truncated archive while reading " + what);
  return v;
}

// Splits a line into whitespace-separated fields, dropping '#' comments.
std::vector<std::string> Fields(const std::string& line) {
  std::string body = line.substr(0, line.find('#'));
  std::istringstream ss(body);
  std::vector<std::string> out;
  std::string f;
  while (ss >> f) out.push_back(f);
  return out;
}

int ParseBoundary(const std::string& text, TimeUnit unit,
                  const std::string& where) {
  try {
    size_t used = 0;
    if (unit == TimeUnit::kSeconds) {
      double seconds = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return static_cast<int>(std::lround(seconds * kFramesPerSecond));
    }
    long v = std::stol(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return static_cast<int>(v);
  } catch (const std::logic_error&) {
    throw DataError(where + ": bad frame boundary '" + text + "'");
  }
}

SegmentRef ParseRef(const std::vector<std::string>& f, size_t offset,
                    TimeUnit unit, const std::string& where) {
  SegmentRef ref{f[offset], ParseBoundary(f[offset + 1], unit, where),
                 ParseBoundary(f[offset + 2], unit, where)};
  if (ref.start < 0 || ref.start >= ref.end)
    throw DataError(where + ": need 0 <= start < end");
  return ref;
}

// Calls fn(fields, "path:line") for every non-blank line.
template <typename Fn>
void ForEachLine(const std::filesystem::path& path, Fn fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto f = Fields(line);
    if (f.empty()) continue;
    fn(f, path.string() + ":" + std::to_string(line_no));
  }
}

std::ofstream OpenForWrite(const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

FeatureArchive::FeatureArchive(std::vector<FeatureSequence> entries) {
  for (auto& e : entries) Add(std::move(e));
}

void FeatureArchive::Add(FeatureSequence seq) {
  if (seq.num_frames() < 1)
    throw DataError("utterance '" + seq.utterance_id + "' has no frames");
  if (!seq.frames.allFinite())
    throw DataError("utterance '" + seq.utterance_id +
                    "' contains non-finite values");
  if (!entries_.empty() && seq.dim() != dim_)
    throw DataError("utterance '" + seq.utterance_id + "' has dimension " +
                    std::to_string(seq.dim()) + ", archive has " +
                    std::to_string(dim_));
  if (index_.count(seq.utterance_id))
    throw DataError("duplicate utterance id '" + seq.utterance_id + "'");
  dim_ = seq.dim();
  index_.emplace(seq.utterance_id, entries_.size());
  entries_.push_back(std::move(seq));
}

const FeatureSequence* FeatureArchive::Find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

const FeatureSequence& FeatureArchive::Get(std::string_view id) const {
  const FeatureSequence* seq = Find(id);
  if (!seq) throw DataError("unknown utterance '" + std::string(id) + "'");
  return *seq;
}

int64_t FeatureArchive::total_frames() const {
  int64_t n = 0;
  for (const auto& e : entries_) n += e.num_frames();
  return n;
}

void WriteFeatureArchive(std::span<const FeatureSequence> entries,
                         const std::filesystem::path& path) {
  // Validate everything before touching the file.
  FeatureArchive check;
  for (const auto& e : entries) {
    if (check.Find(e.utterance_id))
      throw DataError("duplicate utterance id '" + e.utterance_id + "'");
    if (!check.empty() && e.dim() != check.dim())
      throw DataError("inconsistent feature dimension for '" +
                      e.utterance_id + "'");
    FeatureSequence stub{e.utterance_id, FrameMatrix::Zero(1, e.dim())};
    check.Add(std::move(stub));
  }

  auto out = OpenForWrite(path, true);
  out.write(kMagic, 4);
  PutU32(out, kVersion);
  PutU32(out, static_cast<uint32_t>(entries.size()));
  for (const auto& e : entries) {
    PutU32(out, static_cast<uint32_t>(e.utterance_id.size()));
    out.write(e.utterance_id.data(),
              static_cast<std::streamsize>(e.utterance_id.size()));
    PutU32(out, static_cast<uint32_t>(e.num_frames()));
    PutU32(out, static_cast<uint32_t>(e.dim()));
    out.write(reinterpret_cast<const char*>(e.frames.data()),
              static_cast<std::streamsize>(e.frames.size() * sizeof(float)));
  }
  if (!out) throw DataError("write failed for " + path.string());
}

void WriteFeatureArchive(const FeatureArchive& archive,
                         const std::filesystem::path& path) {
  WriteFeatureArchive(std::span<const FeatureSequence>(archive.entries()),
                      path);
}

FeatureArchive ReadFeatureArchive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError(path.string() + ": bad magic, not an AWEF archive");
  uint32_t version = GetU32(in, "version");
  if (version != kVersion)
    throw DataError(path.string() + ": unsupported version " +
                    std::to_string(version));
  uint32_t count = GetU32(in, "record count");

  FeatureArchive archive;
  for (uint32_t r = 0; r < count; ++r) {
    std::string rec = "record " + std::to_string(r);
    uint32_t id_len = GetU32(in, rec + " id length");
    std::string id(id_len, '\0');
    if (!in.read(id.data(), id_len))
      throw DataError("truncated archive while reading " + rec + " id");
    uint32_t rows = GetU32(in, rec + " frame count");
    uint32_t cols = GetU32(in, rec + " dimension");
    FeatureSequence seq{id, FrameMatrix(rows, cols)};
    auto bytes = static_cast<std::streamsize>(uint64_t{rows} * cols *
                                              sizeof(float));
    if (!in.read(reinterpret_cast<char*>(seq.frames.data()), bytes))
      throw DataError("truncated archive while reading " + rec + " values");
    archive.Add(std::move(seq));
  }
  return archive;
}

void ValidateSegment(const FeatureArchive& archive, const SegmentRef& ref) {
  const FeatureSequence& utt = archive.Get(ref.utterance_id);
  if (ref.start < 0 || ref.start >= ref.end || ref.end > utt.num_frames())
    throw DataError("segment " + ref.utterance_id + " [" +
                    std::to_string(ref.start) + ", " +
                    std::to_string(ref.end) + ") out of bounds (T=" +
                    std::to_string(utt.num_frames()) + ")");
}

FeatureSequence ExtractSegment(const FeatureArchive& archive,
                               const SegmentRef& ref) {
  ValidateSegment(archive, ref);
  const FeatureSequence& utt = archive.Get(ref.utterance_id);
  return {ref.utterance_id, utt.frames.middleRows(ref.start, ref.length())};
}

std::vector<PairEntry> LoadPairList(const std::filesystem::path& path,
                                    TimeUnit unit) {
  std::vector<PairEntry> pairs;
  ForEachLine(path, [&](const std::vector<std::string>& f,
                        const std::string& where) {
    if (f.size() != 6)
      throw DataError(where + ": expected 6 fields, got " +
                      std::to_string(f.size()));
    pairs.push_back({ParseRef(f, 0, unit, where), ParseRef(f, 3, unit, where)});
  });
  return pairs;
}

void SavePairList(std::span<const PairEntry> pairs,
                  const std::filesystem::path& path) {
  auto out = OpenForWrite(path, false);
  for (const auto& p : pairs)
    out << p.a.utterance_id << ' ' << p.a.start << ' ' << p.a.end << ' '
        << p.b.utterance_id << ' ' << p.b.start << ' ' << p.b.end << '\n';
}

std::vector<PairEntry> FilterPairsByDuration(std::span<const PairEntry> pairs,
                                             int min_frames, int max_frames) {
  auto ok = [&](const SegmentRef& r) {
    return (min_frames <= 0 || r.length() >= min_frames) &&
           (max_frames <= 0 || r.length() <= max_frames);
  };
  std::vector<PairEntry> out;
  for (const auto& p : pairs)
    if (ok(p.a) && ok(p.b)) out.push_back(p);
  return out;
}

std::vector<EvalToken> LoadEvalList(const std::filesystem::path& path,
                                    TimeUnit unit) {
  std::vector<EvalToken> tokens;
  ForEachLine(path, [&](const std::vector<std::string>& f,
                        const std::string& where) {
    if (f.size() != 5)
      throw DataError(where + ": expected 5 fields (utt start end word "
                              "speaker), got " +
                      std::to_string(f.size()));
    tokens.push_back({ParseRef(f, 0, unit, where), f[3], f[4]});
  });
  return tokens;
}

void SaveEvalList(std::span<const EvalToken> tokens,
                  const std::filesystem::path& path) {
  auto out = OpenForWrite(path, false);
  for (const auto& t : tokens)
    out << t.segment.utterance_id << ' ' << t.segment.start << ' '
        << t.segment.end << ' ' << t.word_type << ' ' << t.speaker << '\n';
}

std::vector<SegmentRef> LoadSegmentList(const std::filesystem::path& path,
                                        TimeUnit unit) {
  std::vector<SegmentRef> refs;
  ForEachLine(path, [&](const std::vector<std::string>& f,
                        const std::string& where) {
    if (f.size() < 3)
      throw DataError(where + ": expected at least 3 fields");
    refs.push_back(ParseRef(f, 0, unit, where));
  });
  return refs;
}

std::vector<SegmentRef> SampleRandomSegments(const FeatureArchive& archive,
                                             int count, int min_frames,
                                             int max_frames, uint64_t seed) {
  if (min_frames < 1 || max_frames < min_frames)
    throw UsageError("need max_frames >= min_frames >= 1");
  std::vector<size_t> eligible;
  std::vector<double> weights;
  for (size_t i = 0; i < archive.size(); ++i) {
    int t = archive.entries()[i].num_frames();
    if (t >= min_frames) {
      eligible.push_back(i);
      weights.push_back(t);
    }
  }
  if (eligible.empty())
    throw DataError("no utterance has at least " + std::to_string(min_frames) +
                    " frames");

  std::mt19937_64 rng(seed);
  std::discrete_distribution<size_t> pick(weights.begin(), weights.end());
  std::vector<SegmentRef> out;
  out.reserve(count);
  for (int n = 0; n < count; ++n) {
    const FeatureSequence& utt = archive.entries()[eligible[pick(rng)]];
    int t = utt.num_frames();
    int len = std::uniform_int_distribution<int>(min_frames,
                                                 std::min(max_frames, t))(rng);
    int start = std::uniform_int_distribution<int>(0, t - len)(rng);
    out.push_back({utt.utterance_id, start, start + len});
  }
  return out;
}

}  // namespace awe
