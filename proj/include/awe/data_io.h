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

#ifndef AWE_DATA_IO_H_
#define AWE_DATA_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace awe {

// Frame-level features, one row per frame. Stored as 32-bit floats because
// that is the on-disk precision; models widen to double.
using FrameMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FeatureSequence {
  std::string utterance_id;
  FrameMatrix frames;

  int num_frames() const { return static_cast<int>(frames.rows()); }
  int dim() const { return static_cast<int>(frames.cols()); }
};

// Half-open frame range [start, end) within one utterance.
struct SegmentRef {
  std::string utterance_id;
  int start = 0;
  int end = 0;

  int length() const { return end - start; }
  bool operator==(const SegmentRef&) const = default;
};

// Two segments predicted to be the same word type.
struct PairEntry {
  SegmentRef a;
  SegmentRef b;
};

struct EvalToken {
  SegmentRef segment;
  std::string word_type;
  std::string speaker;
};

// An ordered collection of utterances with lookup by id. Insertion order is
// the file order, which downstream commands rely on (embedding archives map
// record i to token i).
class FeatureArchive {
 public:
  FeatureArchive() = default;
  explicit FeatureArchive(std::vector<FeatureSequence> entries);

  // Throws DataError on a duplicate id, a dimension mismatch, T == 0 or a
  // non-finite value.
  void Add(FeatureSequence seq);

  const FeatureSequence& Get(std::string_view utterance_id) const;
  const FeatureSequence* Find(std::string_view utterance_id) const;

  const std::vector<FeatureSequence>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  // Feature dimension, or 0 for an empty archive.
  int dim() const { return dim_; }
  int64_t total_frames() const;

 private:
  std::vector<FeatureSequence> entries_;
  std::unordered_map<std::string, size_t> index_;
  int dim_ = 0;
};

// AWEF binary archive: "AWEF", u32 version (1), u32 record count, then per
// record u32 id length, id bytes, u32 T, u32 D and T*D float32 values in
// row-major order. All integers little-endian.
void WriteFeatureArchive(std::span<const FeatureSequence> entries,
                         const std::filesystem::path& path);
void WriteFeatureArchive(const FeatureArchive& archive,
                         const std::filesystem::path& path);
FeatureArchive ReadFeatureArchive(const std::filesystem::path& path);

// Rows [start, end) of the referenced utterance. The result's id is the
// utterance id.
FeatureSequence ExtractSegment(const FeatureArchive& archive,
                               const SegmentRef& ref);

// Throws DataError if any referenced segment does not resolve.
void ValidateSegment(const FeatureArchive& archive, const SegmentRef& ref);

enum class TimeUnit { kFrames, kSeconds };

// Frames per second used when a pair or evaluation list is given in seconds.
inline constexpr double kFramesPerSecond = 100.0;

// "utt_a start_a end_a utt_b start_b end_b" per line; '#' starts a comment.
std::vector<PairEntry> LoadPairList(const std::filesystem::path& path,
                                    TimeUnit unit = TimeUnit::kFrames);
void SavePairList(std::span<const PairEntry> pairs,
                  const std::filesystem::path& path);

// Keeps pairs whose two segments both have a length within [min_frames,
// max_frames]. A bound of 0 disables that side.
std::vector<PairEntry> FilterPairsByDuration(std::span<const PairEntry> pairs,
                                             int min_frames, int max_frames);

// "utt start end word_type speaker" per line.
std::vector<EvalToken> LoadEvalList(const std::filesystem::path& path,
                                    TimeUnit unit = TimeUnit::kFrames);
void SaveEvalList(std::span<const EvalToken> tokens,
                  const std::filesystem::path& path);

// Reads "utt start end [anything...]" lines. Accepts eval lists as segment
// lists.
std::vector<SegmentRef> LoadSegmentList(const std::filesystem::path& path,
                                        TimeUnit unit = TimeUnit::kFrames);

// Draws `count` random segments. An utterance is eligible when it has at
// least min_frames frames and is chosen with probability proportional to its
// length; the segment length is uniform on [min_frames, min(max_frames, T)]
// and the start is uniform over the valid positions.
std::vector<SegmentRef> SampleRandomSegments(const FeatureArchive& archive,
                                             int count, int min_frames,
                                             int max_frames, uint64_t seed);

}  // namespace awe

#endif  // AWE_DATA_IO_H_
