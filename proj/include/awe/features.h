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

#ifndef AWE_FEATURES_H_
#define AWE_FEATURES_H_

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "awe/data_io.h"

namespace awe {

struct Waveform {
  std::vector<double> samples;
  double sample_rate = 16000.0;
};

struct MfccConfig {
  double window_ms = 25.0;
  double hop_ms = 10.0;
  int fft_size = 512;
  int mel_filters = 24;
  int num_ceps = 13;
  double pre_emphasis = 0.97;
  double log_floor = 1e-10;

  int WindowSamples(double sample_rate) const;
  int HopSamples(double sample_rate) const;
  // Throws UsageError when the settings are inconsistent for this rate.
  void Validate(double sample_rate) const;
};

enum class CmvnMode { kNone, kUtterance };

// T = 1 + floor((N - window) / hop); throws DataError if N < window.
int NumFrames(int num_samples, int window_samples, int hop_samples);

// Triangular filters on the HTK mel scale between 0 Hz and Nyquist.
// Shape: mel_filters x (fft_size / 2 + 1).
Eigen::MatrixXd MelFilterbank(const MfccConfig& cfg, double sample_rate);

// Center frequency in Hz of each mel filter.
std::vector<double> MelCenterFrequencies(const MfccConfig& cfg,
                                         double sample_rate);

// Orthonormal DCT-II, rows are basis vectors: n x n.
Eigen::MatrixXd DctMatrix(int n);

// Mel filterbank energies (before the log), one row per frame.
Eigen::MatrixXd FilterbankEnergies(const Waveform& wav, const MfccConfig& cfg);

// pre-emphasis -> Hamming window -> power spectrum -> mel filterbank ->
// floored log -> DCT-II, keeping coefficients 0..num_ceps-1.
FeatureSequence ComputeMfcc(const Waveform& wav, const MfccConfig& cfg,
                            std::string utterance_id = "");

// kUtterance: per-column mean 0 and population variance 1. Columns with zero
// variance are only mean-subtracted.
FeatureSequence Cmvn(FeatureSequence seq, CmvnMode mode);

// 16-bit signed PCM, mono. Samples keep their integer scale.
Waveform ReadWav(const std::filesystem::path& path);
void WriteWav(const Waveform& wav, const std::filesystem::path& path);

}  // namespace awe

#endif  // AWE_FEATURES_H_
