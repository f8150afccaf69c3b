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

#include "awe/features.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "awe/error.h"

namespace awe {

namespace {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// fftw_plan_* is not thread-safe; execution is.
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

class PowerSpectrum {
 public:
  explicit PowerSpectrum(int n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(PlannerMutex());
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~PowerSpectrum() {
    {
      std::lock_guard<std::mutex> lock(PlannerMutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  PowerSpectrum(const PowerSpectrum&) = delete;
  PowerSpectrum& operator=(const PowerSpectrum&) = delete;

  // frame is zero-padded to n.
  void Compute(const std::vector<double>& frame, Eigen::VectorXd* power) {
    std::fill(in_, in_ + n_, 0.0);
    std::copy(frame.begin(), frame.end(), in_);
    fftw_execute(plan_);
    power->resize(n_ / 2 + 1);
    for (int k = 0; k <= n_ / 2; ++k)
      (*power)(k) = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
  }

 private:
  int n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

std::vector<double> MelEdges(const MfccConfig& cfg, double sample_rate) {
  double lo = HzToMel(0.0), hi = HzToMel(sample_rate / 2.0);
  std::vector<double> edges(cfg.mel_filters + 2);
  for (int i = 0; i < cfg.mel_filters + 2; ++i)
    edges[i] = MelToHz(lo + (hi - lo) * i / (cfg.mel_filters + 1));
  return edges;
}

}  // namespace

int MfccConfig::WindowSamples(double sample_rate) const {
  return static_cast<int>(std::lround(window_ms * sample_rate / 1000.0));
}

int MfccConfig::HopSamples(double sample_rate) const {
  return static_cast<int>(std::lround(hop_ms * sample_rate / 1000.0));
}

void MfccConfig::Validate(double sample_rate) const {
  if (sample_rate <= 0) throw UsageError("sample rate must be positive");
  if (num_ceps < 1 || num_ceps > mel_filters)
    throw UsageError("need 1 <= num_ceps <= mel_filters");
  if (WindowSamples(sample_rate) < 1 || HopSamples(sample_rate) < 1)
    throw UsageError("window and hop must cover at least one sample");
  if (fft_size < WindowSamples(sample_rate))
    throw UsageError("fft_size smaller than the analysis window");
  if (log_floor <= 0) throw UsageError("log_floor must be positive");
}

int NumFrames(int num_samples, int window_samples, int hop_samples) {
  if (num_samples < window_samples)
    throw DataError("waveform shorter than one analysis window (" +
                    std::to_string(num_samples) + " < " +
                    std::to_string(window_samples) + " samples)");
  return 1 + (num_samples - window_samples) / hop_samples;
}

std::vector<double> MelCenterFrequencies(const MfccConfig& cfg,
                                         double sample_rate) {
  auto edges = MelEdges(cfg, sample_rate);
  return {edges.begin() + 1, edges.end() - 1};
}

Eigen::MatrixXd MelFilterbank(const MfccConfig& cfg, double sample_rate) {
  const int bins = cfg.fft_size / 2 + 1;
  auto edges = MelEdges(cfg, sample_rate);
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(cfg.mel_filters, bins);
  for (int m = 0; m < cfg.mel_filters; ++m) {
    double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      double f = k * sample_rate / cfg.fft_size;
      double w = std::min((f - left) / (center - left),
                          (right - f) / (right - center));
      fb(m, k) = std::max(0.0, w);
    }
  }
  return fb;
}

Eigen::MatrixXd DctMatrix(int n) {
  Eigen::MatrixXd dct(n, n);
  for (int k = 0; k < n; ++k) {
    double scale = std::sqrt(2.0 / n) * (k == 0 ? std::sqrt(0.5) : 1.0);
    for (int m = 0; m < n; ++m)
      dct(k, m) = scale * std::cos(std::numbers::pi * k * (m + 0.5) / n);
  }
  return dct;
}

Eigen::MatrixXd FilterbankEnergies(const Waveform& wav, const MfccConfig& cfg) {
  cfg.Validate(wav.sample_rate);
  for (double s : wav.samples)
    if (!std::isfinite(s)) throw DataError("waveform has non-finite samples");
  const int window = cfg.WindowSamples(wav.sample_rate);
  const int hop = cfg.HopSamples(wav.sample_rate);
  const int frames =
      NumFrames(static_cast<int>(wav.samples.size()), window, hop);

  std::vector<double> emphasized(wav.samples.size());
  for (size_t n = 0; n < wav.samples.size(); ++n)
    emphasized[n] = wav.samples[n] -
                    (n > 0 ? cfg.pre_emphasis * wav.samples[n - 1] : 0.0);

  std::vector<double> hamming(window);
  for (int n = 0; n < window; ++n)
    hamming[n] = window == 1 ? 1.0
                             : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi *
                                                      n / (window - 1));

  const Eigen::MatrixXd fb = MelFilterbank(cfg, wav.sample_rate);
  PowerSpectrum spectrum(cfg.fft_size);
  Eigen::MatrixXd energies(frames, cfg.mel_filters);
  std::vector<double> frame(window);
  Eigen::VectorXd power;
  for (int t = 0; t < frames; ++t) {
    for (int n = 0; n < window; ++n)
      frame[n] = emphasized[t * hop + n] * hamming[n];
    spectrum.Compute(frame, &power);
    energies.row(t) = (fb * power).transpose();
  }
  return energies;
}

FeatureSequence ComputeMfcc(const Waveform& wav, const MfccConfig& cfg,
                            std::string utterance_id) {
  Eigen::MatrixXd log_energies =
      FilterbankEnergies(wav, cfg).cwiseMax(cfg.log_floor).array().log();
  Eigen::MatrixXd dct = DctMatrix(cfg.mel_filters).topRows(cfg.num_ceps);
  Eigen::MatrixXd ceps = log_energies * dct.transpose();
  return {std::move(utterance_id), ceps.cast<float>()};
}

FeatureSequence Cmvn(FeatureSequence seq, CmvnMode mode) {
  if (mode == CmvnMode::kNone) return seq;
  Eigen::MatrixXd x = seq.frames.cast<double>();
  const double t = static_cast<double>(x.rows());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    double mean = x.col(c).mean();
    x.col(c).array() -= mean;
    double var = x.col(c).squaredNorm() / t;
    if (var > 0) x.col(c) /= std::sqrt(var);
  }
  seq.frames = x.cast<float>();
  return seq;
}

namespace {

uint32_t ReadLe32(const char* p) {
  uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

uint16_t ReadLe16(const char* p) {
  uint16_t v;
  std::memcpy(&v, p, 2);
  return v;
}

}  // namespace

Waveform ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  auto bad = [&](const std::string& why) {
    return DataError(path.string() + ": " + why);
  };
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 ||
      bytes.compare(8, 4, "WAVE") != 0)
    throw bad("not a RIFF/WAVE file");

  Waveform wav;
  bool have_fmt = false;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    std::string id = bytes.substr(pos, 4);
    uint32_t size = ReadLe32(&bytes[pos + 4]);
    size_t body = pos + 8;
    if (body + size > bytes.size()) throw bad("truncated chunk '" + id + "'");
    if (id == "fmt ") {
      if (size < 16) throw bad("short fmt chunk");
      uint16_t format = ReadLe16(&bytes[body]);
      uint16_t channels = ReadLe16(&bytes[body + 2]);
      uint32_t rate = ReadLe32(&bytes[body + 4]);
      uint16_t bits = ReadLe16(&bytes[body + 14]);
      if (format != 1 || bits != 16) throw bad("only 16-bit PCM is supported");
      if (channels != 1) throw bad("only mono audio is supported");
      if (rate == 0) throw bad("zero sample rate");
      wav.sample_rate = rate;
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw bad("data chunk before fmt chunk");
      size_t n = size / 2;
      wav.samples.resize(n);
      for (size_t i = 0; i < n; ++i)
        wav.samples[i] =
            static_cast<int16_t>(ReadLe16(&bytes[body + 2 * i]));
      return wav;
    }
    pos = body + size + (size & 1);
  }
  throw bad("no data chunk");
}

void WriteWav(const Waveform& wav, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  auto u32 = [&](uint32_t v) { out.write(reinterpret_cast<char*>(&v), 4); };
  auto u16 = [&](uint16_t v) { out.write(reinterpret_cast<char*>(&v), 2); };
  const auto rate = static_cast<uint32_t>(wav.sample_rate);
  const auto data_bytes = static_cast<uint32_t>(wav.samples.size() * 2);
  out.write("RIFF", 4);
  u32(36 + data_bytes);
  out.write("WAVEfmt ", 8);
  u32(16);
  u16(1);
  u16(1);
  u32(rate);
  u32(rate * 2);
  u16(2);
  u16(16);
  out.write("data", 4);
  u32(data_bytes);
  for (double s : wav.samples) {
    double clipped = std::clamp(std::round(s), -32768.0, 32767.0);
    u16(static_cast<uint16_t>(static_cast<int16_t>(clipped)));
  }
}

}  // namespace awe
