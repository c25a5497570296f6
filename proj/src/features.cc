// Copyright 2026 The napt Authors
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

#include "napt/features.h"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <numbers>

namespace napt {

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kMel: return "mel";
    case FeatureKind::kLps: return "lps";
    case FeatureKind::kMfcc: return "mfcc";
    case FeatureKind::kProsody: return "prosody";
  }
  return "unknown";
}

FeatureKind feature_kind_from_string(const std::string& name) {
  if (name == "mel") return FeatureKind::kMel;
  if (name == "lps") return FeatureKind::kLps;
  if (name == "mfcc") return FeatureKind::kMfcc;
  if (name == "prosody") return FeatureKind::kProsody;
  throw ConfigError("kind", "unknown feature kind '" + name + "'");
}

void FrameConfig::validate() const {
  if (hop_samples <= 0) throw ConfigError("hop_samples", "must be positive");
  if (hop_samples > frame_len_samples)
    throw ConfigError("hop_samples", "must not exceed frame_len_samples");
  if (frame_len_samples > n_fft)
    throw ConfigError("frame_len_samples", "must not exceed n_fft");
  if (n_mels <= 0) throw ConfigError("n_mels", "must be positive");
  if (n_mfcc <= 0 || n_mfcc > n_mels)
    throw ConfigError("n_mfcc", "must be in [1, n_mels]");
}

Index num_frames(std::size_t num_samples, const FrameConfig& cfg) {
  if (num_samples < std::size_t(cfg.frame_len_samples))
    throw Error("clip of " + std::to_string(num_samples) +
                " samples is shorter than one frame (" +
                std::to_string(cfg.frame_len_samples) + ")");
  return 1 + Index(num_samples - cfg.frame_len_samples) / cfg.hop_samples;
}

Eigen::VectorXd hann_window(int length) {
  Eigen::VectorXd w(length);
  for (int n = 0; n < length; ++n)
    w(n) = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
  return w;
}

Eigen::MatrixXd stft_power(const AudioClip& clip, const FrameConfig& cfg) {
  cfg.validate();
  const Index T = num_frames(clip.size(), cfg);
  const Eigen::VectorXd window = hann_window(cfg.frame_len_samples);
  Eigen::MatrixXd power(T, cfg.n_bins());

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> frame(cfg.n_fft, 0.0);
  std::vector<std::complex<double>> spectrum;
  for (Index t = 0; t < T; ++t) {
    const std::size_t start = std::size_t(t) * cfg.hop_samples;
    std::fill(frame.begin(), frame.end(), 0.0);
    for (int n = 0; n < cfg.frame_len_samples; ++n)
      frame[n] = clip.samples[start + n] * window(n);
    fft.fwd(spectrum, frame);
    for (int k = 0; k < cfg.n_bins(); ++k) power(t, k) = std::norm(spectrum[k]);
  }
  return power;
}

namespace {

double floored_log(double v) { return std::log(v + kLogFloor); }

}  // namespace

FeatureMatrix log_power_spectrum(const AudioClip& clip,
                                 const FrameConfig& cfg) {
  FeatureMatrix out;
  out.kind = FeatureKind::kLps;
  out.frames = stft_power(clip, cfg).unaryExpr(&floored_log);
  out.frame_hop_samples = cfg.hop_samples;
  out.frame_len_samples = cfg.frame_len_samples;
  return out;
}

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

}  // namespace

Eigen::MatrixXd mel_filterbank(const FrameConfig& cfg) {
  const double nyquist = kSampleRate / 2.0;
  const double mel_hi = hz_to_mel(nyquist);
  std::vector<double> edges(cfg.n_mels + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i)
    edges[i] = mel_to_hz(mel_hi * i / (cfg.n_mels + 1));

  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(cfg.n_mels, cfg.n_bins());
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < cfg.n_bins(); ++k) {
      const double f = double(k) * kSampleRate / cfg.n_fft;
      if (f > lo && f < hi)
        fb(m, k) = f <= center ? (f - lo) / (center - lo)
                               : (hi - f) / (hi - center);
    }
  }
  return fb;
}

FeatureMatrix mel_spectrogram(const AudioClip& clip, const FrameConfig& cfg) {
  FeatureMatrix out;
  out.kind = FeatureKind::kMel;
  const Eigen::MatrixXd mel =
      stft_power(clip, cfg) * mel_filterbank(cfg).transpose();
  out.frames = mel.unaryExpr(&floored_log);
  out.frame_hop_samples = cfg.hop_samples;
  out.frame_len_samples = cfg.frame_len_samples;
  return out;
}

Eigen::MatrixXd dct_matrix(int n_out, int n_in) {
  Eigen::MatrixXd d(n_out, n_in);
  for (int k = 0; k < n_out; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n_in);
    for (int n = 0; n < n_in; ++n)
      d(k, n) = scale * std::cos(std::numbers::pi * k * (2.0 * n + 1.0) /
                                 (2.0 * n_in));
  }
  return d;
}

FeatureMatrix mfcc_from_mel(const FeatureMatrix& mel, const FrameConfig& cfg) {
  if (mel.kind != FeatureKind::kMel) throw Error("mfcc_from_mel needs mel input");
  FeatureMatrix out = mel;
  out.kind = FeatureKind::kMfcc;
  out.frames = mel.frames * dct_matrix(cfg.n_mfcc, cfg.n_mels).transpose();
  return out;
}

FeatureMatrix mfcc(const AudioClip& clip, const FrameConfig& cfg) {
  return mfcc_from_mel(mel_spectrogram(clip, cfg), cfg);
}

FeatureMatrix prosody(const AudioClip& clip, const FrameConfig& cfg) {
  cfg.validate();
  const Index T = num_frames(clip.size(), cfg);
  const int N = cfg.frame_len_samples;
  const int min_lag = int(std::floor(kSampleRate / kMaxF0Hz));
  const int max_lag = std::min(N - 2, int(std::ceil(kSampleRate / kMinF0Hz)));

  FeatureMatrix out;
  out.kind = FeatureKind::kProsody;
  out.frames.resize(T, 4);
  out.frame_hop_samples = cfg.hop_samples;
  out.frame_len_samples = N;

  std::vector<double> acf(max_lag + 2, 0.0);
  std::vector<double> log_f0(T, 0.0);
  std::vector<bool> voiced(T, false);
  for (Index t = 0; t < T; ++t) {
    const double* x = clip.samples.data() + t * cfg.hop_samples;
    double energy = 0.0;
    int crossings = 0;
    for (int n = 0; n < N; ++n) energy += x[n] * x[n];
    for (int n = 0; n + 1 < N; ++n)
      if (x[n] * x[n + 1] < 0.0) ++crossings;

    if (energy > 0.0) {
      for (int lag = min_lag - 1; lag <= max_lag + 1; ++lag) {
        double r = 0.0;
        for (int n = 0; n + lag < N; ++n) r += x[n] * x[n + lag];
        acf[lag] = r / energy;
      }
      int best = min_lag;
      for (int lag = min_lag; lag <= max_lag; ++lag)
        if (acf[lag] > acf[best]) best = lag;
      if (acf[best] >= kVoicingThreshold) {
        // Refine on the unbiased estimate so the (N - lag) taper does not
        // pull the peak toward shorter lags.
        auto unbiased = [&](int lag) { return acf[lag] * N / double(N - lag); };
        const double a = unbiased(best - 1), b = unbiased(best),
                     c = unbiased(best + 1);
        const double denom = a - 2.0 * b + c;
        double shift = denom < 0.0 ? 0.5 * (a - c) / denom : 0.0;
        shift = std::clamp(shift, -0.5, 0.5);
        voiced[t] = true;
        log_f0[t] = std::log(kSampleRate / (best + shift));
      }
    }
    out.frames(t, 1) = voiced[t] ? 1.0 : 0.0;
    out.frames(t, 2) = double(crossings) / double(N - 1);
    out.frames(t, 3) = std::log(energy + kLogFloor);
  }

  std::vector<Index> voiced_idx;
  for (Index t = 0; t < T; ++t)
    if (voiced[t]) voiced_idx.push_back(t);
  for (Index t = 0; t < T; ++t) {
    double v = 0.0;
    if (!voiced_idx.empty()) {
      auto it = std::lower_bound(voiced_idx.begin(), voiced_idx.end(), t);
      if (it == voiced_idx.end()) {
        v = log_f0[voiced_idx.back()];
      } else if (*it == t || it == voiced_idx.begin()) {
        v = log_f0[*it];
      } else {
        const Index hi = *it, lo = *(it - 1);
        const double w = double(t - lo) / double(hi - lo);
        v = (1.0 - w) * log_f0[lo] + w * log_f0[hi];
      }
    }
    out.frames(t, 0) = v;
  }
  return out;
}

FeatureMatrix compute_features(const AudioClip& clip, FeatureKind kind,
                               const FrameConfig& cfg) {
  switch (kind) {
    case FeatureKind::kMel: return mel_spectrogram(clip, cfg);
    case FeatureKind::kLps: return log_power_spectrum(clip, cfg);
    case FeatureKind::kMfcc: return mfcc(clip, cfg);
    case FeatureKind::kProsody: return prosody(clip, cfg);
  }
  throw Error("unknown feature kind");
}

namespace {

void put_i32(std::ofstream& f, int32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = (uint32_t(v) >> (8 * i)) & 0xff;
  f.write(reinterpret_cast<const char*>(b), 4);
}

int32_t get_i32(const unsigned char* b) {
  return int32_t(uint32_t(b[0]) | (uint32_t(b[1]) << 8) |
                 (uint32_t(b[2]) << 16) | (uint32_t(b[3]) << 24));
}

}  // namespace

void write_feature_file(const std::filesystem::path& path,
                        const FeatureMatrix& feats) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  const char header[8] = {'F', 'E', 'A', 'T', char(feats.kind), 0, 0, 0};
  f.write(header, 8);
  put_i32(f, int32_t(feats.num_frames()));
  put_i32(f, int32_t(feats.dim()));
  for (Index t = 0; t < feats.num_frames(); ++t) {
    for (Index j = 0; j < feats.dim(); ++j) {
      const float v = float(feats.frames(t, j));
      uint32_t bits;
      std::memcpy(&bits, &v, 4);
      put_i32(f, int32_t(bits));
    }
  }
  if (!f) throw Error("write failed for " + path.string());
}

FeatureMatrix read_feature_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), "FEAT", 4) != 0)
    throw Error("not a feature file: " + path.string());
  FeatureMatrix out;
  out.kind = static_cast<FeatureKind>(bytes[4]);
  const int32_t T = get_i32(bytes.data() + 8), F = get_i32(bytes.data() + 12);
  if (T < 0 || F < 0 || bytes.size() != 16 + 4 * std::size_t(T) * F)
    throw Error("feature file size mismatch: " + path.string());
  out.frames.resize(T, F);
  for (int32_t t = 0; t < T; ++t)
    for (int32_t j = 0; j < F; ++j) {
      const uint32_t bits =
          uint32_t(get_i32(bytes.data() + 16 + 4 * (std::size_t(t) * F + j)));
      float v;
      std::memcpy(&v, &bits, 4);
      out.frames(t, j) = v;
    }
  return out;
}

}  // namespace napt
