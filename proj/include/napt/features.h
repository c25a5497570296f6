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

#ifndef NAPT_FEATURES_H_
#define NAPT_FEATURES_H_

#include <filesystem>
#include <string>

#include "napt/audio.h"

namespace napt {

enum class FeatureKind : uint8_t { kMel = 0, kLps = 1, kMfcc = 2, kProsody = 3 };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& name);

// Framing defaults are 25 ms windows, 10 ms hop, 512-point FFT.
struct FrameConfig {
  int frame_len_samples = 400;
  int hop_samples = 160;
  int n_fft = 512;
  int n_mels = 80;
  int n_mfcc = 20;

  int n_bins() const { return n_fft / 2 + 1; }
  void validate() const;
};

struct FeatureMatrix {
  FeatureKind kind = FeatureKind::kMel;
  Eigen::MatrixXd frames;  // T x F
  int frame_hop_samples = 160;
  int frame_len_samples = 400;

  Index num_frames() const { return frames.rows(); }
  Index dim() const { return frames.cols(); }
};

/// Number of complete frames: 1 + floor((len - frame_len) / hop). Throws if
/// the clip is shorter than one frame.
Index num_frames(std::size_t num_samples, const FrameConfig& cfg);

/// Periodic Hann window of the given length.
Eigen::VectorXd hann_window(int length);

/// |DFT|^2 of each Hann-windowed, zero-padded frame; T x (n_fft/2 + 1).
Eigen::MatrixXd stft_power(const AudioClip& clip, const FrameConfig& cfg);

FeatureMatrix log_power_spectrum(const AudioClip& clip, const FrameConfig& cfg);

/// HTK-scale triangular filterbank over [0, 8000] Hz; n_mels x n_bins.
Eigen::MatrixXd mel_filterbank(const FrameConfig& cfg);

FeatureMatrix mel_spectrogram(const AudioClip& clip, const FrameConfig& cfg);

/// Orthonormal DCT-II basis, rows are output coefficients: n_out x n_in.
Eigen::MatrixXd dct_matrix(int n_out, int n_in);

/// DCT-II of each log-Mel frame, first n_mfcc coefficients.
FeatureMatrix mfcc(const AudioClip& clip, const FrameConfig& cfg);
FeatureMatrix mfcc_from_mel(const FeatureMatrix& mel, const FrameConfig& cfg);

inline constexpr double kVoicingThreshold = 0.3;
inline constexpr double kMinF0Hz = 50.0;
inline constexpr double kMaxF0Hz = 400.0;

/// Per-frame (log-F0, voicing flag, zero-crossing rate, log energy).
///
/// Pitch comes from the peak of the biased normalised autocorrelation
/// r(tau) / r(0) over lags covering 50-400 Hz, refined with a parabolic fit.
/// A frame is voiced when the peak reaches kVoicingThreshold. Log-F0 is
/// linearly interpolated across unvoiced frames, held constant before the
/// first and after the last voiced frame, and 0 for a fully unvoiced clip.
FeatureMatrix prosody(const AudioClip& clip, const FrameConfig& cfg);

FeatureMatrix compute_features(const AudioClip& clip, FeatureKind kind,
                               const FrameConfig& cfg);

/// Binary feature file: "FEAT", kind byte, 3 zero bytes, T and F as
/// little-endian int32, then T*F little-endian float32 values row-major.
void write_feature_file(const std::filesystem::path& path,
                        const FeatureMatrix& feats);
FeatureMatrix read_feature_file(const std::filesystem::path& path);

}  // namespace napt

#endif  // NAPT_FEATURES_H_
