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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

namespace napt {
namespace {

constexpr double kPi = std::numbers::pi;

AudioClip sine(double hz, std::size_t n, double amp = 1.0) {
  AudioClip c;
  for (std::size_t i = 0; i < n; ++i)
    c.samples.push_back(amp * std::sin(2 * kPi * hz * double(i) / kSampleRate));
  return c;
}

AudioClip silence(std::size_t n) {
  AudioClip c;
  c.samples.assign(n, 0.0);
  return c;
}

AudioClip white(std::size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  AudioClip c;
  for (std::size_t i = 0; i < n; ++i) c.samples.push_back(u(rng));
  return c;
}

// Direct O(N^2) DFT power of one windowed frame.
std::vector<double> dft_power(const AudioClip& clip, std::size_t start,
                              const FrameConfig& cfg) {
  const Eigen::VectorXd w = hann_window(cfg.frame_len_samples);
  std::vector<double> p(cfg.n_bins());
  for (int k = 0; k < cfg.n_bins(); ++k) {
    std::complex<double> acc = 0.0;
    for (int n = 0; n < cfg.frame_len_samples; ++n)
      acc += clip.samples[start + n] * w(n) *
             std::polar(1.0, -2 * kPi * k * n / cfg.n_fft);
    p[k] = std::norm(acc);
  }
  return p;
}

TEST(FrameCount, Formula) {
  FrameConfig cfg;
  EXPECT_EQ(num_frames(400, cfg), 1);
  EXPECT_EQ(num_frames(559, cfg), 1);
  EXPECT_EQ(num_frames(560, cfg), 2);
  EXPECT_EQ(num_frames(16000, cfg), 98);
  EXPECT_THROW(num_frames(399, cfg), Error);
  for (std::size_t len : {400u, 1000u, 8000u, 12345u}) {
    const Index T = 1 + Index(len - 400) / 160;
    EXPECT_EQ(stft_power(white(len, 1), cfg).rows(), T);
    EXPECT_EQ(prosody(white(len, 1), cfg).num_frames(), T);
    EXPECT_EQ(mfcc(white(len, 1), cfg).num_frames(), T);
  }
}

TEST(FrameConfig, Validation) {
  FrameConfig cfg;
  cfg.hop_samples = 500;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = FrameConfig{};
  cfg.n_fft = 256;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(StftPower, SilenceIsZero) {
  EXPECT_EQ(stft_power(silence(4000), {}).maxCoeff(), 0.0);
  EXPECT_THROW(stft_power(silence(100), {}), Error);
}

TEST(StftPower, MatchesDirectDft) {
  FrameConfig cfg;
  const AudioClip clip = white(2000, 7);
  const Eigen::MatrixXd p = stft_power(clip, cfg);
  for (Index t : {Index(0), Index(5)}) {
    const auto ref = dft_power(clip, std::size_t(t) * 160, cfg);
    for (int k = 0; k < cfg.n_bins(); ++k)
      EXPECT_NEAR(p(t, k), ref[k], 1e-9 * (1.0 + ref[k]));
  }
}

TEST(StftPower, SineArgmaxBin) {
  const Eigen::MatrixXd p = stft_power(sine(1000.0, 16000), {});
  for (Index t = 0; t < p.rows(); ++t) {
    Index arg;
    p.row(t).maxCoeff(&arg);
    EXPECT_EQ(arg, 32);
  }
}

TEST(StftPower, Parseval) {
  FrameConfig cfg;
  const AudioClip clip = white(6000, 3);
  const Eigen::MatrixXd p = stft_power(clip, cfg);
  const Eigen::VectorXd w = hann_window(cfg.frame_len_samples);
  for (Index t = 0; t < p.rows(); ++t) {
    double time_energy = 0.0;
    for (int n = 0; n < cfg.frame_len_samples; ++n) {
      const double v = clip.samples[t * 160 + n] * w(n);
      time_energy += v * v;
    }
    const int last = cfg.n_bins() - 1;
    const double full = p(t, 0) + p(t, last) + 2.0 * p.row(t).segment(1, last - 1).sum();
    EXPECT_NEAR(full / cfg.n_fft, time_energy, 1e-6 * time_energy);
  }
}

TEST(LogPowerSpectrum, SilenceShapeAndScaling) {
  FrameConfig cfg;
  const FeatureMatrix s = log_power_spectrum(silence(16000), cfg);
  EXPECT_EQ(s.dim(), 257);
  EXPECT_EQ(s.num_frames(), 98);
  EXPECT_TRUE((s.frames.array() == std::log(1e-10)).all());

  const AudioClip a = white(4000, 11);
  AudioClip b = a;
  for (auto& v : b.samples) v *= 2.0;
  const FeatureMatrix la = log_power_spectrum(a, cfg);
  const FeatureMatrix lb = log_power_spectrum(b, cfg);
  for (Index t = 0; t < la.num_frames(); ++t)
    for (Index k = 0; k < la.dim(); ++k)
      if (la.frames(t, k) > std::log(1e-4))
        EXPECT_NEAR(lb.frames(t, k) - la.frames(t, k), std::log(4.0), 1e-5);
}

TEST(MelSpectrogram, Filterbank) {
  FrameConfig cfg;
  const Eigen::MatrixXd fb = mel_filterbank(cfg);
  ASSERT_EQ(fb.rows(), 80);
  ASSERT_EQ(fb.cols(), 257);
  EXPECT_GE(fb.minCoeff(), 0.0);
  for (Index m = 0; m < fb.rows(); ++m) EXPECT_GT(fb.row(m).sum(), 0.0) << m;
}

TEST(MelSpectrogram, SilenceAndLowTone) {
  FrameConfig cfg;
  const FeatureMatrix s = mel_spectrogram(silence(8000), cfg);
  EXPECT_TRUE((s.frames.array() == std::log(1e-10)).all());
  const FeatureMatrix m = mel_spectrogram(sine(100.0, 8000), cfg);
  for (Index t = 0; t < m.num_frames(); ++t) {
    Index arg;
    m.frames.row(t).maxCoeff(&arg);
    EXPECT_LT(arg, cfg.n_mels / 4);
  }
}

TEST(Mfcc, SilenceIsDctOfConstant) {
  FrameConfig cfg;
  const FeatureMatrix c = mfcc(silence(8000), cfg);
  ASSERT_EQ(c.dim(), 20);
  // Orthonormal DCT-II of a constant vector v: c0 = sqrt(N) * v, rest 0.
  const double c0 = std::sqrt(80.0) * std::log(1e-10);
  for (Index t = 0; t < c.num_frames(); ++t) {
    EXPECT_NEAR(c.frames(t, 0), c0, 1e-9);
    for (Index k = 1; k < c.dim(); ++k) EXPECT_NEAR(c.frames(t, k), 0.0, 1e-9);
  }
}

TEST(Mfcc, IdenticalFramesGiveIdenticalRows) {
  // A 100 Hz sine repeats every 160 samples, exactly one hop.
  const FeatureMatrix c = mfcc(sine(100.0, 4000), {});
  for (Index t = 1; t < c.num_frames(); ++t)
    EXPECT_LT((c.frames.row(t) - c.frames.row(0)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Mfcc, ComposesWithMel) {
  FrameConfig cfg;
  const AudioClip clip = white(5000, 5);
  const FeatureMatrix mel = mel_spectrogram(clip, cfg);
  const Eigen::MatrixXd d = dct_matrix(cfg.n_mels, cfg.n_mels);
  const Eigen::MatrixXd full = mel.frames * d.transpose();
  EXPECT_EQ(mfcc(clip, cfg).frames, full.leftCols(cfg.n_mfcc));
  // Orthonormality of the basis.
  EXPECT_LT((d * d.transpose() - Eigen::MatrixXd::Identity(80, 80)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Prosody, PureToneF0) {
  const FeatureMatrix p = prosody(sine(200.0, 16000), {});
  ASSERT_EQ(p.dim(), 4);
  for (Index t = 0; t < p.num_frames(); ++t) {
    EXPECT_NEAR(std::exp(p.frames(t, 0)), 200.0, 0.02 * 200.0);
    EXPECT_EQ(p.frames(t, 1), 1.0);
  }
  for (double hz : {100.0, 150.0, 320.0}) {
    const FeatureMatrix q = prosody(sine(hz, 8000), {});
    for (Index t = 0; t < q.num_frames(); ++t)
      EXPECT_NEAR(std::exp(q.frames(t, 0)), hz, 0.02 * hz);
  }
}

TEST(Prosody, Silence) {
  const FeatureMatrix p = prosody(silence(4000), {});
  for (Index t = 0; t < p.num_frames(); ++t) {
    EXPECT_EQ(p.frames(t, 0), 0.0);
    EXPECT_EQ(p.frames(t, 1), 0.0);
    EXPECT_EQ(p.frames(t, 2), 0.0);
    EXPECT_EQ(p.frames(t, 3), std::log(1e-10));
  }
}

TEST(Prosody, WhiteNoiseMostlyUnvoiced) {
  const FeatureMatrix p = prosody(white(32000, 42), {});
  const double voiced = p.frames.col(1).mean();
  EXPECT_LE(voiced, 0.2);
  EXPECT_GE(p.frames.col(2).minCoeff(), 0.0);
  EXPECT_LE(p.frames.col(2).maxCoeff(), 1.0);
}

TEST(Prosody, InterpolatesAcrossUnvoicedGap) {
  AudioClip c = sine(100.0, 4000);
  AudioClip tail = sine(200.0, 4000);
  for (std::size_t i = 0; i < 2400; ++i) c.samples.push_back(0.0);
  c.samples.insert(c.samples.end(), tail.samples.begin(), tail.samples.end());
  const FeatureMatrix p = prosody(c, {});
  Index first_gap = -1, last_gap = -1;
  for (Index t = 0; t < p.num_frames(); ++t)
    if (p.frames(t, 1) == 0.0) {
      if (first_gap < 0) first_gap = t;
      last_gap = t;
    }
  ASSERT_GT(last_gap, first_gap);
  for (Index t = first_gap; t <= last_gap; ++t) {
    EXPECT_GE(p.frames(t, 0), p.frames(first_gap - 1, 0) - 1e-12);
    EXPECT_LE(p.frames(t, 0), p.frames(last_gap + 1, 0) + 1e-12);
  }
}

TEST(Features, DeterministicAndFinite) {
  const AudioClip clip = white(7000, 9);
  for (auto kind : {FeatureKind::kMel, FeatureKind::kLps, FeatureKind::kMfcc,
                    FeatureKind::kProsody}) {
    const FeatureMatrix a = compute_features(clip, kind, {});
    const FeatureMatrix b = compute_features(clip, kind, {});
    EXPECT_EQ(a.frames, b.frames);
    EXPECT_TRUE(a.frames.allFinite());
  }
}

TEST(FeatureFile, HeaderLayoutAndRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "napt_feat.bin";
  const FeatureMatrix f = mfcc(white(3000, 2), {});
  write_feature_file(path, f);
  std::ifstream in(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  ASSERT_EQ(bytes.size(), 16 + 4 * std::size_t(f.num_frames() * f.dim()));
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "FEAT");
  EXPECT_EQ(bytes[4], 2);
  EXPECT_EQ(bytes[8], f.num_frames());
  EXPECT_EQ(bytes[12], 20);
  const FeatureMatrix g = read_feature_file(path);
  EXPECT_EQ(g.kind, FeatureKind::kMfcc);
  EXPECT_EQ(g.frames, f.frames.cast<float>().cast<double>());
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace napt
