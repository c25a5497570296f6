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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "napt/grad_check.h"
#include "napt/masked_encoder.h"
#include "napt/pase_encoder.h"

namespace napt {
namespace {

// |H(f)| of an FIR kernel by direct evaluation of its DTFT.
double response(const std::vector<double>& h, double hz) {
  std::complex<double> acc = 0;
  for (std::size_t n = 0; n < h.size(); ++n)
    acc += h[n] * std::polar(1.0, -2 * M_PI * hz * double(n) / kSampleRate);
  return std::abs(acc);
}

// Filters the signal with one sinc filter through the training graph.
Eigen::VectorXd filter(const std::vector<double>& x, double lo, double band, int K) {
  ParameterStore<double> store;
  auto sinc = SincFilters<double>::create(store, "s", 1, K);
  sinc.low->value(0, 0) = lo;
  sinc.band->value(0, 0) = band;
  Tape<double> t;
  Matrix<double> in = Eigen::Map<const Eigen::VectorXd>(x.data(), Index(x.size()));
  auto out = conv1d(SegmentedVar<double>{t.constant(in), {in.rows()}}, sinc.bank(t),
                    decimating_geometry(K, 1));
  return out.x.value().col(0);
}

TEST(Sinc, KernelIsSymmetric) {
  for (int K : {11, 101, 251})
    for (auto [lo, hi] : {std::pair{50.0, 300.0}, {900.0, 1100.0}, {3000.0, 7900.0}}) {
      const auto h = sinc_kernel(lo, hi, K);
      for (int i = 0; i < K; ++i) EXPECT_NEAR(h[i], h[K - 1 - i], 1e-9);
    }
  EXPECT_THROW(sinc_kernel(100, 200, 10), Error);
}

TEST(Sinc, RejectsDc) {
  const std::vector<double> dc(4000, 0.5);
  for (int K : {101, 251})
    for (double lo : {50.0, 120.0, 500.0, 3000.0}) {
      EXPECT_LT(response(sinc_kernel(lo, lo + 200, K), 0.0), 1e-9);
      const Eigen::VectorXd y = filter(dc, lo, 200, K);
      // Interior samples only; the edges see zero padding.
      const double mean = y.segment(K, y.size() - 2 * K).mean();
      EXPECT_LT(std::abs(mean), 1e-3 * 0.5) << "K=" << K << " lo=" << lo;
    }
}

TEST(Sinc, PassesToneInBand) {
  std::vector<double> tone(8000);
  for (std::size_t n = 0; n < tone.size(); ++n)
    tone[n] = std::sin(2 * M_PI * 1000.0 * double(n) / kSampleRate);
  const int K = 251;
  auto rms = [&](const Eigen::VectorXd& y) {
    const auto mid = y.segment(K, y.size() - 2 * K);
    return std::sqrt(mid.squaredNorm() / double(mid.size()));
  };
  const double in_band = rms(filter(tone, 900, 200, K));
  const double out_band = rms(filter(tone, 3000, 200, K));
  EXPECT_GE(in_band, 10 * out_band);
  // Steady-state output RMS is |H(1 kHz)| / sqrt(2).
  EXPECT_NEAR(in_band, response(sinc_kernel(900, 1100, K), 1000) / std::sqrt(2.0), 1e-3);
  EXPECT_NEAR(out_band, response(sinc_kernel(3000, 3200, K), 1000) / std::sqrt(2.0), 1e-3);
}

TEST(Sinc, ProjectionKeepsValidBands) {
  ParameterStore<double> store;
  auto sinc = SincFilters<double>::create(store, "s", 4, 51);
  sinc.low->value << -20, 100, 7990, 400;
  sinc.band->value << 300, -5, 500, 0;
  EXPECT_EQ(sinc.project(), 4);
  for (Index f = 0; f < 4; ++f) {
    const double lo = sinc.low->value(0, f), hi = lo + sinc.band->value(0, f);
    EXPECT_GE(lo, kSincMinLowHz);
    EXPECT_GE(hi - lo, kSincMinBandHz - 1e-9);
    EXPECT_LE(hi, kSincMaxHighHz + 1e-9);
  }
  EXPECT_EQ(sinc.project(), 0);
}

TEST(Sinc, MelInitIsIncreasingAndValid) {
  ParameterStore<double> store;
  auto sinc = SincFilters<double>::create(store, "s", 64, 251);
  EXPECT_EQ(sinc.project(), 0);
  for (Index f = 1; f < 64; ++f) EXPECT_GT(sinc.low->value(0, f), sinc.low->value(0, f - 1));
  EXPECT_FALSE(sinc.low->decay);
}

TEST(Sinc, GradientMatchesFiniteDifferences) {
  ParameterStore<double> store;
  auto sinc = SincFilters<double>::create(store, "s", 5, 31);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Matrix<double> x(200, 1), target(200, 5);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  for (Index i = 0; i < target.size(); ++i) target.data()[i] = g(rng);
  auto loss = [&](bool backward) {
    Tape<double> t(true);
    auto y = conv1d(SegmentedVar<double>{t.constant(x), {120, 80}}, sinc.bank(t),
                    decimating_geometry(31, 1));
    auto l = mse_loss(y.x, target);
    if (backward) t.backward(l);
    return l.scalar();
  };
  GradCheckOptions o;
  o.coordinates = 10;
  o.epsilon = 1e-3;
  const auto r = grad_check(store, loss, o);
  EXPECT_LT(r.max_rel_error, 1e-6) << r.worst_parameter << "[" << r.worst_index << "] "
                                   << r.worst_analytic << " vs " << r.worst_numeric;
}

TEST(PaseEncoder, PaperLadderSizeAndShape) {
  const auto cfg = PaseEncoderConfig::paper();
  EXPECT_EQ(cfg.total_stride(), 160);
  ParameterStore<float> store;
  std::mt19937_64 rng(1);
  PaseEncoder<float> enc(cfg, store, rng);
  const std::size_t n = store.count("pase");
  EXPECT_GE(n, 10'000'000u);
  EXPECT_LE(n, 16'000'000u);

  AudioClip clip{std::vector<double>(16000), kSampleRate};
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& s : clip.samples) s = u(rng);
  const LatentSequence z = enc.encode(clip);
  EXPECT_EQ(z.frames.rows(), 100);
  EXPECT_EQ(z.frames.cols(), 100);
  EXPECT_EQ(z.hop_samples, 160);
  EXPECT_TRUE(z.frames.allFinite());
}

class DeskPase : public ::testing::Test {
 protected:
  ParameterStore<float> store_;
  std::mt19937_64 rng_{5};
  PaseEncoder<float> enc_{PaseEncoderConfig::desk(), store_, rng_};

  AudioClip noise(std::size_t n) {
    AudioClip c{std::vector<double>(n), kSampleRate};
    std::uniform_real_distribution<double> u(-1, 1);
    for (double& s : c.samples) s = u(rng_);
    return c;
  }
};

TEST_F(DeskPase, DecimatesBy160) {
  const Index rf = PaseEncoderConfig::desk().receptive_field();
  Index prev = -1;
  for (Index k = 0; k < 6; ++k) {
    const Index len = rf + 160 * k;
    const LatentSequence z = enc_.encode(noise(std::size_t(len)));
    EXPECT_EQ(z.frames.rows(), len / 160);
    if (prev >= 0) EXPECT_EQ(z.frames.rows(), prev + 1);
    prev = z.frames.rows();
    EXPECT_TRUE(z.frames.allFinite());
  }
  EXPECT_EQ(enc_.encode(noise(16000)).frames.rows(), 100);
}

TEST_F(DeskPase, InferenceIsDeterministic) {
  const AudioClip c = noise(8000);
  const LatentSequence a = enc_.encode(c), b = enc_.encode(c);
  EXPECT_TRUE((a.frames.array() == b.frames.array()).all());
}

TEST_F(DeskPase, RejectsShortClips) {
  const Index rf = PaseEncoderConfig::desk().receptive_field();
  EXPECT_THROW(enc_.encode(noise(std::size_t(rf - 1))), Error);
}

TEST(PaseConfig, Validation) {
  auto c = PaseEncoderConfig::desk();
  EXPECT_NO_THROW(c.validate());
  c.conv_blocks.pop_back();
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(c.validate(true));
  c = PaseEncoderConfig::desk();
  c.conv_blocks[2].stride = 2;
  EXPECT_THROW(c.validate(), ConfigError);
  c = PaseEncoderConfig::desk();
  c.sinc_kernel = 100;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Mask, CountIsRoundedFraction) {
  MaskedEncoderConfig cfg;
  EXPECT_EQ(plan_mask(200, cfg, 1).size(), 30u);
  EXPECT_TRUE(plan_mask(1, cfg, 1).empty());
  for (Index T = 1; T <= 10000; T += (T < 300 ? 1 : 97)) {
    const MaskPlan p = plan_mask(T, cfg, uint64_t(T));
    ASSERT_EQ(Index(p.size()), Index(std::llround(0.15 * double(T)))) << T;
    for (std::size_t i = 1; i < p.size(); ++i) ASSERT_LT(p.indices[i - 1], p.indices[i]);
    if (!p.empty()) ASSERT_LT(p.indices.back(), T);
  }
}

TEST(Mask, ActionFractions) {
  MaskedEncoderConfig cfg;
  std::size_t n = 0, zero = 0, random = 0, keep = 0;
  for (uint64_t s = 0; n < 10000; ++s) {
    for (MaskAction a : plan_mask(400, cfg, s).actions) {
      ++n;
      zero += a == MaskAction::kZero;
      random += a == MaskAction::kRandom;
      keep += a == MaskAction::kKeep;
    }
  }
  EXPECT_NEAR(double(zero) / n, 0.8, 0.02);
  EXPECT_NEAR(double(random) / n, 0.1, 0.02);
  EXPECT_NEAR(double(keep) / n, 0.1, 0.02);
}

TEST(Mask, IsDeterministicPerSeed) {
  MaskedEncoderConfig cfg;
  const MaskPlan a = plan_mask(300, cfg, 9), b = plan_mask(300, cfg, 9);
  EXPECT_EQ(a.indices, b.indices);
  EXPECT_EQ(a.actions, b.actions);
  EXPECT_NE(a.indices, plan_mask(300, cfg, 10).indices);
}

TEST(Mask, ApplyFollowsActions) {
  FeatureMatrix mel;
  mel.frames = Eigen::MatrixXd::Random(10, 80).array() + 2.0;
  EXPECT_TRUE((apply_mask(mel, MaskPlan{}, 1).frames.array() == mel.frames.array()).all());

  MaskPlan p{{1, 4, 7}, {MaskAction::kZero, MaskAction::kRandom, MaskAction::kKeep}};
  const Eigen::MatrixXd out = apply_mask(mel, p, 3).frames;
  EXPECT_EQ(out.row(1).sum(), 0.0);
  EXPECT_TRUE((out.row(1).array() == 0.0).all());
  EXPECT_TRUE((out.row(7).array() == mel.frames.row(7).array()).all());
  EXPECT_FALSE((out.row(4).array() == mel.frames.row(4).array()).all());
  EXPECT_LT(std::abs(out.row(4).mean()), 0.5);
  for (Index r : {0, 2, 3, 5, 6, 8, 9})
    EXPECT_TRUE((out.row(r).array() == mel.frames.row(r).array()).all());

  MaskPlan bad{{10}, {MaskAction::kZero}};
  EXPECT_THROW(apply_mask(mel, bad, 1), Error);
}

TEST(Mask, ReconstructionLossIsLocal) {
  FeatureMatrix target, recon;
  target.frames = Eigen::MatrixXd::Zero(8, 80);
  recon.frames = Eigen::MatrixXd::Ones(8, 80);
  EXPECT_DOUBLE_EQ(reconstruction_loss(recon, target, {}), 1.0);
  MaskPlan all;
  for (Index i = 0; i < 8; ++i) {
    all.indices.push_back(i);
    all.actions.push_back(MaskAction::kZero);
  }
  EXPECT_DOUBLE_EQ(reconstruction_loss(recon, target, all), 1.0);
  EXPECT_EQ(reconstruction_loss(target, target, all), 0.0);

  MaskPlan only3{{3}, {MaskAction::kZero}};
  recon.frames = Eigen::MatrixXd::Random(8, 80);
  const double before = reconstruction_loss(recon, target, only3);
  recon.frames.row(5).array() += 7.0;
  EXPECT_EQ(reconstruction_loss(recon, target, only3), before);
  recon.frames(3, 0) += 1.0;
  EXPECT_NE(reconstruction_loss(recon, target, only3), before);

  FeatureMatrix wrong;
  wrong.frames = Eigen::MatrixXd::Zero(7, 80);
  EXPECT_THROW(reconstruction_loss(recon, wrong, only3), Error);
}

class MaskedModel : public ::testing::Test {
 protected:
  ParameterStore<float> store_;
  std::mt19937_64 rng_{11};
  MaskedEncoder<float> enc_{MaskedEncoderConfig{}, store_, rng_};

  FeatureMatrix mel(Index T) {
    FeatureMatrix m;
    m.frames.resize(T, 80);
    std::normal_distribution<double> g;
    for (Index i = 0; i < m.frames.size(); ++i) m.frames.data()[i] = g(rng_);
    return m;
  }
};

TEST_F(MaskedModel, ShapesAndDeterminism) {
  const FeatureMatrix m = mel(37);
  auto [z, recon] = enc_.encode(m);
  EXPECT_EQ(z.frames.rows(), 37);
  EXPECT_EQ(z.frames.cols(), 256);
  EXPECT_EQ(recon.frames.rows(), 37);
  EXPECT_EQ(recon.frames.cols(), 80);
  EXPECT_TRUE(z.frames.allFinite());
  auto [z2, recon2] = enc_.encode(m);
  EXPECT_TRUE((z.frames.array() == z2.frames.array()).all());
}

TEST_F(MaskedModel, PositionsBreakPermutationSymmetry) {
  FeatureMatrix m = mel(20);
  const auto z = enc_.encode(m).first.frames;
  m.frames.row(3).swap(m.frames.row(11));
  auto zs = enc_.encode(m).first.frames;
  zs.row(3).swap(zs.row(11));
  EXPECT_GT((z - zs).cwiseAbs().maxCoeff(), 0.0f);
}

TEST_F(MaskedModel, BatchMatchesSingle) {
  const FeatureMatrix a = mel(12), b = mel(9);
  Eigen::MatrixXd both(21, 80);
  both << a.frames, b.frames;
  Tape<float> t(false);
  auto out = enc_.forward(t.constant(both.cast<float>()), {12, 9}, rng_);
  const auto za = enc_.encode(a).first.frames, zb = enc_.encode(b).first.frames;
  EXPECT_LT((out.latent.x.value().topRows(12) - za).cwiseAbs().maxCoeff(), 1e-5f);
  EXPECT_LT((out.latent.x.value().bottomRows(9) - zb).cwiseAbs().maxCoeff(), 1e-5f);
}

TEST_F(MaskedModel, RejectsWrongKind) {
  FeatureMatrix m = mel(5);
  m.kind = FeatureKind::kLps;
  EXPECT_THROW(enc_.encode(m), Error);
}

TEST(MaskedConfig, Validation) {
  MaskedEncoderConfig c;
  EXPECT_NO_THROW(c.validate());
  c.heads = 7;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.keep_frac = 0.2;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(MaskedEncoderGrad, TinyModelMatchesFiniteDifferences) {
  MaskedEncoderConfig cfg;
  cfg.input_dim = 6;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.hidden = 8;
  cfg.ff_dim = 12;
  cfg.dropout = 0.0;
  ParameterStore<double> store;
  std::mt19937_64 rng(2);
  MaskedEncoder<double> enc(cfg, store, rng);
  Matrix<double> x = Matrix<double>::Random(11, 6);
  auto loss = [&](bool backward) {
    Tape<double> t(true);
    std::mt19937_64 r(0);
    auto out = enc.forward(t.constant(x), {5, 6}, r);
    auto l = l1_loss(out.reconstruction, x, {1, 4, 7});
    if (backward) t.backward(l);
    return l.scalar();
  };
  GradCheckOptions o;
  o.coordinates = 300;
  const auto r = grad_check(store, loss, o);
  EXPECT_LT(r.max_rel_error, 1e-5);
}

}  // namespace
}  // namespace napt
