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

#include "napt/mos.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace napt {
namespace {

namespace fs = std::filesystem;

// Head whose raw output is the constant `raw` for every input.
MosHead<double> constant_head(ParameterStore<double>& store, double raw) {
  MosHead<double> h = MosHead<double>::create(store, 6, MosHeadConfig{}, 1);
  h.out.weight->value.setZero();
  h.out.bias->value.setConstant(raw);
  return h;
}

LatentSequence random_latent(Index T, Index D, uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, float(scale));
  LatentSequence z{Eigen::MatrixXf(T, D), 160};
  for (Index i = 0; i < z.frames.size(); ++i) z.frames.data()[i] = g(rng);
  return z;
}

TEST(MosHead, ClampsIntoTheScoreRange) {
  const LatentSequence z = random_latent(7, 6, 2);
  for (auto [raw, want] : {std::pair{6.2, 5.0}, {0.3, 1.0}, {3.7, 3.7}}) {
    ParameterStore<double> store;
    EXPECT_DOUBLE_EQ(mos_forward(z, constant_head(store, raw)), want) << raw;
  }
}

TEST(MosHead, GradientVanishesBeyondTheClamp) {
  for (auto [raw, grad] : {std::pair{6.2, 0.0}, {5.0 + 1e-9, 0.0}, {-1.0, 0.0}, {4.5, 1.0}}) {
    ParameterStore<double> store;
    const MosHead<double> h = constant_head(store, raw);
    store.zero_grad();
    Tape<double> t(true);
    std::mt19937_64 rng(0);
    t.backward(h(t.constant(Matrix<double>::Ones(1, 6)), rng));
    EXPECT_DOUBLE_EQ(h.out.bias->grad(0, 0), grad) << raw;
  }
}

TEST(MosHead, EveryPredictionLiesInRange) {
  ParameterStore<Real> store;
  const MosHead<Real> h = MosHead<Real>::create(store, 32, MosHeadConfig{}, 3);
  // Large output weights push raw scores far outside the range.
  h.out.weight->value *= 50.0f;
  double lo = 5, hi = 1;
  for (int i = 0; i < 2000; ++i) {
    const double y = mos_forward(random_latent(1 + i % 9, 32, 100 + i, 1.0 + i % 50), h);
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  EXPECT_GE(lo, 1.0);
  EXPECT_LE(hi, 5.0);
  EXPECT_EQ(lo, 1.0);  // both ends are actually reached
  EXPECT_EQ(hi, 5.0);
}

TEST(MosHead, InferenceIsDeterministicAndRejectsEmptyInput) {
  ParameterStore<Real> store;
  const MosHead<Real> h = MosHead<Real>::create(store, 16, MosHeadConfig{}, 4);
  const LatentSequence z = random_latent(5, 16, 9);
  EXPECT_EQ(mos_forward(z, h), mos_forward(z, h));
  EXPECT_THROW(mos_forward(LatentSequence{Eigen::MatrixXf(0, 16), 160}, h), Error);
  // Mean pooling: frame order does not matter.
  LatentSequence r = z;
  r.frames = z.frames.colwise().reverse();
  EXPECT_NEAR(mos_forward(r, h), mos_forward(z, h), 1e-5);
}

class TrainMosTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "napt_mos_test";
    fs::remove_all(dir_);
    ToyCorpusOptions o;
    o.n_speakers = 2;
    o.utterances_per_speaker = 2;
    o.noise_variants = 1;
    o.n_records = 8;
    o.eval_fraction = 0.0;
    o.mos_train = 6;
    o.mos_test = 3;
    const fs::path manifest = synth_toy_corpus(dir_, 4, o);
    cfg_ = config_from_json(R"({"pretrain": {"encoder": "masked", "batch_size": 4, "max_steps": 1},
                                "masked": {"layers": 1, "heads": 2, "hidden": 32, "ff_dim": 64},
                                "mos": {"epochs": 5, "batch_size": 4}})");
    pretrain(manifest, cfg_, dir_ / "enc.ckpt");
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static inline fs::path dir_;
  static inline RunConfig cfg_;
};

TEST_F(TrainMosTest, EncoderStaysFrozenAndHeadRecordsItsParent) {
  const Checkpoint enc = load_checkpoint(dir_ / "enc.ckpt");
  const MosTrainResult r =
      train_mos(dir_ / "mos_train.jsonl", dir_ / "enc.ckpt", cfg_, dir_ / "mos.ckpt");
  EXPECT_TRUE(r.encoder_unchanged);
  EXPECT_EQ(r.epoch_loss.size(), 5u);
  EXPECT_EQ(load_checkpoint(dir_ / "enc.ckpt"), enc);
  const Checkpoint head = load_checkpoint(dir_ / "mos.ckpt");
  EXPECT_EQ(head.kind, "mos");
  EXPECT_EQ(head.parent_digest, enc.digest);
  for (const TensorEntry& t : head.tensors) EXPECT_EQ(t.name.rfind("mos.", 0), 0u) << t.name;

  // The reloaded head reproduces the reported training error.
  const LoadedMosHead loaded = load_mos_head(head);
  const auto model = model_from_checkpoint(enc, false);
  const auto recs = read_mos_manifest(dir_ / "mos_train.jsonl");
  double se = 0;
  for (const auto& rec : recs) {
    const double y =
        mos_forward(model->encode(load_mos_audio(rec, dir_ / "mos_train.jsonl")), loaded.head);
    se += (y - rec.mos) * (y - rec.mos);
  }
  EXPECT_NEAR(se / double(recs.size()), r.train_mse, 1e-5);
}

TEST_F(TrainMosTest, RepeatedRunsAreIdentical) {
  train_mos(dir_ / "mos_train.jsonl", dir_ / "enc.ckpt", cfg_, dir_ / "m1.ckpt");
  train_mos(dir_ / "mos_train.jsonl", dir_ / "enc.ckpt", cfg_, dir_ / "m2.ckpt");
  EXPECT_EQ(load_checkpoint(dir_ / "m1.ckpt"), load_checkpoint(dir_ / "m2.ckpt"));
}

TEST_F(TrainMosTest, RejectsEmptySetsAndMismatchedEncoders) {
  const fs::path empty = dir_ / "empty.jsonl";
  { std::ofstream f(empty); }
  EXPECT_THROW(train_mos(empty, dir_ / "enc.ckpt", cfg_, dir_ / "x.ckpt"), Error);
  EXPECT_THROW(train_mos(dir_ / "mos_train.jsonl", dir_ / "enc.ckpt", cfg_, dir_ / "x.ckpt",
                         nullptr, EncoderKind::kPase),
               Error);
  // A MOS checkpoint is not an encoder.
  train_mos(dir_ / "mos_train.jsonl", dir_ / "enc.ckpt", cfg_, dir_ / "m3.ckpt");
  EXPECT_THROW(train_mos(dir_ / "mos_train.jsonl", dir_ / "m3.ckpt", cfg_, dir_ / "x.ckpt"),
               Error);
}

}  // namespace
}  // namespace napt
