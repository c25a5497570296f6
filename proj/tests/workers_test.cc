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

#include "napt/workers.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "napt/grad_check.h"

namespace napt {
namespace {

using Mat = Matrix<double>;

Mat gaussian(Index r, Index c, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Mat m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

void zero_head(WorkerHead<double>& h) {
  h.mlp.hidden.weight->value.setZero();
  h.mlp.hidden.bias->value.setZero();
  h.mlp.out.weight->value.setZero();
  h.mlp.out.bias->value.setZero();
}

TEST(Workers, NamesAndDims) {
  for (WorkerName w : kAllWorkers) EXPECT_EQ(worker_from_string(to_string(w)), w);
  EXPECT_THROW(worker_from_string("pitch"), ConfigError);
  EXPECT_EQ(output_dim(WorkerName::kLps), 257);
  EXPECT_EQ(output_dim(WorkerName::kMfcc), 20);
  EXPECT_EQ(output_dim(WorkerName::kProsody), 4);
  EXPECT_EQ(output_dim(WorkerName::kWaveform), 160);
  EXPECT_EQ(output_dim(WorkerName::kEnergy), 4);
  EXPECT_EQ(output_dim(WorkerName::kCategory), 8);
  EXPECT_EQ(output_dim(WorkerName::kSnr), 6);
  EXPECT_EQ(parse_worker_list("all").size(), 10u);
  EXPECT_EQ(parse_worker_list("ssl").size(), 7u);
  EXPECT_EQ(parse_worker_list("noise, lps").size(), 4u);
  EXPECT_EQ(format_worker_list(parse_worker_list("snr,lps,lim")), "lps,lim,snr");
}

TEST(Workers, EveryHeadIs256WideAndDiscardable) {
  ParameterStore<double> store;
  WorkerSet<double> set(parse_worker_list("all"), store, 100, 1);
  for (WorkerName w : kAllWorkers) {
    const auto& h = set.at(w);
    EXPECT_EQ(h.mlp.hidden_dim(), 256);
    EXPECT_EQ(h.input_dim(), is_binary(w) ? 200 : 100);
    EXPECT_EQ(h.mlp.out.weight->value.cols(), output_dim(w));
  }
  for (const auto& [name, p] : store.items()) EXPECT_TRUE(p.discardable) << name;
}

TEST(Workers, RegressionLossExamples) {
  ParameterStore<double> store;
  auto lps = WorkerHead<double>::create(WorkerName::kLps, store, 8, 1);
  auto wav = WorkerHead<double>::create(WorkerName::kWaveform, store, 8, 1);
  Tape<double> t;
  const Var<double> z = t.constant(gaussian(6, 8, 2));
  const Mat pred = lps(z).value();
  EXPECT_EQ(regression_worker_loss(lps, z, pred).scalar(), 0.0);

  zero_head(lps);
  zero_head(wav);
  Tape<double> t2;
  const Var<double> z2 = t2.constant(gaussian(6, 8, 2));
  EXPECT_NEAR(regression_worker_loss(lps, z2, Mat(Mat::Constant(6, 257, 1.5))).scalar(), 2.25, 1e-12);
  EXPECT_NEAR(regression_worker_loss(wav, z2, Mat(Mat::Constant(6, 160, 0.5))).scalar(), 0.5, 1e-12);
  EXPECT_THROW(regression_worker_loss(lps, z2, Mat(Mat::Zero(6, 20))), Error);
}

TEST(Workers, BinaryLossExamples) {
  ParameterStore<double> store;
  auto lim = WorkerHead<double>::create(WorkerName::kLim, store, 1, 1);
  zero_head(lim);
  // Logit = 30 * first pair element.
  lim.mlp.hidden.weight->value(0, 0) = 1.0;
  lim.mlp.act.slope->value.setOnes();
  lim.mlp.out.weight->value(0, 0) = 30.0;
  Tape<double> t;
  auto pos = t.constant(Mat::Constant(3, 2, 1.0));
  auto neg = t.constant(Mat::Constant(3, 2, -1.0));
  EXPECT_LT(binary_info_loss(lim, pos, neg).scalar(), 1e-9);
  EXPECT_NEAR(binary_info_loss(lim, neg, pos).scalar(), 30.0, 1e-9);
  auto zero = t.constant(Mat::Zero(3, 2));
  EXPECT_NEAR(binary_info_loss(lim, zero, zero).scalar(), std::log(2.0), 1e-12);
  EXPECT_THROW(binary_info_loss(lim, t.constant(Mat::Zero(3, 3)), zero), Error);
}

TEST(Workers, LimSampling) {
  const Segments seg = {10, 12, 8, 9};
  const std::vector<std::string> spk = {"a", "a", "b", "c"};
  const FramePairs p = sample_lim_pairs(seg, spk, 5);
  const FramePairs q = sample_lim_pairs(seg, spk, 5);
  EXPECT_EQ(p.anchor, q.anchor);
  EXPECT_EQ(p.negative, q.negative);
  auto utt = [&](Index row) {
    Index u = 0;
    while (row >= seg[std::size_t(u)]) row -= seg[std::size_t(u++)];
    return std::size_t(u);
  };
  for (uint64_t s = 0; s < 50; ++s) {
    const FramePairs r = sample_lim_pairs(seg, spk, s);
    ASSERT_EQ(r.anchor.size(), seg.size() * std::size_t(kPairsPerUtterance));
    for (std::size_t i = 0; i < r.anchor.size(); ++i) {
      EXPECT_EQ(spk[utt(r.anchor[i])], spk[utt(r.positive[i])]);
      EXPECT_NE(spk[utt(r.anchor[i])], spk[utt(r.negative[i])]);
      EXPECT_NE(r.anchor[i], r.positive[i]);
    }
  }
  EXPECT_THROW(sample_lim_pairs(seg, {"a", "a", "a", "a"}, 1), Error);
}

TEST(Workers, GimAndSpcSampling) {
  const Segments seg = {30, 50, 20};
  const std::vector<Index> off = {0, 30, 80};
  auto utt = [&](Index row) { return row < 30 ? 0 : row < 80 ? 1 : 2; };
  for (uint64_t s = 0; s < 50; ++s) {
    const ChunkPairs g = sample_gim_pairs(seg, s);
    for (std::size_t i = 0; i < g.anchor.size(); ++i) {
      const int u = utt(g.anchor[i].start);
      EXPECT_EQ(utt(g.anchor[i].start + g.anchor[i].length - 1), u);
      EXPECT_EQ(utt(g.positive[i].start), u);
      EXPECT_NE(utt(g.negative[i].start), u);
      EXPECT_EQ(g.anchor[i].length, seg[std::size_t(u)] / 2);
    }
    const FramePairs p = sample_spc_pairs(seg, s);
    for (std::size_t i = 0; i < p.anchor.size(); ++i) {
      const Index k = p.positive[i] - p.anchor[i];
      EXPECT_GE(k, 1);
      EXPECT_LE(k, kSpcMaxShift);
      EXPECT_EQ(p.anchor[i] - p.negative[i], k);
      EXPECT_EQ(utt(p.positive[i]), utt(p.anchor[i]));
      EXPECT_EQ(utt(p.negative[i]), utt(p.anchor[i]));
    }
  }
  EXPECT_THROW(sample_spc_pairs({2}, 1), Error);
}

TEST(Workers, NoiseLogitsAndLoss) {
  ParameterStore<double> store;
  WorkerSet<double> set(parse_worker_list("noise"), store, 16, 3);
  Tape<double> t;
  const Mat z = gaussian(7, 16, 4);
  Mat doubled(14, 16);
  for (Index i = 0; i < 7; ++i) doubled.row(2 * i) = doubled.row(2 * i + 1) = z.row(i);
  for (WorkerName w : {WorkerName::kEnergy, WorkerName::kCategory, WorkerName::kSnr}) {
    const Mat a = noise_worker_logits(set.at(w), SegmentedVar<double>{t.constant(z), {7}}).value();
    const Mat b =
        noise_worker_logits(set.at(w), SegmentedVar<double>{t.constant(doubled), {14}}).value();
    EXPECT_EQ(a.cols(), output_dim(w));
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-6);
  }
  for (int n : {4, 6, 8}) {
    const double l = noise_worker_loss(t.constant(Mat::Zero(1, n)), {1}).scalar();
    EXPECT_NEAR(l, std::log(double(n)), 1e-9);
  }
  Mat sat = Mat::Constant(1, 4, -40.0);
  sat(0, 2) = 40.0;
  EXPECT_LT(noise_worker_loss(t.constant(sat), {2}).scalar(), 1e-9);

  const Mat logits = gaussian(5, 6, 9);
  const std::vector<int> labels = {0, 5, 2, 2, 3};
  double brute = 0;
  for (Index i = 0; i < 5; ++i) {
    double s = 0;
    for (Index c = 0; c < 6; ++c) s += std::exp(logits(i, c));
    brute += std::log(s) - logits(i, labels[std::size_t(i)]);
  }
  EXPECT_NEAR(noise_worker_loss(t.constant(logits), labels).scalar(), brute / 5, 1e-9);
  EXPECT_THROW(noise_worker_loss(t.constant(logits), {0, 6, 1, 1, 1}), Error);
}

TEST(Workers, AlignmentTrimsWithTolerance) {
  const Alignment a = align_frames({5, 4}, {3, 4});
  EXPECT_EQ(a.latent_rows, (std::vector<Index>{0, 1, 2, 5, 6, 7, 8}));
  EXPECT_EQ(a.target_rows, (std::vector<Index>{0, 1, 2, 3, 4, 5, 6}));
  EXPECT_THROW(align_frames({6}, {3}), Error);
}

WorkerTargets<double> toy_targets(const Segments& lat, const Segments& feat) {
  WorkerTargets<double> tg;
  tg.target_frames = feat;
  const Index tf = total_length(feat), tl = total_length(lat);
  tg.frames[WorkerName::kLps] = gaussian(tf, 257, 20);
  tg.frames[WorkerName::kMfcc] = gaussian(tf, 20, 21);
  tg.frames[WorkerName::kProsody] = gaussian(tf, 4, 22);
  // Offset so no L1 residual sits near its kink.
  tg.waveform = (gaussian(tl, 160, 23) * 0.1).array() + 5.0;
  tg.speakers = {"s1", "s2", "s1"};
  tg.energy = {0, 3, 1};
  tg.category = {4, 7, 0};
  tg.snr = {2, 5, 0};
  return tg;
}

TEST(Workers, DisablingOneHeadLeavesOthersUnchanged) {
  const Segments lat = {12, 14, 11}, feat = {10, 13, 9};
  const auto tg = toy_targets(lat, feat);
  const Mat z = gaussian(37, 8, 30);
  ParameterStore<double> s_all;
  WorkerSet<double> all(parse_worker_list("all"), s_all, 8, 7);
  ParameterStore<double> s_sub;
  WorkerSet<double> sub(parse_worker_list("lps,lim,gim,snr"), s_sub, 8, 7);
  for (const auto& [name, p] : s_sub.items())
    EXPECT_TRUE((p.value.array() == s_all.at(name).value.array()).all()) << name;

  Tape<double> t;
  SegmentedVar<double> zl{t.constant(z), lat};
  const auto la = all.losses(zl, tg, 99);
  const auto ls = sub.losses(zl, tg, 99);
  EXPECT_EQ(la.size(), 10u);
  EXPECT_EQ(ls.size(), 4u);
  for (const auto& [w, v] : ls) EXPECT_EQ(v.scalar(), la.at(w).scalar()) << to_string(w);
}

TEST(Workers, AllLossesAreDifferentiable) {
  const Segments lat = {12, 14, 11}, feat = {10, 13, 9};
  const auto tg = toy_targets(lat, feat);
  ParameterStore<double> store;
  WorkerSet<double> set(parse_worker_list("all"), store, 8, 7);
  auto& z = store.create("z", 37, 8);
  z.value = gaussian(37, 8, 31);
  auto loss = [&](bool backward) {
    Tape<double> t(true);
    const auto ls = set.losses(SegmentedVar<double>{t.param(z), lat}, tg, 5);
    std::vector<Var<double>> v;
    for (const auto& [w, l] : ls) {
      EXPECT_GE(l.scalar(), 0.0);
      v.push_back(l);
    }
    auto total = weighted_sum(v, std::vector<double>(v.size(), 1.0));
    if (backward) t.backward(total);
    return total.scalar();
  };
  GradCheckOptions o;
  o.coordinates = 400;
  o.epsilon = 1e-5;
  const auto r = grad_check(store, loss, o);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_parameter << "[" << r.worst_index << "] "
                                   << r.worst_analytic << " vs " << r.worst_numeric;
}

}  // namespace
}  // namespace napt
