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

#include "napt/masked_encoder.h"

#include <algorithm>
#include <numeric>

namespace napt {

void MaskedEncoderConfig::validate() const {
  if (input_dim < 1) throw ConfigError("masked.input_dim", "must be positive");
  if (layers < 1) throw ConfigError("masked.layers", "must be positive");
  if (heads < 1 || hidden < 1 || hidden % heads != 0)
    throw ConfigError("masked.heads", "must divide hidden");
  if (ff_dim < 1) throw ConfigError("masked.ff_dim", "must be positive");
  if (dropout < 0 || dropout >= 1) throw ConfigError("masked.dropout", "must be in [0, 1)");
  if (mask_frac < 0 || mask_frac > 1)
    throw ConfigError("masked.mask_frac", "must be in [0, 1]");
  if (zero_frac < 0 || random_frac < 0 || keep_frac < 0 ||
      std::abs(zero_frac + random_frac + keep_frac - 1.0) > 1e-9)
    throw ConfigError("masked.zero_frac", "action fractions must be non-negative and sum to 1");
}

Index mask_count(Index T, const MaskedEncoderConfig& cfg) {
  return Index(std::llround(cfg.mask_frac * double(T)));
}

MaskPlan plan_mask(Index T, const MaskedEncoderConfig& cfg, uint64_t seed) {
  if (T < 1) throw Error("plan_mask needs at least one frame");
  std::mt19937_64 rng(seed);
  const Index n = std::min(mask_count(T, cfg), T);
  // Partial Fisher-Yates: the first n entries are a uniform sample.
  std::vector<Index> order(T);
  std::iota(order.begin(), order.end(), Index(0));
  for (Index i = 0; i < n; ++i) {
    std::uniform_int_distribution<Index> pick(i, T - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  MaskPlan plan;
  plan.indices.assign(order.begin(), order.begin() + n);
  std::sort(plan.indices.begin(), plan.indices.end());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Index i = 0; i < n; ++i) {
    const double x = u(rng);
    plan.actions.push_back(x < cfg.zero_frac                     ? MaskAction::kZero
                           : x < cfg.zero_frac + cfg.random_frac ? MaskAction::kRandom
                                                                 : MaskAction::kKeep);
  }
  return plan;
}

Eigen::MatrixXd apply_mask(const Eigen::MatrixXd& frames, const MaskPlan& plan,
                           uint64_t seed) {
  if (plan.actions.size() != plan.indices.size()) throw Error("malformed mask plan");
  Eigen::MatrixXd out = frames;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const Index r = plan.indices[i];
    if (r < 0 || r >= frames.rows())
      throw Error("mask index " + std::to_string(r) + " out of range for " +
                  std::to_string(frames.rows()) + " frames");
    switch (plan.actions[i]) {
      case MaskAction::kZero:
        out.row(r).setZero();
        break;
      case MaskAction::kRandom:
        for (Index c = 0; c < out.cols(); ++c) out(r, c) = normal(rng);
        break;
      case MaskAction::kKeep:
        break;
    }
  }
  return out;
}

FeatureMatrix apply_mask(const FeatureMatrix& mel, const MaskPlan& plan, uint64_t seed) {
  FeatureMatrix out = mel;
  out.frames = apply_mask(mel.frames, plan, seed);
  return out;
}

double reconstruction_loss(const FeatureMatrix& reconstruction, const FeatureMatrix& target,
                           const MaskPlan& plan) {
  const auto& a = reconstruction.frames;
  const auto& b = target.frames;
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error("reconstruction_loss: shape mismatch");
  if (plan.empty()) return (a - b).cwiseAbs().mean();
  double total = 0;
  for (Index r : plan.indices) {
    if (r < 0 || r >= a.rows()) throw Error("reconstruction_loss: mask index out of range");
    total += (a.row(r) - b.row(r)).cwiseAbs().sum();
  }
  return total / double(plan.size() * std::size_t(a.cols()));
}

Eigen::MatrixXd positional_encoding(Index T, int dim) {
  Eigen::MatrixXd pe(T, dim);
  for (Index t = 0; t < T; ++t)
    for (int i = 0; i < dim; ++i) {
      const double freq = std::pow(10000.0, -double(2 * (i / 2)) / dim);
      pe(t, i) = i % 2 == 0 ? std::sin(double(t) * freq) : std::cos(double(t) * freq);
    }
  return pe;
}

}  // namespace napt
