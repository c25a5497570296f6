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

#ifndef NAPT_MOS_H_
#define NAPT_MOS_H_

#include <filesystem>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

#include "napt/pretrain.h"

namespace napt {

/// Mean-pool, Linear(64), LayerNorm, ReLU, Dropout, Linear(1), clamp.
template <typename S>
struct MosHead {
  Linear<S> hidden;
  LayerNorm<S> norm;
  Linear<S> out;
  MosHeadConfig cfg;

  static MosHead create(ParameterStore<S>& store, Index latent_dim, const MosHeadConfig& cfg,
                        uint64_t seed) {
    std::mt19937_64 rng(derive_seed(seed, "mos-head"));
    MosHead h;
    h.cfg = cfg;
    h.hidden = Linear<S>::create(store, "mos.hidden", latent_dim, cfg.hidden, rng);
    h.norm = LayerNorm<S>::create(store, "mos.norm", cfg.hidden);
    h.out = Linear<S>::create(store, "mos.out", cfg.hidden, 1, rng);
    // Start mid-range so the clamp passes gradient from the first step.
    h.out.bias->value.setConstant(S(0.5 * (cfg.score_min + cfg.score_max)));
    return h;
  }

  Index latent_dim() const { return hidden.weight->value.rows(); }

  /// Unclamped score of pooled latents (one row per clip).
  Var<S> raw(Var<S> pooled, std::mt19937_64& rng) const {
    return out(dropout(relu(norm(hidden(pooled))), cfg.dropout, rng));
  }

  Var<S> operator()(Var<S> pooled, std::mt19937_64& rng) const {
    return clamp(raw(pooled, rng), S(cfg.score_min), S(cfg.score_max));
  }
};

/// Inference-mode score of one latent sequence, always within the range.
template <typename S>
double mos_forward(const LatentSequence& z, const MosHead<S>& head) {
  if (z.frames.rows() < 1) throw Error("mos_forward: empty latent");
  Tape<S> t(false);
  std::mt19937_64 rng(0);
  const Matrix<S> pooled = z.frames.colwise().mean().template cast<S>();
  return double(head(t.constant(pooled), rng).scalar());
}

/// Pooled encoder latents of a MOS set, inference mode, no masking.
Eigen::MatrixXd pooled_latents(const Model& encoder, const std::vector<MosRecord>& records,
                               const std::filesystem::path& manifest);

struct MosTrainResult {
  std::filesystem::path checkpoint;
  std::vector<double> epoch_loss;  // mean training-mode batch loss
  double train_mse = 0;            // inference mode, whole set
  bool encoder_unchanged = false;
};

/// Trains the head on a frozen encoder. Throws if any encoder tensor
/// differs from the checkpoint afterwards.
MosTrainResult train_mos(const Model& encoder, const Checkpoint& encoder_ckpt,
                         const std::vector<MosRecord>& records,
                         const std::filesystem::path& manifest, const RunConfig& cfg,
                         const std::filesystem::path& out, std::ostream* log = nullptr);

/// Loads the encoder checkpoint (checking its kind against `expected` when
/// given) and trains.
MosTrainResult train_mos(const std::filesystem::path& mos_manifest,
                         const std::filesystem::path& encoder_ckpt, const RunConfig& cfg,
                         const std::filesystem::path& out, std::ostream* log = nullptr,
                         std::optional<EncoderKind> expected = std::nullopt);

/// Rebuilds a trained head from its checkpoint.
struct LoadedMosHead {
  std::unique_ptr<ParameterStore<Real>> store;
  MosHead<Real> head;
  std::string parent_digest;
};
LoadedMosHead load_mos_head(const Checkpoint& ckpt);

}  // namespace napt

#endif  // NAPT_MOS_H_
