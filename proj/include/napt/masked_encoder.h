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

#ifndef NAPT_MASKED_ENCODER_H_
#define NAPT_MASKED_ENCODER_H_

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "napt/features.h"
#include "napt/layers.h"
#include "napt/pase_encoder.h"

namespace napt {

struct MaskedEncoderConfig {
  int input_dim = 80;
  int layers = 3;
  int heads = 8;
  int ff_dim = 1024;
  int hidden = 256;
  double dropout = 0.1;
  double mask_frac = 0.15;
  double zero_frac = 0.8;
  double random_frac = 0.1;
  double keep_frac = 0.1;
  // Reconstruction loss over masked frames only, or over all frames.
  bool loss_masked_only = true;

  void validate() const;
};

enum class MaskAction : uint8_t { kZero, kRandom, kKeep };

/// Masked frame indices in ascending order, with one action each.
struct MaskPlan {
  std::vector<Index> indices;
  std::vector<MaskAction> actions;

  bool empty() const { return indices.empty(); }
  std::size_t size() const { return indices.size(); }
};

/// Number of frames masked out of T: round(mask_frac * T).
Index mask_count(Index T, const MaskedEncoderConfig& cfg);

MaskPlan plan_mask(Index T, const MaskedEncoderConfig& cfg, uint64_t seed);

/// Zero rows, i.i.d. standard-normal rows, or untouched rows per the plan.
FeatureMatrix apply_mask(const FeatureMatrix& mel, const MaskPlan& plan, uint64_t seed);
Eigen::MatrixXd apply_mask(const Eigen::MatrixXd& frames, const MaskPlan& plan,
                           uint64_t seed);

/// Mean absolute error over the masked rows (all rows for an empty plan).
double reconstruction_loss(const FeatureMatrix& reconstruction, const FeatureMatrix& target,
                           const MaskPlan& plan);

/// Sinusoidal position table, T x dim.
Eigen::MatrixXd positional_encoding(Index T, int dim);

template <typename S>
struct MaskedEncoderOutput {
  SegmentedVar<S> latent;  // sum(T) x hidden
  Var<S> reconstruction;   // sum(T) x input_dim
};

/// Input projection with positional encoding, post-norm transformer layers,
/// and a linear reconstruction head.
template <typename S>
class MaskedEncoder {
 public:
  MaskedEncoder(const MaskedEncoderConfig& cfg, ParameterStore<S>& store,
                std::mt19937_64& rng, const std::string& prefix = "me")
      : cfg_(cfg) {
    cfg_.validate();
    in_ = Linear<S>::create(store, prefix + ".input", cfg.input_dim, cfg.hidden, rng);
    for (int l = 0; l < cfg.layers; ++l) {
      const std::string p = prefix + ".layer" + std::to_string(l);
      Layer L;
      L.q = Linear<S>::create(store, p + ".q", cfg.hidden, cfg.hidden, rng);
      L.k = Linear<S>::create(store, p + ".k", cfg.hidden, cfg.hidden, rng);
      L.v = Linear<S>::create(store, p + ".v", cfg.hidden, cfg.hidden, rng);
      L.o = Linear<S>::create(store, p + ".o", cfg.hidden, cfg.hidden, rng);
      L.norm1 = LayerNorm<S>::create(store, p + ".norm1", cfg.hidden);
      L.ff1 = Linear<S>::create(store, p + ".ff1", cfg.hidden, cfg.ff_dim, rng);
      L.ff2 = Linear<S>::create(store, p + ".ff2", cfg.ff_dim, cfg.hidden, rng);
      L.norm2 = LayerNorm<S>::create(store, p + ".norm2", cfg.hidden);
      layers_.push_back(L);
    }
    head_ = Linear<S>::create(store, prefix + ".recon", cfg.hidden, cfg.input_dim, rng);
  }

  const MaskedEncoderConfig& config() const { return cfg_; }
  int latent_dim() const { return cfg_.hidden; }

  /// x holds log-Mel frames of several utterances stacked along rows.
  /// Dropout draws from rng in training mode.
  MaskedEncoderOutput<S> forward(Var<S> x, const Segments& lengths,
                                 std::mt19937_64& rng) const {
    if (x.cols() != cfg_.input_dim) throw Error("masked encoder: wrong input width");
    if (total_length(lengths) != x.rows()) throw Error("masked encoder: segment mismatch");
    Matrix<S> pe(x.rows(), cfg_.hidden);
    Index r = 0;
    for (Index len : lengths) {
      pe.middleRows(r, len) = positional_encoding(len, cfg_.hidden).template cast<S>();
      r += len;
    }
    Var<S> h = dropout(add_const(in_(x), pe), cfg_.dropout, rng);
    for (const Layer& L : layers_) {
      Var<S> a = L.o(attention(L, h, lengths));
      h = L.norm1(h + dropout(a, cfg_.dropout, rng));
      Var<S> f = L.ff2(dropout(gelu(L.ff1(h)), cfg_.dropout, rng));
      h = L.norm2(h + dropout(f, cfg_.dropout, rng));
    }
    return {{h, lengths}, head_(h)};
  }

  /// Inference-mode encoding of one log-Mel matrix, optionally masked.
  std::pair<LatentSequence, FeatureMatrix> encode(const FeatureMatrix& mel,
                                                  const MaskPlan* plan = nullptr,
                                                  uint64_t mask_seed = 0) const {
    if (mel.kind != FeatureKind::kMel)
      throw Error("masked encoder expects log-Mel input, got " + to_string(mel.kind));
    Eigen::MatrixXd in = plan ? apply_mask(mel.frames, *plan, mask_seed) : mel.frames;
    Tape<S> t(false);
    std::mt19937_64 rng(0);
    auto out = forward(t.constant(in.cast<S>()), {in.rows()}, rng);
    FeatureMatrix recon = mel;
    recon.frames = out.reconstruction.value().template cast<double>();
    return {{out.latent.x.value().template cast<float>(), mel.frame_hop_samples}, recon};
  }

 private:
  struct Layer {
    Linear<S> q, k, v, o;
    LayerNorm<S> norm1;
    Linear<S> ff1, ff2;
    LayerNorm<S> norm2;
  };

  // Multi-head self-attention within each utterance.
  Var<S> attention(const Layer& L, Var<S> h, const Segments& lengths) const {
    const Var<S> Q = L.q(h), K = L.k(h), V = L.v(h);
    const int dh = cfg_.hidden / cfg_.heads;
    const S scale_qk = S(1.0 / std::sqrt(double(dh)));
    std::vector<Var<S>> per_seg;
    Index r = 0;
    for (Index len : lengths) {
      Var<S> q = row_slice(Q, r, len), k = row_slice(K, r, len), v = row_slice(V, r, len);
      std::vector<Var<S>> heads;
      for (int j = 0; j < cfg_.heads; ++j) {
        Var<S> s = scale(matmul_nt(col_slice(q, j * dh, dh), col_slice(k, j * dh, dh)), scale_qk);
        heads.push_back(matmul(softmax_rows(s), col_slice(v, j * dh, dh)));
      }
      per_seg.push_back(concat_cols(heads));
      r += len;
    }
    return per_seg.size() == 1 ? per_seg[0] : concat_rows(per_seg);
  }

  MaskedEncoderConfig cfg_;
  Linear<S> in_;
  std::vector<Layer> layers_;
  Linear<S> head_;
};

}  // namespace napt

#endif  // NAPT_MASKED_ENCODER_H_
