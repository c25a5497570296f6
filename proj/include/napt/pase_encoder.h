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

#ifndef NAPT_PASE_ENCODER_H_
#define NAPT_PASE_ENCODER_H_

#include <random>
#include <string>
#include <vector>

#include "napt/audio.h"
#include "napt/sinc.h"

namespace napt {

struct ConvBlockSpec {
  int channels = 0;
  int kernel = 0;
  int stride = 1;
};

struct PaseEncoderConfig {
  int sinc_filters = 64;
  int sinc_kernel = 251;
  int sinc_stride = 1;
  std::vector<ConvBlockSpec> conv_blocks = {{64, 20, 10},  {128, 11, 2}, {256, 11, 1},
                                            {256, 11, 2},  {512, 11, 1}, {512, 11, 2},
                                            {1024, 11, 2}};
  int projection_dim = 100;

  /// Full-size ladder, about 11.5M parameters.
  static PaseEncoderConfig paper() { return {}; }

  /// Same strides with narrow channels, for single-core runs.
  static PaseEncoderConfig desk() {
    PaseEncoderConfig c;
    c.sinc_filters = 32;
    c.sinc_kernel = 101;
    c.conv_blocks = {{32, 20, 10}, {64, 11, 2},  {64, 11, 1}, {128, 11, 2},
                     {128, 11, 1}, {128, 11, 2}, {128, 11, 2}};
    return c;
  }

  int total_stride() const {
    int s = sinc_stride;
    for (const auto& b : conv_blocks) s *= b.stride;
    return s;
  }

  /// Receptive field of one output frame, in samples.
  Index receptive_field() const {
    Index rf = sinc_kernel, jump = sinc_stride;
    for (const auto& b : conv_blocks) {
      rf += Index(b.kernel - 1) * jump;
      jump *= b.stride;
    }
    return rf;
  }

  /// Full checks by default. Relaxed checks drop the seven-block, stride-160
  /// and projection-width requirements so tiny models can be built for
  /// gradient verification.
  void validate(bool relaxed = false) const {
    if (sinc_filters < 1) throw ConfigError("pase.sinc_filters", "must be positive");
    if (sinc_kernel < 1 || sinc_kernel % 2 == 0)
      throw ConfigError("pase.sinc_kernel", "must be a positive odd number");
    if (sinc_stride < 1 || sinc_stride > sinc_kernel)
      throw ConfigError("pase.sinc_stride", "must be in [1, sinc_kernel]");
    if (!relaxed && conv_blocks.size() != 7)
      throw ConfigError("pase.conv_blocks", "exactly 7 blocks are required");
    for (const auto& b : conv_blocks)
      if (b.channels < 1 || b.stride < 1 || b.kernel < b.stride)
        throw ConfigError("pase.conv_blocks", "each block needs channels >= 1 and kernel >= stride >= 1");
    if (relaxed) return;
    if (total_stride() != 160)
      throw ConfigError("pase.conv_blocks", "product of strides must be 160, got " +
                                                std::to_string(total_stride()));
    if (projection_dim != 100) throw ConfigError("pase.projection_dim", "must be 100");
  }
};

/// Output of either encoder: T x D frames at a fixed hop.
struct LatentSequence {
  Eigen::MatrixXf frames;
  int hop_samples = 160;
};

/// SincNet layer, seven conv / batch-norm / PReLU blocks, linear projection.
template <typename S>
class PaseEncoder {
 public:
  PaseEncoder(const PaseEncoderConfig& cfg, ParameterStore<S>& store,
              std::mt19937_64& rng, const std::string& prefix = "pase",
              bool relaxed = false)
      : cfg_(cfg) {
    cfg_.validate(relaxed);
    sinc_ = SincFilters<S>::create(store, prefix + ".sinc", cfg.sinc_filters, cfg.sinc_kernel);
    sinc_norm_ = BatchNorm<S>::create(store, prefix + ".sinc_bn", cfg.sinc_filters);
    sinc_act_ = PRelu<S>::create(store, prefix + ".sinc_act", cfg.sinc_filters);
    int in = cfg.sinc_filters;
    for (std::size_t i = 0; i < cfg.conv_blocks.size(); ++i) {
      const auto& spec = cfg.conv_blocks[i];
      const std::string p = prefix + ".block" + std::to_string(i);
      Block b;
      b.weight = &store.create(p + ".weight", Index(spec.kernel) * in, spec.channels);
      init_uniform(*b.weight, 1.0 / std::sqrt(double(spec.kernel * in)), rng);
      b.norm = BatchNorm<S>::create(store, p + ".bn", spec.channels);
      b.act = PRelu<S>::create(store, p + ".act", spec.channels);
      b.geo = decimating_geometry(spec.kernel, spec.stride);
      blocks_.push_back(b);
      in = spec.channels;
    }
    proj_ = Linear<S>::create(store, prefix + ".proj", in, cfg.projection_dim, rng);
  }

  const PaseEncoderConfig& config() const { return cfg_; }
  int latent_dim() const { return cfg_.projection_dim; }
  int hop_samples() const { return cfg_.total_stride(); }
  SincFilters<S>& sinc() { return sinc_; }

  /// Encodes waveforms stacked along rows (sum of lengths x 1).
  SegmentedVar<S> forward(Var<S> waveform, const Segments& lengths) const {
    for (Index len : lengths)
      if (len < cfg_.receptive_field())
        throw Error("clip of " + std::to_string(len) + " samples is shorter than the " +
                    std::to_string(cfg_.receptive_field()) + "-sample receptive field");
    Tape<S>& t = *waveform.tape;
    SegmentedVar<S> h{waveform, lengths};
    h = conv1d(h, sinc_.bank(t), decimating_geometry(cfg_.sinc_kernel, cfg_.sinc_stride));
    h.x = sinc_act_(sinc_norm_(h.x));
    for (const Block& b : blocks_) {
      h = conv1d(h, t.param(*b.weight), b.geo);
      h.x = b.act(b.norm(h.x));
    }
    h.x = proj_(h.x);
    return h;
  }

  /// Stacks clips into one batch.
  SegmentedVar<S> forward(Tape<S>& t, const std::vector<const AudioClip*>& clips) const {
    Segments lengths;
    Index total = 0;
    for (const AudioClip* c : clips) {
      lengths.push_back(Index(c->samples.size()));
      total += lengths.back();
    }
    Matrix<S> x(total, 1);
    Index r = 0;
    for (const AudioClip* c : clips)
      for (double v : c->samples) x(r++, 0) = S(v);
    return forward(t.constant(std::move(x)), lengths);
  }

  /// Inference-mode encoding of a single clip.
  LatentSequence encode(const AudioClip& clip) const {
    if (clip.sample_rate_hz != kSampleRate) throw Error("pase encoder expects 16 kHz audio");
    Tape<S> t(false);
    SegmentedVar<S> h = forward(t, {&clip});
    return {h.x.value().template cast<float>(), hop_samples()};
  }

 private:
  struct Block {
    Parameter<S>* weight = nullptr;
    BatchNorm<S> norm;
    PRelu<S> act;
    ConvGeometry geo;
  };

  PaseEncoderConfig cfg_;
  SincFilters<S> sinc_;
  BatchNorm<S> sinc_norm_;
  PRelu<S> sinc_act_;
  std::vector<Block> blocks_;
  Linear<S> proj_;
};

}  // namespace napt

#endif  // NAPT_PASE_ENCODER_H_
