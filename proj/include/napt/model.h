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

#ifndef NAPT_MODEL_H_
#define NAPT_MODEL_H_

#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "napt/config.h"
#include "napt/data.h"
#include "napt/masked_encoder.h"
#include "napt/pase_encoder.h"
#include "napt/training.h"
#include "napt/workers.h"

namespace napt {

struct ModelConfig {
  EncoderKind kind = EncoderKind::kPase;
  FrameConfig frames;
  PaseEncoderConfig pase = PaseEncoderConfig::desk();
  MaskedEncoderConfig masked;
  std::set<WorkerName> workers;
  bool relaxed = false;  // allow tiny PASE ladders (gradient checks)
};

inline ModelConfig model_config(const RunConfig& c) {
  ModelConfig m;
  m.kind = c.pretrain.encoder;
  m.frames = c.frames;
  m.pase = c.pase;
  m.masked = c.masked;
  m.workers = effective_workers(c.pretrain.encoder, c.pretrain.workers);
  return m;
}

/// Stacked inputs and worker targets for one batch.
template <typename S>
struct Batch {
  Matrix<S> waveform;  // sum(L) x 1
  Segments samples;
  Eigen::MatrixXd mel;  // normalised, sum(T) x n_mels
  Segments frames;
  WorkerTargets<S> targets;
};

/// An encoder with its enabled workers and the feature normalisation
/// statistics, all stored in one parameter store.
template <typename S>
class PretrainModel {
 public:
  PretrainModel(const ModelConfig& cfg, uint64_t seed) : cfg_(cfg) {
    std::mt19937_64 rng(derive_seed(seed, "encoder"));
    if (cfg.kind == EncoderKind::kPase) {
      pase_ = std::make_unique<PaseEncoder<S>>(cfg.pase, store_, rng, "pase", cfg.relaxed);
    } else {
      masked_ = std::make_unique<MaskedEncoder<S>>(cfg.masked, store_, rng, "me");
    }
    norm_param("mel", cfg.frames.n_mels, false);
    norm_param("lps", cfg.frames.n_bins(), true);
    norm_param("mfcc", cfg.frames.n_mfcc, true);
    norm_param("prosody", 4, true);
    workers_ = WorkerSet<S>(effective_workers(cfg.kind, cfg.workers), store_, latent_dim(),
                            derive_seed(seed, "workers"));
  }
  PretrainModel(const PretrainModel&) = delete;
  PretrainModel& operator=(const PretrainModel&) = delete;

  const ModelConfig& config() const { return cfg_; }
  ParameterStore<S>& store() { return store_; }
  const ParameterStore<S>& store() const { return store_; }
  const WorkerSet<S>& workers() const { return workers_; }
  PaseEncoder<S>* pase() { return pase_.get(); }
  int latent_dim() const { return pase_ ? pase_->latent_dim() : masked_->latent_dim(); }

  void set_stats(const std::string& kind, const FeatureStats& s) {
    store_.at("norm." + kind + ".mean").value = s.mean.cast<S>();
    store_.at("norm." + kind + ".std").value = s.stddev.cast<S>();
  }
  FeatureStats stats(const std::string& kind) const {
    return {store_.find("norm." + kind + ".mean")->value.template cast<double>(),
            store_.find("norm." + kind + ".std")->value.template cast<double>()};
  }

  /// Fits normalisation statistics on a set of examples.
  void fit_stats(const std::vector<Example>& examples) {
    std::vector<const Eigen::MatrixXd*> mel, lps, mfcc, pros;
    for (const auto& e : examples) {
      mel.push_back(&e.mel);
      lps.push_back(&e.lps);
      mfcc.push_back(&e.mfcc);
      pros.push_back(&e.prosody);
    }
    set_stats("mel", FeatureStats::fit(mel));
    set_stats("lps", FeatureStats::fit(lps));
    set_stats("mfcc", FeatureStats::fit(mfcc));
    set_stats("prosody", FeatureStats::fit(pros));
  }

  Batch<S> make_batch(const std::vector<const Example*>& items) const {
    Batch<S> b;
    Index L = 0, T = 0;
    for (const Example* e : items) {
      b.samples.push_back(Index(e->audio.samples.size()));
      b.frames.push_back(e->mel.rows());
      L += b.samples.back();
      T += b.frames.back();
    }
    b.waveform.resize(L, 1);
    b.mel.resize(T, cfg_.frames.n_mels);
    Matrix<S> lps(T, cfg_.frames.n_bins()), mfcc(T, cfg_.frames.n_mfcc), pros(T, 4);
    const FeatureStats s_mel = stats("mel"), s_lps = stats("lps"), s_mfcc = stats("mfcc"),
                       s_pros = stats("prosody");
    Index l = 0, t = 0;
    std::vector<Eigen::RowVectorXd> windows;
    for (const Example* e : items) {
      const Index n = e->mel.rows();
      for (double v : e->audio.samples) b.waveform(l++, 0) = S(v);
      b.mel.middleRows(t, n) = s_mel.apply(e->mel);
      lps.middleRows(t, n) = s_lps.apply(e->lps).cast<S>();
      mfcc.middleRows(t, n) = s_mfcc.apply(e->mfcc).cast<S>();
      pros.middleRows(t, n) = s_pros.apply(e->prosody).cast<S>();
      t += n;
      b.targets.speakers.push_back(e->speaker);
      b.targets.energy.push_back(e->labels.energy_class);
      b.targets.category.push_back(e->labels.category_class);
      b.targets.snr.push_back(e->labels.snr_class);
    }
    b.targets.target_frames = b.frames;
    b.targets.frames[WorkerName::kLps] = std::move(lps);
    b.targets.frames[WorkerName::kMfcc] = std::move(mfcc);
    b.targets.frames[WorkerName::kProsody] = std::move(pros);
    if (workers_.has(WorkerName::kWaveform)) {
      // One 160-sample window of the input per latent frame.
      const int hop = pase_->hop_samples();
      Index rows = 0;
      for (Index len : b.samples) rows += len / hop;
      b.targets.waveform.resize(rows, hop);
      Index r = 0;
      for (const Example* e : items) {
        const Index frames = Index(e->audio.samples.size()) / hop;
        for (Index f = 0; f < frames; ++f, ++r)
          for (int k = 0; k < hop; ++k)
            b.targets.waveform(r, k) = S(e->audio.samples[std::size_t(f * hop + k)]);
      }
    }
    return b;
  }

  /// Every loss term for a batch: worker losses keyed by worker name and,
  /// for the masked encoder, the reconstruction term.
  std::map<std::string, Var<S>> losses(Tape<S>& t, const Batch<S>& b, uint64_t step_seed) const {
    std::map<std::string, Var<S>> out;
    SegmentedVar<S> latent;
    if (pase_) {
      latent = pase_->forward(t.constant(b.waveform), b.samples);
    } else {
      Eigen::MatrixXd input = b.mel;
      std::vector<Index> masked_rows;
      Index off = 0;
      for (std::size_t i = 0; i < b.frames.size(); ++i) {
        const Index n = b.frames[i];
        const MaskPlan plan = plan_mask(n, cfg_.masked, derive_seed(step_seed, 2 * i));
        input.middleRows(off, n) =
            apply_mask(Eigen::MatrixXd(b.mel.middleRows(off, n)), plan, derive_seed(step_seed, 2 * i + 1));
        for (Index r : plan.indices) masked_rows.push_back(off + r);
        off += n;
      }
      if (!cfg_.masked.loss_masked_only) masked_rows.clear();
      std::mt19937_64 rng(derive_seed(step_seed, "dropout"));
      auto fwd = masked_->forward(t.constant(input.cast<S>()), b.frames, rng);
      out.emplace(kReconstructionHead,
                  l1_loss(fwd.reconstruction, Matrix<S>(b.mel.template cast<S>()), masked_rows));
      latent = fwd.latent;
    }
    for (auto& [w, v] : workers_.losses(latent, b.targets, step_seed))
      out.emplace(to_string(w), v);
    return out;
  }

  /// Inference-mode latent of one clip: the PASE encoder reads the waveform,
  /// the masked encoder reads normalised log-Mel frames without masking.
  LatentSequence encode(const AudioClip& clip) const {
    if (pase_) return pase_->encode(clip);
    FeatureMatrix mel = mel_spectrogram(clip, cfg_.frames);
    mel.frames = stats("mel").apply(mel.frames);
    return masked_->encode(mel).first;
  }

  /// Mean-pooled noise-worker logits of one clip, inference mode.
  Eigen::RowVectorXd noise_logits(const AudioClip& clip, WorkerName w) const {
    const LatentSequence z = encode(clip);
    Tape<S> t(false);
    SegmentedVar<S> zl{t.constant(z.frames.cast<S>()), {z.frames.rows()}};
    return noise_worker_logits(workers_.at(w), zl).value().template cast<double>();
  }

 private:
  void norm_param(const std::string& kind, Index dim, bool discardable) {
    for (const char* suffix : {".mean", ".std"}) {
      auto& p = store_.create("norm." + kind + suffix, 1, dim);
      p.value.setConstant(std::string(suffix) == ".std" ? S(1) : S(0));
      p.trainable = false;
      p.decay = false;
      p.discardable = discardable;
    }
  }

  ModelConfig cfg_;
  ParameterStore<S> store_;
  std::unique_ptr<PaseEncoder<S>> pase_;
  std::unique_ptr<MaskedEncoder<S>> masked_;
  WorkerSet<S> workers_;
};

}  // namespace napt

#endif  // NAPT_MODEL_H_
