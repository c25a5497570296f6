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

#ifndef NAPT_WORKERS_H_
#define NAPT_WORKERS_H_

#include <array>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "napt/layers.h"

namespace napt {

enum class WorkerName : uint8_t {
  kWaveform, kLps, kMfcc, kProsody, kLim, kGim, kSpc, kEnergy, kCategory, kSnr
};

inline constexpr std::array<WorkerName, 10> kAllWorkers = {
    WorkerName::kWaveform, WorkerName::kLps, WorkerName::kMfcc, WorkerName::kProsody,
    WorkerName::kLim,      WorkerName::kGim, WorkerName::kSpc,  WorkerName::kEnergy,
    WorkerName::kCategory, WorkerName::kSnr};

inline constexpr int kWorkerHidden = 256;
inline constexpr int kWaveformFrame = 160;

std::string to_string(WorkerName w);
WorkerName worker_from_string(const std::string& name);

/// Parses a comma-separated list; "all", "ssl" and "noise" expand to groups.
std::set<WorkerName> parse_worker_list(const std::string& list);
std::string format_worker_list(const std::set<WorkerName>& workers);

bool is_regression(WorkerName w);
bool is_binary(WorkerName w);
bool is_noise(WorkerName w);
inline bool is_ssl(WorkerName w) { return !is_noise(w); }

/// Output width of a head: target dimension, one logit, or class count.
int output_dim(WorkerName w);

/// Frames of an utterance that pair with each other or with another
/// utterance. Indices are rows of the stacked latent matrix.
struct FramePairs {
  std::vector<Index> anchor, positive, negative;
};

struct ChunkPairs {
  std::vector<RowRange> anchor, positive, negative;
};

inline constexpr int kPairsPerUtterance = 4;
inline constexpr Index kGimChunkFrames = 100;  // 1 s at a 10 ms hop
inline constexpr int kSpcMaxShift = 5;

/// LIM: anchor and positive come from utterances of the same speaker (two
/// different frames when it is the same utterance), the negative from
/// another speaker. Needs at least two speakers.
FramePairs sample_lim_pairs(const Segments& segments, const std::vector<std::string>& speakers,
                            uint64_t seed, int per_utterance = kPairsPerUtterance);

/// GIM: two chunks of the same utterance versus a chunk of another one.
/// Chunks are kGimChunkFrames long, shortened to half the utterance.
ChunkPairs sample_gim_pairs(const Segments& segments, uint64_t seed,
                            int per_utterance = kPairsPerUtterance);

/// SPC: anchor frame t, positive t + k, negative t - k, k uniform in
/// [1, kSpcMaxShift] (reduced for short utterances).
FramePairs sample_spc_pairs(const Segments& segments, uint64_t seed,
                            int per_utterance = kPairsPerUtterance);

/// Rows of a stacked latent and of stacked per-utterance targets that line
/// up after trimming each utterance to the shorter length. Throws when an
/// utterance differs by more than max_skew frames.
struct Alignment {
  std::vector<Index> latent_rows;
  std::vector<Index> target_rows;
};
Alignment align_frames(const Segments& latent, const Segments& target, Index max_skew = 2);

/// One worker: a 256-unit PReLU hidden layer and an output layer.
template <typename S>
struct WorkerHead {
  WorkerName name = WorkerName::kLps;
  Mlp<S> mlp;
  bool enabled = true;

  static WorkerHead create(WorkerName name, ParameterStore<S>& store, Index latent_dim,
                           uint64_t seed) {
    WorkerHead h;
    h.name = name;
    std::mt19937_64 rng(derive_seed(seed, "worker." + to_string(name)));
    const Index in = is_binary(name) ? 2 * latent_dim : latent_dim;
    const std::string prefix = "worker." + to_string(name);
    h.mlp = Mlp<S>::create(store, prefix, in, kWorkerHidden, output_dim(name), rng);
    for (auto& [pname, p] : store.items())
      if (pname.rfind(prefix + ".", 0) == 0) p.discardable = true;
    if (h.mlp.hidden_dim() != kWorkerHidden) throw Error("worker hidden width must be 256");
    return h;
  }

  Index input_dim() const { return mlp.hidden.weight->value.rows(); }
  Var<S> operator()(Var<S> x) const { return mlp(x); }
};

/// Per-frame regression: MSE, or mean absolute error for the waveform head.
template <typename S>
Var<S> regression_worker_loss(const WorkerHead<S>& head, Var<S> latent_rows,
                              const Matrix<S>& target) {
  if (!is_regression(head.name)) throw Error(to_string(head.name) + " is not a regression worker");
  if (target.cols() != output_dim(head.name))
    throw Error(to_string(head.name) + ": target width mismatch");
  Var<S> pred = head(latent_rows);
  return head.name == WorkerName::kWaveform ? l1_loss(pred, target) : mse_loss(pred, target);
}

/// Binary cross-entropy with label 1 for positive and 0 for negative pairs.
template <typename S>
Var<S> binary_info_loss(const WorkerHead<S>& head, Var<S> pos_pairs, Var<S> neg_pairs) {
  if (!is_binary(head.name)) throw Error(to_string(head.name) + " is not a binary worker");
  if (pos_pairs.cols() != head.input_dim() || neg_pairs.cols() != head.input_dim())
    throw Error(to_string(head.name) + ": pair dimension mismatch");
  std::vector<int> labels(std::size_t(pos_pairs.rows()), 1);
  labels.resize(std::size_t(pos_pairs.rows() + neg_pairs.rows()), 0);
  return bce_with_logits(head(concat_rows<S>({pos_pairs, neg_pairs})), labels);
}

template <typename S>
Var<S> pair_rows(Var<S> latent, const std::vector<Index>& a, const std::vector<Index>& b) {
  return concat_cols<S>({gather_rows(latent, a), gather_rows(latent, b)});
}

template <typename S>
Var<S> pair_chunks(Var<S> latent, const std::vector<RowRange>& a,
                   const std::vector<RowRange>& b) {
  return concat_cols<S>({range_mean(latent, a), range_mean(latent, b)});
}

/// Mean-pools each utterance, then produces class logits (one row each).
template <typename S>
Var<S> noise_worker_logits(const WorkerHead<S>& head, const SegmentedVar<S>& latent) {
  if (!is_noise(head.name)) throw Error(to_string(head.name) + " is not a noise worker");
  for (Index len : latent.segments)
    if (len < 1) throw Error(to_string(head.name) + ": empty latent");
  return head(segment_mean(latent));
}

template <typename S>
Var<S> noise_worker_loss(Var<S> logits, const std::vector<int>& labels) {
  for (int y : labels)
    if (y < 0 || y >= logits.cols())
      throw Error("label " + std::to_string(y) + " out of range for " +
                  std::to_string(logits.cols()) + " classes");
  return softmax_cross_entropy(logits, labels);
}

/// Everything the workers need for one batch, besides the latent.
template <typename S>
struct WorkerTargets {
  Segments target_frames;            // per-utterance frame-level target lengths
  std::map<WorkerName, Matrix<S>> frames;  // stacked lps, mfcc, prosody targets
  Matrix<S> waveform;                // one row of 160 samples per latent frame
  std::vector<std::string> speakers;
  std::vector<int> energy, category, snr;
};

/// The enabled heads; disabled heads are never created, so their absence
/// does not shift any other head's initialisation or sampling.
template <typename S>
class WorkerSet {
 public:
  WorkerSet() = default;
  WorkerSet(const std::set<WorkerName>& enabled, ParameterStore<S>& store, Index latent_dim,
            uint64_t seed) {
    for (WorkerName w : kAllWorkers)
      if (enabled.count(w)) heads_.emplace(w, WorkerHead<S>::create(w, store, latent_dim, seed));
  }

  bool has(WorkerName w) const { return heads_.count(w) > 0; }
  const WorkerHead<S>& at(WorkerName w) const { return heads_.at(w); }
  std::set<WorkerName> names() const {
    std::set<WorkerName> s;
    for (const auto& [w, h] : heads_) s.insert(w);
    return s;
  }

  /// Loss of every enabled head. step_seed drives the pair sampling; each
  /// head draws from its own stream.
  std::map<WorkerName, Var<S>> losses(const SegmentedVar<S>& latent, const WorkerTargets<S>& tg,
                                      uint64_t step_seed) const {
    std::map<WorkerName, Var<S>> out;
    std::optional<Alignment> align;
    for (const auto& [w, head] : heads_) {
      const uint64_t seed = derive_seed(step_seed, to_string(w));
      const Var<S>& z = latent.x;
      switch (w) {
        case WorkerName::kWaveform:
          if (tg.waveform.rows() != z.rows()) throw Error("waveform target misaligned");
          out.emplace(w, regression_worker_loss(head, z, tg.waveform));
          break;
        case WorkerName::kLps:
        case WorkerName::kMfcc:
        case WorkerName::kProsody: {
          if (!align) align = align_frames(latent.segments, tg.target_frames);
          const Matrix<S>& all = tg.frames.at(w);
          Matrix<S> target(Index(align->target_rows.size()), all.cols());
          for (std::size_t i = 0; i < align->target_rows.size(); ++i)
            target.row(Index(i)) = all.row(align->target_rows[i]);
          out.emplace(w, regression_worker_loss(head, gather_rows(z, align->latent_rows), target));
          break;
        }
        case WorkerName::kLim: {
          const FramePairs p = sample_lim_pairs(latent.segments, tg.speakers, seed);
          out.emplace(w, binary_info_loss(head, pair_rows(z, p.anchor, p.positive),
                                          pair_rows(z, p.anchor, p.negative)));
          break;
        }
        case WorkerName::kGim: {
          const ChunkPairs p = sample_gim_pairs(latent.segments, seed);
          out.emplace(w, binary_info_loss(head, pair_chunks(z, p.anchor, p.positive),
                                          pair_chunks(z, p.anchor, p.negative)));
          break;
        }
        case WorkerName::kSpc: {
          const FramePairs p = sample_spc_pairs(latent.segments, seed);
          out.emplace(w, binary_info_loss(head, pair_rows(z, p.anchor, p.positive),
                                          pair_rows(z, p.anchor, p.negative)));
          break;
        }
        case WorkerName::kEnergy:
          out.emplace(w, noise_worker_loss(noise_worker_logits(head, latent), tg.energy));
          break;
        case WorkerName::kCategory:
          out.emplace(w, noise_worker_loss(noise_worker_logits(head, latent), tg.category));
          break;
        case WorkerName::kSnr:
          out.emplace(w, noise_worker_loss(noise_worker_logits(head, latent), tg.snr));
          break;
      }
    }
    return out;
  }

 private:
  std::map<WorkerName, WorkerHead<S>> heads_;
};

}  // namespace napt

#endif  // NAPT_WORKERS_H_
