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

#include <algorithm>
#include <sstream>

#include "napt/corpus.h"

namespace napt {
namespace {

const std::array<const char*, 10> kNames = {"waveform", "lps", "mfcc", "prosody", "lim",
                                            "gim",      "spc", "energy", "category", "snr"};

Index draw(std::mt19937_64& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

std::vector<Index> offsets(const Segments& seg) {
  std::vector<Index> off(seg.size());
  Index o = 0;
  for (std::size_t i = 0; i < seg.size(); ++i) {
    off[i] = o;
    o += seg[i];
  }
  return off;
}

}  // namespace

std::string to_string(WorkerName w) { return kNames[std::size_t(w)]; }

WorkerName worker_from_string(const std::string& name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (name == kNames[i]) return WorkerName(i);
  throw ConfigError("workers", "unknown worker '" + name + "'");
}

std::set<WorkerName> parse_worker_list(const std::string& list) {
  std::set<WorkerName> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    if (item == "all" || item == "ssl" || item == "noise") {
      for (WorkerName w : kAllWorkers)
        if (item == "all" || (item == "noise") == is_noise(w)) out.insert(w);
    } else {
      out.insert(worker_from_string(item));
    }
  }
  return out;
}

std::string format_worker_list(const std::set<WorkerName>& workers) {
  std::string s;
  for (WorkerName w : kAllWorkers)
    if (workers.count(w)) s += (s.empty() ? "" : ",") + to_string(w);
  return s;
}

bool is_regression(WorkerName w) { return w <= WorkerName::kProsody; }
bool is_binary(WorkerName w) { return w >= WorkerName::kLim && w <= WorkerName::kSpc; }
bool is_noise(WorkerName w) { return w >= WorkerName::kEnergy; }

int output_dim(WorkerName w) {
  switch (w) {
    case WorkerName::kWaveform: return kWaveformFrame;
    case WorkerName::kLps: return 257;
    case WorkerName::kMfcc: return 20;
    case WorkerName::kProsody: return 4;
    case WorkerName::kLim:
    case WorkerName::kGim:
    case WorkerName::kSpc: return 1;
    case WorkerName::kEnergy: return kNumEnergyClasses;
    case WorkerName::kCategory: return kNumCategoryClasses;
    case WorkerName::kSnr: return kNumSnrClasses;
  }
  throw Error("bad worker");
}

FramePairs sample_lim_pairs(const Segments& segments, const std::vector<std::string>& speakers,
                            uint64_t seed, int per_utterance) {
  if (speakers.size() != segments.size()) throw Error("lim: one speaker id per utterance");
  if (std::set<std::string>(speakers.begin(), speakers.end()).size() < 2)
    throw Error("lim: the batch needs at least two speakers");
  std::mt19937_64 rng(seed);
  const auto off = offsets(segments);
  FramePairs p;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    std::vector<std::size_t> same, other;
    for (std::size_t j = 0; j < segments.size(); ++j)
      (speakers[j] == speakers[i] ? same : other).push_back(j);
    for (int n = 0; n < per_utterance; ++n) {
      const Index a = draw(rng, 0, segments[i] - 1);
      std::size_t u = same[std::size_t(draw(rng, 0, Index(same.size()) - 1))];
      if (u == i && segments[i] < 2) {
        // A single-frame utterance cannot supply two distinct frames.
        if (same.size() < 2) throw Error("lim: utterance too short for a positive frame");
        while (u == i) u = same[std::size_t(draw(rng, 0, Index(same.size()) - 1))];
      }
      Index b = draw(rng, 0, segments[u] - 1 - (u == i ? 1 : 0));
      if (u == i && b >= a) ++b;
      const std::size_t v = other[std::size_t(draw(rng, 0, Index(other.size()) - 1))];
      p.anchor.push_back(off[i] + a);
      p.positive.push_back(off[u] + b);
      p.negative.push_back(off[v] + draw(rng, 0, segments[v] - 1));
    }
  }
  return p;
}

ChunkPairs sample_gim_pairs(const Segments& segments, uint64_t seed, int per_utterance) {
  if (segments.size() < 2) throw Error("gim: the batch needs at least two utterances");
  std::mt19937_64 rng(seed);
  const auto off = offsets(segments);
  auto chunk = [&](std::size_t u) {
    const Index len = std::max<Index>(1, std::min(kGimChunkFrames, segments[u] / 2));
    return RowRange{off[u] + draw(rng, 0, segments[u] - len), len};
  };
  ChunkPairs p;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    for (int n = 0; n < per_utterance; ++n) {
      p.anchor.push_back(chunk(i));
      p.positive.push_back(chunk(i));
      std::size_t v = std::size_t(draw(rng, 0, Index(segments.size()) - 2));
      if (v >= i) ++v;
      p.negative.push_back(chunk(v));
    }
  }
  return p;
}

FramePairs sample_spc_pairs(const Segments& segments, uint64_t seed, int per_utterance) {
  std::mt19937_64 rng(seed);
  const auto off = offsets(segments);
  FramePairs p;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Index max_k = std::min<Index>(kSpcMaxShift, (segments[i] - 1) / 2);
    if (max_k < 1) throw Error("spc: utterance needs at least 3 frames");
    for (int n = 0; n < per_utterance; ++n) {
      const Index k = draw(rng, 1, max_k);
      const Index t = draw(rng, k, segments[i] - 1 - k);
      p.anchor.push_back(off[i] + t);
      p.positive.push_back(off[i] + t + k);
      p.negative.push_back(off[i] + t - k);
    }
  }
  return p;
}

Alignment align_frames(const Segments& latent, const Segments& target, Index max_skew) {
  if (latent.size() != target.size()) throw Error("align: utterance count mismatch");
  Alignment a;
  Index lo = 0, to = 0;
  for (std::size_t i = 0; i < latent.size(); ++i) {
    const Index skew = std::abs(latent[i] - target[i]);
    if (skew > max_skew)
      throw Error("latent has " + std::to_string(latent[i]) + " frames but target has " +
                  std::to_string(target[i]) + " (more than " + std::to_string(max_skew) +
                  " apart)");
    const Index n = std::min(latent[i], target[i]);
    for (Index t = 0; t < n; ++t) {
      a.latent_rows.push_back(lo + t);
      a.target_rows.push_back(to + t);
    }
    lo += latent[i];
    to += target[i];
  }
  return a;
}

}  // namespace napt
