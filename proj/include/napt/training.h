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

#ifndef NAPT_TRAINING_H_
#define NAPT_TRAINING_H_

#include <map>
#include <set>
#include <string>

#include "napt/workers.h"

namespace napt {

enum class EncoderKind : uint8_t { kPase, kMasked };
std::string to_string(EncoderKind k);
EncoderKind encoder_kind_from_string(const std::string& s);

/// How the noise terms enter the joint loss: added (minimised), or
/// subtracted exactly as the equation is printed.
enum class SignConvention : uint8_t { kAdditive, kLiteral };
std::string to_string(SignConvention s);
SignConvention sign_convention_from_string(const std::string& s);

struct LossWeights {
  double alpha = 0.1;  // spectral-energy worker
  double beta = 0.1;   // noise-category worker
  double gamma = 0.1;  // SNR worker
  SignConvention sign = SignConvention::kAdditive;
};

/// Name of the masked encoder's reconstruction term in loss maps.
inline const std::string kReconstructionHead = "reconstruction";

/// Weight of one named loss term in the total: 1 for self-supervised terms,
/// +-alpha/beta/gamma for the noise terms.
double loss_coefficient(const std::string& head, const LossWeights& w);

struct LossBreakdown {
  std::map<std::string, double> per_head;
  double l_ssl = 0, l_eng = 0, l_noise = 0, l_snr = 0;
  double weighted_total = 0;
  LossWeights weights;
};

/// Throws NumericError naming the head when a term is not finite.
LossBreakdown compose_loss(const std::map<std::string, double>& per_head, const LossWeights& w);

/// Composes autodiff terms with the same coefficients as compose_loss.
template <typename S>
Var<S> compose_loss(const std::map<std::string, Var<S>>& terms, const LossWeights& w) {
  if (terms.empty()) throw Error("no loss terms: every worker is disabled");
  std::vector<Var<S>> v;
  std::vector<S> c;
  for (const auto& [name, term] : terms) {
    v.push_back(term);
    c.push_back(S(loss_coefficient(name, w)));
  }
  return weighted_sum(v, c);
}

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-3;  // coupled L2, skipped for decay == false
};

struct PretrainConfig {
  LossWeights weights;
  int epochs = 3;
  int batch_size = 8;
  EncoderKind encoder = EncoderKind::kPase;
  std::set<WorkerName> workers = {kAllWorkers.begin(), kAllWorkers.end()};
  AdamConfig adam;
  int max_steps = 0;  // 0: no limit
};

struct MosHeadConfig {
  int hidden = 64;
  double dropout = 0.2;
  double lr = 1.2e-4;
  double weight_decay = 1e-3;
  int batch_size = 16;
  int epochs = 50;
  double score_min = 1.0;
  double score_max = 5.0;
};

/// Workers that apply to an encoder: the masked encoder's self-supervised
/// term is its reconstruction loss, so only noise workers attach to it.
std::set<WorkerName> effective_workers(EncoderKind kind, const std::set<WorkerName>& requested);

}  // namespace napt

#endif  // NAPT_TRAINING_H_
