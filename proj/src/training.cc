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

#include "napt/training.h"

#include <cmath>

namespace napt {

std::string to_string(EncoderKind k) { return k == EncoderKind::kPase ? "pase" : "masked"; }

EncoderKind encoder_kind_from_string(const std::string& s) {
  if (s == "pase") return EncoderKind::kPase;
  if (s == "masked") return EncoderKind::kMasked;
  throw ConfigError("encoder", "expected pase or masked, got '" + s + "'");
}

std::string to_string(SignConvention s) {
  return s == SignConvention::kAdditive ? "additive" : "literal";
}

SignConvention sign_convention_from_string(const std::string& s) {
  if (s == "additive") return SignConvention::kAdditive;
  if (s == "literal") return SignConvention::kLiteral;
  throw ConfigError("sign_convention", "expected additive or literal, got '" + s + "'");
}

double loss_coefficient(const std::string& head, const LossWeights& w) {
  const double sign = w.sign == SignConvention::kAdditive ? 1.0 : -1.0;
  if (head == "energy") return sign * w.alpha;
  if (head == "category") return sign * w.beta;
  if (head == "snr") return sign * w.gamma;
  return 1.0;
}

LossBreakdown compose_loss(const std::map<std::string, double>& per_head, const LossWeights& w) {
  LossBreakdown b;
  b.per_head = per_head;
  b.weights = w;
  for (const auto& [name, v] : per_head) {
    if (!std::isfinite(v)) throw NumericError(name, "loss is not finite");
    if (name == "energy")
      b.l_eng = v;
    else if (name == "category")
      b.l_noise = v;
    else if (name == "snr")
      b.l_snr = v;
    else
      b.l_ssl += v;
    b.weighted_total += loss_coefficient(name, w) * v;
  }
  return b;
}

std::set<WorkerName> effective_workers(EncoderKind kind, const std::set<WorkerName>& requested) {
  if (kind == EncoderKind::kPase) return requested;
  std::set<WorkerName> out;
  for (WorkerName n : requested)
    if (is_noise(n)) out.insert(n);
  return out;
}

}  // namespace napt
