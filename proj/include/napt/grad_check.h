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

#ifndef NAPT_GRAD_CHECK_H_
#define NAPT_GRAD_CHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "napt/layers.h"

namespace napt {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst_parameter;
  Index worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

struct GradCheckOptions {
  std::size_t coordinates = 200;
  double epsilon = 1e-6;
  // Relative error is |a - n| / max(|a|, |n|, abs_floor); the floor keeps
  // coordinates with vanishing gradients from dividing round-off by zero.
  double abs_floor = 1e-7;
  uint64_t seed = 0;
};

/// Compares analytic gradients with central finite differences.
///
/// `loss(true)` must evaluate the loss at the store's current values and run
/// the backward pass into the parameters' grad fields; `loss(false)` only
/// evaluates. Coordinates are drawn uniformly from all trainable scalars.
inline GradCheckResult grad_check(ParameterStore<double>& store,
                                  const std::function<double(bool)>& loss,
                                  const GradCheckOptions& opts = {}) {
  store.zero_grad();
  const double base = loss(true);
  if (!std::isfinite(base)) throw Error("grad_check: loss is not finite");

  struct Coord {
    Parameter<double>* p;
    Index i;
  };
  std::vector<Coord> all;
  for (auto& [name, p] : store.items())
    if (p.trainable)
      for (Index i = 0; i < p.value.size(); ++i) all.push_back({&p, i});
  if (all.empty()) throw Error("grad_check: no trainable parameters");
  std::mt19937_64 rng(opts.seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min(all.size(), opts.coordinates));

  GradCheckResult result;
  for (const auto& c : all) {
    double& v = c.p->value.data()[c.i];
    const double saved = v;
    v = saved + opts.epsilon;
    const double up = loss(false);
    v = saved - opts.epsilon;
    const double down = loss(false);
    v = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw Error("grad_check: non-finite loss near " + c.p->name);
    const double numeric = (up - down) / (2.0 * opts.epsilon);
    const double analytic = c.p->grad.data()[c.i];
    const double denom =
        std::max({std::abs(analytic), std::abs(numeric), opts.abs_floor});
    const double rel = std::abs(analytic - numeric) / denom;
    ++result.coordinates;
    if (rel >= result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_parameter = c.p->name;
      result.worst_index = c.i;
      result.worst_analytic = analytic;
      result.worst_numeric = numeric;
    }
  }
  return result;
}

}  // namespace napt

#endif  // NAPT_GRAD_CHECK_H_
