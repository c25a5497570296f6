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

#ifndef NAPT_OPTIMIZER_H_
#define NAPT_OPTIMIZER_H_

#include <cmath>
#include <map>
#include <string>

#include "napt/layers.h"
#include "napt/training.h"

namespace napt {

/// Adam over every trainable parameter of a store. Weight decay is added to
/// the gradient (coupled L2) for parameters with decay == true.
template <typename S>
class Adam {
 public:
  explicit Adam(const AdamConfig& cfg) : cfg_(cfg) {}

  void step(ParameterStore<S>& store) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, double(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, double(t_));
    const S b1 = S(cfg_.beta1), b2 = S(cfg_.beta2);
    for (auto& [name, p] : store.items()) {
      if (!p.trainable || p.grad.size() == 0) continue;
      auto [it, fresh] = state_.try_emplace(name);
      State& st = it->second;
      if (fresh) {
        st.m = Matrix<S>::Zero(p.value.rows(), p.value.cols());
        st.v = Matrix<S>::Zero(p.value.rows(), p.value.cols());
      }
      Matrix<S> g = p.grad;
      if (p.decay && cfg_.weight_decay > 0) g += S(cfg_.weight_decay) * p.value;
      st.m = b1 * st.m + (S(1) - b1) * g;
      st.v = b2 * st.v + (S(1) - b2) * g.cwiseProduct(g);
      const S lr = S(cfg_.lr / c1), root_c2 = S(std::sqrt(c2)), eps = S(cfg_.eps);
      p.value.array() -= lr * st.m.array() / (st.v.array().sqrt() / root_c2 + eps);
    }
  }

  long steps() const { return t_; }

 private:
  struct State {
    Matrix<S> m, v;
  };
  AdamConfig cfg_;
  std::map<std::string, State> state_;
  long t_ = 0;
};

}  // namespace napt

#endif  // NAPT_OPTIMIZER_H_
