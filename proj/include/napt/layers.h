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

#ifndef NAPT_LAYERS_H_
#define NAPT_LAYERS_H_

#include <cmath>
#include <map>
#include <random>
#include <string>

#include "napt/autograd.h"

namespace napt {

/// Owns named parameters. Element addresses are stable for the lifetime of
/// the store, so layers keep raw pointers into it.
template <typename S>
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;

  Parameter<S>& create(const std::string& name, Index rows, Index cols) {
    auto [it, inserted] = params_.try_emplace(name);
    if (!inserted) throw Error("duplicate parameter " + name);
    it->second.name = name;
    it->second.value = Matrix<S>::Zero(rows, cols);
    return it->second;
  }

  Parameter<S>* find(const std::string& name) {
    auto it = params_.find(name);
    return it == params_.end() ? nullptr : &it->second;
  }
  const Parameter<S>* find(const std::string& name) const {
    auto it = params_.find(name);
    return it == params_.end() ? nullptr : &it->second;
  }
  Parameter<S>& at(const std::string& name) {
    auto* p = find(name);
    if (!p) throw Error("no parameter " + name);
    return *p;
  }

  std::map<std::string, Parameter<S>>& items() { return params_; }
  const std::map<std::string, Parameter<S>>& items() const { return params_; }

  /// Number of trainable scalars whose name starts with prefix.
  std::size_t count(const std::string& prefix = "") const {
    std::size_t n = 0;
    for (const auto& [name, p] : params_)
      if (p.trainable && name.rfind(prefix, 0) == 0) n += std::size_t(p.value.size());
    return n;
  }

  void zero_grad() {
    for (auto& [name, p] : params_) p.zero_grad();
  }

  /// Copies values by name; shapes must match.
  template <typename T>
  void assign_from(const ParameterStore<T>& other) {
    for (auto& [name, p] : params_) {
      const auto* q = other.find(name);
      if (!q) throw Error("missing parameter " + name);
      if (q->value.rows() != p.value.rows() || q->value.cols() != p.value.cols())
        throw Error("shape mismatch for parameter " + name);
      p.value = q->value.template cast<S>();
    }
  }

 private:
  std::map<std::string, Parameter<S>> params_;
};

template <typename S>
void init_uniform(Parameter<S>& p, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  for (Index j = 0; j < p.value.cols(); ++j)
    for (Index i = 0; i < p.value.rows(); ++i) p.value(i, j) = S(u(rng));
}

template <typename S>
struct Linear {
  Parameter<S>* weight = nullptr;  // in x out
  Parameter<S>* bias = nullptr;    // 1 x out

  static Linear create(ParameterStore<S>& store, const std::string& prefix,
                       Index in, Index out, std::mt19937_64& rng) {
    Linear l;
    l.weight = &store.create(prefix + ".weight", in, out);
    l.bias = &store.create(prefix + ".bias", 1, out);
    const double bound = 1.0 / std::sqrt(double(in));
    init_uniform(*l.weight, bound, rng);
    init_uniform(*l.bias, bound, rng);
    return l;
  }

  Var<S> operator()(Var<S> x) const {
    Tape<S>& t = *x.tape;
    return add_row(matmul(x, t.param(*weight)), t.param(*bias));
  }
};

template <typename S>
struct PRelu {
  Parameter<S>* slope = nullptr;

  static PRelu create(ParameterStore<S>& store, const std::string& prefix,
                      Index channels) {
    PRelu p;
    p.slope = &store.create(prefix + ".slope", 1, channels);
    p.slope->value.setConstant(S(0.25));
    p.slope->decay = false;
    return p;
  }

  Var<S> operator()(Var<S> x) const { return prelu(x, x.tape->param(*slope)); }
};

template <typename S>
struct LayerNorm {
  Parameter<S>* gain = nullptr;
  Parameter<S>* bias = nullptr;

  static LayerNorm create(ParameterStore<S>& store, const std::string& prefix,
                          Index channels) {
    LayerNorm n;
    n.gain = &store.create(prefix + ".gain", 1, channels);
    n.bias = &store.create(prefix + ".bias", 1, channels);
    n.gain->value.setOnes();
    n.gain->decay = n.bias->decay = false;
    return n;
  }

  Var<S> operator()(Var<S> x) const {
    Tape<S>& t = *x.tape;
    return layer_norm(x, t.param(*gain), t.param(*bias));
  }
};

template <typename S>
struct BatchNorm {
  Parameter<S>* gain = nullptr;
  Parameter<S>* bias = nullptr;
  BatchNormStats<S> stats;

  static BatchNorm create(ParameterStore<S>& store, const std::string& prefix,
                          Index channels) {
    BatchNorm n;
    n.gain = &store.create(prefix + ".gain", 1, channels);
    n.bias = &store.create(prefix + ".bias", 1, channels);
    n.gain->value.setOnes();
    n.gain->decay = n.bias->decay = false;
    n.stats.mean = &store.create(prefix + ".running_mean", 1, channels);
    n.stats.var = &store.create(prefix + ".running_var", 1, channels);
    n.stats.var->value.setOnes();
    n.stats.mean->trainable = n.stats.var->trainable = false;
    return n;
  }

  Var<S> operator()(Var<S> x) const {
    Tape<S>& t = *x.tape;
    return batch_norm(x, t.param(*gain), t.param(*bias), stats);
  }
};

/// One hidden layer with per-channel PReLU, then a linear output layer.
template <typename S>
struct Mlp {
  Linear<S> hidden;
  PRelu<S> act;
  Linear<S> out;

  static Mlp create(ParameterStore<S>& store, const std::string& prefix,
                    Index in, Index hidden_dim, Index out_dim, std::mt19937_64& rng) {
    Mlp m;
    m.hidden = Linear<S>::create(store, prefix + ".hidden", in, hidden_dim, rng);
    m.act = PRelu<S>::create(store, prefix + ".act", hidden_dim);
    m.out = Linear<S>::create(store, prefix + ".out", hidden_dim, out_dim, rng);
    return m;
  }

  Index hidden_dim() const { return hidden.weight->value.cols(); }

  Var<S> operator()(Var<S> x) const { return out(act(hidden(x))); }
};

}  // namespace napt

#endif  // NAPT_LAYERS_H_
