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

#include "napt/pretrain.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "json.hpp"

namespace napt {

namespace fs = std::filesystem;

namespace {

// Head that owns a parameter, for error messages.
std::string owner_of(const std::string& param) {
  if (param.rfind("worker.", 0) == 0) {
    const auto dot = param.find('.', 7);
    return param.substr(7, dot - 7);
  }
  return "encoder";
}

}  // namespace

LossBreakdown pretrain_step(Model& model, Adam<Real>& opt, const Batch<Real>& batch,
                            const PretrainConfig& cfg, uint64_t step_seed) {
  model.store().zero_grad();
  Tape<Real> tape(true);
  const auto terms = model.losses(tape, batch, step_seed);
  std::map<std::string, double> values;
  for (const auto& [name, v] : terms) values[name] = double(v.scalar());
  const LossBreakdown out = compose_loss(values, cfg.weights);
  tape.backward(compose_loss(terms, cfg.weights));
  for (const auto& [name, p] : model.store().items())
    if (p.trainable && !p.grad.allFinite()) throw NumericError(owner_of(name), "gradient of " + name + " is not finite");
  opt.step(model.store());
  return out;
}

std::vector<std::vector<std::size_t>> epoch_batches(const std::vector<Example>& examples,
                                                    int batch_size, uint64_t seed) {
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < order.size(); i += std::size_t(batch_size))
    batches.emplace_back(order.begin() + long(i),
                         order.begin() + long(std::min(order.size(), i + std::size_t(batch_size))));
  if (batches.size() > 1 && batches.back().size() < 2) {
    batches[batches.size() - 2].push_back(batches.back().front());
    batches.pop_back();
  }
  std::set<std::string> all;
  for (const auto& e : examples) all.insert(e.speaker);
  if (all.size() < 2) return batches;
  // Swap in a different speaker from another batch where needed.
  for (std::size_t b = 0; b < batches.size(); ++b) {
    auto& batch = batches[b];
    const std::string& spk = examples[batch[0]].speaker;
    bool mixed = false;
    for (std::size_t i : batch) mixed = mixed || examples[i].speaker != spk;
    if (mixed || batch.size() < 2) continue;
    for (std::size_t o = 1; o < batches.size() && !mixed; ++o) {
      auto& other = batches[(b + o) % batches.size()];
      for (std::size_t& j : other)
        if (examples[j].speaker != spk) {
          std::swap(batch.back(), j);
          mixed = true;
          break;
        }
    }
  }
  return batches;
}

std::string to_json_line(const EpochLog& e, const std::string& digest) {
  nlohmann::json j = {{"epoch", e.epoch},
                      {"steps", e.steps},
                      {"loss", e.mean_total},
                      {"heads", e.mean_per_head},
                      {"sinc_clamps", e.sinc_clamps},
                      {"digest", digest}};
  return j.dump();
}

Checkpoint make_checkpoint(const Model& model, const RunConfig& cfg, uint64_t step) {
  Checkpoint c;
  c.kind = "pretrain";
  c.config_json = config_to_json(cfg);
  c.digest = config_digest(cfg);
  c.step = step;
  c.tensors = tensors_from(model.store());
  return c;
}

RunConfig config_of(const Checkpoint& ckpt) { return config_from_json(ckpt.config_json); }

std::unique_ptr<Model> model_from_checkpoint(const Checkpoint& ckpt, bool with_workers) {
  if (ckpt.kind != "pretrain") throw Error("expected a pre-training checkpoint, got " + ckpt.kind);
  const RunConfig cfg = config_of(ckpt);
  ModelConfig mc = model_config(cfg);
  if (!with_workers) mc.workers.clear();
  auto model = std::make_unique<Model>(mc, cfg.seed);
  load_into(model->store(), ckpt);
  return model;
}

PretrainResult pretrain(const std::vector<Example>& train, const RunConfig& cfg,
                        const fs::path& out, std::ostream* log) {
  cfg.validate();
  if (train.empty()) throw Error("pre-training needs at least one training example");
  const std::string digest = config_digest(cfg);
  auto model = std::make_unique<Model>(model_config(cfg), cfg.seed);
  model->fit_stats(train);
  Adam<Real> opt(cfg.pretrain.adam);
  PretrainResult result;
  result.checkpoint = out;
  uint64_t step = 0;
  save_checkpoint(out, make_checkpoint(*model, cfg, step));
  for (int epoch = 1; epoch <= cfg.pretrain.epochs; ++epoch) {
    if (cfg.pretrain.max_steps > 0 && step >= uint64_t(cfg.pretrain.max_steps)) break;
    EpochLog e;
    e.epoch = epoch;
    for (const auto& idx : epoch_batches(train, cfg.pretrain.batch_size,
                                         derive_seed(cfg.seed, "epoch" + std::to_string(epoch)))) {
      if (cfg.pretrain.max_steps > 0 && step >= uint64_t(cfg.pretrain.max_steps)) break;
      std::vector<const Example*> items;
      for (std::size_t i : idx) items.push_back(&train[i]);
      const LossBreakdown b = pretrain_step(*model, opt, model->make_batch(items), cfg.pretrain,
                                            derive_seed(cfg.seed, step));
      if (model->pase()) e.sinc_clamps += model->pase()->sinc().project();
      ++step;
      ++e.steps;
      e.mean_total += b.weighted_total;
      for (const auto& [k, v] : b.per_head) e.mean_per_head[k] += v;
      result.steps.push_back(b);
    }
    if (e.steps > 0) {
      e.mean_total /= double(e.steps);
      for (auto& [k, v] : e.mean_per_head) v /= double(e.steps);
    }
    if (log) *log << to_json_line(e, digest) << std::endl;
    result.epochs.push_back(e);
    save_checkpoint(out, make_checkpoint(*model, cfg, step));
  }
  return result;
}

PretrainResult pretrain(const fs::path& manifest, const RunConfig& cfg, const fs::path& out,
                        std::ostream* log) {
  const auto records = read_manifest(manifest);
  const auto train = prepare_examples(records, Split::kTrain, manifest.parent_path(), cfg.frames);
  return pretrain(train, cfg, out, log);
}

}  // namespace napt
