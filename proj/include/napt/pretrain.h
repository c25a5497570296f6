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

#ifndef NAPT_PRETRAIN_H_
#define NAPT_PRETRAIN_H_

#include <filesystem>
#include <memory>
#include <ostream>
#include <vector>

#include "napt/checkpoint.h"
#include "napt/model.h"
#include "napt/optimizer.h"

namespace napt {

using Model = PretrainModel<Real>;

/// One optimisation step on the joint loss. Throws NumericError naming the
/// head whose loss or gradient is not finite.
LossBreakdown pretrain_step(Model& model, Adam<Real>& opt, const Batch<Real>& batch,
                            const PretrainConfig& cfg, uint64_t step_seed);

/// Shuffled batches of example indices for one epoch. A trailing batch with
/// a single example is merged into the previous one. When the examples span
/// several speakers, every batch is given at least two.
std::vector<std::vector<std::size_t>> epoch_batches(const std::vector<Example>& examples,
                                                    int batch_size, uint64_t seed);

struct EpochLog {
  int epoch = 0;
  long steps = 0;
  double mean_total = 0;
  std::map<std::string, double> mean_per_head;
  int sinc_clamps = 0;
};

struct PretrainResult {
  std::filesystem::path checkpoint;
  std::vector<EpochLog> epochs;
  std::vector<LossBreakdown> steps;
};

std::string to_json_line(const EpochLog& e, const std::string& digest);

Checkpoint make_checkpoint(const Model& model, const RunConfig& cfg, uint64_t step);

/// Rebuilds a model from a pre-training checkpoint. Without workers only the
/// encoder and normalisation statistics are restored.
std::unique_ptr<Model> model_from_checkpoint(const Checkpoint& ckpt, bool with_workers);
RunConfig config_of(const Checkpoint& ckpt);

/// Trains on already prepared examples; writes the checkpoint to `out`
/// after every epoch and logs one JSON line per epoch to `log`.
PretrainResult pretrain(const std::vector<Example>& train, const RunConfig& cfg,
                        const std::filesystem::path& out, std::ostream* log = nullptr);

/// Reads the manifest, prepares its training split and trains.
PretrainResult pretrain(const std::filesystem::path& manifest, const RunConfig& cfg,
                        const std::filesystem::path& out, std::ostream* log = nullptr);

}  // namespace napt

#endif  // NAPT_PRETRAIN_H_
