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

#include "napt/mos.h"

#include <algorithm>
#include <numeric>

#include "json.hpp"

namespace napt {

namespace fs = std::filesystem;

Eigen::MatrixXd pooled_latents(const Model& encoder, const std::vector<MosRecord>& records,
                               const fs::path& manifest) {
  Eigen::MatrixXd out(Index(records.size()), encoder.latent_dim());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const LatentSequence z = encoder.encode(load_mos_audio(records[i], manifest));
    out.row(Index(i)) = z.frames.cast<double>().colwise().mean();
  }
  return out;
}

MosTrainResult train_mos(const Model& encoder, const Checkpoint& encoder_ckpt,
                         const std::vector<MosRecord>& records, const fs::path& manifest,
                         const RunConfig& cfg, const fs::path& out, std::ostream* log) {
  if (records.empty()) throw Error("MOS training set is empty");
  cfg.validate();
  // The encoder is frozen, so its pooled latents are computed once.
  const Eigen::MatrixXd pooled = pooled_latents(encoder, records, manifest);
  Eigen::VectorXd truth(Index(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) truth(Index(i)) = records[i].mos;

  ParameterStore<Real> store;
  const MosHead<Real> head = MosHead<Real>::create(store, encoder.latent_dim(), cfg.mos, cfg.seed);
  AdamConfig ac;
  ac.lr = cfg.mos.lr;
  ac.weight_decay = cfg.mos.weight_decay;
  Adam<Real> opt(ac);

  MosTrainResult result;
  result.checkpoint = out;
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= cfg.mos.epochs; ++epoch) {
    std::mt19937_64 rng(derive_seed(cfg.seed, "mos-epoch" + std::to_string(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0;
    int batches = 0;
    for (std::size_t s = 0; s < order.size(); s += std::size_t(cfg.mos.batch_size)) {
      const std::size_t e = std::min(order.size(), s + std::size_t(cfg.mos.batch_size));
      Matrix<Real> x(Index(e - s), pooled.cols()), y(Index(e - s), 1);
      for (std::size_t i = s; i < e; ++i) {
        x.row(Index(i - s)) = pooled.row(Index(order[i])).cast<Real>();
        y(Index(i - s), 0) = Real(truth(Index(order[i])));
      }
      store.zero_grad();
      Tape<Real> t(true);
      Var<Real> loss = mse_loss(head(t.constant(x), rng), y);
      if (!std::isfinite(loss.scalar())) throw NumericError("mos", "loss is not finite");
      t.backward(loss);
      opt.step(store);
      total += double(loss.scalar());
      ++batches;
    }
    result.epoch_loss.push_back(total / batches);
    if (log)
      *log << nlohmann::json({{"epoch", epoch}, {"mos_loss", total / batches},
                              {"digest", config_digest(cfg)}})
                  .dump()
           << std::endl;
  }

  {
    Tape<Real> t(false);
    std::mt19937_64 rng(0);
    const Matrix<Real> pred = head(t.constant(pooled.cast<Real>()), rng).value();
    result.train_mse = (pred.cast<double>() - truth).squaredNorm() / double(truth.size());
  }

  // Freeze verification against the checkpoint the encoder was loaded from.
  result.encoder_unchanged = true;
  for (const TensorEntry& t : tensors_from(encoder.store())) {
    const TensorEntry* c = encoder_ckpt.find(t.name);
    if (!c || !(*c == t)) result.encoder_unchanged = false;
  }
  if (!result.encoder_unchanged) throw Error("encoder parameters changed during MOS training");

  Checkpoint ck;
  ck.kind = "mos";
  ck.config_json = config_to_json(cfg);
  ck.digest = config_digest(cfg);
  ck.parent_digest = encoder_ckpt.digest;
  ck.step = uint64_t(cfg.mos.epochs);
  ck.tensors = tensors_from(store);
  save_checkpoint(out, ck);
  return result;
}

MosTrainResult train_mos(const fs::path& mos_manifest, const fs::path& encoder_ckpt,
                         const RunConfig& cfg, const fs::path& out, std::ostream* log,
                         std::optional<EncoderKind> expected) {
  const Checkpoint ckpt = load_checkpoint(encoder_ckpt);
  const auto model = model_from_checkpoint(ckpt, false);
  if (expected && *expected != model->config().kind)
    throw Error("checkpoint holds a " + to_string(model->config().kind) +
                " encoder but " + to_string(*expected) + " was configured");
  return train_mos(*model, ckpt, read_mos_manifest(mos_manifest), mos_manifest, cfg, out, log);
}

LoadedMosHead load_mos_head(const Checkpoint& ckpt) {
  if (ckpt.kind != "mos") throw Error("expected a MOS head checkpoint, got " + ckpt.kind);
  const RunConfig cfg = config_from_json(ckpt.config_json);
  const TensorEntry* w = ckpt.find("mos.hidden.weight");
  if (!w) throw Error("MOS checkpoint has no mos.hidden.weight");
  LoadedMosHead h;
  h.store = std::make_unique<ParameterStore<Real>>();
  h.head = MosHead<Real>::create(*h.store, w->value.rows(), cfg.mos, cfg.seed);
  load_into(*h.store, ckpt);
  h.parent_digest = ckpt.parent_digest;
  return h;
}

}  // namespace napt
