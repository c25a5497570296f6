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

#ifndef NAPT_CHECKPOINT_H_
#define NAPT_CHECKPOINT_H_

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "napt/layers.h"

namespace napt {

struct TensorEntry {
  std::string name;
  bool trainable = true;
  bool decay = true;
  bool discardable = false;
  Eigen::MatrixXf value;

  bool operator==(const TensorEntry& o) const {
    return name == o.name && trainable == o.trainable && decay == o.decay &&
           discardable == o.discardable && value.rows() == o.value.rows() &&
           value.cols() == o.value.cols() &&
           (value.size() == 0 || std::memcmp(value.data(), o.value.data(),
                                             sizeof(float) * std::size_t(value.size())) == 0);
  }
};

/// Layout, all integers little-endian:
///   "NAPTCKPT", u32 version,
///   u32 length + kind text, u32 length + config JSON, u32 length + digest,
///   u32 length + parent digest, u64 step, u32 tensor count, then per tensor:
///   u32 length + name, u8 flags (1 trainable, 2 decay, 4 discardable),
///   u8 dtype (0 = float32), u16 zero, u32 rows, u32 cols,
///   rows * cols float32 values in row-major order.
struct Checkpoint {
  static constexpr uint32_t kVersion = 1;

  std::string kind;  // "pretrain" or "mos"
  std::string config_json;
  std::string digest;
  std::string parent_digest;  // digest of the encoder a MOS head was trained on
  uint64_t step = 0;
  std::vector<TensorEntry> tensors;

  const TensorEntry* find(const std::string& name) const;
  bool operator==(const Checkpoint&) const = default;
};

/// Writes to a temporary file in the same directory, then renames it.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Writes text atomically (temporary file, then rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

template <typename S>
std::vector<TensorEntry> tensors_from(const ParameterStore<S>& store,
                                      bool include_discardable = true) {
  std::vector<TensorEntry> out;
  for (const auto& [name, p] : store.items()) {
    if (p.discardable && !include_discardable) continue;
    out.push_back({name, p.trainable, p.decay, p.discardable, p.value.template cast<float>()});
  }
  return out;
}

/// Copies checkpoint tensors into same-named parameters. Every parameter of
/// the store must be present with a matching shape; extra tensors are
/// ignored when they are discardable and rejected otherwise unless
/// allow_extra is set.
template <typename S>
void load_into(ParameterStore<S>& store, const Checkpoint& ckpt, bool allow_extra = false) {
  for (auto& [name, p] : store.items()) {
    const TensorEntry* t = ckpt.find(name);
    if (!t) throw Error("checkpoint has no tensor " + name);
    if (t->value.rows() != p.value.rows() || t->value.cols() != p.value.cols())
      throw Error("checkpoint tensor " + name + " has shape " + std::to_string(t->value.rows()) +
                  "x" + std::to_string(t->value.cols()) + ", expected " +
                  std::to_string(p.value.rows()) + "x" + std::to_string(p.value.cols()));
    p.value = t->value.cast<S>();
  }
  if (allow_extra) return;
  for (const TensorEntry& t : ckpt.tensors)
    if (!t.discardable && !store.find(t.name))
      throw Error("checkpoint tensor " + t.name + " does not belong to the configured model");
}

}  // namespace napt

#endif  // NAPT_CHECKPOINT_H_
