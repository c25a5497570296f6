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

#ifndef NAPT_CONFIG_H_
#define NAPT_CONFIG_H_

#include <filesystem>
#include <string>

#include "napt/features.h"
#include "napt/masked_encoder.h"
#include "napt/pase_encoder.h"
#include "napt/training.h"

namespace napt {

struct RunConfig {
  uint64_t seed = 0;
  std::string run_dir;  // not part of the digest
  FrameConfig frames;
  std::string pase_preset = "desk";
  PaseEncoderConfig pase = PaseEncoderConfig::desk();
  MaskedEncoderConfig masked;
  PretrainConfig pretrain;
  MosHeadConfig mos;

  /// Range and consistency checks; errors name the offending field.
  void validate() const;
};

/// Canonical JSON text of a config (sorted keys, every field present).
std::string config_to_json(const RunConfig& cfg, bool with_run_dir = true);

/// Parses config JSON strictly: unknown keys, wrong types and out-of-range
/// values throw ConfigError naming the field. Missing keys keep defaults.
/// `overrides` (also JSON) is merged on top before parsing.
RunConfig config_from_json(const std::string& text, const std::string& overrides = "{}");

/// Reads a config file (empty file or path means defaults) with overrides.
RunConfig load_config(const std::filesystem::path& path, const std::string& overrides = "{}");

/// 16 hex digits of FNV-1a over the canonical JSON without run_dir.
std::string config_digest(const RunConfig& cfg);

/// Environment variable holding the default run directory.
inline constexpr const char* kRunDirEnv = "NAPT_RUN_DIR";

}  // namespace napt

#endif  // NAPT_CONFIG_H_
