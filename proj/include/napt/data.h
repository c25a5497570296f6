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

#ifndef NAPT_DATA_H_
#define NAPT_DATA_H_

#include <filesystem>
#include <string>
#include <vector>

#include "napt/corpus.h"
#include "napt/features.h"

namespace napt {

/// A realised mixture with everything pre-training needs.
struct Example {
  std::string id;
  std::string speaker;
  AudioClip audio;  // noisy input
  Eigen::MatrixXd mel, lps, mfcc, prosody;
  NoiseLabels labels;
};

Example prepare_example(const MixtureRecord& record, const std::filesystem::path& base_dir,
                        const FrameConfig& frames);

/// Prepares every record of a split, in manifest order.
std::vector<Example> prepare_examples(const std::vector<MixtureRecord>& records, Split split,
                                      const std::filesystem::path& base_dir,
                                      const FrameConfig& frames);

/// Per-dimension mean and standard deviation over frames.
struct FeatureStats {
  Eigen::RowVectorXd mean, stddev;

  /// Dimensions with (near) zero spread get unit scale.
  static FeatureStats fit(const std::vector<const Eigen::MatrixXd*>& mats);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& m) const;
};

struct MosRecord {
  std::string id;
  std::string path;  // relative paths resolve against the manifest's folder
  double mos = 3.0;
};

/// Reads {id, path, mos} JSON lines; mos must lie in [1, 5].
std::vector<MosRecord> read_mos_manifest(const std::filesystem::path& path);
AudioClip load_mos_audio(const MosRecord& r, const std::filesystem::path& manifest_path);

}  // namespace napt

#endif  // NAPT_DATA_H_
