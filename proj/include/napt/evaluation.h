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

#ifndef NAPT_EVALUATION_H_
#define NAPT_EVALUATION_H_

#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "napt/mos.h"

namespace napt {

/// Mean squared difference. Throws on empty or mismatched inputs.
double mse(const std::vector<double>& pred, const std::vector<double>& truth);

/// Pearson correlation; nullopt when either vector is constant. Needs n >= 2.
std::optional<double> lcc(const std::vector<double>& pred, const std::vector<double>& truth);

/// 1-based ranks; tied values share the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& x);

/// Pearson correlation of average ranks; nullopt when either is constant.
std::optional<double> srcc(const std::vector<double>& pred, const std::vector<double>& truth);

struct EvalReport {
  double mse = 0;
  std::optional<double> lcc, srcc;
  int n = 0;
  std::string run_id;
  std::string config_digest;

  std::string to_json() const;  // one object, null for undefined correlations
  bool operator==(const EvalReport&) const = default;
};

/// Scores a test set: `run_id` identifies the (encoder, head, manifest)
/// triple and `config_digest` is the head's.
EvalReport evaluate(const Checkpoint& encoder, const Checkpoint& head,
                    const std::vector<MosRecord>& records,
                    const std::filesystem::path& manifest);
EvalReport evaluate(const std::filesystem::path& encoder_ckpt,
                    const std::filesystem::path& head_ckpt,
                    const std::filesystem::path& manifest);

struct AblationRow {
  std::string label;
  std::set<WorkerName> removed;  // taken away from all ten workers
};

struct AblationSpec {
  std::vector<AblationRow> rows;

  /// Baseline, minus each self-supervised worker, plus noise workers, minus
  /// each noise worker, minus {MFCC, SNR}.
  static AblationSpec table();

  /// {"rows": [{"label": ..., "remove": [names]}]}; unknown keys and worker
  /// names throw ConfigError.
  static AblationSpec from_json(const std::string& text);
  std::string to_json() const;
};

struct AblationInputs {
  std::filesystem::path pretrain_manifest;
  std::filesystem::path mos_train;
  std::filesystem::path mos_test;
  std::filesystem::path work_dir;  // one sub-directory per row
};

struct AblationOutcome {
  std::string label;
  std::optional<EvalReport> report;  // empty when the row failed
  std::string error;
};

/// Pre-trains, fits a MOS head and evaluates once per row with the base
/// config's seed. A failing row is recorded and the remaining rows run.
std::vector<AblationOutcome> run_ablation(const AblationSpec& spec, const RunConfig& base,
                                          const AblationInputs& in, std::ostream* log = nullptr);

/// Header label,mse,lcc,srcc,n; undefined correlations and failed rows leave
/// the metric cells empty.
std::string ablation_csv(const std::vector<AblationOutcome>& rows);

}  // namespace napt

#endif  // NAPT_EVALUATION_H_
