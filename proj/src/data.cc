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

#include "napt/data.h"

#include <fstream>
#include <set>

#include "json.hpp"

namespace napt {

namespace fs = std::filesystem;

Example prepare_example(const MixtureRecord& record, const fs::path& base_dir,
                        const FrameConfig& frames) {
  Example e;
  e.id = record.id;
  e.speaker = speaker_of(record.clean_path);
  e.audio = realize(record, base_dir).noisy;
  e.labels = record.labels;
  e.mel = mel_spectrogram(e.audio, frames).frames;
  e.lps = log_power_spectrum(e.audio, frames).frames;
  e.mfcc = mfcc_from_mel(FeatureMatrix{FeatureKind::kMel, e.mel, frames.hop_samples,
                                       frames.frame_len_samples},
                         frames)
               .frames;
  e.prosody = prosody(e.audio, frames).frames;
  return e;
}

std::vector<Example> prepare_examples(const std::vector<MixtureRecord>& records, Split split,
                                      const fs::path& base_dir, const FrameConfig& frames) {
  std::vector<Example> out;
  for (const auto& r : records)
    if (r.split == split) out.push_back(prepare_example(r, base_dir, frames));
  return out;
}

FeatureStats FeatureStats::fit(const std::vector<const Eigen::MatrixXd*>& mats) {
  if (mats.empty()) throw Error("feature statistics need at least one matrix");
  const Index F = mats.front()->cols();
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(F), sq = Eigen::RowVectorXd::Zero(F);
  double n = 0;
  for (const auto* m : mats) {
    if (m->cols() != F) throw Error("feature statistics: width mismatch");
    sum += m->colwise().sum();
    sq += m->array().square().matrix().colwise().sum();
    n += double(m->rows());
  }
  FeatureStats s;
  s.mean = sum / n;
  s.stddev = (sq / n - s.mean.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
  for (Index j = 0; j < F; ++j)
    if (s.stddev(j) < 1e-6) s.stddev(j) = 1.0;
  return s;
}

Eigen::MatrixXd FeatureStats::apply(const Eigen::MatrixXd& m) const {
  return (m.rowwise() - mean).array().rowwise() / stddev.array();
}

std::vector<MosRecord> read_mos_manifest(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read MOS manifest " + path.string());
  std::vector<MosRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    try {
      const auto j = nlohmann::json::parse(line);
      for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "id" && it.key() != "path" && it.key() != "mos")
          throw Error(where + ": unknown key " + it.key());
      MosRecord r{j.at("id").get<std::string>(), j.at("path").get<std::string>(),
                  j.at("mos").get<double>()};
      if (!(r.mos >= 1.0 && r.mos <= 5.0)) throw Error(where + ": mos outside [1, 5]");
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(where + ": " + e.what());
    }
  }
  return out;
}

AudioClip load_mos_audio(const MosRecord& r, const fs::path& manifest_path) {
  fs::path p = r.path;
  if (p.is_relative()) p = manifest_path.parent_path() / p;
  return load_wav(p);
}

}  // namespace napt
