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

#ifndef NAPT_CORPUS_H_
#define NAPT_CORPUS_H_

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "napt/audio.h"
#include "napt/features.h"

namespace napt {

enum class SnrCondition { kMinus5dB, k0dB, kPlus5dB, kPlus10dB, kPlus15dB, kClean };

inline constexpr std::array<SnrCondition, 5> kNoisySnrs = {
    SnrCondition::kMinus5dB, SnrCondition::k0dB, SnrCondition::kPlus5dB,
    SnrCondition::kPlus10dB, SnrCondition::kPlus15dB};

inline constexpr int kNumEnergyClasses = 4;
inline constexpr int kNumCategoryClasses = 8;
inline constexpr int kNumSnrClasses = 6;
inline constexpr int kCleanEnergyClass = 3;
inline constexpr int kCleanCategoryClass = 7;
inline constexpr int kCleanSnrClass = 5;

/// Index in {0..5}: -5 dB -> 0, 0 -> 1, 5 -> 2, 10 -> 3, 15 -> 4, clean -> 5.
int snr_class(SnrCondition snr);
SnrCondition snr_from_class(int cls);
double snr_db(SnrCondition snr);  // throws for kClean
std::string to_string(SnrCondition snr);
SnrCondition snr_from_string(const std::string& s);

struct NoiseLabels {
  int energy_class = kCleanEnergyClass;
  int category_class = kCleanCategoryClass;
  int snr_class = kCleanSnrClass;

  /// Range checks plus the all-or-nothing clean rule.
  bool consistent() const;
  bool operator==(const NoiseLabels&) const = default;
};

enum class Split { kTrain, kEval };

struct MixtureRecord {
  std::string id;
  std::string clean_path;
  std::optional<std::string> noise_path;
  SnrCondition snr = SnrCondition::kClean;
  NoiseLabels labels;
  uint64_t seed = 0;
  Split split = Split::kTrain;

  bool operator==(const MixtureRecord&) const = default;
};

/// g = (rms(clean) / rms(noise)) * 10^(-snr_db / 20).
double noise_gain_for_snr(const AudioClip& clean, const AudioClip& noise,
                          double snr_db);

struct Mixture {
  AudioClip noisy;
  AudioClip noise_component;
  double scale = 1.0;  // peak-normalisation factor applied to both
};

inline constexpr double kPeakLimit = 0.999;

/// Crops (seeded offset) or loops the noise to the clean length, scales it to
/// the requested SNR, adds it, and peak-normalises both outputs jointly.
Mixture mix(const AudioClip& clean, const AudioClip& noise, SnrCondition snr,
            uint64_t seed);

/// Same as mix() for an arbitrary SNR in dB.
Mixture mix_db(const AudioClip& clean, const AudioClip& noise, double snr_db,
               uint64_t seed);

/// Argmax of total STFT energy over the bands [0, fs/6), [fs/6, fs/3),
/// [fs/3, fs/2] by bin centre frequency; ties go to the lower band.
int spectral_energy_class(const AudioClip& noise_component,
                          const FrameConfig& cfg = {});

inline constexpr std::array<const char*, 7> kCategoryNames = {
    "human", "source-ambiguous", "animal", "sounds-of-things",
    "music", "natural", "background"};

class UnmappedCategoryError : public Error {
 public:
  explicit UnmappedCategoryError(const std::string& tag)
      : Error("no noise category for tag '" + tag + "'"), tag_(tag) {}
  const std::string& tag() const { return tag_; }

 private:
  std::string tag_;
};

/// Looks up a noise-source tag in the shipped table. Throws
/// UnmappedCategoryError for unknown tags.
int category_class(const std::string& tag);

/// All (tag, category) pairs of the shipped table, sorted by tag.
std::vector<std::pair<std::string, int>> category_table();

/// Noise files are stored as <noise_dir>/<tag>/<file>.wav.
std::string noise_tag_of(const std::string& noise_path);

/// Speaker id: the file stem up to the first '-' (LibriSpeech naming).
std::string speaker_of(const std::string& clean_path);

struct ManifestOptions {
  std::size_t n_records = 100;
  double clean_fraction = 0.2;
  double eval_fraction = 0.1;
  uint64_t seed = 0;
};

/// Builds a balanced manifest from <clean_dir>/**.wav and
/// <noise_dir>/<tag>/*.wav. Paths in records are relative to `base_dir`
/// when given.
std::vector<MixtureRecord> build_manifest(
    const std::filesystem::path& clean_dir,
    const std::filesystem::path& noise_dir, const ManifestOptions& opts,
    const std::filesystem::path& base_dir = {});

/// Loads clean and noise audio for a record (resolving relative paths
/// against `base_dir`) and reproduces its mixture.
Mixture realize(const MixtureRecord& record,
                const std::filesystem::path& base_dir);

std::string to_json_line(const MixtureRecord& record);
MixtureRecord record_from_json_line(const std::string& line);
void write_manifest(const std::filesystem::path& path,
                    const std::vector<MixtureRecord>& records);
std::vector<MixtureRecord> read_manifest(const std::filesystem::path& path);

struct ToyCorpusOptions {
  int n_speakers = 8;
  int utterances_per_speaker = 6;
  double utterance_seconds = 0.5;
  double noise_seconds = 1.0;
  int noise_variants = 2;  // per (category, band)
  std::size_t n_records = 240;
  double clean_fraction = 0.2;
  double eval_fraction = 0.2;
  std::size_t mos_train = 64;
  std::size_t mos_test = 32;
};

/// Tags used for the seven synthetic noise families, one per category.
inline constexpr std::array<const char*, 7> kToyNoiseTags = {
    "Laughter", "Squeak", "Bark", "Bus", "Acoustic_guitar", "Rain",
    "White_noise"};

/// Writes a synthetic corpus under out_dir: clean/, noise/<tag>/,
/// manifest.jsonl, plus mos/ clips with mos_train.jsonl and mos_test.jsonl.
/// Returns the manifest path.
std::filesystem::path synth_toy_corpus(const std::filesystem::path& out_dir,
                                       uint64_t seed,
                                       const ToyCorpusOptions& opts = {});

}  // namespace napt

#endif  // NAPT_CORPUS_H_
