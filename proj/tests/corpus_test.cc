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

#include "napt/corpus.h"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <set>

namespace napt {
namespace {

namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

AudioClip tone(double hz, std::size_t n, double amp = 0.5) {
  AudioClip c;
  for (std::size_t i = 0; i < n; ++i)
    c.samples.push_back(amp * std::sin(2 * kPi * hz * double(i) / kSampleRate));
  return c;
}

AudioClip noise(std::size_t n, uint64_t seed, double amp = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, amp);
  AudioClip c;
  for (std::size_t i = 0; i < n; ++i) c.samples.push_back(g(rng));
  return c;
}

double measured_snr(const Mixture& m) {
  AudioClip clean_part = m.noisy;
  for (std::size_t i = 0; i < clean_part.size(); ++i)
    clean_part.samples[i] -= m.noise_component.samples[i];
  return 20.0 * std::log10(rms(clean_part) / rms(m.noise_component));
}

TEST(NoiseGain, Examples) {
  AudioClip a, b;
  a.samples.assign(100, 0.3);
  b.samples.assign(100, -0.3);
  EXPECT_DOUBLE_EQ(noise_gain_for_snr(a, b, 0.0), 1.0);
  EXPECT_NEAR(noise_gain_for_snr(a, b, 20.0), 0.1, 1e-15);
  AudioClip c, d;
  c.samples.assign(100, 0.2);
  d.samples.assign(100, 0.1);
  const double g = noise_gain_for_snr(c, d, 5.0);
  EXPECT_NEAR(g, 2.0 * std::pow(10.0, -0.25), 1e-12);
  EXPECT_NEAR(g, 1.1247, 1e-4);
  // Re-measure after scaling.
  EXPECT_NEAR(20 * std::log10(0.2 / (g * 0.1)), 5.0, 1e-12);
  AudioClip z;
  z.samples.assign(100, 0.0);
  EXPECT_THROW(noise_gain_for_snr(z, d, 0.0), Error);
  EXPECT_THROW(noise_gain_for_snr(c, z, 0.0), Error);
}

TEST(Mix, RequestedSnrIsRecovered) {
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 100; ++i) {
    const AudioClip clean = tone(100.0 + 10.0 * i, 8000, 0.05 + 0.01 * (i % 7));
    const AudioClip n = noise(3000 + 97 * i, rng(), 0.01 + 0.3 * (i % 5));
    const SnrCondition snr = kNoisySnrs[i % 5];
    const Mixture m = mix(clean, n, snr, rng());
    EXPECT_NEAR(measured_snr(m), snr_db(snr), 0.01);
    EXPECT_LE(peak(m.noisy), kPeakLimit + 1e-12);
  }
}

TEST(Mix, CleanPassThrough) {
  const AudioClip clean = tone(300.0, 4000);
  const Mixture m = mix(clean, noise(100, 1), SnrCondition::kClean, 5);
  EXPECT_EQ(m.noisy.samples, clean.samples);
  EXPECT_EQ(m.scale, 1.0);
  EXPECT_EQ(peak(m.noise_component), 0.0);
}

TEST(Mix, SeedDeterminism) {
  const AudioClip clean = tone(300.0, 4000);
  const AudioClip n = noise(20000, 3);
  const Mixture a = mix(clean, n, SnrCondition::k0dB, 77);
  const Mixture b = mix(clean, n, SnrCondition::k0dB, 77);
  const Mixture c = mix(clean, n, SnrCondition::k0dB, 78);
  EXPECT_EQ(a.noisy.samples, b.noisy.samples);
  EXPECT_NE(a.noisy.samples, c.noisy.samples);
}

TEST(Mix, PeakNormalisationPreservesSnr) {
  const AudioClip clean = tone(200.0, 4000, 0.95);
  const Mixture m = mix(clean, noise(4000, 9, 0.5), SnrCondition::kMinus5dB, 1);
  EXPECT_LT(m.scale, 1.0);
  EXPECT_NEAR(peak(m.noisy), kPeakLimit, 1e-12);
  EXPECT_NEAR(measured_snr(m), -5.0, 0.01);
}

// Whole-clip direct DFT, band sums by bin frequency, argmax.
int oracle_energy_class(const AudioClip& x) {
  const std::size_t n = x.size();
  std::array<double, 3> band{};
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += x.samples[i] * std::polar(1.0, -2 * kPi * double((k * i) % n) / double(n));
    const double f = double(k) * kSampleRate / double(n);
    band[f < kSampleRate / 6.0 ? 0 : (f < kSampleRate / 3.0 ? 1 : 2)] += std::norm(acc);
  }
  return int(std::max_element(band.begin(), band.end()) - band.begin());
}

TEST(SpectralEnergyClass, Tones) {
  EXPECT_EQ(spectral_energy_class(tone(500.0, 4000)), 0);
  EXPECT_EQ(spectral_energy_class(tone(4000.0, 4000)), 1);
  EXPECT_EQ(spectral_energy_class(tone(7000.0, 4000)), 2);
  EXPECT_EQ(oracle_energy_class(tone(500.0, 1600)), 0);
  EXPECT_EQ(oracle_energy_class(tone(4000.0, 1600)), 1);
  EXPECT_EQ(oracle_energy_class(tone(7000.0, 1600)), 2);
  AudioClip z;
  z.samples.assign(1000, 0.0);
  EXPECT_THROW(spectral_energy_class(z), Error);
}

TEST(SpectralEnergyClass, LowFrequencyDominatedStreetNoise) {
  // Integrated (brown) noise: energy falls off as 1/f^2, as in traffic noise.
  AudioClip white = noise(8000, 21);
  AudioClip brown;
  double acc = 0.0;
  for (double v : white.samples) {
    acc = 0.98 * acc + v;
    brown.samples.push_back(acc);
  }
  EXPECT_EQ(spectral_energy_class(brown), 0);
  EXPECT_EQ(oracle_energy_class(brown), 0);
}

TEST(CategoryClass, Table) {
  EXPECT_EQ(category_class("Bark"), 2);
  EXPECT_EQ(category_class("Acoustic_guitar"), 4);
  EXPECT_THROW(category_class("xyz"), UnmappedCategoryError);
  for (const auto& [tag, cls] : category_table()) {
    EXPECT_GE(cls, 0);
    EXPECT_LT(cls, 7);
  }
  for (int c = 0; c < 7; ++c) EXPECT_EQ(category_class(kToyNoiseTags[c]), c);
}

TEST(SnrClass, Mapping) {
  EXPECT_EQ(snr_class(SnrCondition::kMinus5dB), 0);
  EXPECT_EQ(snr_class(SnrCondition::k0dB), 1);
  EXPECT_EQ(snr_class(SnrCondition::kPlus5dB), 2);
  EXPECT_EQ(snr_class(SnrCondition::kPlus10dB), 3);
  EXPECT_EQ(snr_class(SnrCondition::kPlus15dB), 4);
  EXPECT_EQ(snr_class(SnrCondition::kClean), 5);
  for (int c = 0; c < 6; ++c)
    EXPECT_EQ(snr_from_string(to_string(snr_from_class(c))), snr_from_class(c));
}

TEST(NoiseLabels, CleanIsAllOrNothing) {
  EXPECT_TRUE(NoiseLabels{}.consistent());
  EXPECT_TRUE((NoiseLabels{0, 2, 1}.consistent()));
  EXPECT_FALSE((NoiseLabels{3, 2, 1}.consistent()));
  EXPECT_FALSE((NoiseLabels{0, 7, 5}.consistent()));
  EXPECT_FALSE((NoiseLabels{4, 2, 1}.consistent()));
}

class ManifestTest : public ::testing::Test {
 protected:
  fs::path dir_ = fs::temp_directory_path() / "napt_manifest_test";
  void SetUp() override {
    fs::remove_all(dir_);
    fs::create_directories(dir_ / "clean");
    fs::create_directories(dir_ / "noise" / "Bark");
    fs::create_directories(dir_ / "noise" / "Rain");
    save_wav(dir_ / "clean" / "11-a.wav", tone(150, 4000));
    save_wav(dir_ / "clean" / "12-b.wav", tone(220, 4000));
    save_wav(dir_ / "noise" / "Bark" / "x.wav", tone(6000, 6000, 0.2));
    save_wav(dir_ / "noise" / "Rain" / "y.wav", noise(3000, 4, 0.1));
  }
  void TearDown() override { fs::remove_all(dir_); }
};

TEST_F(ManifestTest, BalancedAcrossSnrs) {
  ManifestOptions o;
  o.n_records = 50;
  o.clean_fraction = 0.0;
  o.seed = 3;
  auto recs = build_manifest(dir_ / "clean", dir_ / "noise", o, dir_);
  std::map<SnrCondition, int> counts;
  for (const auto& r : recs) ++counts[r.snr];
  for (auto s : kNoisySnrs) EXPECT_EQ(counts[s], 10);

  o.clean_fraction = 0.2;
  recs = build_manifest(dir_ / "clean", dir_ / "noise", o, dir_);
  counts.clear();
  for (const auto& r : recs) {
    ++counts[r.snr];
    EXPECT_TRUE(r.labels.consistent());
    EXPECT_EQ(r.labels.snr_class, snr_class(r.snr));
    EXPECT_EQ(r.noise_path.has_value(), r.snr != SnrCondition::kClean);
    if (r.noise_path) {
      EXPECT_EQ(r.labels.category_class, category_class(noise_tag_of(*r.noise_path)));
      EXPECT_EQ(r.labels.energy_class, r.noise_path->find("Bark") != std::string::npos ? 2 : r.labels.energy_class);
    }
  }
  EXPECT_EQ(counts[SnrCondition::kClean], 10);
  for (auto s : kNoisySnrs) EXPECT_EQ(counts[s], 8);
}

TEST_F(ManifestTest, DeterministicAndRoundTrips) {
  ManifestOptions o;
  o.n_records = 20;
  o.seed = 9;
  const auto a = build_manifest(dir_ / "clean", dir_ / "noise", o, dir_);
  const auto b = build_manifest(dir_ / "clean", dir_ / "noise", o, dir_);
  EXPECT_EQ(a, b);
  write_manifest(dir_ / "m.jsonl", a);
  EXPECT_EQ(read_manifest(dir_ / "m.jsonl"), a);
  o.seed = 10;
  EXPECT_NE(build_manifest(dir_ / "clean", dir_ / "noise", o, dir_), a);
}

TEST_F(ManifestTest, Errors) {
  ManifestOptions o;
  o.clean_fraction = 1.0;
  EXPECT_THROW(build_manifest(dir_ / "clean", dir_ / "noise", o), ConfigError);
  fs::create_directories(dir_ / "empty");
  EXPECT_THROW(build_manifest(dir_ / "empty", dir_ / "noise", {}), Error);
  fs::create_directories(dir_ / "noise" / "xyz");
  save_wav(dir_ / "noise" / "xyz" / "z.wav", tone(100, 1000));
  EXPECT_THROW(build_manifest(dir_ / "clean", dir_ / "noise", {}), UnmappedCategoryError);
}

TEST(ManifestJson, RejectsUnknownKeysAndInconsistentLabels) {
  MixtureRecord r;
  r.id = "a";
  r.clean_path = "c.wav";
  const std::string line = to_json_line(r);
  EXPECT_EQ(record_from_json_line(line), r);
  std::string extra = line;
  extra.insert(1, "\"bogus\":1,");
  EXPECT_THROW(record_from_json_line(extra), Error);
  std::string bad = line;
  bad.replace(bad.find("\"snr_class\":5"), 13, "\"snr_class\":2");
  EXPECT_THROW(record_from_json_line(bad), Error);
}

TEST(ToyCorpus, CoversAllClassesAndReproducesSnr) {
  const fs::path dir = fs::temp_directory_path() / "napt_toy_test";
  fs::remove_all(dir);
  ToyCorpusOptions o;
  o.n_speakers = 3;
  o.utterances_per_speaker = 2;
  o.noise_variants = 1;
  o.n_records = 60;
  o.mos_train = 4;
  o.mos_test = 2;
  const fs::path manifest = synth_toy_corpus(dir, 5, o);
  const auto recs = read_manifest(manifest);
  ASSERT_EQ(recs.size(), 60u);
  std::set<int> energy, category, snr;
  for (const auto& r : recs) {
    energy.insert(r.labels.energy_class);
    category.insert(r.labels.category_class);
    snr.insert(r.labels.snr_class);
    const Mixture m = realize(r, dir);
    if (r.noise_path) {
      EXPECT_NEAR(measured_snr(m), snr_db(r.snr), 0.01);
      EXPECT_EQ(spectral_energy_class(m.noise_component), r.labels.energy_class);
    }
  }
  EXPECT_EQ(energy.size(), 4u);
  EXPECT_EQ(category.size(), 8u);
  EXPECT_EQ(snr.size(), 6u);
  EXPECT_TRUE(fs::exists(dir / "mos_train.jsonl"));
  // Same seed, same manifest.
  const fs::path dir2 = fs::temp_directory_path() / "napt_toy_test2";
  fs::remove_all(dir2);
  EXPECT_EQ(read_manifest(synth_toy_corpus(dir2, 5, o)), recs);
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

}  // namespace
}  // namespace napt
