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

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "json.hpp"

namespace napt {

namespace fs = std::filesystem;
using json = nlohmann::json;

int snr_class(SnrCondition snr) { return static_cast<int>(snr); }

SnrCondition snr_from_class(int cls) {
  if (cls < 0 || cls >= kNumSnrClasses)
    throw Error("snr class out of range: " + std::to_string(cls));
  return static_cast<SnrCondition>(cls);
}

double snr_db(SnrCondition snr) {
  switch (snr) {
    case SnrCondition::kMinus5dB: return -5.0;
    case SnrCondition::k0dB: return 0.0;
    case SnrCondition::kPlus5dB: return 5.0;
    case SnrCondition::kPlus10dB: return 10.0;
    case SnrCondition::kPlus15dB: return 15.0;
    case SnrCondition::kClean: break;
  }
  throw Error("clean condition has no SNR value");
}

std::string to_string(SnrCondition snr) {
  switch (snr) {
    case SnrCondition::kMinus5dB: return "-5dB";
    case SnrCondition::k0dB: return "0dB";
    case SnrCondition::kPlus5dB: return "5dB";
    case SnrCondition::kPlus10dB: return "10dB";
    case SnrCondition::kPlus15dB: return "15dB";
    case SnrCondition::kClean: return "clean";
  }
  return "?";
}

SnrCondition snr_from_string(const std::string& s) {
  for (int c = 0; c < kNumSnrClasses; ++c)
    if (to_string(snr_from_class(c)) == s) return snr_from_class(c);
  throw Error("unknown SNR condition '" + s + "'");
}

bool NoiseLabels::consistent() const {
  if (energy_class < 0 || energy_class >= kNumEnergyClasses) return false;
  if (category_class < 0 || category_class >= kNumCategoryClasses) return false;
  if (snr_class < 0 || snr_class >= kNumSnrClasses) return false;
  const bool e = energy_class == kCleanEnergyClass;
  const bool c = category_class == kCleanCategoryClass;
  const bool s = snr_class == kCleanSnrClass;
  return e == c && c == s;
}

double noise_gain_for_snr(const AudioClip& clean, const AudioClip& noise,
                          double snr_db) {
  const double rc = rms(clean), rn = rms(noise);
  if (rc <= 0.0) throw Error("clean signal is silent");
  if (rn <= 0.0) throw Error("noise signal is silent");
  return (rc / rn) * std::pow(10.0, -snr_db / 20.0);
}

namespace {

AudioClip fit_noise(const AudioClip& noise, std::size_t length,
                    uint64_t seed) {
  if (noise.empty()) throw Error("noise signal is empty");
  std::mt19937_64 rng(seed);
  AudioClip out;
  out.samples.resize(length);
  const std::size_t n = noise.size();
  std::size_t offset = 0;
  if (n > length) {
    offset = std::uniform_int_distribution<std::size_t>(0, n - length)(rng);
    std::copy_n(noise.samples.begin() + std::ptrdiff_t(offset), length,
                out.samples.begin());
  } else {
    offset = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    for (std::size_t i = 0; i < length; ++i)
      out.samples[i] = noise.samples[(offset + i) % n];
  }
  return out;
}

}  // namespace

Mixture mix_db(const AudioClip& clean, const AudioClip& noise, double snr_db,
               uint64_t seed) {
  Mixture m;
  m.noise_component = fit_noise(noise, clean.size(), seed);
  const double gain = noise_gain_for_snr(clean, m.noise_component, snr_db);
  m.noisy.samples.resize(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    m.noise_component.samples[i] *= gain;
    m.noisy.samples[i] = clean.samples[i] + m.noise_component.samples[i];
  }
  const double p = peak(m.noisy);
  if (p > kPeakLimit) {
    m.scale = kPeakLimit / p;
    for (auto& s : m.noisy.samples) s *= m.scale;
    for (auto& s : m.noise_component.samples) s *= m.scale;
  }
  return m;
}

Mixture mix(const AudioClip& clean, const AudioClip& noise, SnrCondition snr,
            uint64_t seed) {
  if (snr != SnrCondition::kClean) return mix_db(clean, noise, snr_db(snr), seed);
  Mixture m;
  m.noisy = clean;
  m.noise_component.samples.assign(clean.size(), 0.0);
  const double p = peak(clean);
  if (p > kPeakLimit) {
    m.scale = kPeakLimit / p;
    for (auto& s : m.noisy.samples) s *= m.scale;
  }
  return m;
}

int spectral_energy_class(const AudioClip& noise_component,
                          const FrameConfig& cfg) {
  const Eigen::MatrixXd power = stft_power(noise_component, cfg);
  const Eigen::RowVectorXd per_bin = power.colwise().sum();
  std::array<double, 3> band{0.0, 0.0, 0.0};
  const double edge1 = kSampleRate / 6.0, edge2 = kSampleRate / 3.0;
  for (Index k = 0; k < per_bin.size(); ++k) {
    const double f = double(k) * kSampleRate / cfg.n_fft;
    band[f < edge1 ? 0 : (f < edge2 ? 1 : 2)] += per_bin(k);
  }
  if (band[0] + band[1] + band[2] <= 0.0)
    throw Error("spectral energy class of a silent signal");
  int best = 0;
  for (int b = 1; b < 3; ++b)
    if (band[b] > band[best]) best = b;
  return best;
}

std::string noise_tag_of(const std::string& noise_path) {
  const fs::path p(noise_path);
  const std::string tag = p.parent_path().filename().string();
  if (tag.empty()) throw UnmappedCategoryError(noise_path);
  return tag;
}

std::string speaker_of(const std::string& clean_path) {
  const std::string stem = fs::path(clean_path).stem().string();
  return stem.substr(0, stem.find('-'));
}

namespace {

std::vector<fs::path> list_wavs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".wav")
      out.push_back(e.path());
  std::sort(out.begin(), out.end());
  if (out.empty()) throw Error("no .wav files under " + dir.string());
  return out;
}

fs::path resolve(const std::string& p, const fs::path& base) {
  fs::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

std::string relative_to(const fs::path& p, const fs::path& base) {
  if (base.empty()) return p.generic_string();
  return fs::relative(p, base).generic_string();
}

}  // namespace

Mixture realize(const MixtureRecord& record, const fs::path& base_dir) {
  const AudioClip clean = load_wav(resolve(record.clean_path, base_dir));
  if (!record.noise_path) return mix(clean, clean, SnrCondition::kClean, record.seed);
  const AudioClip noise = load_wav(resolve(*record.noise_path, base_dir));
  return mix(clean, noise, record.snr, record.seed);
}

std::vector<MixtureRecord> build_manifest(const fs::path& clean_dir,
                                          const fs::path& noise_dir,
                                          const ManifestOptions& opts,
                                          const fs::path& base_dir) {
  if (opts.clean_fraction < 0.0 || opts.clean_fraction >= 1.0)
    throw ConfigError("clean_fraction", "must be in [0, 1)");
  if (opts.eval_fraction < 0.0 || opts.eval_fraction >= 1.0)
    throw ConfigError("eval_fraction", "must be in [0, 1)");
  const auto clean_files = list_wavs(clean_dir);
  const auto noise_files = list_wavs(noise_dir);
  std::vector<int> noise_category(noise_files.size());
  for (std::size_t i = 0; i < noise_files.size(); ++i)
    noise_category[i] = category_class(noise_tag_of(noise_files[i].string()));

  const std::size_t n = opts.n_records;
  const auto n_clean = std::size_t(std::llround(opts.clean_fraction * double(n)));
  std::vector<SnrCondition> conditions;
  conditions.reserve(n);
  for (std::size_t i = 0; i < n_clean; ++i) conditions.push_back(SnrCondition::kClean);
  for (std::size_t i = 0; i + n_clean < n; ++i) conditions.push_back(kNoisySnrs[i % 5]);

  std::mt19937_64 rng(derive_seed(opts.seed, "manifest"));
  std::shuffle(conditions.begin(), conditions.end(), rng);
  const auto n_eval = std::size_t(std::llround(opts.eval_fraction * double(n)));

  std::vector<MixtureRecord> records;
  records.reserve(n);
  std::uniform_int_distribution<std::size_t> pick_clean(0, clean_files.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_noise(0, noise_files.size() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    MixtureRecord r;
    char id[32];
    std::snprintf(id, sizeof(id), "rec%06zu", i);
    r.id = id;
    r.seed = derive_seed(opts.seed, i);
    r.snr = conditions[i];
    r.split = i + n_eval >= n ? Split::kEval : Split::kTrain;
    const auto ci = pick_clean(rng);
    const auto ni = pick_noise(rng);
    r.clean_path = relative_to(clean_files[ci], base_dir);
    r.labels.snr_class = snr_class(r.snr);
    if (r.snr != SnrCondition::kClean) {
      r.noise_path = relative_to(noise_files[ni], base_dir);
      r.labels.category_class = noise_category[ni];
      const Mixture m = realize(r, base_dir);
      r.labels.energy_class = spectral_energy_class(m.noise_component);
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::string to_json_line(const MixtureRecord& r) {
  json j;
  j["id"] = r.id;
  j["clean_path"] = r.clean_path;
  j["noise_path"] = r.noise_path ? json(*r.noise_path) : json(nullptr);
  j["snr"] = to_string(r.snr);
  j["labels"] = {{"energy_class", r.labels.energy_class},
                 {"category_class", r.labels.category_class},
                 {"snr_class", r.labels.snr_class}};
  j["seed"] = r.seed;
  j["split"] = r.split == Split::kTrain ? "train" : "eval";
  return j.dump();
}

MixtureRecord record_from_json_line(const std::string& line) {
  const json j = json::parse(line);
  static const std::set<std::string> kKeys = {
      "id", "clean_path", "noise_path", "snr", "labels", "seed", "split"};
  for (const auto& [k, v] : j.items())
    if (!kKeys.count(k)) throw Error("unknown manifest key '" + k + "'");
  MixtureRecord r;
  r.id = j.at("id").get<std::string>();
  r.clean_path = j.at("clean_path").get<std::string>();
  if (j.contains("noise_path") && !j.at("noise_path").is_null())
    r.noise_path = j.at("noise_path").get<std::string>();
  r.snr = snr_from_string(j.at("snr").get<std::string>());
  const json& l = j.at("labels");
  r.labels.energy_class = l.at("energy_class").get<int>();
  r.labels.category_class = l.at("category_class").get<int>();
  r.labels.snr_class = l.at("snr_class").get<int>();
  r.seed = j.at("seed").get<uint64_t>();
  const std::string split = j.at("split").get<std::string>();
  if (split != "train" && split != "eval") throw Error("bad split '" + split + "'");
  r.split = split == "train" ? Split::kTrain : Split::kEval;
  if (!r.labels.consistent() || r.labels.snr_class != snr_class(r.snr) ||
      r.noise_path.has_value() == (r.snr == SnrCondition::kClean))
    throw Error("inconsistent labels in record " + r.id);
  return r;
}

void write_manifest(const fs::path& path,
                    const std::vector<MixtureRecord>& records) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  for (const auto& r : records) f << to_json_line(r) << '\n';
  if (!f) throw Error("write failed for " + path.string());
}

std::vector<MixtureRecord> read_manifest(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open manifest " + path.string());
  std::vector<MixtureRecord> out;
  std::string line;
  while (std::getline(f, line))
    if (!line.empty()) out.push_back(record_from_json_line(line));
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic corpus.

namespace {

using Signal = std::vector<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Band {
  double lo, hi;
};
// Toy noise bands, each well inside one of the three label bands.
constexpr std::array<Band, 3> kToyBands = {
    Band{150.0, 2300.0}, Band{3000.0, 5000.0}, Band{5700.0, 7800.0}};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void normalize_rms(Signal& x, double target) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  const double r = std::sqrt(acc / double(x.size()));
  if (r > 0.0)
    for (double& v : x) v *= target / r;
}

Signal band_limit(const Signal& x, Band band) {
  const std::size_t n = x.size();
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> in(x.begin(), x.end()), spec, out;
  fft.fwd(spec, in);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t kk = std::min(k, n - k);
    const double f = double(kk) * kSampleRate / double(n);
    if (f < band.lo || f > band.hi) spec[k] = 0.0;
  }
  fft.inv(out, spec);
  Signal y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = out[i].real();
  return y;
}

Signal band_noise(std::size_t n, Band band, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Signal x(n);
  for (double& v : x) v = g(rng);
  Signal y = band_limit(x, band);
  normalize_rms(y, 1.0);
  return y;
}

// Harmonic complex with partials restricted to the band.
double band_harmonics(double phase, double f0, Band band) {
  double v = 0.0;
  for (int h = 1; h * f0 < band.hi; ++h)
    if (h * f0 >= band.lo) v += std::sin(h * phase);
  return v;
}

Signal synth_noise(int category, Band band, std::size_t n,
                   std::mt19937_64& rng) {
  Signal x(n, 0.0);
  const double fs = kSampleRate;
  const double width = band.hi - band.lo;
  switch (category) {
    case 0: {  // laughter: syllabic AM harmonic complex
      const double f0 = uniform(rng, 200.0, 320.0);
      const double rate = uniform(rng, 4.0, 6.0);
      double phase = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = double(i) / fs;
        phase += kTwoPi * f0 * (1.0 + 0.03 * std::sin(kTwoPi * 3.0 * t)) / fs;
        const double am = std::pow(std::max(0.0, std::sin(kTwoPi * rate * t)), 2);
        x[i] = am * band_harmonics(phase, f0, band);
      }
      break;
    }
    case 1: {  // squeak: short rising chirps
      std::size_t pos = std::size_t(uniform(rng, 0.0, 0.05) * fs);
      while (pos < n) {
        const std::size_t len = std::size_t(0.06 * fs);
        const double f_start = band.lo + 0.2 * width, f_end = band.hi - 0.2 * width;
        double phase = 0.0;
        for (std::size_t i = 0; i < len && pos + i < n; ++i) {
          const double u = double(i) / double(len);
          phase += kTwoPi * (f_start + (f_end - f_start) * u) / fs;
          x[pos + i] += std::sin(kTwoPi * 0.5 * u) * std::sin(phase);
        }
        pos += len + std::size_t(uniform(rng, 0.04, 0.12) * fs);
      }
      break;
    }
    case 2: {  // bark: repeated harmonic bursts with noise, sharp attack
      const Signal breath = band_noise(n, band, rng);
      std::size_t pos = std::size_t(uniform(rng, 0.0, 0.1) * fs);
      while (pos < n) {
        const double f0 = std::max(width / 6.0, uniform(rng, 350.0, 550.0));
        const std::size_t len = std::size_t(0.09 * fs);
        double phase = 0.0;
        for (std::size_t i = 0; i < len && pos + i < n; ++i) {
          const double u = double(i) / double(len);
          phase += kTwoPi * f0 * (1.0 - 0.3 * u) / fs;
          const double env = std::exp(-4.0 * u) * std::min(1.0, 20.0 * u);
          x[pos + i] += env * (band_harmonics(phase, f0, band) +
                               0.5 * breath[pos + i]);
        }
        pos += std::size_t(uniform(rng, 0.25, 0.35) * fs);
      }
      break;
    }
    case 3: {  // bus: steady tones, broadband rumble, engine AM
      const Signal rumble = band_noise(n, band, rng);
      std::array<double, 3> freqs{};
      for (double& f : freqs) f = uniform(rng, band.lo + 0.1 * width, band.hi - 0.1 * width);
      const double am_rate = uniform(rng, 20.0, 30.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = double(i) / fs;
        double v = 0.3 * rumble[i];
        for (double f : freqs) v += 0.6 * std::sin(kTwoPi * f * t);
        x[i] = v * (1.0 + 0.3 * std::sin(kTwoPi * am_rate * t));
      }
      break;
    }
    case 4: {  // guitar: plucked notes with exponential decay
      std::size_t pos = 0;
      while (pos < n) {
        const double f = uniform(rng, band.lo + 0.05 * width, band.lo + 0.6 * width);
        const std::size_t len = std::size_t(uniform(rng, 0.18, 0.25) * fs);
        for (std::size_t i = 0; i < len && pos + i < n; ++i) {
          const double t = double(i) / fs;
          double v = 0.0;
          for (int h = 1; h <= 3; ++h)
            if (h * f <= band.hi) v += std::sin(kTwoPi * h * f * t) / h;
          x[pos + i] += std::exp(-t / 0.06) * v;
        }
        pos += len;
      }
      break;
    }
    case 5: {  // rain: soft noise bed plus dense band-limited drops
      std::normal_distribution<double> g(0.0, 1.0);
      Signal drops(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        if (uniform(rng, 0.0, 1.0) < 120.0 / fs) drops[i] = g(rng) * 30.0;
      Signal shaped = band_limit(drops, band);
      normalize_rms(shaped, 1.0);
      const Signal bed = band_noise(n, band, rng);
      for (std::size_t i = 0; i < n; ++i) x[i] = shaped[i] + 0.25 * bed[i];
      break;
    }
    default: {  // background: stationary band noise
      x = band_noise(n, band, rng);
      break;
    }
  }
  normalize_rms(x, 0.1);
  return x;
}

struct Speaker {
  double f0;
  double formant_scale;
  double tilt;
};

Signal synth_speech(const Speaker& spk, std::size_t n, std::mt19937_64& rng) {
  Signal x(n, 0.0);
  const double fs = kSampleRate;
  std::size_t pos = std::size_t(uniform(rng, 0.02, 0.06) * fs);
  double phase = 0.0;
  while (pos < n) {
    const std::size_t len = std::size_t(uniform(rng, 0.09, 0.16) * fs);
    const double f_start = spk.f0 * uniform(rng, 0.9, 1.1);
    const double f_end = spk.f0 * uniform(rng, 0.85, 1.15);
    const double f1 = spk.formant_scale * uniform(rng, 400.0, 850.0);
    const double f2 = spk.formant_scale * uniform(rng, 1000.0, 2300.0);
    for (std::size_t i = 0; i < len && pos + i < n; ++i) {
      const double u = double(i) / double(len);
      const double f0 = f_start + (f_end - f_start) * u;
      phase += kTwoPi * f0 / fs;
      double v = 0.0;
      for (int h = 1; h * f0 < 3800.0; ++h) {
        const double f = h * f0;
        const double gain = std::pow(h, -spk.tilt) *
                            (1.0 + 3.0 * std::exp(-std::pow((f - f1) / 150.0, 2)) +
                             2.0 * std::exp(-std::pow((f - f2) / 200.0, 2)));
        v += gain * std::sin(h * phase);
      }
      x[pos + i] = std::sin(std::numbers::pi * u) * v;
    }
    pos += len + std::size_t(uniform(rng, 0.03, 0.09) * fs);
  }
  normalize_rms(x, 0.05 * uniform(rng, 0.95, 1.05));
  return x;
}

AudioClip to_clip(Signal s) {
  AudioClip c;
  c.samples = std::move(s);
  return c;
}

}  // namespace

fs::path synth_toy_corpus(const fs::path& out_dir, uint64_t seed,
                          const ToyCorpusOptions& opts) {
  fs::create_directories(out_dir / "clean");
  fs::create_directories(out_dir / "mos");
  std::mt19937_64 rng(derive_seed(seed, "toy-corpus"));

  const auto utt_len = std::size_t(opts.utterance_seconds * kSampleRate);
  const auto noise_len = std::size_t(opts.noise_seconds * kSampleRate);

  std::vector<Speaker> speakers;
  for (int s = 0; s < opts.n_speakers; ++s)
    speakers.push_back({uniform(rng, 95.0, 230.0), uniform(rng, 0.85, 1.2),
                        uniform(rng, 0.6, 1.1)});
  std::vector<AudioClip> clean_clips;
  for (int s = 0; s < opts.n_speakers; ++s) {
    for (int u = 0; u < opts.utterances_per_speaker; ++u) {
      char name[64];
      std::snprintf(name, sizeof(name), "spk%02d-%04d.wav", s, u);
      AudioClip clip = to_clip(synth_speech(speakers[s], utt_len, rng));
      save_wav(out_dir / "clean" / name, clip);
      clean_clips.push_back(std::move(clip));
    }
  }

  std::vector<AudioClip> noise_clips;
  for (int c = 0; c < 7; ++c) {
    const fs::path dir = out_dir / "noise" / kToyNoiseTags[c];
    fs::create_directories(dir);
    for (int b = 0; b < 3; ++b) {
      for (int v = 0; v < opts.noise_variants; ++v) {
        char name[64];
        std::snprintf(name, sizeof(name), "band%d-%02d.wav", b, v);
        AudioClip clip = to_clip(synth_noise(c, kToyBands[b], noise_len, rng));
        save_wav(dir / name, clip);
        noise_clips.push_back(std::move(clip));
      }
    }
  }

  ManifestOptions mopts;
  mopts.n_records = opts.n_records;
  mopts.clean_fraction = opts.clean_fraction;
  mopts.eval_fraction = opts.eval_fraction;
  mopts.seed = derive_seed(seed, "toy-manifest");
  const auto records =
      build_manifest(out_dir / "clean", out_dir / "noise", mopts, out_dir);
  const fs::path manifest = out_dir / "manifest.jsonl";
  write_manifest(manifest, records);

  // Pseudo-MOS set: a logistic function of the mixing SNR plus rating noise.
  auto write_mos = [&](const std::string& name, std::size_t count,
                       const std::string& prefix) {
    std::ofstream f(out_dir / name);
    std::normal_distribution<double> jitter(0.0, 0.1);
    for (std::size_t i = 0; i < count; ++i) {
      const auto& clean = clean_clips[std::size_t(uniform(rng, 0.0, 1.0) * clean_clips.size()) %
                                      clean_clips.size()];
      const auto& noise = noise_clips[std::size_t(uniform(rng, 0.0, 1.0) * noise_clips.size()) %
                                      noise_clips.size()];
      const bool is_clean = uniform(rng, 0.0, 1.0) < 0.15;
      const double snr = uniform(rng, -5.0, 25.0);
      const uint64_t mseed = rng();
      const Mixture m = is_clean ? mix(clean, noise, SnrCondition::kClean, mseed)
                                 : mix_db(clean, noise, snr, mseed);
      const double base = is_clean ? 4.7 : 1.0 + 4.0 / (1.0 + std::exp(-(snr - 7.0) / 5.0));
      const double mos = std::clamp(base + jitter(rng), 1.0, 5.0);
      char id[64];
      std::snprintf(id, sizeof(id), "%s%04zu", prefix.c_str(), i);
      const std::string rel = std::string("mos/") + id + ".wav";
      save_wav(out_dir / rel, m.noisy);
      f << json({{"id", id}, {"path", rel}, {"mos", mos}}).dump() << '\n';
    }
  };
  write_mos("mos_train.jsonl", opts.mos_train, "mtr");
  write_mos("mos_test.jsonl", opts.mos_test, "mte");
  return manifest;
}

}  // namespace napt
