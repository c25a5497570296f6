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

#ifndef NAPT_AUDIO_H_
#define NAPT_AUDIO_H_

#include <filesystem>
#include <string>
#include <vector>

#include "napt/common.h"

namespace napt {

// Mono 16 kHz waveform with samples in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = kSampleRate;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

class WavError : public Error {
 public:
  enum class Kind { kUnreadable, kSampleRate, kMultichannel, kEncoding };
  WavError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Reads a RIFF/WAVE file that must be mono, 16-bit PCM at 16 kHz. Samples
/// are divided by 32768. Each violated precondition raises a WavError with a
/// distinct Kind.
AudioClip load_wav(const std::filesystem::path& path);

/// Writes 16-bit PCM mono. Samples are clipped to [-1, 32767/32768].
void save_wav(const std::filesystem::path& path, const AudioClip& clip);

/// Root mean square. Throws Error on an empty clip.
double rms(const AudioClip& clip);

double peak(const AudioClip& clip);

}  // namespace napt

#endif  // NAPT_AUDIO_H_
