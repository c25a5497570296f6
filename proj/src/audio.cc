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

#include "napt/audio.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

namespace napt {

namespace {

uint32_t read_u32(const unsigned char* p) {
  return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) |
         (uint32_t(p[3]) << 24);
}

uint16_t read_u16(const unsigned char* p) {
  return uint16_t(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, uint16_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char(v >> 8));
}

}  // namespace

AudioClip load_wav(const std::filesystem::path& path) {
  using K = WavError::Kind;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError(K::kUnreadable, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw WavError(K::kUnreadable, "not a RIFF/WAVE file: " + path.string());

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    uint32_t len = read_u32(chunk + 4);
    std::size_t body = pos + 8;
    if (body + len > bytes.size())
      throw WavError(K::kUnreadable, "truncated chunk in " + path.string());
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16) throw WavError(K::kUnreadable, "short fmt chunk");
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      if (format == 0xFFFE && len >= 26)  // WAVE_FORMAT_EXTENSIBLE
        format = read_u16(bytes.data() + body + 24);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw WavError(K::kUnreadable, "data before fmt chunk");
      if (format != 1 || bits != 16)
        throw WavError(K::kEncoding,
                       "expected 16-bit PCM, got format " +
                           std::to_string(format) + " with " +
                           std::to_string(bits) + " bits");
      if (channels != 1)
        throw WavError(K::kMultichannel,
                       "expected mono, got " + std::to_string(channels) +
                           " channels");
      if (rate != kSampleRate)
        throw WavError(K::kSampleRate,
                       "expected 16000 Hz, got " + std::to_string(rate));
      AudioClip clip;
      clip.samples.resize(len / 2);
      for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        auto v = static_cast<int16_t>(read_u16(bytes.data() + body + 2 * i));
        clip.samples[i] = double(v) / 32768.0;
      }
      if (clip.empty()) throw WavError(K::kUnreadable, "empty data chunk");
      return clip;
    }
    pos = body + len + (len & 1);
  }
  throw WavError(K::kUnreadable, "no data chunk in " + path.string());
}

void save_wav(const std::filesystem::path& path, const AudioClip& clip) {
  std::string out;
  const uint32_t data_len = uint32_t(clip.size() * 2);
  out += "RIFF";
  put_u32(out, 36 + data_len);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, uint32_t(clip.sample_rate_hz));
  put_u32(out, uint32_t(clip.sample_rate_hz * 2));
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_len);
  for (double s : clip.samples) {
    double v = std::round(s * 32768.0);
    v = std::clamp(v, -32768.0, 32767.0);
    put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(v)));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f.write(out.data(), std::streamsize(out.size()));
  if (!f) throw Error("write failed for " + path.string());
}

double rms(const AudioClip& clip) {
  if (clip.empty()) throw Error("rms of empty clip");
  double acc = 0.0;
  for (double s : clip.samples) acc += s * s;
  return std::sqrt(acc / double(clip.size()));
}

double peak(const AudioClip& clip) {
  double m = 0.0;
  for (double s : clip.samples) m = std::max(m, std::abs(s));
  return m;
}

}  // namespace napt
