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

#include "napt/checkpoint.h"

#include <cstring>
#include <fstream>
#include <iterator>
#include <unistd.h>

namespace napt {
namespace {

constexpr char kMagic[8] = {'N', 'A', 'P', 'T', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    out_.append(static_cast<const char*>(p), n);
  }
  void u8(uint8_t v) { out_.push_back(char(v)); }
  void u16(uint16_t v) { le(v, 2); }
  void u32(uint32_t v) { le(v, 4); }
  void u64(uint64_t v) { le(v, 8); }
  void f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  void text(const std::string& s) {
    u32(uint32_t(s.size()));
    bytes(s.data(), s.size());
  }
  std::string& str() { return out_; }

 private:
  void le(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(char((v >> (8 * i)) & 0xff));
  }
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& data, std::string source) : d_(data), src_(std::move(source)) {}

  const char* take(std::size_t n) {
    if (n > d_.size() - pos_) throw Error("truncated checkpoint " + src_);
    const char* p = d_.data() + pos_;
    pos_ += n;
    return p;
  }
  uint8_t u8() { return uint8_t(*take(1)); }
  uint16_t u16() { return uint16_t(le(2)); }
  uint32_t u32() { return uint32_t(le(4)); }
  uint64_t u64() { return le(8); }
  float f32() {
    const uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string text() {
    const uint32_t n = u32();
    return std::string(take(n), n);
  }
  bool done() const { return pos_ == d_.size(); }

 private:
  uint64_t le(int n) {
    const auto* p = reinterpret_cast<const unsigned char*>(take(std::size_t(n)));
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= uint64_t(p[i]) << (8 * i);
    return v;
  }
  const std::string& d_;
  std::string src_;
  std::size_t pos_ = 0;
};

}  // namespace

const TensorEntry* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + tmp.string());
    f.write(bytes.data(), std::streamsize(bytes.size()));
    f.flush();
    if (!f) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kMagic, 8);
  w.u32(Checkpoint::kVersion);
  w.text(ckpt.kind);
  w.text(ckpt.config_json);
  w.text(ckpt.digest);
  w.text(ckpt.parent_digest);
  w.u64(ckpt.step);
  w.u32(uint32_t(ckpt.tensors.size()));
  for (const TensorEntry& t : ckpt.tensors) {
    w.text(t.name);
    w.u8(uint8_t((t.trainable ? 1 : 0) | (t.decay ? 2 : 0) | (t.discardable ? 4 : 0)));
    w.u8(0);
    w.u16(0);
    w.u32(uint32_t(t.value.rows()));
    w.u32(uint32_t(t.value.cols()));
    for (Index r = 0; r < t.value.rows(); ++r)
      for (Index c = 0; c < t.value.cols(); ++c) w.f32(t.value(r, c));
  }
  write_file_atomic(path, w.str());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open checkpoint " + path.string());
  const std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r(data, path.string());
  if (std::memcmp(r.take(8), kMagic, 8) != 0) throw Error("not a checkpoint: " + path.string());
  const uint32_t version = r.u32();
  if (version != Checkpoint::kVersion)
    throw Error("unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  c.kind = r.text();
  c.config_json = r.text();
  c.digest = r.text();
  c.parent_digest = r.text();
  c.step = r.u64();
  const uint32_t n = r.u32();
  for (uint32_t i = 0; i < n; ++i) {
    TensorEntry t;
    t.name = r.text();
    const uint8_t flags = r.u8();
    if (r.u8() != 0) throw Error("unsupported tensor dtype in " + path.string());
    r.u16();
    t.trainable = flags & 1;
    t.decay = flags & 2;
    t.discardable = flags & 4;
    const uint32_t rows = r.u32(), cols = r.u32();
    t.value.resize(rows, cols);
    for (uint32_t y = 0; y < rows; ++y)
      for (uint32_t x = 0; x < cols; ++x) t.value(y, x) = r.f32();
    c.tensors.push_back(std::move(t));
  }
  if (!r.done()) throw Error("trailing bytes in checkpoint " + path.string());
  return c;
}

}  // namespace napt
