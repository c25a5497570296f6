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

#ifndef NAPT_COMMON_H_
#define NAPT_COMMON_H_

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace napt {

// Scalar used for training and checkpoints. Gradient checks instantiate the
// same templates with double.
using Real = float;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

inline constexpr int kSampleRate = 16000;
inline constexpr double kLogFloor = 1e-10;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration problems: unknown key, bad type, range violation.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Numeric failure raised during training, tagged with the offending head.
class NumericError : public Error {
 public:
  NumericError(const std::string& head, const std::string& what)
      : Error(head + ": " + what), head_(head) {}
  const std::string& head() const { return head_; }

 private:
  std::string head_;
};

// 64-bit FNV-1a. Used for config digests and for deriving independent seeds.
inline uint64_t fnv1a64(const std::string& s,
                        uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Sixteen lowercase hex digits.
inline std::string hex16(uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[std::size_t(i)] = kDigits[v & 15];
  return out;
}

// SplitMix64 finalizer; mixes a master seed with a stream tag.
inline uint64_t derive_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t seed, const std::string& stream) {
  return derive_seed(seed, fnv1a64(stream));
}

}  // namespace napt

#endif  // NAPT_COMMON_H_
