// ksnet/common.hpp

// Copyright 2026  The ksnet Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef KSNET_COMMON_HPP_
#define KSNET_COMMON_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ksnet {

// Bad input data (shapes, sample values, file contents). CLI maps this to
// exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Inconsistent or unsupported configuration. CLI maps this to exit code 3.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

#define KSNET_CHECK_VALID(cond, msg)                       \
  do {                                                     \
    if (!(cond)) {                                         \
      std::ostringstream os_;                              \
      os_ << msg;                                          \
      throw ::ksnet::ValidationError(os_.str());           \
    }                                                      \
  } while (0)

#define KSNET_CHECK_CONFIG(cond, msg)                      \
  do {                                                     \
    if (!(cond)) {                                         \
      std::ostringstream os_;                              \
      os_ << msg;                                          \
      throw ::ksnet::ConfigError(os_.str());               \
    }                                                      \
  } while (0)

// FNV-1a, used for config and checkpoint identity hashes.
inline uint64_t Fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const uint8_t*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t Fnv1a64(std::string_view s) { return Fnv1a64(s.data(), s.size()); }

inline std::string HashHex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

// Deterministic RNG. std::mt19937_64 has a standard-mandated output sequence,
// and the mappings below are fixed arithmetic, so draws are bit-identical
// across platforms. The std::*_distribution adapters are deliberately not
// used here (their algorithms are implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t NextU64() { return eng_(); }

  // Uniform in [0, 1).
  double Uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [lo, hi] by rejection-free modulo over a wide draw.
  int64_t UniformInt(int64_t lo, int64_t hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(eng_() % span);
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Box-Muller. One value per call; the partner draw is discarded to keep
  // the stream position a simple function of the call count.
  double Normal() {
    double u1 = Uniform(), u2 = Uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 eng_;
};

// Derives an independent per-item RNG stream from a run seed and an item key,
// so corpus rendering is order independent.
inline Rng SubStream(uint64_t seed, std::string_view key) {
  uint64_t h = Fnv1a64(key);
  h = Fnv1a64(&seed, sizeof(seed), h);
  return Rng(h);
}

}  // namespace ksnet

#endif  // KSNET_COMMON_HPP_
