// ksnet/wav.hpp

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

#ifndef KSNET_WAV_HPP_
#define KSNET_WAV_HPP_

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "ksnet/common.hpp"
#include "ksnet/dsp/waveform.hpp"

namespace ksnet {

enum class WavSampleFormat { kPcm16, kFloat32 };

namespace wav_detail {

inline uint32_t ReadU32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

inline uint16_t ReadU16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

inline void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

inline void PutU16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
}

}  // namespace wav_detail

// Reads a mono RIFF WAV file holding 16-bit PCM or 32-bit IEEE float samples.
// If require_rate_hz is nonzero, any other sample rate is rejected; there is
// deliberately no resampling path.
inline Waveform ReadWav(const std::string& path, int require_rate_hz = 0) {
  std::ifstream f(path, std::ios::binary);
  KSNET_CHECK_VALID(f.good(), "cannot open wav file: " << path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  KSNET_CHECK_VALID(bytes.size() >= 44, "wav file too short: " << path);
  KSNET_CHECK_VALID(std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
                        std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
                    "not a RIFF/WAVE file: " << path);

  using wav_detail::ReadU16;
  using wav_detail::ReadU32;

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* data_ptr = nullptr;
  uint32_t data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* chunk = bytes.data() + pos;
    uint32_t chunk_len = ReadU32(chunk + 4);
    const uint8_t* body = chunk + 8;
    if (pos + 8 + chunk_len > bytes.size()) chunk_len = static_cast<uint32_t>(bytes.size() - pos - 8);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      KSNET_CHECK_VALID(chunk_len >= 16, "malformed fmt chunk: " << path);
      format = ReadU16(body);
      channels = ReadU16(body + 2);
      rate = ReadU32(body + 4);
      bits = ReadU16(body + 14);
      if (format == 0xfffe && chunk_len >= 40) {
        // WAVE_FORMAT_EXTENSIBLE: the actual format is in the GUID prefix.
        format = ReadU16(body + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data_ptr = body;
      data_len = chunk_len;
    }
    pos += 8 + chunk_len + (chunk_len & 1);
  }

  KSNET_CHECK_VALID(data_ptr != nullptr && rate != 0, "wav missing fmt/data chunk: " << path);
  KSNET_CHECK_VALID(channels == 1, "only mono wav supported, got " << channels
                                   << " channels: " << path);
  if (require_rate_hz != 0) {
    KSNET_CHECK_VALID(static_cast<int>(rate) == require_rate_hz,
                      "wav sample rate " << rate << " Hz rejected, expected "
                      << require_rate_hz << " Hz (no resampling): " << path);
  }

  Waveform wave;
  wave.sample_rate_hz = static_cast<int>(rate);
  if (format == 1 && bits == 16) {
    size_t n = data_len / 2;
    wave.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      int16_t s = static_cast<int16_t>(ReadU16(data_ptr + 2 * i));
      wave.samples[i] = static_cast<double>(s) / 32768.0;
    }
  } else if (format == 3 && bits == 32) {
    size_t n = data_len / 4;
    wave.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      uint32_t u = ReadU32(data_ptr + 4 * i);
      float v;
      std::memcpy(&v, &u, 4);
      wave.samples[i] = static_cast<double>(v);
    }
  } else {
    throw ValidationError("unsupported wav format (want PCM16 or float32): " + path);
  }
  KSNET_CHECK_VALID(!wave.samples.empty(), "wav has no samples: " << path);
  return wave;
}

inline void WriteWav(const std::string& path, const Waveform& wave,
                     WavSampleFormat fmt = WavSampleFormat::kFloat32) {
  using wav_detail::PutU16;
  using wav_detail::PutU32;

  const uint16_t channels = 1;
  const uint16_t bits = (fmt == WavSampleFormat::kPcm16) ? 16 : 32;
  const uint16_t block = channels * bits / 8;
  const uint32_t rate = static_cast<uint32_t>(wave.sample_rate_hz);
  const uint32_t data_len = static_cast<uint32_t>(wave.samples.size()) * block;

  std::vector<uint8_t> out;
  out.reserve(44 + data_len);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  PutU32(out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  PutU32(out, 16);
  PutU16(out, fmt == WavSampleFormat::kPcm16 ? 1 : 3);
  PutU16(out, channels);
  PutU32(out, rate);
  PutU32(out, rate * block);
  PutU16(out, block);
  PutU16(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  PutU32(out, data_len);

  if (fmt == WavSampleFormat::kPcm16) {
    for (double s : wave.samples) {
      double v = s * 32768.0;
      if (v > 32767.0) v = 32767.0;
      if (v < -32768.0) v = -32768.0;
      auto q = static_cast<int16_t>(std::lrint(v));
      PutU16(out, static_cast<uint16_t>(q));
    }
  } else {
    for (double s : wave.samples) {
      float v = static_cast<float>(s);
      uint32_t u;
      std::memcpy(&u, &v, 4);
      PutU32(out, u);
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  KSNET_CHECK_VALID(f.good(), "cannot write wav file: " << path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  KSNET_CHECK_VALID(f.good(), "short write to wav file: " << path);
}

}  // namespace ksnet

#endif  // KSNET_WAV_HPP_
