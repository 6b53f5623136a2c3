// ksnet/dsp/subband.hpp

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

#ifndef KSNET_DSP_SUBBAND_HPP_
#define KSNET_DSP_SUBBAND_HPP_

#include <array>
#include <complex>
#include <vector>

#include "ksnet/common.hpp"
#include "ksnet/dsp/stft.hpp"
#include "ksnet/tensor.hpp"

namespace ksnet {

inline constexpr int kNumSubbands = 3;

// Three equal-width subbands of the non-Nyquist bins, split into real and
// imaginary planes: shape (frames, bins_per_band, 3, 2). The Nyquist bin is
// carried alongside as a side channel and passed through unmodified.
struct SubbandStack {
  Tensor<double> data;                           // (T, B, 3, 2)
  std::array<int64_t, 4> band_edges{};           // ascending bin indices, 4 entries
  std::vector<std::complex<double>> nyquist;     // length T
  StftConfig config;
  int64_t source_samples = 0;

  int64_t frames() const { return data.rank() == 4 ? data.dim(0) : 0; }
  int64_t bins_per_band() const { return data.rank() == 4 ? data.dim(1) : 0; }

  void Validate() const {
    KSNET_CHECK_VALID(data.rank() == 4 && data.dim(2) == kNumSubbands && data.dim(3) == 2,
                      "subband stack must have shape (T, B, 3, 2)");
    const int64_t b = bins_per_band();
    for (int i = 0; i < kNumSubbands; ++i) {
      KSNET_CHECK_VALID(band_edges[static_cast<size_t>(i + 1)] -
                                band_edges[static_cast<size_t>(i)] == b,
                        "subband bands must tile the retained bins with equal width");
    }
    KSNET_CHECK_VALID(static_cast<int64_t>(nyquist.size()) == frames(),
                      "subband nyquist column must have one entry per frame");
  }
};

// Splits the retained bins (all but Nyquist) into three equal bands stacked
// along a band axis with separate real/imag planes. Requires F-1 divisible
// by 3.
inline SubbandStack SplitSubbands(const ComplexSpectrogram& spec) {
  const int64_t retained = spec.bins - 1;  // Nyquist held aside
  if (retained % kNumSubbands != 0) {
    const int fft = spec.config.fft_size;
    int lower = fft, upper = fft;
    while ((lower / 2) % kNumSubbands != 0 || lower % 2 != 0) --lower;
    while ((upper / 2) % kNumSubbands != 0 || upper % 2 != 0) ++upper;
    throw ConfigError("subband split needs (fft_size/2) divisible by 3; fft_size " +
                      std::to_string(fft) + " gives " + std::to_string(retained) +
                      " retained bins; nearest valid fft_size: " + std::to_string(lower) +
                      " or " + std::to_string(upper));
  }
  const int64_t b = retained / kNumSubbands;

  SubbandStack stack;
  stack.config = spec.config;
  stack.source_samples = spec.source_samples;
  stack.data = Tensor<double>({spec.frames, b, kNumSubbands, 2});
  for (int i = 0; i <= kNumSubbands; ++i) {
    stack.band_edges[static_cast<size_t>(i)] = i * b;
  }
  stack.nyquist.resize(static_cast<size_t>(spec.frames));
  for (int64_t t = 0; t < spec.frames; ++t) {
    stack.nyquist[static_cast<size_t>(t)] = spec.at(t, spec.bins - 1);
    for (int band = 0; band < kNumSubbands; ++band) {
      const int64_t base = stack.band_edges[static_cast<size_t>(band)];
      for (int64_t k = 0; k < b; ++k) {
        const std::complex<double>& v = spec.at(t, base + k);
        stack.data.at(t, k, band, 0) = v.real();
        stack.data.at(t, k, band, 1) = v.imag();
      }
    }
  }
  return stack;
}

// Exact inverse of SplitSubbands.
inline ComplexSpectrogram MergeSubbands(const SubbandStack& stack,
                                        const std::vector<std::complex<double>>& nyquist) {
  stack.Validate();
  KSNET_CHECK_VALID(static_cast<int64_t>(nyquist.size()) == stack.frames(),
                    "merge: nyquist column length does not match frame count");
  const int64_t b = stack.bins_per_band();
  KSNET_CHECK_VALID(stack.band_edges[0] == 0 && stack.band_edges[3] == 3 * b,
                    "merge: band edges do not tile retained bins");

  ComplexSpectrogram spec;
  spec.config = stack.config;
  spec.source_samples = stack.source_samples;
  spec.frames = stack.frames();
  spec.bins = 3 * b + 1;
  spec.data.resize(static_cast<size_t>(spec.frames * spec.bins));
  for (int64_t t = 0; t < spec.frames; ++t) {
    for (int band = 0; band < kNumSubbands; ++band) {
      const int64_t base = stack.band_edges[static_cast<size_t>(band)];
      for (int64_t k = 0; k < b; ++k) {
        spec.at(t, base + k) = {stack.data.at(t, k, band, 0), stack.data.at(t, k, band, 1)};
      }
    }
    spec.at(t, spec.bins - 1) = nyquist[static_cast<size_t>(t)];
  }
  return spec;
}

inline ComplexSpectrogram MergeSubbands(const SubbandStack& stack) {
  return MergeSubbands(stack, stack.nyquist);
}

}  // namespace ksnet

#endif  // KSNET_DSP_SUBBAND_HPP_
