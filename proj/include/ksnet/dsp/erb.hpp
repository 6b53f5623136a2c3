// ksnet/dsp/erb.hpp

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

#ifndef KSNET_DSP_ERB_HPP_
#define KSNET_DSP_ERB_HPP_

#include <cmath>
#include <vector>

#include "ksnet/common.hpp"
#include "ksnet/dsp/stft.hpp"
#include "ksnet/tensor.hpp"

namespace ksnet {

// ERB-rate scale (Glasberg and Moore).
inline double HzToErbRate(double hz) { return 21.4 * std::log10(1.0 + 0.00437 * hz); }
inline double ErbRateToHz(double erb) {
  return (std::pow(10.0, erb / 21.4) - 1.0) / 0.00437;
}

// Triangular perceptual filterbank: n_bands x F non-negative weights with
// centers equally spaced on the ERB-rate scale between 0 Hz and Nyquist.
// Rows are normalized to sum 1; triangle overlap is integrated over each
// linear bin's ERB interval so every row keeps support even where several
// ERB bands fall inside one linear bin.
struct ErbFilterbank {
  Tensor<double> weights;           // (n_bands, F)
  std::vector<double> centers_hz;   // strictly increasing
  int n_bands = 0;

  int64_t bins() const { return weights.rank() == 2 ? weights.dim(1) : 0; }
};

inline ErbFilterbank MakeErbFilterbank(int n_bands, const StftConfig& cfg) {
  cfg.Validate();
  const int64_t bins = cfg.NumBins();
  KSNET_CHECK_CONFIG(n_bands >= 2 && n_bands < bins,
                     "erb: n_bands must be in [2, " << bins << "), got " << n_bands);

  const double nyquist_hz = cfg.sample_rate_hz / 2.0;
  const double erb_max = HzToErbRate(nyquist_hz);
  const double step = erb_max / n_bands;
  const double bin_hz = static_cast<double>(cfg.sample_rate_hz) / cfg.fft_size;

  ErbFilterbank fb;
  fb.n_bands = n_bands;
  fb.weights = Tensor<double>({n_bands, bins});
  fb.centers_hz.resize(static_cast<size_t>(n_bands));
  for (int b = 0; b < n_bands; ++b) {
    fb.centers_hz[static_cast<size_t>(b)] = ErbRateToHz((b + 0.5) * step);
  }

  // Average the band's triangle over each bin's ERB interval.
  constexpr int kSubSamples = 8;
  for (int b = 0; b < n_bands; ++b) {
    const double center = (b + 0.5) * step;
    double row_sum = 0.0;
    for (int64_t f = 0; f < bins; ++f) {
      const double hz_lo = std::max(0.0, (f - 0.5) * bin_hz);
      const double hz_hi = std::min(nyquist_hz, (f + 0.5) * bin_hz);
      double acc = 0.0;
      for (int s = 0; s < kSubSamples; ++s) {
        const double hz = hz_lo + (hz_hi - hz_lo) * (s + 0.5) / kSubSamples;
        const double d = std::abs(HzToErbRate(hz) - center) / step;
        acc += std::max(0.0, 1.0 - d);
      }
      const double w = acc / kSubSamples;
      fb.weights.at(b, f) = w;
      row_sum += w;
    }
    KSNET_CHECK_CONFIG(row_sum > 0.0, "erb: band " << b << " has empty support");
    for (int64_t f = 0; f < bins; ++f) fb.weights.at(b, f) /= row_sum;
  }
  return fb;
}

// Per-frequency-bin expansion weights, the transposed and column-renormalized
// filterbank: expanding an all-ones band vector yields all-ones per bin.
inline Tensor<double> ErbExpansion(const ErbFilterbank& fb) {
  const int64_t bins = fb.bins();
  Tensor<double> e({bins, fb.n_bands});
  for (int64_t f = 0; f < bins; ++f) {
    double col = 0.0;
    for (int b = 0; b < fb.n_bands; ++b) col += fb.weights.at(b, f);
    for (int b = 0; b < fb.n_bands; ++b) e.at(f, b) = fb.weights.at(b, f) / col;
  }
  return e;
}

// Applies the filterbank to a (T, F) magnitude tensor, yielding (T, n_bands).
inline Tensor<double> ErbApply(const ErbFilterbank& fb, const Tensor<double>& mag) {
  KSNET_CHECK_VALID(mag.rank() == 2 && mag.dim(1) == fb.bins(),
                    "erb apply: magnitude shape does not match filterbank");
  const int64_t frames = mag.dim(0);
  Tensor<double> out({frames, fb.n_bands});
  for (int64_t t = 0; t < frames; ++t) {
    for (int b = 0; b < fb.n_bands; ++b) {
      double acc = 0.0;
      for (int64_t f = 0; f < fb.bins(); ++f) acc += fb.weights.at(b, f) * mag.at(t, f);
      out.at(t, b) = acc;
    }
  }
  return out;
}

// Power-law magnitude compression, exponent in (0, 1].
inline Tensor<double> Compress(const Tensor<double>& mag, double exponent) {
  KSNET_CHECK_VALID(exponent > 0.0 && exponent <= 1.0,
                    "compress: exponent must be in (0, 1], got " << exponent);
  Tensor<double> out(mag.shape());
  for (int64_t i = 0; i < mag.size(); ++i) {
    KSNET_CHECK_VALID(mag[i] >= 0.0, "compress: negative input value");
    out[i] = std::pow(mag[i], exponent);
  }
  return out;
}

inline Tensor<double> Decompress(const Tensor<double>& compressed, double exponent) {
  KSNET_CHECK_VALID(exponent > 0.0 && exponent <= 1.0,
                    "decompress: exponent must be in (0, 1], got " << exponent);
  Tensor<double> out(compressed.shape());
  for (int64_t i = 0; i < compressed.size(); ++i) {
    KSNET_CHECK_VALID(compressed[i] >= 0.0, "decompress: negative input value");
    out[i] = std::pow(compressed[i], 1.0 / exponent);
  }
  return out;
}

}  // namespace ksnet

#endif  // KSNET_DSP_ERB_HPP_
