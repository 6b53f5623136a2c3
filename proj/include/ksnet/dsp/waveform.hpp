// ksnet/dsp/waveform.hpp

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

#ifndef KSNET_DSP_WAVEFORM_HPP_
#define KSNET_DSP_WAVEFORM_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

#include "ksnet/common.hpp"

namespace ksnet {

// The universal audio currency: mono sample sequence plus its rate.
// Nominal full scale is +-1 with headroom up to +-4 ahead of clipping stages.
struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = 0;

  Waveform() = default;
  Waveform(std::vector<double> s, int rate) : samples(std::move(s)), sample_rate_hz(rate) {}

  int64_t NumSamples() const { return static_cast<int64_t>(samples.size()); }
  double DurationSeconds() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }

  void Validate() const {
    KSNET_CHECK_VALID(sample_rate_hz > 0, "waveform sample rate must be positive");
    KSNET_CHECK_VALID(!samples.empty(), "waveform must hold at least one sample");
    for (double s : samples) {
      KSNET_CHECK_VALID(std::isfinite(s), "waveform contains non-finite samples");
    }
  }
};

inline double SignalPower(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return x.empty() ? 0.0 : acc / static_cast<double>(x.size());
}

inline double SignalRms(const std::vector<double>& x) { return std::sqrt(SignalPower(x)); }

}  // namespace ksnet

#endif  // KSNET_DSP_WAVEFORM_HPP_
