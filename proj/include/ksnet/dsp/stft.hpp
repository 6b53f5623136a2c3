// ksnet/dsp/stft.hpp

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

#ifndef KSNET_DSP_STFT_HPP_
#define KSNET_DSP_STFT_HPP_

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "ksnet/common.hpp"
#include "ksnet/dsp/waveform.hpp"
#include "ksnet/fft.hpp"

namespace ksnet {

// Analysis/synthesis configuration. The default profile is 48 kHz full-band
// with a 20 ms Hann window, 10 ms hop and a 960-point FFT; the synthesis side
// uses the same window with per-sample overlap-add normalization, which gives
// exact reconstruction at any overlap with positive window-envelope.
struct StftConfig {
  int sample_rate_hz = 48000;
  double win_len_s = 0.020;
  double hop_len_s = 0.010;
  int fft_size = 960;
  std::string window = "hann";

  int WinSamples() const {
    return static_cast<int>(std::lround(win_len_s * sample_rate_hz));
  }
  int HopSamples() const {
    return static_cast<int>(std::lround(hop_len_s * sample_rate_hz));
  }
  int NumBins() const { return fft_size / 2 + 1; }

  void Validate() const {
    KSNET_CHECK_CONFIG(sample_rate_hz > 0, "stft: sample rate must be positive");
    KSNET_CHECK_CONFIG(WinSamples() > 0 && HopSamples() > 0,
                       "stft: window and hop must be positive");
    KSNET_CHECK_CONFIG(HopSamples() <= WinSamples(), "stft: hop must not exceed window");
    KSNET_CHECK_CONFIG(fft_size >= WinSamples(),
                       "stft: fft_size " << fft_size << " smaller than window "
                       << WinSamples());
    KSNET_CHECK_CONFIG(window == "hann", "stft: unsupported window '" << window << "'");
  }
};

// Complex analysis frames, row-major frames x bins with bins = fft_size/2+1.
// source_samples remembers the unpadded input length so synthesis can trim
// exactly.
struct ComplexSpectrogram {
  std::vector<std::complex<double>> data;
  int64_t frames = 0;
  int64_t bins = 0;
  int64_t source_samples = 0;
  StftConfig config;

  std::complex<double>& at(int64_t t, int64_t f) {
    return data[static_cast<size_t>(t * bins + f)];
  }
  const std::complex<double>& at(int64_t t, int64_t f) const {
    return data[static_cast<size_t>(t * bins + f)];
  }
};

namespace stft_detail {

// Periodic Hann, the analysis and synthesis window of the whole pipeline.
template <typename T>
std::vector<T> HannWindow(int n) {
  std::vector<T> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[static_cast<size_t>(i)] =
        static_cast<T>(0.5 * (1.0 - std::cos(2.0 * M_PI * i / n)));
  }
  return w;
}

// Reflective index into [0, n), bouncing as often as needed so short inputs
// still pad cleanly. The edge sample is not repeated.
inline int64_t ReflectIndex(int64_t i, int64_t n) {
  if (n == 1) return 0;
  const int64_t period = 2 * (n - 1);
  int64_t j = i % period;
  if (j < 0) j += period;
  return (j < n) ? j : period - j;
}

inline int64_t NumFrames(int64_t num_samples, int hop) { return num_samples / hop + 1; }

// Framing layout shared by analysis and synthesis: the signal is padded by
// win/2 on both sides (reflectively on analysis), frame t starts at t*hop in
// the padded signal.
template <typename T>
void Analyze(const T* x, int64_t n, const StftConfig& cfg, std::complex<T>* out) {
  const int win = cfg.WinSamples();
  const int hop = cfg.HopSamples();
  const int fft = cfg.fft_size;
  const int64_t bins = cfg.NumBins();
  const int64_t pad = win / 2;
  const int64_t frames = NumFrames(n, hop);
  const std::vector<T> w = HannWindow<T>(win);

  std::vector<T> frame(static_cast<size_t>(fft), T(0));
  for (int64_t t = 0; t < frames; ++t) {
    const int64_t start = t * hop - pad;
    for (int i = 0; i < win; ++i) {
      int64_t src = start + i;
      if (src < 0 || src >= n) src = ReflectIndex(src, n);
      frame[static_cast<size_t>(i)] = x[src] * w[static_cast<size_t>(i)];
    }
    for (int i = win; i < fft; ++i) frame[static_cast<size_t>(i)] = T(0);
    Rfft<T>::Forward(frame.data(), out + t * bins, fft);
  }
}

template <typename T>
void Synthesize(const std::complex<T>* spec, int64_t frames, const StftConfig& cfg,
                T* out, int64_t out_len) {
  const int win = cfg.WinSamples();
  const int hop = cfg.HopSamples();
  const int fft = cfg.fft_size;
  const int64_t bins = cfg.NumBins();
  const int64_t pad = win / 2;
  const int64_t padded_len = (frames - 1) * hop + win;
  const std::vector<T> w = HannWindow<T>(win);

  std::vector<T> acc(static_cast<size_t>(padded_len), T(0));
  std::vector<T> env(static_cast<size_t>(padded_len), T(0));
  std::vector<T> frame(static_cast<size_t>(fft));
  for (int64_t t = 0; t < frames; ++t) {
    Rfft<T>::Inverse(spec + t * bins, frame.data(), fft);
    const int64_t base = t * hop;
    for (int i = 0; i < win; ++i) {
      acc[static_cast<size_t>(base + i)] += frame[static_cast<size_t>(i)] * w[static_cast<size_t>(i)];
      env[static_cast<size_t>(base + i)] += w[static_cast<size_t>(i)] * w[static_cast<size_t>(i)];
    }
  }
  for (int64_t i = 0; i < out_len; ++i) {
    const int64_t j = i + pad;
    T e = (j < padded_len) ? env[static_cast<size_t>(j)] : T(0);
    out[i] = (e > T(1e-10)) ? acc[static_cast<size_t>(j)] / e : T(0);
  }
}

}  // namespace stft_detail

inline ComplexSpectrogram Stft(const Waveform& wave, const StftConfig& cfg) {
  cfg.Validate();
  KSNET_CHECK_CONFIG(wave.sample_rate_hz == cfg.sample_rate_hz,
                     "stft: waveform rate " << wave.sample_rate_hz
                     << " does not match config rate " << cfg.sample_rate_hz);
  wave.Validate();
  KSNET_CHECK_VALID(wave.NumSamples() >= cfg.HopSamples(),
                    "stft: input shorter than one hop");

  ComplexSpectrogram spec;
  spec.config = cfg;
  spec.source_samples = wave.NumSamples();
  spec.frames = stft_detail::NumFrames(wave.NumSamples(), cfg.HopSamples());
  spec.bins = cfg.NumBins();
  spec.data.resize(static_cast<size_t>(spec.frames * spec.bins));
  stft_detail::Analyze<double>(wave.samples.data(), wave.NumSamples(), cfg, spec.data.data());
  return spec;
}

inline Waveform Istft(const ComplexSpectrogram& spec, const StftConfig& cfg) {
  cfg.Validate();
  KSNET_CHECK_VALID(spec.bins == cfg.NumBins(),
                    "istft: spectrogram bins " << spec.bins << " do not match config bins "
                    << cfg.NumBins());
  KSNET_CHECK_VALID(spec.frames >= 1, "istft: empty spectrogram");
  int64_t out_len = spec.source_samples > 0 ? spec.source_samples
                                            : (spec.frames - 1) * cfg.HopSamples();
  KSNET_CHECK_VALID(stft_detail::NumFrames(out_len, cfg.HopSamples()) == spec.frames,
                    "istft: frame count inconsistent with source length");

  Waveform wave;
  wave.sample_rate_hz = cfg.sample_rate_hz;
  wave.samples.assign(static_cast<size_t>(out_len), 0.0);
  stft_detail::Synthesize<double>(spec.data.data(), spec.frames, cfg, wave.samples.data(),
                                  out_len);
  return wave;
}

inline Waveform Istft(const ComplexSpectrogram& spec) { return Istft(spec, spec.config); }

}  // namespace ksnet

#endif  // KSNET_DSP_STFT_HPP_
