// ksnet/degrade/distortions.hpp

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

// Distortion simulation: every operation returns a waveform of exactly the
// input length, and every random choice is driven by an explicit seed so a
// recorded draw can be replayed bit-exactly.

#ifndef KSNET_DEGRADE_DISTORTIONS_HPP_
#define KSNET_DEGRADE_DISTORTIONS_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "ksnet/common.hpp"
#include "ksnet/dsp/stft.hpp"
#include "ksnet/dsp/waveform.hpp"
#include "ksnet/fft.hpp"

namespace ksnet {

namespace degrade_detail {

inline int NextPow2(int64_t n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

// Linear convolution via zero-padded FFT; returns len(x) + len(h) - 1 samples.
inline std::vector<double> FftConvolve(const std::vector<double>& x,
                                       const std::vector<double>& h) {
  const int64_t out_len = static_cast<int64_t>(x.size() + h.size()) - 1;
  const int n = NextPow2(out_len);
  std::vector<double> xa(static_cast<size_t>(n), 0.0), ha(static_cast<size_t>(n), 0.0);
  std::copy(x.begin(), x.end(), xa.begin());
  std::copy(h.begin(), h.end(), ha.begin());
  std::vector<std::complex<double>> X(static_cast<size_t>(n / 2 + 1)), H(X.size());
  Rfft<double>::Forward(xa.data(), X.data(), n);
  Rfft<double>::Forward(ha.data(), H.data(), n);
  for (size_t i = 0; i < X.size(); ++i) X[i] *= H[i];
  std::vector<double> y(static_cast<size_t>(n));
  Rfft<double>::Inverse(X.data(), y.data(), n);
  y.resize(static_cast<size_t>(out_len));
  return y;
}

// STFT profile for a given rate: 20 ms window, 10 ms hop.
inline StftConfig SpectralCfg(int rate) {
  StftConfig cfg;
  cfg.sample_rate_hz = rate;
  cfg.fft_size = cfg.WinSamples();
  return cfg;
}

}  // namespace degrade_detail

// clean + g * noise with g chosen so the mix hits the requested global SNR.
// The noise is tiled or truncated to the clean length first.
inline Waveform MixNoise(const Waveform& clean, const Waveform& noise, double snr_db) {
  clean.Validate();
  noise.Validate();
  KSNET_CHECK_VALID(clean.sample_rate_hz == noise.sample_rate_hz,
                    "mix_noise: sample-rate mismatch");
  KSNET_CHECK_VALID(SignalPower(clean.samples) > 0.0, "mix_noise: clean signal has zero power");

  std::vector<double> tiled(clean.samples.size());
  for (size_t i = 0; i < tiled.size(); ++i) tiled[i] = noise.samples[i % noise.samples.size()];
  const double noise_power = SignalPower(tiled);
  KSNET_CHECK_VALID(noise_power > 0.0, "mix_noise: noise signal has zero power");

  const double gain = std::sqrt(SignalPower(clean.samples) /
                                (noise_power * std::pow(10.0, snr_db / 10.0)));
  Waveform out = clean;
  for (size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += gain * tiled[i];
  return out;
}

// Full convolution with the RIR, time-aligned so the direct-path peak maps to
// lag 0, truncated to the clean length and renormalized to the clean RMS.
inline Waveform ApplyReverb(const Waveform& clean, const Waveform& rir) {
  clean.Validate();
  KSNET_CHECK_VALID(clean.sample_rate_hz == rir.sample_rate_hz,
                    "apply_reverb: sample-rate mismatch");
  KSNET_CHECK_VALID(rir.NumSamples() < clean.NumSamples(),
                    "apply_reverb: RIR must be shorter than the signal");
  double peak = 0.0;
  size_t peak_pos = 0;
  for (size_t i = 0; i < rir.samples.size(); ++i) {
    if (std::abs(rir.samples[i]) > peak) {
      peak = std::abs(rir.samples[i]);
      peak_pos = i;
    }
  }
  KSNET_CHECK_VALID(peak > 0.0, "apply_reverb: silent RIR");

  std::vector<double> conv = degrade_detail::FftConvolve(clean.samples, rir.samples);
  Waveform out;
  out.sample_rate_hz = clean.sample_rate_hz;
  out.samples.resize(clean.samples.size());
  for (size_t i = 0; i < out.samples.size(); ++i) {
    const size_t j = i + peak_pos;
    out.samples[i] = j < conv.size() ? conv[j] : 0.0;
  }
  const double out_rms = SignalRms(out.samples);
  if (out_rms > 0.0) {
    const double g = SignalRms(clean.samples) / out_rms;
    for (double& v : out.samples) v *= g;
  }
  return out;
}

// Hard clamp to [-threshold, +threshold].
inline Waveform Clip(const Waveform& wave, double threshold) {
  KSNET_CHECK_VALID(threshold > 0.0 && threshold <= 1.0,
                    "clip: threshold must lie in (0, 1]");
  Waveform out = wave;
  for (double& v : out.samples) v = std::clamp(v, -threshold, threshold);
  return out;
}

// Zeroes packets independently with the given probability and smooths each
// kept/lost boundary with a 2 ms linear fade. Returns the per-packet loss
// mask alongside the waveform.
inline std::pair<Waveform, std::vector<bool>> DropPackets(const Waveform& wave,
                                                          double packet_ms,
                                                          double loss_rate,
                                                          uint64_t seed) {
  KSNET_CHECK_VALID(packet_ms > 0.0, "drop_packets: packet_ms must be positive");
  KSNET_CHECK_VALID(loss_rate >= 0.0 && loss_rate <= 1.0,
                    "drop_packets: loss_rate must lie in [0, 1]");
  const int64_t n = wave.NumSamples();
  const int64_t packet = std::llround(packet_ms * wave.sample_rate_hz / 1000.0);
  const int64_t num_packets = (n + packet - 1) / packet;
  const int64_t fade = std::llround(2.0 * wave.sample_rate_hz / 1000.0);

  Rng rng(seed);
  std::vector<bool> mask(static_cast<size_t>(num_packets), false);
  std::vector<double> env(static_cast<size_t>(n), 1.0);
  for (int64_t p = 0; p < num_packets; ++p) {
    if (rng.Bernoulli(loss_rate)) {
      mask[static_cast<size_t>(p)] = true;
      const int64_t lo = p * packet;
      const int64_t hi = std::min(n, lo + packet);
      std::fill(env.begin() + lo, env.begin() + hi, 0.0);
    }
  }
  // Ramp into and out of each maximal lost run. Overlapping ramps in a very
  // short run combine by max, which keeps the envelope continuous.
  int64_t i = 0;
  while (i < n) {
    if (env[static_cast<size_t>(i)] != 0.0) {
      ++i;
      continue;
    }
    int64_t j = i;
    while (j < n && env[static_cast<size_t>(j)] == 0.0) ++j;
    const int64_t run = j - i;
    const int64_t f = std::min(fade, run);
    for (int64_t k = 0; k < f; ++k) {
      const double down = 1.0 - static_cast<double>(k + 1) / static_cast<double>(f);
      const double up = static_cast<double>(k + 1) / static_cast<double>(f);
      auto& head = env[static_cast<size_t>(i + k)];
      auto& tail = env[static_cast<size_t>(j - f + k)];
      head = std::max(head, down);
      tail = std::max(tail, up);
    }
    i = j;
  }

  Waveform out = wave;
  if (loss_rate > 0.0) {
    for (int64_t k = 0; k < n; ++k) {
      out.samples[static_cast<size_t>(k)] *= env[static_cast<size_t>(k)];
    }
  }
  return {std::move(out), std::move(mask)};
}

// Linear-phase Kaiser windowed-sinc lowpass. The transition band is centered
// at 1.05 x cutoff so the stopband starts at 1.1 x cutoff; designed for 60 dB
// stopband attenuation which leaves margin over the 40 dB requirement.
inline Waveform Lowpass(const Waveform& wave, double cutoff_hz) {
  const double nyquist = wave.sample_rate_hz / 2.0;
  KSNET_CHECK_CONFIG(cutoff_hz > 0.0 && cutoff_hz < nyquist,
                     "lowpass: cutoff " << cutoff_hz << " Hz outside (0, " << nyquist << ")");

  const double atten_db = 60.0;
  const double trans_hz = 0.1 * cutoff_hz;
  const double center_hz = 1.05 * cutoff_hz;
  const double d_omega = 2.0 * M_PI * trans_hz / wave.sample_rate_hz;
  int taps = static_cast<int>(std::ceil((atten_db - 8.0) / (2.285 * d_omega))) + 1;
  if (taps % 2 == 0) ++taps;
  taps = std::min(taps, 32767);

  const double beta = 0.1102 * (atten_db - 8.7);
  auto bessel_i0 = [](double x) {
    double sum = 1.0, term = 1.0;
    for (int k = 1; k < 64; ++k) {
      term *= (x / (2.0 * k)) * (x / (2.0 * k));
      sum += term;
      if (term < 1e-16 * sum) break;
    }
    return sum;
  };

  const int half = (taps - 1) / 2;
  const double wc = 2.0 * M_PI * center_hz / wave.sample_rate_hz;
  std::vector<double> h(static_cast<size_t>(taps));
  double norm = 0.0;
  for (int i = 0; i < taps; ++i) {
    const int m = i - half;
    const double sinc = (m == 0) ? wc / M_PI : std::sin(wc * m) / (M_PI * m);
    const double r = static_cast<double>(m) / half;
    const double win = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / bessel_i0(beta);
    h[static_cast<size_t>(i)] = sinc * win;
    norm += h[static_cast<size_t>(i)];
  }
  for (double& v : h) v /= norm;  // unity DC gain

  std::vector<double> conv = degrade_detail::FftConvolve(wave.samples, h);
  Waveform out = wave;
  for (size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] = conv[i + static_cast<size_t>(half)];
  }
  return out;
}

// Proxy codec profiles. Real low-bitrate codecs are out of scope; these are
// deterministic lossy transforms with comparable artifact classes.
struct CodecProfile {
  enum class Kind { kMuLaw, kBitcrush, kSpectralHole };
  Kind kind = Kind::kMuLaw;
  int param = 8;  // bits for the quantizers, hole count for spectral_hole

  static CodecProfile Parse(const std::string& text) {
    const auto colon = text.find(':');
    KSNET_CHECK_CONFIG(colon != std::string::npos,
                       "codec profile must look like 'name:param', got '" << text << "'");
    const std::string name = text.substr(0, colon);
    CodecProfile p;
    p.param = std::stoi(text.substr(colon + 1));
    if (name == "mu_law") {
      p.kind = Kind::kMuLaw;
      KSNET_CHECK_CONFIG(p.param >= 2 && p.param <= 16, "mu_law bits out of range");
    } else if (name == "bitcrush") {
      p.kind = Kind::kBitcrush;
      KSNET_CHECK_CONFIG(p.param >= 2 && p.param <= 16, "bitcrush bits out of range");
    } else if (name == "spectral_hole") {
      p.kind = Kind::kSpectralHole;
      KSNET_CHECK_CONFIG(p.param >= 1 && p.param <= 8, "spectral_hole band count out of range");
    } else {
      throw ConfigError("unknown codec profile '" + name + "'");
    }
    return p;
  }

  std::string ToString() const {
    switch (kind) {
      case Kind::kMuLaw: return "mu_law:" + std::to_string(param);
      case Kind::kBitcrush: return "bitcrush:" + std::to_string(param);
      case Kind::kSpectralHole: return "spectral_hole:" + std::to_string(param);
    }
    return "";
  }
};

namespace degrade_detail {

// Mid-rise quantizer with 2^bits cells over [-peak, peak).
inline double MidRise(double x, double peak, int bits) {
  const double levels = static_cast<double>(1 << (bits - 1));
  double idx = std::floor(x / peak * levels);
  idx = std::clamp(idx, -levels, levels - 1.0);
  return (idx + 0.5) / levels * peak;
}

inline Waveform MuLawQuantize(const Waveform& wave, int bits) {
  double peak = 0.0;
  for (double v : wave.samples) peak = std::max(peak, std::abs(v));
  if (peak <= 0.0) return wave;
  const double scale = std::max(1.0, peak);  // compand over [-1,1], normalize loud input
  const double mu = 255.0;
  Waveform out = wave;
  for (double& v : out.samples) {
    const double x = v / scale;
    const double companded = std::copysign(std::log1p(mu * std::abs(x)) / std::log1p(mu), x);
    const double q = MidRise(companded, 1.0, bits);
    v = std::copysign((std::pow(1.0 + mu, std::abs(q)) - 1.0) / mu, q) * scale;
  }
  return out;
}

inline Waveform Bitcrush(const Waveform& wave, int bits) {
  double peak = 0.0;
  for (double v : wave.samples) peak = std::max(peak, std::abs(v));
  if (peak <= 0.0) return wave;
  const double scale = std::max(1.0, peak);
  Waveform out = wave;
  for (double& v : out.samples) v = MidRise(v, scale, bits);
  return out;
}

// Zeroes `count` of 8 equal-width bands between 300 Hz and Nyquist. The band
// order is fixed so the transform is a pure function of the profile.
inline Waveform SpectralHole(const Waveform& wave, int count) {
  static constexpr int kOrder[8] = {5, 2, 6, 3, 7, 1, 4, 0};
  const StftConfig cfg = SpectralCfg(wave.sample_rate_hz);
  ComplexSpectrogram spec = Stft(wave, cfg);
  const double bin_hz = static_cast<double>(cfg.sample_rate_hz) / cfg.fft_size;
  const double lo_hz = 300.0;
  const double hi_hz = cfg.sample_rate_hz / 2.0;
  const double band_hz = (hi_hz - lo_hz) / 8.0;
  for (int i = 0; i < std::min(count, 8); ++i) {
    const int band = kOrder[i];
    const auto lo_bin = static_cast<int64_t>(std::ceil((lo_hz + band * band_hz) / bin_hz));
    const auto hi_bin = std::min<int64_t>(spec.bins,
        static_cast<int64_t>(std::floor((lo_hz + (band + 1) * band_hz) / bin_hz)) + 1);
    for (int64_t t = 0; t < spec.frames; ++t) {
      for (int64_t f = lo_bin; f < hi_bin; ++f) spec.at(t, f) = {0.0, 0.0};
    }
  }
  return Istft(spec, cfg);
}

}  // namespace degrade_detail

inline Waveform CodecSim(const Waveform& wave, const CodecProfile& profile) {
  wave.Validate();
  switch (profile.kind) {
    case CodecProfile::Kind::kMuLaw:
      return degrade_detail::MuLawQuantize(wave, profile.param);
    case CodecProfile::Kind::kBitcrush:
      return degrade_detail::Bitcrush(wave, profile.param);
    case CodecProfile::Kind::kSpectralHole:
      return degrade_detail::SpectralHole(wave, profile.param);
  }
  throw ConfigError("codec_sim: unknown profile");
}

// Magnitude spectral subtraction with over-subtraction, applied after mixing
// the given noise. Reuses the shared analysis/synthesis front end; the output
// carries the musical-noise artifacts typical of traditional suppressors.
struct NrProfile {
  double alpha = 2.0;   // over-subtraction factor
  double beta = 0.01;   // spectral floor
  double snr_db = 10.0; // SNR of the internally mixed noise
};

inline Waveform NrArtifact(const Waveform& wave, const Waveform& noise,
                           const NrProfile& profile) {
  wave.Validate();
  KSNET_CHECK_VALID(profile.alpha >= 0.0, "nr_artifact: alpha must be non-negative");
  KSNET_CHECK_VALID(profile.beta > 0.0 && profile.beta < 1.0,
                    "nr_artifact: beta must lie in (0, 1)");

  const StftConfig cfg = degrade_detail::SpectralCfg(wave.sample_rate_hz);
  const bool have_noise = SignalPower(noise.samples) > 0.0;

  Waveform mixed = have_noise ? MixNoise(wave, noise, profile.snr_db) : wave;

  // Noise magnitude estimate from the scaled noise itself, averaged over time.
  std::vector<double> noise_mag(static_cast<size_t>(cfg.NumBins()), 0.0);
  if (have_noise) {
    Waveform scaled = mixed;
    for (size_t i = 0; i < scaled.samples.size(); ++i) {
      scaled.samples[i] -= wave.samples[i];
    }
    ComplexSpectrogram nspec = Stft(scaled, cfg);
    for (int64_t t = 0; t < nspec.frames; ++t) {
      for (int64_t f = 0; f < nspec.bins; ++f) {
        noise_mag[static_cast<size_t>(f)] += std::abs(nspec.at(t, f));
      }
    }
    for (double& v : noise_mag) v /= static_cast<double>(nspec.frames);
  }

  ComplexSpectrogram spec = Stft(mixed, cfg);
  for (int64_t t = 0; t < spec.frames; ++t) {
    for (int64_t f = 0; f < spec.bins; ++f) {
      const std::complex<double> v = spec.at(t, f);
      const double mag = std::abs(v);
      const double target =
          std::max(mag - profile.alpha * noise_mag[static_cast<size_t>(f)], profile.beta * mag);
      spec.at(t, f) = (mag > 0.0) ? v * (target / mag) : v;
    }
  }
  return Istft(spec, cfg);
}

// Exact scalar gain.
inline Waveform AdjustLoudness(const Waveform& wave, double gain_db) {
  Waveform out = wave;
  const double g = std::pow(10.0, gain_db / 20.0);
  for (double& v : out.samples) v *= g;
  return out;
}

// Adds a short transient at `position`, scaled so the SNR measured over the
// overlap window alone hits snr_db. The admissible SNR range is fixed at
// [-5, 10] dB. A negative position asks for a seeded uniform draw over all
// valid placements.
inline Waveform InjectTransient(const Waveform& wave, const Waveform& transient,
                                double snr_db, int64_t position, uint64_t seed) {
  wave.Validate();
  transient.Validate();
  KSNET_CHECK_VALID(snr_db >= -5.0 && snr_db <= 10.0,
                    "inject_transient: snr " << snr_db << " dB outside [-5, 10]");
  KSNET_CHECK_VALID(transient.NumSamples() < wave.NumSamples(),
                    "inject_transient: transient must be shorter than the signal");
  const int64_t max_pos = wave.NumSamples() - transient.NumSamples();
  if (position < 0) {
    Rng rng(seed);
    position = rng.UniformInt(0, max_pos);
  }
  KSNET_CHECK_VALID(position <= max_pos,
                    "inject_transient: position " << position << " beyond signal end");

  double p_local = 0.0, p_trans = 0.0;
  for (int64_t i = 0; i < transient.NumSamples(); ++i) {
    const double w = wave.samples[static_cast<size_t>(position + i)];
    const double t = transient.samples[static_cast<size_t>(i)];
    p_local += w * w;
    p_trans += t * t;
  }
  KSNET_CHECK_VALID(p_trans > 0.0, "inject_transient: silent transient");
  const double gain = std::sqrt(p_local / (p_trans * std::pow(10.0, snr_db / 10.0)));

  Waveform out = wave;
  for (int64_t i = 0; i < transient.NumSamples(); ++i) {
    out.samples[static_cast<size_t>(position + i)] +=
        gain * transient.samples[static_cast<size_t>(i)];
  }
  return out;
}

}  // namespace ksnet

#endif  // KSNET_DEGRADE_DISTORTIONS_HPP_
