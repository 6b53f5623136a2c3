// tests/helpers/test_signals.hpp
//
// Shared synthetic fixtures: deterministic noise and speech-like test
// material (harmonic carrier with pitch and amplitude modulation), plus a
// few small reference computations used as independent oracles.

#ifndef KSNET_TESTS_HELPERS_TEST_SIGNALS_HPP_
#define KSNET_TESTS_HELPERS_TEST_SIGNALS_HPP_

#include <cmath>
#include <complex>
#include <vector>

#include "ksnet/common.hpp"
#include "ksnet/dsp/waveform.hpp"

namespace ksnet_tests {

inline ksnet::Waveform WhiteNoise(double seconds, int rate, uint64_t seed, double amp = 0.3) {
  ksnet::Rng rng(seed);
  std::vector<double> x(static_cast<size_t>(seconds * rate));
  for (auto& v : x) v = amp * rng.Normal();
  return {std::move(x), rate};
}

// Voiced-speech stand-in: gliding fundamental with a handful of harmonics,
// a syllabic amplitude envelope and a little breath noise.
inline ksnet::Waveform SpeechLike(double seconds, int rate, uint64_t seed) {
  ksnet::Rng rng(seed);
  const double f0_base = 90.0 + 80.0 * rng.Uniform();
  const size_t n = static_cast<size_t>(seconds * rate);
  std::vector<double> x(n);
  double phase[8] = {0};
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double f0 = f0_base * (1.0 + 0.2 * std::sin(2.0 * M_PI * 2.3 * t));
    const double env = 0.55 + 0.45 * std::sin(2.0 * M_PI * 3.1 * t + 1.0);
    double s = 0.0;
    for (int h = 0; h < 8; ++h) {
      phase[h] += 2.0 * M_PI * f0 * (h + 1) / rate;
      s += std::sin(phase[h]) / (h + 1);
    }
    x[i] = 0.22 * env * s + 0.01 * rng.Normal();
  }
  return {std::move(x), rate};
}

// Scale-invariant SDR, reference implementation kept independent from the
// metrics module.
inline double RefSiSdrDb(const std::vector<double>& est, const std::vector<double>& ref) {
  double dot = 0.0, ref_energy = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    dot += est[i] * ref[i];
    ref_energy += ref[i] * ref[i];
  }
  const double alpha = dot / ref_energy;
  double target = 0.0, err = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    const double s = alpha * ref[i];
    target += s * s;
    const double e = est[i] - s;
    err += e * e;
  }
  if (err <= 0.0) return 1e9;
  return 10.0 * std::log10(target / err);
}

// Quadratic-time DFT used to cross-check the FFT path.
inline std::vector<std::complex<double>> NaiveDft(const std::vector<double>& x, int bins) {
  const int n = static_cast<int>(x.size());
  std::vector<std::complex<double>> out(static_cast<size_t>(bins));
  for (int k = 0; k < bins; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (int i = 0; i < n; ++i) {
      const double ang = -2.0 * M_PI * k * i / n;
      acc += x[static_cast<size_t>(i)] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[static_cast<size_t>(k)] = acc;
  }
  return out;
}

}  // namespace ksnet_tests

#endif  // KSNET_TESTS_HELPERS_TEST_SIGNALS_HPP_
