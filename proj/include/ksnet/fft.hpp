// ksnet/fft.hpp

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

#ifndef KSNET_FFT_HPP_
#define KSNET_FFT_HPP_

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <vector>

namespace ksnet {

// Real FFT front end over FFTW, templated on scalar type. Plans are cached
// per transform size behind a mutex; execution uses the new-array interface,
// which is thread safe. Plans are created with FFTW_UNALIGNED so cached plans
// accept any caller buffer.
//
// Conventions:
//   Forward:  X[k] = sum_n x[n] e^{-i 2 pi k n / N},  k = 0 .. N/2
//   Inverse:  exact inverse of Forward (the 1/N normalization is applied)
template <typename T>
struct Rfft;

namespace fft_detail {

template <typename Plan>
struct PlanCache {
  std::mutex mu;
  std::map<int, Plan> fwd, inv;
};

}  // namespace fft_detail

template <>
struct Rfft<double> {
  static void Forward(const double* in, std::complex<double>* out, int n) {
    fftw_execute_dft_r2c(FwdPlan(n), const_cast<double*>(in),
                         reinterpret_cast<fftw_complex*>(out));
  }

  static void Inverse(const std::complex<double>* in, double* out, int n) {
    // c2r clobbers its input, so run from a scratch copy.
    std::vector<std::complex<double>> tmp(in, in + n / 2 + 1);
    fftw_execute_dft_c2r(InvPlan(n), reinterpret_cast<fftw_complex*>(tmp.data()), out);
    const double scale = 1.0 / n;
    for (int i = 0; i < n; ++i) out[i] *= scale;
  }

 private:
  static fft_detail::PlanCache<fftw_plan>& Cache() {
    static fft_detail::PlanCache<fftw_plan> c;
    return c;
  }

  static fftw_plan FwdPlan(int n) {
    auto& c = Cache();
    std::lock_guard<std::mutex> lock(c.mu);
    auto it = c.fwd.find(n);
    if (it != c.fwd.end()) return it->second;
    std::vector<double> rbuf(static_cast<size_t>(n));
    std::vector<std::complex<double>> cbuf(static_cast<size_t>(n / 2 + 1));
    fftw_plan p = fftw_plan_dft_r2c_1d(n, rbuf.data(),
                                       reinterpret_cast<fftw_complex*>(cbuf.data()),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
    c.fwd.emplace(n, p);
    return p;
  }

  static fftw_plan InvPlan(int n) {
    auto& c = Cache();
    std::lock_guard<std::mutex> lock(c.mu);
    auto it = c.inv.find(n);
    if (it != c.inv.end()) return it->second;
    std::vector<std::complex<double>> cbuf(static_cast<size_t>(n / 2 + 1));
    std::vector<double> rbuf(static_cast<size_t>(n));
    fftw_plan p = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(cbuf.data()),
                                       rbuf.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    c.inv.emplace(n, p);
    return p;
  }
};

template <>
struct Rfft<float> {
  static void Forward(const float* in, std::complex<float>* out, int n) {
    fftwf_execute_dft_r2c(FwdPlan(n), const_cast<float*>(in),
                          reinterpret_cast<fftwf_complex*>(out));
  }

  static void Inverse(const std::complex<float>* in, float* out, int n) {
    std::vector<std::complex<float>> tmp(in, in + n / 2 + 1);
    fftwf_execute_dft_c2r(InvPlan(n), reinterpret_cast<fftwf_complex*>(tmp.data()), out);
    const float scale = 1.0f / n;
    for (int i = 0; i < n; ++i) out[i] *= scale;
  }

 private:
  static fft_detail::PlanCache<fftwf_plan>& Cache() {
    static fft_detail::PlanCache<fftwf_plan> c;
    return c;
  }

  static fftwf_plan FwdPlan(int n) {
    auto& c = Cache();
    std::lock_guard<std::mutex> lock(c.mu);
    auto it = c.fwd.find(n);
    if (it != c.fwd.end()) return it->second;
    std::vector<float> rbuf(static_cast<size_t>(n));
    std::vector<std::complex<float>> cbuf(static_cast<size_t>(n / 2 + 1));
    fftwf_plan p = fftwf_plan_dft_r2c_1d(n, rbuf.data(),
                                         reinterpret_cast<fftwf_complex*>(cbuf.data()),
                                         FFTW_ESTIMATE | FFTW_UNALIGNED);
    c.fwd.emplace(n, p);
    return p;
  }

  static fftwf_plan InvPlan(int n) {
    auto& c = Cache();
    std::lock_guard<std::mutex> lock(c.mu);
    auto it = c.inv.find(n);
    if (it != c.inv.end()) return it->second;
    std::vector<std::complex<float>> cbuf(static_cast<size_t>(n / 2 + 1));
    std::vector<float> rbuf(static_cast<size_t>(n));
    fftwf_plan p = fftwf_plan_dft_c2r_1d(n, reinterpret_cast<fftwf_complex*>(cbuf.data()),
                                         rbuf.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    c.inv.emplace(n, p);
    return p;
  }
};

}  // namespace ksnet

#endif  // KSNET_FFT_HPP_
