// ksnet/nn/ops.hpp

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

// Structured ops: 2-D convolution (im2col + GEMM), frequency upsampling,
// depthwise temporal convolution, layer norm, and the complex-spectrum
// helpers used by the enhancement pipelines.

#ifndef KSNET_NN_OPS_HPP_
#define KSNET_NN_OPS_HPP_

#include <cmath>

#include "ksnet/nn/autodiff.hpp"

namespace ksnet::nn {

struct Conv2dSpec {
  int stride_t = 1, stride_f = 1;
  int dil_t = 1, dil_f = 1;
  int pad_t_lo = 0, pad_t_hi = 0;
  int pad_f_lo = 0, pad_f_hi = 0;

  int64_t OutT(int64_t t, int64_t k) const {
    return (t + pad_t_lo + pad_t_hi - dil_t * (k - 1) - 1) / stride_t + 1;
  }
  int64_t OutF(int64_t f, int64_t k) const {
    return (f + pad_f_lo + pad_f_hi - dil_f * (k - 1) - 1) / stride_f + 1;
  }
};

namespace conv_detail {

// Gathers one chunk of output rows [t0, t1) into a K x (nt * F_out) matrix,
// K = Cin * kT * kF.
template <typename T>
void Im2Col(const Tensor<T>& x, const Conv2dSpec& s, int64_t kt, int64_t kf, int64_t f_out,
            int64_t t0, int64_t t1, T* col) {
  const int64_t cin = x.dim(0), t_in = x.dim(1), f_in = x.dim(2);
  const int64_t n = (t1 - t0) * f_out;
  int64_t r = 0;
  for (int64_t c = 0; c < cin; ++c) {
    for (int64_t i = 0; i < kt; ++i) {
      for (int64_t j = 0; j < kf; ++j, ++r) {
        T* dst = col + r * n;
        for (int64_t t = t0; t < t1; ++t) {
          const int64_t ti = t * s.stride_t - s.pad_t_lo + i * s.dil_t;
          if (ti < 0 || ti >= t_in) {
            for (int64_t f = 0; f < f_out; ++f) *dst++ = T(0);
            continue;
          }
          const T* src = x.data() + (c * t_in + ti) * f_in;
          for (int64_t f = 0; f < f_out; ++f) {
            const int64_t fi = f * s.stride_f - s.pad_f_lo + j * s.dil_f;
            *dst++ = (fi < 0 || fi >= f_in) ? T(0) : src[fi];
          }
        }
      }
    }
  }
}

// Scatter-add transpose of Im2Col.
template <typename T>
void Col2Im(const T* col, const Conv2dSpec& s, int64_t kt, int64_t kf, int64_t f_out,
            int64_t t0, int64_t t1, Tensor<T>& gx) {
  const int64_t cin = gx.dim(0), t_in = gx.dim(1), f_in = gx.dim(2);
  const int64_t n = (t1 - t0) * f_out;
  int64_t r = 0;
  for (int64_t c = 0; c < cin; ++c) {
    for (int64_t i = 0; i < kt; ++i) {
      for (int64_t j = 0; j < kf; ++j, ++r) {
        const T* src = col + r * n;
        for (int64_t t = t0; t < t1; ++t) {
          const int64_t ti = t * s.stride_t - s.pad_t_lo + i * s.dil_t;
          if (ti < 0 || ti >= t_in) {
            src += f_out;
            continue;
          }
          T* dst = gx.data() + (c * t_in + ti) * f_in;
          for (int64_t f = 0; f < f_out; ++f) {
            const int64_t fi = f * s.stride_f - s.pad_f_lo + j * s.dil_f;
            if (fi >= 0 && fi < f_in) dst[fi] += src[f];
          }
          src += f_out;
        }
      }
    }
  }
}

}  // namespace conv_detail

// x (Cin, T, F), w (Cout, Cin, kT, kF), b (Cout) or undefined.
template <typename T>
Var<T> Conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, const Conv2dSpec& spec) {
  KSNET_CHECK_VALID(x.rank() == 3 && w.rank() == 4, "conv2d: expects (C,T,F) and 4-D kernel");
  KSNET_CHECK_VALID(x.dim(0) == w.dim(1), "conv2d: input channel mismatch");
  const int64_t cout = w.dim(0), cin = w.dim(1), kt = w.dim(2), kf = w.dim(3);
  const int64_t t_out = spec.OutT(x.dim(1), kt);
  const int64_t f_out = spec.OutF(x.dim(2), kf);
  KSNET_CHECK_VALID(t_out > 0 && f_out > 0, "conv2d: empty output");
  const int64_t k = cin * kt * kf;

  // Chunk over output frames to bound the im2col buffer.
  const int64_t chunk = std::max<int64_t>(1, (1 << 21) / std::max<int64_t>(1, k * f_out));

  Tensor<T> out({cout, t_out, f_out});
  std::vector<T> col;
  for (int64_t t0 = 0; t0 < t_out; t0 += chunk) {
    const int64_t t1 = std::min(t_out, t0 + chunk);
    const int64_t n = (t1 - t0) * f_out;
    col.assign(static_cast<size_t>(k * n), T(0));
    conv_detail::Im2Col(x.value(), spec, kt, kf, f_out, t0, t1, col.data());
    MapCM<T> wm(w.value().data(), cout, k);
    MapCM<T> cm(col.data(), k, n);
    for (int64_t c = 0; c < cout; ++c) {
      Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> orow(out.data() + (c * t_out + t0) * f_out, n);
      orow.noalias() = wm.row(c) * cm;
    }
    if (b.defined()) {
      for (int64_t c = 0; c < cout; ++c) {
        T* dst = out.data() + (c * t_out + t0) * f_out;
        const T bv = b.value()[c];
        for (int64_t i = 0; i < n; ++i) dst[i] += bv;
      }
    }
  }

  auto* px = x.node().get();
  auto* pw = w.node().get();
  auto* pb = b.defined() ? b.node().get() : nullptr;
  std::vector<Var<T>> parents{x, w};
  if (b.defined()) parents.push_back(b);

  return ag_detail::MakeOp<T>(
      std::move(out), parents,
      [px, pw, pb, spec, kt, kf, cout, k, t_out, f_out, chunk](VarNode<T>& node) {
        std::vector<T> col, gcol;
        if (px->requires_grad) px->EnsureGrad();
        if (pw->requires_grad) pw->EnsureGrad();
        if (pb && pb->requires_grad) pb->EnsureGrad();
        for (int64_t t0 = 0; t0 < t_out; t0 += chunk) {
          const int64_t t1 = std::min(t_out, t0 + chunk);
          const int64_t n = (t1 - t0) * f_out;

          // gy chunk as (cout, n), gathered from the (cout, t_out, f_out) grad.
          MatRM<T> gy(cout, n);
          for (int64_t c = 0; c < cout; ++c) {
            const T* src = node.grad.data() + (c * t_out + t0) * f_out;
            std::copy(src, src + n, gy.data() + c * n);
          }

          if (pw->requires_grad || pb) {
            col.assign(static_cast<size_t>(k * n), T(0));
            conv_detail::Im2Col(px->value, spec, kt, kf, f_out, t0, t1, col.data());
          }
          if (pw->requires_grad) {
            MapCM<T> cm(col.data(), k, n);
            MapM<T> gw(pw->grad.data(), cout, k);
            gw.noalias() += gy * cm.transpose();
          }
          if (pb && pb->requires_grad) {
            for (int64_t c = 0; c < cout; ++c) {
              pb->grad[c] += gy.row(c).sum();
            }
          }
          if (px->requires_grad) {
            gcol.assign(static_cast<size_t>(k * n), T(0));
            MapCM<T> wm(pw->value.data(), cout, k);
            MapM<T> gc(gcol.data(), k, n);
            gc.noalias() = wm.transpose() * gy;
            conv_detail::Col2Im(gcol.data(), spec, kt, kf, f_out, t0, t1, px->grad);
          }
        }
      });
}

// Inserts factor-1 zeros after each frequency sample: (C,T,F) -> (C,T,F*factor).
// Combined with a stride-1 convolution this realizes a transposed frequency
// convolution with exact x-factor upsampling.
template <typename T>
Var<T> ZeroUpsampleFreq(const Var<T>& x, int factor) {
  KSNET_CHECK_VALID(x.rank() == 3, "zero_upsample: expects (C,T,F)");
  const int64_t c = x.dim(0), t = x.dim(1), f = x.dim(2);
  Tensor<T> out({c, t, f * factor});
  for (int64_t i = 0; i < c * t; ++i) {
    const T* src = x.value().data() + i * f;
    T* dst = out.data() + i * f * factor;
    for (int64_t j = 0; j < f; ++j) dst[j * factor] = src[j];
  }
  auto* px = x.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {x}, [px, c, t, f, factor](VarNode<T>& n) {
    if (!px->requires_grad) return;
    Tensor<T> g({c, t, f});
    for (int64_t i = 0; i < c * t; ++i) {
      const T* src = n.grad.data() + i * f * factor;
      T* dst = g.data() + i * f;
      for (int64_t j = 0; j < f; ++j) dst[j] = src[j * factor];
    }
    ag_detail::Accumulate(px, g);
  });
}

// Per-channel temporal convolution on (T, H) features: kernel (H, k),
// optional bias (H), dilation d. Causal mode pads on the left only.
template <typename T>
Var<T> DepthwiseTemporalConv(const Var<T>& x, const Var<T>& w, const Var<T>& b, int dilation,
                             bool causal) {
  KSNET_CHECK_VALID(x.rank() == 2 && w.rank() == 2 && x.dim(1) == w.dim(0),
                    "depthwise conv: shape mismatch");
  const int64_t t_len = x.dim(0), h = x.dim(1), k = w.dim(1);
  const int64_t span = dilation * (k - 1);
  const int64_t pad_lo = causal ? span : span / 2;

  Tensor<T> out({t_len, h});
  for (int64_t t = 0; t < t_len; ++t) {
    for (int64_t j = 0; j < k; ++j) {
      const int64_t ti = t - pad_lo + j * dilation;
      if (ti < 0 || ti >= t_len) continue;
      const T* src = x.value().data() + ti * h;
      T* dst = out.data() + t * h;
      const T* wj = w.value().data();
      for (int64_t c = 0; c < h; ++c) dst[c] += src[c] * wj[c * k + j];
    }
    if (b.defined()) {
      T* dst = out.data() + t * h;
      for (int64_t c = 0; c < h; ++c) dst[c] += b.value()[c];
    }
  }

  auto* px = x.node().get();
  auto* pw = w.node().get();
  auto* pb = b.defined() ? b.node().get() : nullptr;
  std::vector<Var<T>> parents{x, w};
  if (b.defined()) parents.push_back(b);

  return ag_detail::MakeOp<T>(
      std::move(out), parents, [px, pw, pb, t_len, h, k, dilation, pad_lo](VarNode<T>& n) {
        if (px->requires_grad) px->EnsureGrad();
        if (pw->requires_grad) pw->EnsureGrad();
        if (pb && pb->requires_grad) pb->EnsureGrad();
        for (int64_t t = 0; t < t_len; ++t) {
          const T* gy = n.grad.data() + t * h;
          for (int64_t j = 0; j < k; ++j) {
            const int64_t ti = t - pad_lo + j * dilation;
            if (ti < 0 || ti >= t_len) continue;
            if (px->requires_grad) {
              T* gx = px->grad.data() + ti * h;
              const T* wj = pw->value.data();
              for (int64_t c = 0; c < h; ++c) gx[c] += gy[c] * wj[c * k + j];
            }
            if (pw->requires_grad) {
              const T* xv = px->value.data() + ti * h;
              T* gw = pw->grad.data();
              for (int64_t c = 0; c < h; ++c) gw[c * k + j] += gy[c] * xv[c];
            }
          }
          if (pb && pb->requires_grad) {
            for (int64_t c = 0; c < h; ++c) pb->grad[c] += gy[c];
          }
        }
      });
}

// Layer normalization over the last axis with learnable gain/bias.
template <typename T>
Var<T> LayerNormLastDim(const Var<T>& x, const Var<T>& gain, const Var<T>& bias,
                        T eps = T(1e-5)) {
  const int64_t d = x.dim(x.rank() - 1);
  KSNET_CHECK_VALID(gain.size() == d && bias.size() == d, "layer_norm: affine size mismatch");
  const int64_t rows = x.size() / d;

  Tensor<T> out(x.shape());
  for (int64_t r = 0; r < rows; ++r) {
    const T* xr = x.value().data() + r * d;
    T* yr = out.data() + r * d;
    T mu = T(0);
    for (int64_t i = 0; i < d; ++i) mu += xr[i];
    mu /= static_cast<T>(d);
    T var = T(0);
    for (int64_t i = 0; i < d; ++i) var += (xr[i] - mu) * (xr[i] - mu);
    var /= static_cast<T>(d);
    const T inv = T(1) / std::sqrt(var + eps);
    for (int64_t i = 0; i < d; ++i) {
      yr[i] = (xr[i] - mu) * inv * gain.value()[i] + bias.value()[i];
    }
  }

  auto* px = x.node().get();
  auto* pg = gain.node().get();
  auto* pb = bias.node().get();
  return ag_detail::MakeOp<T>(
      std::move(out), {x, gain, bias}, [px, pg, pb, rows, d, eps](VarNode<T>& n) {
        if (px->requires_grad) px->EnsureGrad();
        if (pg->requires_grad) pg->EnsureGrad();
        if (pb->requires_grad) pb->EnsureGrad();
        std::vector<T> xhat(static_cast<size_t>(d));
        for (int64_t r = 0; r < rows; ++r) {
          const T* xr = px->value.data() + r * d;
          const T* gy = n.grad.data() + r * d;
          T mu = T(0);
          for (int64_t i = 0; i < d; ++i) mu += xr[i];
          mu /= static_cast<T>(d);
          T var = T(0);
          for (int64_t i = 0; i < d; ++i) var += (xr[i] - mu) * (xr[i] - mu);
          var /= static_cast<T>(d);
          const T inv = T(1) / std::sqrt(var + eps);
          T dot1 = T(0), dot2 = T(0);
          for (int64_t i = 0; i < d; ++i) {
            xhat[static_cast<size_t>(i)] = (xr[i] - mu) * inv;
            const T dxh = gy[i] * pg->value[i];
            dot1 += dxh;
            dot2 += dxh * xhat[static_cast<size_t>(i)];
          }
          dot1 /= static_cast<T>(d);
          dot2 /= static_cast<T>(d);
          if (px->requires_grad) {
            T* gx = px->grad.data() + r * d;
            for (int64_t i = 0; i < d; ++i) {
              const T dxh = gy[i] * pg->value[i];
              gx[i] += inv * (dxh - dot1 - xhat[static_cast<size_t>(i)] * dot2);
            }
          }
          if (pg->requires_grad) {
            for (int64_t i = 0; i < d; ++i) pg->grad[i] += gy[i] * xhat[static_cast<size_t>(i)];
          }
          if (pb->requires_grad) {
            for (int64_t i = 0; i < d; ++i) pb->grad[i] += gy[i];
          }
        }
      });
}

// Magnitude of an (..., 2) real/imag tensor: sqrt(re^2 + im^2 + eps^2).
template <typename T>
Var<T> ComplexMagnitude(const Var<T>& spec, T eps = T(1e-9)) {
  KSNET_CHECK_VALID(spec.dim(spec.rank() - 1) == 2, "magnitude: trailing dim must be 2");
  std::vector<int64_t> shape = spec.shape();
  shape.pop_back();
  const int64_t n = spec.size() / 2;
  Tensor<T> out(shape);
  for (int64_t i = 0; i < n; ++i) {
    const T re = spec.value()[2 * i], im = spec.value()[2 * i + 1];
    out[i] = std::sqrt(re * re + im * im + eps * eps);
  }
  auto* ps = spec.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {spec}, [ps, n](VarNode<T>& node) {
    if (!ps->requires_grad) return;
    Tensor<T> g(ps->value.shape());
    for (int64_t i = 0; i < n; ++i) {
      const T re = ps->value[2 * i], im = ps->value[2 * i + 1];
      const T m = node.value[i];
      g[2 * i] = node.grad[i] * re / m;
      g[2 * i + 1] = node.grad[i] * im / m;
    }
    ag_detail::Accumulate(ps, g);
  });
}

// Applies a real gain per (t, f) cell to a complex (T, F, 2) spectrum.
template <typename T>
Var<T> ScaleComplex(const Var<T>& spec, const Var<T>& gains) {
  KSNET_CHECK_VALID(spec.rank() == 3 && spec.dim(2) == 2 && gains.rank() == 2 &&
                        spec.dim(0) == gains.dim(0) && spec.dim(1) == gains.dim(1),
                    "scale_complex: shape mismatch");
  const int64_t n = gains.size();
  Tensor<T> out(spec.shape());
  for (int64_t i = 0; i < n; ++i) {
    out[2 * i] = spec.value()[2 * i] * gains.value()[i];
    out[2 * i + 1] = spec.value()[2 * i + 1] * gains.value()[i];
  }
  auto* ps = spec.node().get();
  auto* pg = gains.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {spec, gains}, [ps, pg, n](VarNode<T>& node) {
    if (ps->requires_grad) {
      Tensor<T> g(ps->value.shape());
      for (int64_t i = 0; i < n; ++i) {
        g[2 * i] = node.grad[2 * i] * pg->value[i];
        g[2 * i + 1] = node.grad[2 * i + 1] * pg->value[i];
      }
      ag_detail::Accumulate(ps, g);
    }
    if (pg->requires_grad) {
      Tensor<T> g(pg->value.shape());
      for (int64_t i = 0; i < n; ++i) {
        g[i] = node.grad[2 * i] * ps->value[2 * i] + node.grad[2 * i + 1] * ps->value[2 * i + 1];
      }
      ag_detail::Accumulate(pg, g);
    }
  });
}

}  // namespace ksnet::nn

#endif  // KSNET_NN_OPS_HPP_
