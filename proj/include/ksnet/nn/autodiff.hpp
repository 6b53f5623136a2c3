// ksnet/nn/autodiff.hpp

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

// Reverse-mode automatic differentiation over Tensor<T>. Dynamic tape: each
// op records its parents and a pull-style backward closure. Backward
// closures capture raw parent-node pointers (kept alive by the child's
// parent list) and value-copied tensors only, so graphs cannot form
// reference cycles.

#ifndef KSNET_NN_AUTODIFF_HPP_
#define KSNET_NN_AUTODIFF_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "ksnet/tensor.hpp"

namespace ksnet::nn {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapM = Eigen::Map<MatRM<T>>;
template <typename T>
using MapCM = Eigen::Map<const MatRM<T>>;

inline thread_local bool g_grad_enabled = true;
inline thread_local uint64_t g_node_counter = 0;

struct NoGradGuard {
  bool prev;
  NoGradGuard() : prev(g_grad_enabled) { g_grad_enabled = false; }
  ~NoGradGuard() { g_grad_enabled = prev; }
};

template <typename T>
struct VarNode {
  Tensor<T> value;
  Tensor<T> grad;
  bool requires_grad = false;
  uint64_t order = 0;
  std::vector<std::shared_ptr<VarNode<T>>> parents;
  std::function<void(VarNode<T>&)> backward;

  void EnsureGrad() {
    if (grad.empty()) grad = Tensor<T>(value.shape());
  }
};

template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(Tensor<T> value, bool requires_grad = false)
      : node_(std::make_shared<VarNode<T>>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
    node_->order = ++g_node_counter;
  }

  bool defined() const { return node_ != nullptr; }
  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& mutable_value() { return node_->value; }
  Tensor<T>& grad() { return node_->grad; }
  const Tensor<T>& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  void ZeroGrad() {
    if (node_ && !node_->grad.empty()) node_->grad.Fill(T(0));
  }

  std::shared_ptr<VarNode<T>> node() const { return node_; }

  const Tensor<T>::Shape& shape() const { return node_->value.shape(); }
  int64_t dim(int i) const { return node_->value.dim(i); }
  int rank() const { return node_->value.rank(); }
  int64_t size() const { return node_->value.size(); }

  T item() const {
    KSNET_CHECK_VALID(node_->value.size() == 1, "item(): tensor is not a scalar");
    return node_->value[0];
  }

 private:
  std::shared_ptr<VarNode<T>> node_;
};

namespace ag_detail {

template <typename T>
Var<T> MakeOp(Tensor<T> value, std::vector<Var<T>> parents,
              std::function<void(VarNode<T>&)> backward) {
  Var<T> out(std::move(value), false);
  bool need = false;
  if (g_grad_enabled) {
    for (const auto& p : parents) need = need || p.requires_grad();
  }
  if (need) {
    auto n = out.node();
    n->requires_grad = true;
    for (auto& p : parents) n->parents.push_back(p.node());
    n->backward = std::move(backward);
  }
  return out;
}

template <typename T>
void Accumulate(VarNode<T>* p, const Tensor<T>& g) {
  if (!p->requires_grad) return;
  p->EnsureGrad();
  p->grad.Add(g);
}

}  // namespace ag_detail

// Runs reverse-mode accumulation from a scalar loss. Gradients accumulate
// into every reachable node with requires_grad set.
template <typename T>
void Backward(const Var<T>& loss) {
  KSNET_CHECK_VALID(loss.size() == 1, "backward: loss must be scalar");
  if (!loss.requires_grad()) return;

  std::vector<VarNode<T>*> topo;
  std::unordered_set<VarNode<T>*> seen;
  std::vector<VarNode<T>*> stack{loss.node().get()};
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    VarNode<T>* n = stack.back();
    stack.pop_back();
    topo.push_back(n);
    for (const auto& p : n->parents) {
      if (p->requires_grad && !seen.count(p.get())) {
        seen.insert(p.get());
        stack.push_back(p.get());
      }
    }
  }
  std::sort(topo.begin(), topo.end(),
            [](const VarNode<T>* a, const VarNode<T>* b) { return a->order > b->order; });

  loss.node()->EnsureGrad();
  loss.node()->grad[0] += T(1);
  for (VarNode<T>* n : topo) {
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

// ---------------------------------------------------------------------------
// Elementwise and scalar ops
// ---------------------------------------------------------------------------

template <typename T>
Var<T> Add(const Var<T>& a, const Var<T>& b) {
  KSNET_CHECK_VALID(a.value().SameShape(b.value()), "add: shape mismatch");
  Tensor<T> out = a.value();
  out.Add(b.value());
  auto* pa = a.node().get();
  auto* pb = b.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a, b}, [pa, pb](VarNode<T>& n) {
    ag_detail::Accumulate(pa, n.grad);
    ag_detail::Accumulate(pb, n.grad);
  });
}

template <typename T>
Var<T> Sub(const Var<T>& a, const Var<T>& b) {
  KSNET_CHECK_VALID(a.value().SameShape(b.value()), "sub: shape mismatch");
  Tensor<T> out = a.value();
  for (int64_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  auto* pa = a.node().get();
  auto* pb = b.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a, b}, [pa, pb](VarNode<T>& n) {
    ag_detail::Accumulate(pa, n.grad);
    if (pb->requires_grad) {
      Tensor<T> g(n.grad.shape());
      for (int64_t i = 0; i < g.size(); ++i) g[i] = -n.grad[i];
      ag_detail::Accumulate(pb, g);
    }
  });
}

template <typename T>
Var<T> Mul(const Var<T>& a, const Var<T>& b) {
  KSNET_CHECK_VALID(a.value().SameShape(b.value()), "mul: shape mismatch");
  Tensor<T> out(a.value().shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  auto* pa = a.node().get();
  auto* pb = b.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a, b}, [pa, pb](VarNode<T>& n) {
    if (pa->requires_grad) {
      Tensor<T> g(n.grad.shape());
      for (int64_t i = 0; i < g.size(); ++i) g[i] = n.grad[i] * pb->value[i];
      ag_detail::Accumulate(pa, g);
    }
    if (pb->requires_grad) {
      Tensor<T> g(n.grad.shape());
      for (int64_t i = 0; i < g.size(); ++i) g[i] = n.grad[i] * pa->value[i];
      ag_detail::Accumulate(pb, g);
    }
  });
}

template <typename T>
Var<T> Div(const Var<T>& a, const Var<T>& b) {
  KSNET_CHECK_VALID(a.value().SameShape(b.value()), "div: shape mismatch");
  Tensor<T> out(a.value().shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] / b.value()[i];
  auto* pa = a.node().get();
  auto* pb = b.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a, b}, [pa, pb](VarNode<T>& n) {
    if (pa->requires_grad) {
      Tensor<T> g(n.grad.shape());
      for (int64_t i = 0; i < g.size(); ++i) g[i] = n.grad[i] / pb->value[i];
      ag_detail::Accumulate(pa, g);
    }
    if (pb->requires_grad) {
      Tensor<T> g(n.grad.shape());
      for (int64_t i = 0; i < g.size(); ++i) {
        g[i] = -n.grad[i] * pa->value[i] / (pb->value[i] * pb->value[i]);
      }
      ag_detail::Accumulate(pb, g);
    }
  });
}

template <typename T>
Var<T> AddScalar(const Var<T>& a, T s) {
  Tensor<T> out = a.value();
  for (int64_t i = 0; i < out.size(); ++i) out[i] += s;
  auto* pa = a.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a}, [pa](VarNode<T>& n) {
    ag_detail::Accumulate(pa, n.grad);
  });
}

template <typename T>
Var<T> MulScalar(const Var<T>& a, T s) {
  Tensor<T> out = a.value();
  for (int64_t i = 0; i < out.size(); ++i) out[i] *= s;
  auto* pa = a.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a}, [pa, s](VarNode<T>& n) {
    if (!pa->requires_grad) return;
    Tensor<T> g(n.grad.shape());
    for (int64_t i = 0; i < g.size(); ++i) g[i] = n.grad[i] * s;
    ag_detail::Accumulate(pa, g);
  });
}

template <typename T>
Var<T> Square(const Var<T>& a) {
  Tensor<T> out(a.value().shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * a.value()[i];
  auto* pa = a.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a}, [pa](VarNode<T>& n) {
    if (!pa->requires_grad) return;
    Tensor<T> g(n.grad.shape());
    for (int64_t i = 0; i < g.size(); ++i) g[i] = T(2) * pa->value[i] * n.grad[i];
    ag_detail::Accumulate(pa, g);
  });
}

template <typename T>
Var<T> Abs(const Var<T>& a) {
  Tensor<T> out(a.value().shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = std::abs(a.value()[i]);
  auto* pa = a.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a}, [pa](VarNode<T>& n) {
    if (!pa->requires_grad) return;
    Tensor<T> g(n.grad.shape());
    for (int64_t i = 0; i < g.size(); ++i) {
      const T v = pa->value[i];
      g[i] = n.grad[i] * (v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0)));
    }
    ag_detail::Accumulate(pa, g);
  });
}

// sqrt(x + eps), defined and smooth at x = 0 for eps > 0.
template <typename T>
Var<T> SqrtEps(const Var<T>& a, T eps) {
  Tensor<T> out(a.value().shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(a.value()[i] + eps);
  auto* pa = a.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a}, [pa](VarNode<T>& n) {
    if (!pa->requires_grad) return;
    Tensor<T> g(n.grad.shape());
    for (int64_t i = 0; i < g.size(); ++i) g[i] = n.grad[i] / (T(2) * n.value[i]);
    ag_detail::Accumulate(pa, g);
  });
}

// log(x + eps)
template <typename T>
Var<T> LogEps(const Var<T>& a, T eps) {
  Tensor<T> out(a.value().shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = std::log(a.value()[i] + eps);
  auto* pa = a.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a}, [pa, eps](VarNode<T>& n) {
    if (!pa->requires_grad) return;
    Tensor<T> g(n.grad.shape());
    for (int64_t i = 0; i < g.size(); ++i) g[i] = n.grad[i] / (pa->value[i] + eps);
    ag_detail::Accumulate(pa, g);
  });
}

// (x + eps)^p
template <typename T>
Var<T> PowScalar(const Var<T>& a, T p, T eps = T(0)) {
  Tensor<T> out(a.value().shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = std::pow(a.value()[i] + eps, p);
  auto* pa = a.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a}, [pa, p, eps](VarNode<T>& n) {
    if (!pa->requires_grad) return;
    Tensor<T> g(n.grad.shape());
    for (int64_t i = 0; i < g.size(); ++i) {
      g[i] = n.grad[i] * p * std::pow(pa->value[i] + eps, p - T(1));
    }
    ag_detail::Accumulate(pa, g);
  });
}

template <typename T>
Var<T> Sigmoid(const Var<T>& a) {
  Tensor<T> out(a.value().shape());
  for (int64_t i = 0; i < out.size(); ++i) {
    const T v = a.value()[i];
    out[i] = v >= T(0) ? T(1) / (T(1) + std::exp(-v))
                       : std::exp(v) / (T(1) + std::exp(v));
  }
  auto* pa = a.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a}, [pa](VarNode<T>& n) {
    if (!pa->requires_grad) return;
    Tensor<T> g(n.grad.shape());
    for (int64_t i = 0; i < g.size(); ++i) {
      g[i] = n.grad[i] * n.value[i] * (T(1) - n.value[i]);
    }
    ag_detail::Accumulate(pa, g);
  });
}

template <typename T>
Var<T> Tanh(const Var<T>& a) {
  Tensor<T> out(a.value().shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = std::tanh(a.value()[i]);
  auto* pa = a.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a}, [pa](VarNode<T>& n) {
    if (!pa->requires_grad) return;
    Tensor<T> g(n.grad.shape());
    for (int64_t i = 0; i < g.size(); ++i) {
      g[i] = n.grad[i] * (T(1) - n.value[i] * n.value[i]);
    }
    ag_detail::Accumulate(pa, g);
  });
}

template <typename T>
Var<T> Elu(const Var<T>& a) {
  Tensor<T> out(a.value().shape());
  for (int64_t i = 0; i < out.size(); ++i) {
    const T v = a.value()[i];
    out[i] = v > T(0) ? v : std::exp(v) - T(1);
  }
  auto* pa = a.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a}, [pa](VarNode<T>& n) {
    if (!pa->requires_grad) return;
    Tensor<T> g(n.grad.shape());
    for (int64_t i = 0; i < g.size(); ++i) {
      g[i] = n.grad[i] * (pa->value[i] > T(0) ? T(1) : n.value[i] + T(1));
    }
    ag_detail::Accumulate(pa, g);
  });
}

template <typename T>
Var<T> LeakyRelu(const Var<T>& a, T slope) {
  Tensor<T> out(a.value().shape());
  for (int64_t i = 0; i < out.size(); ++i) {
    const T v = a.value()[i];
    out[i] = v > T(0) ? v : slope * v;
  }
  auto* pa = a.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a}, [pa, slope](VarNode<T>& n) {
    if (!pa->requires_grad) return;
    Tensor<T> g(n.grad.shape());
    for (int64_t i = 0; i < g.size(); ++i) {
      g[i] = n.grad[i] * (pa->value[i] > T(0) ? T(1) : slope);
    }
    ag_detail::Accumulate(pa, g);
  });
}

template <typename T>
Var<T> Detach(const Var<T>& a) {
  return Var<T>(a.value(), false);
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

template <typename T>
Var<T> Sum(const Var<T>& a) {
  Tensor<T> out({1});
  T acc = T(0);
  for (int64_t i = 0; i < a.size(); ++i) acc += a.value()[i];
  out[0] = acc;
  auto* pa = a.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a}, [pa](VarNode<T>& n) {
    if (!pa->requires_grad) return;
    Tensor<T> g = Tensor<T>::Full(pa->value.shape(), n.grad[0]);
    ag_detail::Accumulate(pa, g);
  });
}

template <typename T>
Var<T> Mean(const Var<T>& a) {
  const T scale = T(1) / static_cast<T>(a.size());
  return MulScalar(Sum(a), scale);
}

// ---------------------------------------------------------------------------
// Shape ops
// ---------------------------------------------------------------------------

template <typename T>
Var<T> Reshape(const Var<T>& a, typename Tensor<T>::Shape shape) {
  Tensor<T> out = a.value().Reshaped(shape);
  auto* pa = a.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a}, [pa](VarNode<T>& n) {
    if (!pa->requires_grad) return;
    ag_detail::Accumulate(pa, n.grad.Reshaped(pa->value.shape()));
  });
}

namespace ag_detail {

inline std::vector<int64_t> Strides(const std::vector<int64_t>& shape) {
  std::vector<int64_t> s(shape.size());
  int64_t acc = 1;
  for (int i = static_cast<int>(shape.size()) - 1; i >= 0; --i) {
    s[static_cast<size_t>(i)] = acc;
    acc *= shape[static_cast<size_t>(i)];
  }
  return s;
}

template <typename T>
Tensor<T> PermuteTensor(const Tensor<T>& x, const std::vector<int>& perm) {
  const auto& shape = x.shape();
  std::vector<int64_t> out_shape(shape.size());
  for (size_t i = 0; i < perm.size(); ++i) {
    out_shape[i] = shape[static_cast<size_t>(perm[i])];
  }
  Tensor<T> out(out_shape);
  const auto in_strides = Strides(shape);
  const auto out_strides = Strides(out_shape);
  const int rank = x.rank();
  std::vector<int64_t> idx(static_cast<size_t>(rank), 0);
  for (int64_t flat = 0; flat < x.size(); ++flat) {
    int64_t rem = flat;
    int64_t dst = 0;
    for (int d = 0; d < rank; ++d) {
      const int64_t c = rem / in_strides[static_cast<size_t>(d)];
      rem -= c * in_strides[static_cast<size_t>(d)];
      // position of input axis d in the output ordering
      for (int o = 0; o < rank; ++o) {
        if (perm[static_cast<size_t>(o)] == d) {
          dst += c * out_strides[static_cast<size_t>(o)];
          break;
        }
      }
    }
    out[dst] = x[flat];
  }
  return out;
}

inline std::vector<int> InversePerm(const std::vector<int>& perm) {
  std::vector<int> inv(perm.size());
  for (size_t i = 0; i < perm.size(); ++i) inv[static_cast<size_t>(perm[i])] = static_cast<int>(i);
  return inv;
}

}  // namespace ag_detail

template <typename T>
Var<T> Permute(const Var<T>& a, std::vector<int> perm) {
  KSNET_CHECK_VALID(static_cast<int>(perm.size()) == a.rank(), "permute: rank mismatch");
  Tensor<T> out = ag_detail::PermuteTensor(a.value(), perm);
  auto* pa = a.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a}, [pa, perm](VarNode<T>& n) {
    if (!pa->requires_grad) return;
    ag_detail::Accumulate(pa, ag_detail::PermuteTensor(n.grad, ag_detail::InversePerm(perm)));
  });
}

// Concatenation along an arbitrary axis.
template <typename T>
Var<T> Concat(const std::vector<Var<T>>& xs, int axis) {
  KSNET_CHECK_VALID(!xs.empty(), "concat: empty input list");
  const int rank = xs[0].rank();
  KSNET_CHECK_VALID(axis >= 0 && axis < rank, "concat: bad axis");
  std::vector<int64_t> shape = xs[0].shape();
  int64_t total_axis = 0;
  for (const auto& x : xs) {
    KSNET_CHECK_VALID(x.rank() == rank, "concat: rank mismatch");
    for (int d = 0; d < rank; ++d) {
      if (d != axis) {
        KSNET_CHECK_VALID(x.dim(d) == shape[static_cast<size_t>(d)], "concat: shape mismatch");
      }
    }
    total_axis += x.dim(axis);
  }
  shape[static_cast<size_t>(axis)] = total_axis;

  // outer = product of dims before axis; inner = product after.
  int64_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= xs[0].dim(d);
  for (int d = axis + 1; d < rank; ++d) inner *= xs[0].dim(d);

  Tensor<T> out(shape);
  int64_t offset = 0;
  for (const auto& x : xs) {
    const int64_t ax = x.dim(axis);
    for (int64_t o = 0; o < outer; ++o) {
      const T* src = x.value().data() + o * ax * inner;
      T* dst = out.data() + (o * total_axis + offset) * inner;
      std::copy(src, src + ax * inner, dst);
    }
    offset += ax;
  }

  std::vector<int64_t> axis_sizes;
  for (const auto& x : xs) axis_sizes.push_back(x.dim(axis));
  std::vector<VarNode<T>*> raw;
  for (const auto& x : xs) raw.push_back(x.node().get());

  return ag_detail::MakeOp<T>(
      std::move(out), xs, [raw, axis_sizes, outer, inner, total_axis](VarNode<T>& n) {
        int64_t offset = 0;
        for (size_t k = 0; k < raw.size(); ++k) {
          const int64_t ax = axis_sizes[k];
          if (raw[k]->requires_grad) {
            Tensor<T> g(raw[k]->value.shape());
            for (int64_t o = 0; o < outer; ++o) {
              const T* src = n.grad.data() + (o * total_axis + offset) * inner;
              T* dst = g.data() + o * ax * inner;
              std::copy(src, src + ax * inner, dst);
            }
            ag_detail::Accumulate(raw[k], g);
          }
          offset += ax;
        }
      });
}

template <typename T>
Var<T> Slice(const Var<T>& a, int axis, int64_t start, int64_t len) {
  const int rank = a.rank();
  KSNET_CHECK_VALID(axis >= 0 && axis < rank, "slice: bad axis");
  KSNET_CHECK_VALID(start >= 0 && start + len <= a.dim(axis), "slice: out of range");
  std::vector<int64_t> shape = a.shape();
  shape[static_cast<size_t>(axis)] = len;

  int64_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= a.dim(d);
  for (int d = axis + 1; d < rank; ++d) inner *= a.dim(d);
  const int64_t in_axis = a.dim(axis);

  Tensor<T> out(shape);
  for (int64_t o = 0; o < outer; ++o) {
    const T* src = a.value().data() + (o * in_axis + start) * inner;
    std::copy(src, src + len * inner, out.data() + o * len * inner);
  }

  auto* pa = a.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a},
                              [pa, outer, inner, in_axis, start, len](VarNode<T>& n) {
                                if (!pa->requires_grad) return;
                                pa->EnsureGrad();
                                for (int64_t o = 0; o < outer; ++o) {
                                  const T* src = n.grad.data() + o * len * inner;
                                  T* dst = pa->grad.data() + (o * in_axis + start) * inner;
                                  for (int64_t i = 0; i < len * inner; ++i) dst[i] += src[i];
                                }
                              });
}

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

// y = x W^T + b over the last axis: x (..., in), w (out, in), b (out) or
// undefined for no bias.
template <typename T>
Var<T> Linear(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
  KSNET_CHECK_VALID(w.rank() == 2, "linear: weight must be 2-D");
  const int64_t in = w.dim(1);
  const int64_t out_dim = w.dim(0);
  KSNET_CHECK_VALID(x.dim(x.rank() - 1) == in, "linear: input feature mismatch");
  const int64_t rows = x.size() / in;

  std::vector<int64_t> out_shape = x.shape();
  out_shape.back() = out_dim;
  Tensor<T> out(out_shape);
  {
    MapCM<T> xm(x.value().data(), rows, in);
    MapCM<T> wm(w.value().data(), out_dim, in);
    MapM<T> om(out.data(), rows, out_dim);
    om.noalias() = xm * wm.transpose();
    if (b.defined()) {
      MapCM<T> bm(b.value().data(), 1, out_dim);
      om.rowwise() += bm.row(0);
    }
  }

  auto* px = x.node().get();
  auto* pw = w.node().get();
  auto* pb = b.defined() ? b.node().get() : nullptr;
  std::vector<Var<T>> parents{x, w};
  if (b.defined()) parents.push_back(b);

  return ag_detail::MakeOp<T>(
      std::move(out), parents, [px, pw, pb, rows, in, out_dim](VarNode<T>& n) {
        MapCM<T> gy(n.grad.data(), rows, out_dim);
        if (px->requires_grad) {
          px->EnsureGrad();
          MapCM<T> wm(pw->value.data(), out_dim, in);
          MapM<T> gx(px->grad.data(), rows, in);
          gx.noalias() += gy * wm;
        }
        if (pw->requires_grad) {
          pw->EnsureGrad();
          MapCM<T> xm(px->value.data(), rows, in);
          MapM<T> gw(pw->grad.data(), out_dim, in);
          gw.noalias() += gy.transpose() * xm;
        }
        if (pb && pb->requires_grad) {
          pb->EnsureGrad();
          MapM<T> gb(pb->grad.data(), 1, out_dim);
          gb.row(0) += gy.colwise().sum();
        }
      });
}

template <typename T>
Var<T> Matmul(const Var<T>& a, const Var<T>& b) {
  KSNET_CHECK_VALID(a.rank() == 2 && b.rank() == 2 && a.dim(1) == b.dim(0),
                    "matmul: incompatible shapes");
  const int64_t m = a.dim(0), k = a.dim(1), n_cols = b.dim(1);
  Tensor<T> out({m, n_cols});
  {
    MapCM<T> am(a.value().data(), m, k);
    MapCM<T> bm(b.value().data(), k, n_cols);
    MapM<T> om(out.data(), m, n_cols);
    om.noalias() = am * bm;
  }
  auto* pa = a.node().get();
  auto* pb = b.node().get();
  return ag_detail::MakeOp<T>(std::move(out), {a, b}, [pa, pb, m, k, n_cols](VarNode<T>& n) {
    MapCM<T> gy(n.grad.data(), m, n_cols);
    if (pa->requires_grad) {
      pa->EnsureGrad();
      MapCM<T> bm(pb->value.data(), k, n_cols);
      MapM<T> ga(pa->grad.data(), m, k);
      ga.noalias() += gy * bm.transpose();
    }
    if (pb->requires_grad) {
      pb->EnsureGrad();
      MapCM<T> am(pa->value.data(), m, k);
      MapM<T> gb(pb->grad.data(), k, n_cols);
      gb.noalias() += am.transpose() * gy;
    }
  });
}

}  // namespace ksnet::nn

#endif  // KSNET_NN_AUTODIFF_HPP_
