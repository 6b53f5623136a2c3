// ksnet/tensor.hpp

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

#ifndef KSNET_TENSOR_HPP_
#define KSNET_TENSOR_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ksnet/common.hpp"

namespace ksnet {

// Dense row-major tensor of rank <= 4 with value semantics. This is the
// storage type shared by the DSP front end and the network graph; anything
// matmul-shaped is mapped into Eigen at the point of use.
template <typename T>
class Tensor {
 public:
  using Shape = std::vector<int64_t>;

  Tensor() = default;

  explicit Tensor(Shape shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(NumElements(shape_)), T(0));
  }

  Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    KSNET_CHECK_VALID(static_cast<int64_t>(data_.size()) == NumElements(shape_),
                      "tensor data size does not match shape");
  }

  static Tensor Full(Shape shape, T value) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
  }

  static Tensor Randn(Shape shape, Rng& rng, T scale = T(1)) {
    Tensor t(std::move(shape));
    for (auto& v : t.data_) v = static_cast<T>(rng.Normal()) * scale;
    return t;
  }

  static Tensor RandUniform(Shape shape, Rng& rng, T lo, T hi) {
    Tensor t(std::move(shape));
    for (auto& v : t.data_) v = static_cast<T>(rng.Uniform(lo, hi));
    return t;
  }

  static int64_t NumElements(const Shape& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
  }

  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }
  int rank() const { return static_cast<int>(shape_.size()); }
  const Shape& shape() const { return shape_; }
  int64_t dim(int i) const { return shape_[static_cast<size_t>(i)]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& vec() { return data_; }
  const std::vector<T>& vec() const { return data_; }

  T& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  T& at(int64_t i) { return data_[static_cast<size_t>(i)]; }
  T& at(int64_t i, int64_t j) { return data_[static_cast<size_t>(i * shape_[1] + j)]; }
  T& at(int64_t i, int64_t j, int64_t k) {
    return data_[static_cast<size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }
  T& at(int64_t i, int64_t j, int64_t k, int64_t l) {
    return data_[static_cast<size_t>(((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l)];
  }
  const T& at(int64_t i) const { return data_[static_cast<size_t>(i)]; }
  const T& at(int64_t i, int64_t j) const {
    return data_[static_cast<size_t>(i * shape_[1] + j)];
  }
  const T& at(int64_t i, int64_t j, int64_t k) const {
    return data_[static_cast<size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }
  const T& at(int64_t i, int64_t j, int64_t k, int64_t l) const {
    return data_[static_cast<size_t>(((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l)];
  }

  // Reshape without reordering. Element count must be preserved.
  Tensor Reshaped(Shape new_shape) const {
    KSNET_CHECK_VALID(NumElements(new_shape) == size(), "reshape changes element count");
    Tensor out;
    out.shape_ = std::move(new_shape);
    out.data_ = data_;
    return out;
  }

  void Fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  void Add(const Tensor& other) {
    KSNET_CHECK_VALID(other.size() == size(), "tensor add: size mismatch");
    for (int64_t i = 0; i < size(); ++i) data_[static_cast<size_t>(i)] += other[i];
  }

  template <typename U>
  Tensor<U> Cast() const {
    Tensor<U> out(shape_);
    for (int64_t i = 0; i < size(); ++i) out[i] = static_cast<U>(data_[static_cast<size_t>(i)]);
    return out;
  }

  bool SameShape(const Tensor& other) const { return shape_ == other.shape_; }

 private:
  Shape shape_;
  std::vector<T> data_;

  template <typename U>
  friend class Tensor;
};

template <typename T>
inline T MaxAbsDiff(const Tensor<T>& a, const Tensor<T>& b) {
  KSNET_CHECK_VALID(a.size() == b.size(), "max-abs-diff: size mismatch");
  T m = T(0);
  for (int64_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace ksnet

#endif  // KSNET_TENSOR_HPP_
