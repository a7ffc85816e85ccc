// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_NN_TENSOR_H_
#define EGGCODEC_NN_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <new>
#include <span>
#include <vector>

namespace eggcodec::nn {

// Storage starts on a cache-line boundary so vectorised kernels peel the same
// way on every run; otherwise reductions can differ in the last bits.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }
  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

using Storage = std::vector<double, AlignedAllocator<double>>;

// Dense row-major array of doubles. Activations are rank 3
// (batch, channels, time); conv weights are rank 3 as well, biases rank 1 and
// codebooks rank 2.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, double fill = 0.0);
  Tensor(std::vector<int> shape, std::vector<double> values);

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape_); }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Rank-3 accessors.
  int batch() const { return dim(0); }
  int channels() const { return dim(1); }
  int time() const { return dim(2); }
  double& at(int b, int c, int t) {
    return data_[(static_cast<std::size_t>(b) * dim(1) + c) * dim(2) + t];
  }
  double at(int b, int c, int t) const {
    return data_[(static_cast<std::size_t>(b) * dim(1) + c) * dim(2) + t];
  }
  // Start of batch item b of a rank-3 tensor.
  double* item(int b) { return data_.data() + static_cast<std::size_t>(b) * dim(1) * dim(2); }
  const double* item(int b) const {
    return data_.data() + static_cast<std::size_t>(b) * dim(1) * dim(2);
  }

  Storage& data() { return data_; }
  const Storage& data() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  void fill(double v);
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<int> shape_;
  Storage data_;
};

}  // namespace eggcodec::nn

#endif  // EGGCODEC_NN_TENSOR_H_
