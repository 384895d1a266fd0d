#pragma once

// Dense row-major tensor plus the handful of kernels the model needs.
// Everything is deterministic: each output element of a reduction is
// accumulated in ascending index order, and the kernel dispatch below only
// changes loop nesting, never the per-element order, so results do not
// depend on which code path runs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kfx/rng.hpp"

namespace kfx {

template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    std::size_t n = 1;
    for (int d : shape_) {
      if (d < 1) throw std::invalid_argument("tensor dims must be positive");
      n *= static_cast<std::size_t>(d);
    }
    data_.assign(n, T(0));
  }
  Tensor(std::vector<int> shape, std::vector<T> values)
      : shape_(std::move(shape)), data_(std::move(values)) {
    std::size_t n = 1;
    for (int d : shape_) n *= static_cast<std::size_t>(d);
    if (n != data_.size())
      throw std::invalid_argument("tensor shape/data size mismatch");
  }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return data_.size(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // 2-d accessors (rows x cols).
  int rows() const { return shape_[0]; }
  int cols() const { return rank() == 1 ? shape_[0] : shape_[1]; }
  T* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols(); }
  const T* row(int r) const {
    return data_.data() + static_cast<std::size_t>(r) * cols();
  }
  T& at(int r, int c) { return row(r)[c]; }
  const T& at(int r, int c) const { return row(r)[c]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    for (const T& v : data_)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

 private:
  std::vector<int> shape_;
  std::vector<T> data_;
};

namespace detail {

// C[m x n] = A[m x k] * B[k x n] with A-row/B-column dot products summed in
// ascending k order. Slow-path reference; also used for edge strips of the
// tiled kernel.
template <typename T>
void matmul_ikj(const T* A, const T* B, T* C, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    T* c = C + static_cast<std::size_t>(i) * n;
    std::memset(c, 0, sizeof(T) * static_cast<std::size_t>(n));
    const T* a = A + static_cast<std::size_t>(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const T av = a[kk];
      const T* b = B + static_cast<std::size_t>(kk) * n;
      for (int j = 0; j < n; ++j) c[j] += av * b[j];
    }
  }
}

// Register-tiled kernel for tall A (many rows): 4 rows x 32 cols of C
// accumulate in registers across the k loop.
template <typename T>
void matmul_tiled(const T* A, const T* B, T* C, int m, int k, int n) {
  constexpr int IT = 4, JT = 32;
  const int mt = m - m % IT, nt = n - n % JT;
  for (int i0 = 0; i0 < mt; i0 += IT) {
    for (int j0 = 0; j0 < nt; j0 += JT) {
      T acc[IT][JT] = {};
      for (int kk = 0; kk < k; ++kk) {
        const T* b = B + static_cast<std::size_t>(kk) * n + j0;
        for (int ii = 0; ii < IT; ++ii) {
          const T av = A[static_cast<std::size_t>(i0 + ii) * k + kk];
          for (int j = 0; j < JT; ++j) acc[ii][j] += av * b[j];
        }
      }
      for (int ii = 0; ii < IT; ++ii)
        std::memcpy(C + static_cast<std::size_t>(i0 + ii) * n + j0, acc[ii],
                    sizeof(T) * JT);
    }
    if (nt < n) {  // right edge of this row block
      for (int ii = 0; ii < IT; ++ii) {
        T* c = C + static_cast<std::size_t>(i0 + ii) * n + nt;
        std::memset(c, 0, sizeof(T) * static_cast<std::size_t>(n - nt));
        const T* a = A + static_cast<std::size_t>(i0 + ii) * k;
        for (int kk = 0; kk < k; ++kk) {
          const T av = a[kk];
          const T* b = B + static_cast<std::size_t>(kk) * n + nt;
          for (int j = 0; j < n - nt; ++j) c[j] += av * b[j];
        }
      }
    }
  }
  if (mt < m)  // bottom edge
    matmul_ikj(A + static_cast<std::size_t>(mt) * k, B,
               C + static_cast<std::size_t>(mt) * n, m - mt, k, n);
}

// Column-sliced kernel for short-and-wide products (small batch against a
// big weight matrix): B is streamed exactly once while a m x 256 slice of C
// stays cache-resident.
template <typename T>
void matmul_jslice(const T* A, const T* B, T* C, int m, int k, int n) {
  constexpr int JT = 256;
  std::vector<T> slice(static_cast<std::size_t>(m) * JT);
  for (int j0 = 0; j0 < n; j0 += JT) {
    const int jb = std::min(JT, n - j0);
    std::memset(slice.data(), 0,
                sizeof(T) * static_cast<std::size_t>(m) * jb);
    for (int kk = 0; kk < k; ++kk) {
      const T* b = B + static_cast<std::size_t>(kk) * n + j0;
      for (int i = 0; i < m; ++i) {
        const T av = A[static_cast<std::size_t>(i) * k + kk];
        T* c = slice.data() + static_cast<std::size_t>(i) * jb;
        for (int j = 0; j < jb; ++j) c[j] += av * b[j];
      }
    }
    for (int i = 0; i < m; ++i)
      std::memcpy(C + static_cast<std::size_t>(i) * n + j0,
                  slice.data() + static_cast<std::size_t>(i) * jb,
                  sizeof(T) * static_cast<std::size_t>(jb));
  }
}

}  // namespace detail

// C = A * B for 2-d tensors, writing into a caller-owned result (keeps the
// training loop free of 100 MB allocations per batch).
template <typename T>
void matmul_into(Tensor<T>& C, const Tensor<T>& A, const Tensor<T>& B) {
  if (A.rank() != 2 || B.rank() != 2 || A.dim(1) != B.dim(0))
    throw std::invalid_argument("matmul: incompatible shapes");
  const int m = A.dim(0), k = A.dim(1), n = B.dim(1);
  if (C.rank() != 2 || C.dim(0) != m || C.dim(1) != n)
    C = Tensor<T>({m, n});
  if (m < 8)
    detail::matmul_ikj(A.data(), B.data(), C.data(), m, k, n);
  else if (m <= 64)
    detail::matmul_jslice(A.data(), B.data(), C.data(), m, k, n);
  else
    detail::matmul_tiled(A.data(), B.data(), C.data(), m, k, n);
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& A, const Tensor<T>& B) {
  Tensor<T> C;
  matmul_into(C, A, B);
  return C;
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& A) {
  if (A.rank() != 2) throw std::invalid_argument("transpose: rank != 2");
  const int m = A.dim(0), n = A.dim(1);
  Tensor<T> B({n, m});
  constexpr int BS = 32;
  for (int i0 = 0; i0 < m; i0 += BS)
    for (int j0 = 0; j0 < n; j0 += BS)
      for (int i = i0; i < std::min(i0 + BS, m); ++i)
        for (int j = j0; j < std::min(j0 + BS, n); ++j)
          B.at(j, i) = A.at(i, j);
  return B;
}

// Numerically stable softmax: shifts by the max before exponentiating, so
// the largest exponent is 0. Order-preserving, strictly positive output.
template <typename T>
std::vector<T> softmax(std::span<const T> x) {
  if (x.empty()) throw std::invalid_argument("softmax: empty input");
  T mx = x[0];
  for (const T& v : x) mx = std::max(mx, v);
  std::vector<T> out(x.size());
  T sum = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - mx);
    sum += out[i];
  }
  for (T& v : out) v /= sum;
  return out;
}

template <typename T>
std::vector<T> softmax(const std::vector<T>& x) {
  return softmax(std::span<const T>(x));
}

// Glorot/Xavier uniform: values in [-a, a] with a = sqrt(6 / (rows + cols)).
// Exactly rows*cols draws in row-major order.
template <typename T>
Tensor<T> glorot_init(int rows, int cols, Rng& rng) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("glorot_init: dims must be >= 1");
  const double a = std::sqrt(6.0 / (rows + cols));
  Tensor<T> t({rows, cols});
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = static_cast<T>(rng.symmetric(a));
  return t;
}

}  // namespace kfx
