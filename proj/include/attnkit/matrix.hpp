#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <string>
#include <utility>

#include "attnkit/alloc.hpp"
#include "attnkit/errors.hpp"

namespace attnkit {

// Additive mask for invisible score entries. Large enough that
// exp(mask - row_max) vanishes below 1e-307 for any finite row max.
inline constexpr double kCausalMask = -1e300;

// Branch-free exp used in the softmax hot loops. Arguments are clamped to
// [-708, 708]; everything below maps to ~3e-308, which is zero for softmax
// purposes. Range reduction uses the round-to-int magic-number trick and the
// polynomial is evaluated Estrin-style, so the loop vectorizes and the FMA
// dependency chain stays short. Max relative error vs libm is ~4e-16.
inline double fast_exp(double x) {
  x = x < -708.0 ? -708.0 : (x > 708.0 ? 708.0 : x);
  double k = x * 1.4426950408889634074 + 6755399441055744.0;  // x/ln2, rounded
  const std::uint64_t kbits = std::bit_cast<std::uint64_t>(k);
  k -= 6755399441055744.0;
  double r = x - k * 6.93145751953125e-1;  // Cody-Waite two-step reduction
  r -= k * 1.42860682030941723212e-6;

  const double r2 = r * r;
  const double r4 = r2 * r2;
  const double r8 = r4 * r4;
  const double q0 = (1.0 + r) + r2 * (1.0 / 2.0 + r * (1.0 / 6.0));
  const double q1 = 1.0 / 24.0 + r * (1.0 / 120.0) + r2 * (1.0 / 720.0 + r * (1.0 / 5040.0));
  const double q2 = 1.0 / 40320.0 + r * (1.0 / 362880.0) +
                    r2 * (1.0 / 3628800.0 + r * (1.0 / 39916800.0));
  const double q3 = 1.0 / 479001600.0;
  const double poly = (q0 + r4 * q1) + r8 * (q2 + r4 * q3);

  const double scale = std::bit_cast<double>((kbits + 1023) << 52);
  return poly * scale;
}

namespace detail {

// Reductions with independent accumulators so the loop is not serialized on
// one add/max chain.
inline double row_max(const double* x, std::size_t n) {
  double m0 = x[0], m1 = x[0], m2 = x[0], m3 = x[0];
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    m0 = std::max(m0, x[j]);
    m1 = std::max(m1, x[j + 1]);
    m2 = std::max(m2, x[j + 2]);
    m3 = std::max(m3, x[j + 3]);
  }
  for (; j < n; ++j) m0 = std::max(m0, x[j]);
  return std::max(std::max(m0, m1), std::max(m2, m3));
}

inline double row_sum(const double* x, std::size_t n) {
  double s = 0.0;
#pragma omp simd reduction(+ : s)
  for (std::size_t j = 0; j < n; ++j) s += x[j];
  return s;
}

inline double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
#pragma omp simd reduction(+ : s)
  for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

}  // namespace detail

struct ConstMatrixView {
  const double* ptr = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t stride = 0;  // distance between row starts

  const double* row(std::size_t i) const { return ptr + i * stride; }
  double operator()(std::size_t i, std::size_t j) const { return ptr[i * stride + j]; }

  ConstMatrixView row_block(std::size_t r0, std::size_t count) const {
    return {ptr + r0 * stride, count, cols, stride};
  }
};

struct MutMatrixView {
  double* ptr = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t stride = 0;

  double* row(std::size_t i) const { return ptr + i * stride; }
  double& operator()(std::size_t i, std::size_t j) const { return ptr[i * stride + j]; }

  operator ConstMatrixView() const { return {ptr, rows, cols, stride}; }

  MutMatrixView row_block(std::size_t r0, std::size_t count) const {
    return {ptr + r0 * stride, count, cols, stride};
  }
};

// Dense row-major matrix of doubles. Buffers are zero-initialized and their
// sizes are reported to the active AllocCounter, which is what the benchmark
// records as memory cost.
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    const std::size_t n = rows_ * cols_;
    if (n > 0) {
      data_ = new double[n]();
      detail::account_alloc(n * sizeof(double));
    }
  }

  // Skips zero-initialization; for internal buffers that are fully
  // overwritten before any read.
  static Matrix uninitialized(std::size_t rows, std::size_t cols) {
    Matrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    const std::size_t n = rows * cols;
    if (n > 0) {
      m.data_ = new double[n];
      detail::account_alloc(n * sizeof(double));
    }
    return m;
  }

  Matrix(const Matrix& other) : Matrix(other.rows_, other.cols_) {
    if (data_) std::memcpy(data_, other.data_, size() * sizeof(double));
  }

  Matrix(Matrix&& other) noexcept
      : rows_(other.rows_), cols_(other.cols_), data_(other.data_) {
    other.rows_ = other.cols_ = 0;
    other.data_ = nullptr;
  }

  Matrix& operator=(const Matrix& other) {
    if (this != &other) {
      Matrix tmp(other);
      swap(tmp);
    }
    return *this;
  }

  Matrix& operator=(Matrix&& other) noexcept {
    if (this != &other) {
      release();
      rows_ = other.rows_;
      cols_ = other.cols_;
      data_ = other.data_;
      other.rows_ = other.cols_ = 0;
      other.data_ = nullptr;
    }
    return *this;
  }

  ~Matrix() { release(); }

  void swap(Matrix& other) noexcept {
    std::swap(rows_, other.rows_);
    std::swap(cols_, other.cols_);
    std::swap(data_, other.data_);
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return rows_ * cols_; }
  bool empty() const { return size() == 0; }

  double* data() { return data_; }
  const double* data() const { return data_; }
  double* row(std::size_t i) { return data_ + i * cols_; }
  const double* row(std::size_t i) const { return data_ + i * cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  operator ConstMatrixView() const { return {data_, rows_, cols_, cols_}; }

  ConstMatrixView view() const { return {data_, rows_, cols_, cols_}; }
  MutMatrixView view() { return {data_, rows_, cols_, cols_}; }

  // Zero-copy slice of columns [col0, col0 + width).
  ConstMatrixView col_block(std::size_t col0, std::size_t width) const {
    if (col0 + width > cols_) throw ShapeError("col_block out of range");
    return {data_ + col0, rows_, width, cols_};
  }

  MutMatrixView col_block(std::size_t col0, std::size_t width) {
    if (col0 + width > cols_) throw ShapeError("col_block out of range");
    return {data_ + col0, rows_, width, cols_};
  }

  bool all_finite() const {
    for (std::size_t i = 0; i < size(); ++i) {
      if (!std::isfinite(data_[i])) return false;
    }
    return true;
  }

 private:
  void release() {
    if (data_) {
      detail::account_free(size() * sizeof(double));
      delete[] data_;
      data_ = nullptr;
    }
    rows_ = cols_ = 0;
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  double* data_ = nullptr;
};

inline bool view_all_finite(ConstMatrixView a) {
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* r = a.row(i);
    for (std::size_t j = 0; j < a.cols; ++j) {
      if (!std::isfinite(r[j])) return false;
    }
  }
  return true;
}

namespace detail {

inline void require_finite(ConstMatrixView a, const char* op) {
  if (!view_all_finite(a)) {
    throw NumericError(std::string(op) + " produced a non-finite value");
  }
}

}  // namespace detail

// out = a * b. Accumulates row-wise (i-k-j order) so the inner loop runs over
// contiguous memory in both b and out.
inline void matmul_into(ConstMatrixView a, ConstMatrixView b, MutMatrixView out) {
  if (a.cols != b.rows) throw ShapeError("matmul: inner dimensions differ");
  if (out.rows != a.rows || out.cols != b.cols) throw ShapeError("matmul: bad output shape");
  for (std::size_t i = 0; i < a.rows; ++i) {
    double* orow = out.row(i);
    for (std::size_t j = 0; j < out.cols; ++j) orow[j] = 0.0;
    const double* arow = a.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      const double* brow = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
}

// out = a * b^T. Each output element is a dot product of two contiguous rows.
inline void matmul_nt_into(ConstMatrixView a, ConstMatrixView b, MutMatrixView out) {
  if (a.cols != b.cols) throw ShapeError("matmul_nt: inner dimensions differ");
  if (out.rows != a.rows || out.cols != b.rows) throw ShapeError("matmul_nt: bad output shape");
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
      orow[j] = detail::dot(arow, b.row(j), a.cols);
    }
  }
}

// out = a^T * b, accumulated as a sum of outer products over the shared rows.
inline void matmul_tn_into(ConstMatrixView a, ConstMatrixView b, MutMatrixView out) {
  if (a.rows != b.rows) throw ShapeError("matmul_tn: inner dimensions differ");
  if (out.rows != a.cols || out.cols != b.cols) throw ShapeError("matmul_tn: bad output shape");
  for (std::size_t i = 0; i < out.rows; ++i) {
    double* orow = out.row(i);
    for (std::size_t j = 0; j < out.cols; ++j) orow[j] = 0.0;
  }
  for (std::size_t t = 0; t < a.rows; ++t) {
    const double* arow = a.row(t);
    const double* brow = b.row(t);
    for (std::size_t i = 0; i < out.rows; ++i) {
      const double ati = arow[i];
      double* orow = out.row(i);
      for (std::size_t j = 0; j < out.cols; ++j) orow[j] += ati * brow[j];
    }
  }
}

inline Matrix matmul(ConstMatrixView a, ConstMatrixView b) {
  if (a.cols != b.rows) throw ShapeError("matmul: inner dimensions differ");
  Matrix out = Matrix::uninitialized(a.rows, b.cols);
  matmul_into(a, b, out.view());
  detail::require_finite(out, "matmul");
  return out;
}

inline Matrix matmul_nt(ConstMatrixView a, ConstMatrixView b) {
  if (a.cols != b.cols) throw ShapeError("matmul_nt: inner dimensions differ");
  Matrix out = Matrix::uninitialized(a.rows, b.rows);
  matmul_nt_into(a, b, out.view());
  detail::require_finite(out, "matmul_nt");
  return out;
}

inline Matrix matmul_tn(ConstMatrixView a, ConstMatrixView b) {
  if (a.rows != b.rows) throw ShapeError("matmul_tn: inner dimensions differ");
  Matrix out = Matrix::uninitialized(a.cols, b.cols);
  matmul_tn_into(a, b, out.view());
  detail::require_finite(out, "matmul_tn");
  return out;
}

inline void scale_inplace(MutMatrixView a, double s) {
  for (std::size_t i = 0; i < a.rows; ++i) {
    double* r = a.row(i);
    for (std::size_t j = 0; j < a.cols; ++j) r[j] *= s;
  }
}

// Row-wise softmax with per-row max subtraction; safe for any finite input,
// including rows containing kCausalMask entries.
inline void softmax_rows_into(ConstMatrixView a, MutMatrixView out) {
  if (out.rows != a.rows || out.cols != a.cols) throw ShapeError("softmax_rows: bad output shape");
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* src = a.row(i);
    double* dst = out.row(i);
    const double mx = detail::row_max(src, a.cols);
#pragma omp simd
    for (std::size_t j = 0; j < a.cols; ++j) dst[j] = fast_exp(src[j] - mx);
    const double inv = 1.0 / detail::row_sum(dst, a.cols);
#pragma omp simd
    for (std::size_t j = 0; j < a.cols; ++j) dst[j] *= inv;
  }
}

inline Matrix softmax_rows(ConstMatrixView a) {
  if (a.rows == 0 || a.cols == 0) throw ShapeError("softmax_rows: empty input");
  Matrix out = Matrix::uninitialized(a.rows, a.cols);
  softmax_rows_into(a, out.view());
  detail::require_finite(out, "softmax_rows");
  return out;
}

// Softmax over a contiguous span, in place. Shared by the windowed kernels.
inline void softmax_span_inplace(double* x, std::size_t n) {
  const double mx = detail::row_max(x, n);
#pragma omp simd
  for (std::size_t j = 0; j < n; ++j) x[j] = fast_exp(x[j] - mx);
  const double inv = 1.0 / detail::row_sum(x, n);
#pragma omp simd
  for (std::size_t j = 0; j < n; ++j) x[j] *= inv;
}

inline Matrix transpose(ConstMatrixView a) {
  Matrix out = Matrix::uninitialized(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* r = a.row(i);
    for (std::size_t j = 0; j < a.cols; ++j) out(j, i) = r[j];
  }
  return out;
}

inline Matrix identity_matrix(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

inline double frobenius_norm(ConstMatrixView a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* r = a.row(i);
    for (std::size_t j = 0; j < a.cols; ++j) acc += r[j] * r[j];
  }
  return std::sqrt(acc);
}

inline double max_abs_diff(ConstMatrixView a, ConstMatrixView b) {
  if (a.rows != b.rows || a.cols != b.cols) throw ShapeError("max_abs_diff: shape mismatch");
  double mx = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ra = a.row(i);
    const double* rb = b.row(i);
    for (std::size_t j = 0; j < a.cols; ++j) mx = std::max(mx, std::abs(ra[j] - rb[j]));
  }
  return mx;
}

}  // namespace attnkit
