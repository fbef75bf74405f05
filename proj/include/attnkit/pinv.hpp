#pragma once

#include <cstddef>

#include "attnkit/matrix.hpp"

namespace attnkit {

inline constexpr std::size_t kDefaultPinvIters = 15;

struct PinvResult {
  Matrix pseudo_inverse;
  // ||A Z A - A||_F / ||A||_F after the final iteration.
  double penrose_residual = 0.0;
};

// Iterative Moore-Penrose pseudoinverse via the third-order Newton-Schulz
// variant Z <- 1/4 Z (13 I - AZ (15 I - AZ (7 I - AZ))), started from
// Z0 = A^T / (||A||_1 ||A||_inf). Convergence is monitored through
// ||AZ - I||_F; a growing or non-finite residual raises NumericError.
inline PinvResult pinv_iterative(const Matrix& a, std::size_t iters = kDefaultPinvIters) {
  if (a.rows() != a.cols()) throw ShapeError("pinv_iterative: matrix must be square");
  if (a.empty()) throw ShapeError("pinv_iterative: empty matrix");
  const std::size_t n = a.rows();

  double norm1 = 0.0, norminf = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double colsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) colsum += std::abs(a(i, j));
    norm1 = std::max(norm1, colsum);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double rowsum = 0.0;
    const double* r = a.row(i);
    for (std::size_t j = 0; j < n; ++j) rowsum += std::abs(r[j]);
    norminf = std::max(norminf, rowsum);
  }
  if (norm1 == 0.0 || norminf == 0.0) throw NumericError("pinv_iterative: zero matrix");

  Matrix z(n, n);
  const double init_scale = 1.0 / (norm1 * norminf);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) z(i, j) = a(j, i) * init_scale;
  }

  const Matrix eye = identity_matrix(n);
  auto residual_from = [&](const Matrix& az) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double d = az(i, j) - eye(i, j);
        acc += d * d;
      }
    }
    return std::sqrt(acc);
  };

  double prev_residual = -1.0;
  for (std::size_t it = 0; it < iters; ++it) {
    Matrix az = matmul(a, z);
    const double res = residual_from(az);
    // Allow plateau jitter near convergence; flag genuine growth.
    if (prev_residual >= 0.0 && res > prev_residual * 1.5 + 1e-12) {
      throw NumericError("pinv_iterative diverged: residual grew from " +
                         std::to_string(prev_residual) + " to " + std::to_string(res));
    }
    prev_residual = res;

    Matrix t(n, n);  // 7I - AZ
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) t(i, j) = 7.0 * eye(i, j) - az(i, j);
    }
    Matrix s = matmul(az, t);  // AZ (7I - AZ)
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) s(i, j) = 15.0 * eye(i, j) - s(i, j);
    }
    Matrix u = matmul(az, s);  // AZ (15I - ...)
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) u(i, j) = 13.0 * eye(i, j) - u(i, j);
    }
    Matrix znext = matmul(z, u);
    scale_inplace(znext.view(), 0.25);
    if (!znext.all_finite()) throw NumericError("pinv_iterative diverged: non-finite iterate");
    z = std::move(znext);
  }

  Matrix aza = matmul(matmul(a, z), a);
  double diff = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = aza(i, j) - a(i, j);
      diff += d * d;
    }
  }
  const double denom = frobenius_norm(a);

  PinvResult result;
  result.pseudo_inverse = std::move(z);
  result.penrose_residual = std::sqrt(diff) / denom;
  return result;
}

}  // namespace attnkit
