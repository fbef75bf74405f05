#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "attnkit/errors.hpp"

namespace attnkit {

enum class CurveKind { Quadratic, Linear };

// Least-squares cost model: y = a x^2 + b x + c or y = e x + f, with the
// coefficient of determination of the fit.
struct CurveFit {
  CurveKind kind = CurveKind::Linear;
  // Quadratic uses {a, b, c}; linear uses {e, f, unused}.
  std::array<double, 3> coef{0.0, 0.0, 0.0};
  double r_squared = 0.0;

  double eval(double x) const {
    return kind == CurveKind::Quadratic ? (coef[0] * x + coef[1]) * x + coef[2]
                                        : coef[0] * x + coef[1];
  }
};

struct CostPoint {
  double x = 0.0;
  double y = 0.0;
};

struct EfficiencyLength {
  double length = 0.0;
  bool exists = false;
};

namespace detail {

// Gaussian elimination with partial pivoting on a tiny dense system.
template <std::size_t N>
inline std::array<double, N> solve_linear_system(std::array<std::array<double, N + 1>, N> m) {
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < N; ++row) {
      if (std::abs(m[row][col]) > std::abs(m[pivot][col])) pivot = row;
    }
    if (std::abs(m[pivot][col]) < 1e-300) throw DataError("fit_curve: singular normal equations");
    std::swap(m[col], m[pivot]);
    for (std::size_t row = col + 1; row < N; ++row) {
      const double f = m[row][col] / m[col][col];
      for (std::size_t j = col; j <= N; ++j) m[row][j] -= f * m[col][j];
    }
  }
  std::array<double, N> x{};
  for (std::size_t i = N; i-- > 0;) {
    double acc = m[i][N];
    for (std::size_t j = i + 1; j < N; ++j) acc -= m[i][j] * x[j];
    x[i] = acc / m[i][i];
  }
  return x;
}

}  // namespace detail

// Ordinary least squares through the normal equations. The abscissa is
// scaled by its largest magnitude before forming the equations (lengths run
// into the thousands, so x^4 terms would otherwise dominate the
// conditioning) and the coefficients are unscaled on the way out.
inline CurveFit fit_curve(const std::vector<CostPoint>& points, CurveKind kind) {
  const std::size_t need = kind == CurveKind::Quadratic ? 3 : 2;
  if (points.size() < need) {
    throw DataError("fit_curve: need at least " + std::to_string(need) + " points");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (points[i].x == points[j].x) throw DataError("fit_curve: duplicate x values");
    }
  }

  double xmax = 0.0;
  for (const CostPoint& p : points) xmax = std::max(xmax, std::abs(p.x));
  if (xmax == 0.0) xmax = 1.0;

  CurveFit fit;
  fit.kind = kind;
  if (kind == CurveKind::Quadratic) {
    std::array<std::array<double, 4>, 3> m{};
    for (const CostPoint& p : points) {
      const double u = p.x / xmax;
      const std::array<double, 3> basis{u * u, u, 1.0};
      for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) m[i][j] += basis[i] * basis[j];
        m[i][3] += basis[i] * p.y;
      }
    }
    const auto sol = detail::solve_linear_system<3>(m);
    fit.coef = {sol[0] / (xmax * xmax), sol[1] / xmax, sol[2]};
  } else {
    std::array<std::array<double, 3>, 2> m{};
    for (const CostPoint& p : points) {
      const double u = p.x / xmax;
      const std::array<double, 2> basis{u, 1.0};
      for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) m[i][j] += basis[i] * basis[j];
        m[i][2] += basis[i] * p.y;
      }
    }
    const auto sol = detail::solve_linear_system<2>(m);
    fit.coef = {sol[0] / xmax, sol[1], 0.0};
  }
  for (double c : fit.coef) {
    if (!std::isfinite(c)) throw NumericError("fit_curve: non-finite coefficients");
  }

  double mean = 0.0;
  for (const CostPoint& p : points) mean += p.y;
  mean /= static_cast<double>(points.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (const CostPoint& p : points) {
    const double r = p.y - fit.eval(p.x);
    ss_res += r * r;
    const double t = p.y - mean;
    ss_tot += t * t;
  }
  fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

// Intersection of the quadratic baseline cost with an efficient linear cost:
// the larger real root of a x^2 + (b - e) x + (c - f) = 0. No real root, or
// a <= 0, means the efficient curve never drops below the baseline.
inline EfficiencyLength efficiency_length(const CurveFit& quad, const CurveFit& lin) {
  if (quad.kind != CurveKind::Quadratic || lin.kind != CurveKind::Linear) {
    throw DataError("efficiency_length: expected a quadratic and a linear fit");
  }
  const double a = quad.coef[0];
  const double b = quad.coef[1] - lin.coef[0];
  const double c = quad.coef[2] - lin.coef[1];

  EfficiencyLength result;
  if (a <= 0.0) return result;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return result;
  result.exists = true;
  result.length = (-b + std::sqrt(disc)) / (2.0 * a);
  return result;
}

}  // namespace attnkit
