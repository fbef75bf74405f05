#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "attnkit/matrix.hpp"
#include "attnkit/mechanisms/longshort.hpp"
#include "attnkit/mechanisms/s4d.hpp"
#include "attnkit/pattern.hpp"

// Brute-force reference implementations used by the verification suite and
// the tests. These deliberately avoid the production kernels: plain loops,
// quadratic forms and state recurrences only, so agreement between the two
// paths is evidence rather than tautology.
namespace attnkit::oracles {

// Scalar triple-loop product.
inline Matrix matmul_reference(ConstMatrixView a, ConstMatrixView b) {
  if (a.cols != b.rows) throw ShapeError("matmul_reference: shape mismatch");
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

// Dense softmax attention by explicit double loops, one query row at a time,
// with causal-self masking by skipping j > i.
inline Matrix dense_attention_reference(const AttentionInputs& in) {
  const std::size_t hd = in.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const bool mask = in.pattern == AttentionPattern::CausalSelf;

  Matrix out(in.target_len(), in.dim());
  for (std::size_t h = 0; h < in.heads; ++h) {
    const std::size_t off = h * hd;
    for (std::size_t i = 0; i < in.target_len(); ++i) {
      const std::size_t visible = mask ? i + 1 : in.source_len();
      std::vector<double> scores(visible);
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < visible; ++j) {
        double acc = 0.0;
        for (std::size_t t = 0; t < hd; ++t) acc += in.q(i, off + t) * in.k(j, off + t);
        scores[j] = acc * scale;
        mx = std::max(mx, scores[j]);
      }
      double sum = 0.0;
      for (double& s : scores) {
        s = std::exp(s - mx);
        sum += s;
      }
      for (std::size_t j = 0; j < visible; ++j) {
        const double w = scores[j] / sum;
        for (std::size_t t = 0; t < hd; ++t) out(i, off + t) += w * in.v(j, off + t);
      }
    }
  }
  return out;
}

// O(n^2) causal convolution.
inline std::vector<double> convolve_direct(std::span<const double> kernel,
                                           std::span<const double> input) {
  if (kernel.size() != input.size()) throw ShapeError("convolve_direct: length mismatch");
  const std::size_t n = input.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t s = 0; s <= t; ++s) out[t] += kernel[s] * input[t - s];
  }
  return out;
}

// State recurrence x_t = Abar x_{t-1} + Bbar u_t, y_t = Re(C x_t) + D u_t,
// run forward; the noncausal variant adds the same recurrence over the
// reversed sequence with the lag-0 tap excluded.
inline Matrix s4d_recurrence_reference(const Matrix& u, const S4DParams& p,
                                       AttentionPattern pattern) {
  p.validate();
  const std::size_t n = u.rows();
  const std::size_t r = p.state_dim;
  Matrix out(n, u.cols());

  for (std::size_t ch = 0; ch < p.channels; ++ch) {
    const double dt = std::exp(p.log_dt[ch]);
    std::vector<std::complex<double>> abar(r), bbar(r), cvec(r);
    for (std::size_t k = 0; k < r; ++k) {
      const std::complex<double> ak = p.a[ch * r + k];
      abar[k] = std::exp(dt * ak);
      bbar[k] = (abar[k] - 1.0) / ak * p.b[ch * r + k];
      cvec[k] = p.c[ch * r + k];
    }

    auto run = [&](const std::vector<double>& seq) {
      std::vector<std::complex<double>> state(r, {0.0, 0.0});
      std::vector<double> y(n, 0.0);
      for (std::size_t t = 0; t < n; ++t) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t k = 0; k < r; ++k) {
          state[k] = abar[k] * state[k] + bbar[k] * seq[t];
          acc += cvec[k] * state[k];
        }
        y[t] = acc.real();
      }
      return y;
    };

    std::vector<double> uin(n);
    for (std::size_t t = 0; t < n; ++t) uin[t] = u(t, ch);
    std::vector<double> y = run(uin);

    if (!is_causal(pattern)) {
      // kernel value at lag zero, subtracted from the reversed pass
      std::complex<double> k0{0.0, 0.0};
      for (std::size_t k = 0; k < r; ++k) k0 += cvec[k] * bbar[k];
      std::vector<double> urev(n);
      for (std::size_t t = 0; t < n; ++t) urev[t] = uin[n - 1 - t];
      std::vector<double> yrev = run(urev);
      for (std::size_t t = 0; t < n; ++t) {
        y[t] += yrev[n - 1 - t] - k0.real() * uin[t];
      }
    }
    for (std::size_t t = 0; t < n; ++t) out(t, ch) = y[t] + p.d[ch] * uin[t];
  }
  return out;
}

// Quadratic cos-reweighted form: scores relu(q_i).relu(k_j) cos(pi(i-j)/2L)
// normalized per row, with the same denominator floor as the linear path.
inline Matrix cosformer_quadratic_reference(const AttentionInputs& in, double eps) {
  const std::size_t n = in.target_len();
  const std::size_t m = in.source_len();
  const std::size_t hd = in.head_dim();
  const double len_scale =
      std::numbers::pi / (2.0 * static_cast<double>(std::max(n, m)));

  Matrix out(n, in.dim());
  for (std::size_t h = 0; h < in.heads; ++h) {
    const std::size_t off = h * hd;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> scores(m);
      double den = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        double dot = 0.0;
        for (std::size_t t = 0; t < hd; ++t) {
          dot += std::max(in.q(i, off + t), 0.0) * std::max(in.k(j, off + t), 0.0);
        }
        const double delta = (static_cast<double>(i) - static_cast<double>(j)) * len_scale;
        scores[j] = dot * std::cos(delta);
        den += scores[j];
      }
      den = std::max(den, eps);
      for (std::size_t j = 0; j < m; ++j) {
        const double w = scores[j] / den;
        for (std::size_t t = 0; t < hd; ++t) out(i, off + t) += w * in.v(j, off + t);
      }
    }
  }
  return out;
}

// Masked dense softmax whose visibility mask is the longshort segment window
// (intersected with the prefix under causal self). Matches longshort with
// the long branch disabled.
inline Matrix longshort_window_reference(const AttentionInputs& in, std::size_t window) {
  const std::size_t n = in.target_len();
  const std::size_t m = in.source_len();
  const std::size_t hd = in.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const bool causal = is_causal(in.pattern);

  Matrix out(n, in.dim());
  for (std::size_t h = 0; h < in.heads; ++h) {
    const std::size_t off = h * hd;
    for (std::size_t i = 0; i < n; ++i) {
      auto win = detail::segment_window(i, window, m);
      if (causal) win.hi = std::min(win.hi, i + 1);
      std::vector<double> scores(win.hi - win.lo);
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = win.lo; j < win.hi; ++j) {
        double acc = 0.0;
        for (std::size_t t = 0; t < hd; ++t) acc += in.q(i, off + t) * in.k(j, off + t);
        scores[j - win.lo] = acc * scale;
        mx = std::max(mx, scores[j - win.lo]);
      }
      double sum = 0.0;
      for (double& s : scores) {
        s = std::exp(s - mx);
        sum += s;
      }
      for (std::size_t j = win.lo; j < win.hi; ++j) {
        const double w = scores[j - win.lo] / sum;
        for (std::size_t t = 0; t < hd; ++t) out(i, off + t) += w * in.v(j, off + t);
      }
    }
  }
  return out;
}

}  // namespace attnkit::oracles
