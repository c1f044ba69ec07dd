#pragma once

// Interpolation kernels over Eigen column vectors. Knots must be strictly
// increasing; queries outside the knot range hold the nearest end value.

#include <algorithm>
#include <cassert>

#include <Eigen/Core>

namespace sackit {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Piecewise-linear interpolation of (x, y) at sorted or unsorted queries.
template <typename Scalar>
VectorX<Scalar> interp_linear(const VectorX<Scalar>& x, const VectorX<Scalar>& y,
                              const VectorX<Scalar>& query) {
  assert(x.size() == y.size() && x.size() >= 1);
  const Eigen::Index n = x.size();
  VectorX<Scalar> out(query.size());
  for (Eigen::Index q = 0; q < query.size(); ++q) {
    const Scalar xq = query[q];
    if (xq <= x[0]) {
      out[q] = y[0];
      continue;
    }
    if (xq >= x[n - 1]) {
      out[q] = y[n - 1];
      continue;
    }
    const Scalar* first = x.data();
    const Eigen::Index hi = std::upper_bound(first, first + n, xq) - first;
    const Eigen::Index lo = hi - 1;
    const Scalar w = (xq - x[lo]) / (x[hi] - x[lo]);
    out[q] = y[lo] + w * (y[hi] - y[lo]);
  }
  return out;
}

/// Natural cubic spline through (x, y). Second derivatives come from the
/// tridiagonal system solved once at construction (Thomas algorithm).
template <typename Scalar>
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(VectorX<Scalar> x, VectorX<Scalar> y)
      : x_(std::move(x)), y_(std::move(y)), m_(VectorX<Scalar>::Zero(x_.size())) {
    assert(x_.size() == y_.size() && x_.size() >= 2);
    const Eigen::Index n = x_.size();
    if (n < 3) return;
    const Eigen::Index inner = n - 2;
    VectorX<Scalar> diag(inner), upper(inner), rhs(inner);
    for (Eigen::Index i = 1; i <= inner; ++i) {
      const Scalar h0 = x_[i] - x_[i - 1];
      const Scalar h1 = x_[i + 1] - x_[i];
      diag[i - 1] = Scalar(2) * (h0 + h1);
      upper[i - 1] = h1;
      rhs[i - 1] = Scalar(6) * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    // Forward sweep; the sub-diagonal entry of row i equals upper[i - 1].
    for (Eigen::Index i = 1; i < inner; ++i) {
      const Scalar f = upper[i - 1] / diag[i - 1];
      diag[i] -= f * upper[i - 1];
      rhs[i] -= f * rhs[i - 1];
    }
    m_[inner] = rhs[inner - 1] / diag[inner - 1];
    for (Eigen::Index i = inner - 1; i >= 1; --i) {
      m_[i] = (rhs[i - 1] - upper[i - 1] * m_[i + 1]) / diag[i - 1];
    }
  }

  Scalar operator()(Scalar xq) const {
    const Eigen::Index n = x_.size();
    if (xq <= x_[0]) return y_[0];
    if (xq >= x_[n - 1]) return y_[n - 1];
    const Scalar* first = x_.data();
    const Eigen::Index hi = std::upper_bound(first, first + n, xq) - first;
    return eval(hi - 1, xq);
  }

  /// Evaluates at ascending queries with a single forward walk over knots.
  VectorX<Scalar> evaluate_sorted(const VectorX<Scalar>& query) const {
    const Eigen::Index n = x_.size();
    VectorX<Scalar> out(query.size());
    Eigen::Index seg = 0;
    for (Eigen::Index q = 0; q < query.size(); ++q) {
      const Scalar xq = query[q];
      if (xq <= x_[0]) {
        out[q] = y_[0];
        continue;
      }
      if (xq >= x_[n - 1]) {
        out[q] = y_[n - 1];
        continue;
      }
      while (x_[seg + 1] < xq) ++seg;
      out[q] = eval(seg, xq);
    }
    return out;
  }

 private:
  Scalar eval(Eigen::Index lo, Scalar xq) const {
    const Eigen::Index hi = lo + 1;
    const Scalar h = x_[hi] - x_[lo];
    const Scalar a = (x_[hi] - xq) / h;
    const Scalar b = (xq - x_[lo]) / h;
    return a * y_[lo] + b * y_[hi] +
           ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[hi]) * (h * h) / Scalar(6);
  }

  VectorX<Scalar> x_;
  VectorX<Scalar> y_;
  VectorX<Scalar> m_;
};

}  // namespace sackit
