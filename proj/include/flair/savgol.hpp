// Savitzky–Golay smoothing over Eigen vectors.
#pragma once

#include "flair/mask.hpp"

#include <Eigen/Dense>

#include <string>

namespace flair {

template <typename Scalar>
using Series = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Convolution weights that evaluate the least-squares polynomial of degree
/// `order` at the centre of a `window`-sample neighbourhood.
template <typename Scalar>
Series<Scalar> savgol_coefficients(int window, int order) {
  if (window < 1 || window % 2 == 0) throw InputError("savgol window must be odd and positive");
  if (order < 0 || order >= window) throw InputError("savgol order must lie in [0, window)");
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const int half = window / 2;
  Matrix vandermonde(window, order + 1);
  for (int i = 0; i < window; ++i) {
    Scalar v(1);
    for (int k = 0; k <= order; ++k) {
      vandermonde(i, k) = v;
      v *= Scalar(i - half);
    }
  }
  // Rows of the pseudo-inverse map samples to polynomial coefficients; row 0 is the value at 0.
  const Matrix pinv = vandermonde.householderQr().solve(Matrix::Identity(window, window));
  return pinv.row(0).transpose();
}

/// Smooths `values` with mirror padding at both ends (the edge sample is not repeated).
/// The output has the input's length.
template <typename Derived>
Series<typename Derived::Scalar> savgol_smooth(const Eigen::MatrixBase<Derived>& values, int window,
                                               int order) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = values.size();
  if (n < window) {
    throw InputError("series of length " + std::to_string(n) + " is shorter than the smoothing window " +
                     std::to_string(window) + "; use a shorter window");
  }
  const Series<Scalar> weights = savgol_coefficients<Scalar>(window, order);
  const int half = window / 2;
  auto sample = [&](Eigen::Index i) -> Scalar {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
    return values(i);
  };
  Series<Scalar> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar acc(0);
    for (int k = -half; k <= half; ++k) acc += weights(k + half) * sample(i + k);
    out(i) = acc;
  }
  return out;
}

}  // namespace flair
