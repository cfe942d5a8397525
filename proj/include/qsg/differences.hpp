#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>

namespace qsg {

/// Fornberg weights for the first derivative at x0 from nodes x[0..n).
template <int n>
std::array<double, n> derivative_weights(double x0, const std::array<double, n>& x) {
  double c[n][2] = {};
  c[0][0] = 1.0;
  double c1 = 1.0, c4 = x[0] - x0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::array<double, n> w{};
  for (int i = 0; i < n; ++i) w[i] = c[i][1];
  return w;
}

/// First derivative of y(x) at every node with a centered stencil of `width` (5 or 7) points,
/// shifted at the far end. With parity ±1 and x(0) = 0, y is continued to negative x as an
/// even/odd function so the stencil stays centered near the origin.
inline Eigen::VectorXd differentiate(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int parity = 0,
                                     int width = 5) {
  const Eigen::Index n = x.size();
  const int half = width / 2;
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index start = i - half;
    if (parity == 0) start = std::max<Eigen::Index>(start, 0);
    start = std::min<Eigen::Index>(start, n - width);
    std::array<double, 7> xs{}, ys{};
    for (int k = 0; k < width; ++k) {
      const Eigen::Index j = start + k;
      xs[k] = j >= 0 ? x(j) : -x(-j);
      ys[k] = j >= 0 ? y(j) : parity * y(-j);
    }
    double s = 0.0;
    if (width == 7) {
      const auto w = derivative_weights<7>(x(i), xs);
      for (int k = 0; k < 7; ++k) s += w[k] * ys[k];
    } else {
      std::array<double, 5> x5;
      std::copy_n(xs.begin(), 5, x5.begin());
      const auto w = derivative_weights<5>(x(i), x5);
      for (int k = 0; k < 5; ++k) s += w[k] * ys[k];
    }
    d(i) = s;
  }
  return d;
}

}  // namespace qsg
