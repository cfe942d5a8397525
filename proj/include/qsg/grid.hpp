#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <iosfwd>
#include <memory>
#include <string>

#include "qsg/error.hpp"
#include "qsg/params.hpp"

namespace qsg {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Spacing { Uniform, GeometricTail };

/// Nodes 0 = r_0 < r_1 < ... < r_M = R_max: uniform on [0, R_core], geometric beyond.
template <typename Scalar>
struct RadialGrid {
  Vector<Scalar> nodes;
  Spacing spacing = Spacing::Uniform;
  Scalar core_radius = 0;
  Scalar core_step = 0;
  Scalar tail_ratio = 1;

  Eigen::Index size() const { return nodes.size(); }
  Eigen::Index intervals() const { return nodes.size() - 1; }
  Scalar r_max() const { return nodes(nodes.size() - 1); }
  Scalar operator[](Eigen::Index i) const { return nodes(i); }

  /// Index of the interval [r_i, r_{i+1}] holding r (clamped to the grid).
  Eigen::Index locate(Scalar r) const {
    const Scalar* first = nodes.data();
    const Scalar* last = nodes.data() + nodes.size();
    auto it = std::upper_bound(first, last, r);
    Eigen::Index i = static_cast<Eigen::Index>(it - first) - 1;
    return std::clamp<Eigen::Index>(i, 0, nodes.size() - 2);
  }
};

using Grid = RadialGrid<double>;

inline constexpr int kMinResolution = 64;
inline constexpr int kMaxResolution = 1 << 20;
inline constexpr double kCoreRadius = 20.0;
inline constexpr double kZeroMassRadius = 1000.0;

/// Outer radius used for a given frequency: max(50, 15/√ω), or 10³ when ω = 0.
inline double default_r_max(double omega) {
  return omega > 0.0 ? std::max(50.0, 15.0 / std::sqrt(omega)) : kZeroMassRadius;
}

/// Builds a grid with `intervals` (rounded up to even) intervals, half of them on the
/// uniform core and half on a geometric tail whose first step continues the core step.
template <typename Scalar = double>
RadialGrid<Scalar> make_grid_radius(Scalar r_max, int intervals, Scalar core_radius = Scalar(kCoreRadius)) {
  if (intervals < kMinResolution)
    throw Error(ErrorCode::InvalidParams, "grid resolution must be at least 64");
  if (!(r_max > 0)) throw Error(ErrorCode::InvalidParams, "grid radius must be positive");
  intervals += intervals % 2;
  RadialGrid<Scalar> g;
  g.nodes.resize(intervals + 1);
  const Scalar r_core = std::min(r_max, core_radius);
  const int n_core = intervals / 2;
  const int n_tail = intervals - n_core;
  const Scalar h = r_core / n_core;
  const Scalar tail_length = r_max - r_core;

  if (tail_length <= h * n_tail) {
    const Scalar step = r_max / intervals;
    for (int i = 0; i <= intervals; ++i) g.nodes(i) = step * i;
    g.spacing = Spacing::Uniform;
    g.core_radius = r_max;
    g.core_step = step;
    return g;
  }

  // Solve h q (q^n - 1)/(q - 1) = L for q > 1 by bisection on log q.
  auto covered = [&](Scalar q) {
    Scalar sum = 0, step = h;
    for (int k = 0; k < n_tail; ++k) {
      step *= q;
      sum += step;
    }
    return sum;
  };
  Scalar lo = 1, hi = 2;
  while (covered(hi) < tail_length) hi *= 2;
  for (int it = 0; it < 200; ++it) {
    const Scalar mid = (lo + hi) / 2;
    (covered(mid) < tail_length ? lo : hi) = mid;
  }
  const Scalar q = (lo + hi) / 2;

  for (int i = 0; i <= n_core; ++i) g.nodes(i) = h * i;
  Scalar step = h;
  for (int k = 1; k <= n_tail; ++k) {
    step *= q;
    g.nodes(n_core + k) = g.nodes(n_core + k - 1) + step;
  }
  g.nodes(intervals) = r_max;
  g.spacing = Spacing::GeometricTail;
  g.core_radius = r_core;
  g.core_step = h;
  g.tail_ratio = q;
  return g;
}

template <typename Scalar = double>
RadialGrid<Scalar> make_grid(const Params& params, int resolution) {
  return make_grid_radius<Scalar>(Scalar(default_r_max(params.freq)), resolution);
}

enum class DecayKind { Exponential, Power, None };

/// Asymptotic tail description: value ≈ A r^{-(N-1)/2} e^{-κ r} (Exponential) or
/// value ≈ A r^{-(N-2)} (Power).
struct Decay {
  DecayKind kind = DecayKind::None;
  double rate = 0.0;       // κ for Exponential, N−2 for Power
  double amplitude = 0.0;  // A
  int dim = 3;

  double algebraic_exponent() const {
    return kind == DecayKind::Exponential ? 0.5 * (dim - 1) : (kind == DecayKind::Power ? rate : 0.0);
  }
  double exponential_rate() const { return kind == DecayKind::Exponential ? rate : 0.0; }
};

/// Radial function sampled on a grid together with its derivative.
template <typename Scalar>
struct RadialProfile {
  std::shared_ptr<const RadialGrid<Scalar>> grid;
  Vector<Scalar> values;
  Vector<Scalar> derivative_values;
  Decay decay;

  Eigen::Index size() const { return values.size(); }
  Scalar r(Eigen::Index i) const { return grid->nodes(i); }

  /// Cubic Hermite interpolation inside the grid, asymptotic tail beyond it.
  Scalar operator()(Scalar x) const { return eval(x).first; }

  std::pair<Scalar, Scalar> eval(Scalar x) const {
    const auto& nodes = grid->nodes;
    const Eigen::Index last = nodes.size() - 1;
    if (x >= nodes(last)) {
      const Scalar big_r = nodes(last);
      if (decay.kind == DecayKind::Exponential) {
        const Scalar a = decay.algebraic_exponent();
        const Scalar k = decay.rate;
        const Scalar v = values(last) * std::pow(x / big_r, -a) * std::exp(-k * (x - big_r));
        return {v, v * (-k - a / x)};
      }
      if (decay.kind == DecayKind::Power) {
        const Scalar v = values(last) * std::pow(x / big_r, -Scalar(decay.rate));
        return {v, -Scalar(decay.rate) * v / x};
      }
      return {values(last), derivative_values(last)};
    }
    const Eigen::Index i = grid->locate(x);
    const Scalar h = nodes(i + 1) - nodes(i);
    const Scalar t = (x - nodes(i)) / h;
    const Scalar t2 = t * t, t3 = t2 * t;
    const Scalar h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const Scalar h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    const Scalar y0 = values(i), y1 = values(i + 1);
    const Scalar d0 = derivative_values(i), d1 = derivative_values(i + 1);
    const Scalar v = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    const Scalar dv = ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * h * d0 + (-6 * t2 + 6 * t) * y1 +
                       (3 * t2 - 2 * t) * h * d1) /
                      h;
    return {v, dv};
  }
};

using Profile = RadialProfile<double>;

/// Writes `r,value,dvalue` rows with 17 significant digits.
void write_profile_csv(std::ostream& os, const Profile& profile);
void write_profile_csv(const std::string& path, const Profile& profile);
/// Reads a profile CSV written by write_profile_csv; decay metadata is left as None.
Profile read_profile_csv(std::istream& is);

/// Checks positivity and monotone nonincrease up to `tolerance`.
bool is_positive_nonincreasing(const Profile& profile, double tolerance = 1e-12);

}  // namespace qsg
