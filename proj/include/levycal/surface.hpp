#pragma once

#include "levycal/core.hpp"
#include "levycal/pricing.hpp"

namespace levycal {

/// Piecewise-linear interpolation of the option function: linear B-splines
/// through the observations plus the kink correction beta_0, which carries the
/// slope jump of -1 at the money. Zero outside [x_1, x_N].
class InterpolatedSurface {
 public:
  InterpolatedSurface() = default;

  const Vector& nodes() const { return nodes_; }
  const Vector& values() const { return values_; }
  /// Index of the first node with x >= 0.
  Eigen::Index bracket_index() const { return j0_; }
  double kink_left() const { return kink_left_; }
  double kink_right() const { return kink_right_; }
  /// Left slope a and right slope -b of beta_0.
  double beta0_left_slope() const { return beta0_a_; }
  double beta0_right_slope() const { return -beta0_b_; }
  double beta0(double x) const;

  double operator()(double x) const;

  /// Breakpoints (nodes plus 0) and the values of the surface there.
  const Vector& breakpoints() const { return breaks_; }
  const Vector& breakpoint_values() const { return break_values_; }
  /// Jumps of the surface and of its slope at each breakpoint (left to right).
  const Vector& value_jumps() const { return value_jumps_; }
  const Vector& slope_jumps() const { return slope_jumps_; }

  friend InterpolatedSurface build_surface(const ObservationSet& obs);

 private:
  Vector nodes_, values_;
  Eigen::Index j0_ = 0;
  double kink_left_ = 0.0, kink_right_ = 0.0;
  double beta0_a_ = 0.0, beta0_b_ = 0.0;
  Vector breaks_, break_values_;
  Vector value_jumps_, slope_jumps_;
};

InterpolatedSurface build_surface(const ObservationSet& obs);

/// int e^{iux} O~(x) dx, exact.
Complex ft_surface(const InterpolatedSurface& surface, double u);
/// int e^{iux} x O~(x) dx, exact.
Complex ft_x_surface(const InterpolatedSurface& surface, double u);

struct SurfaceTransforms {
  Complex plain;
  Complex weighted;
};

/// Both transforms in one pass over the breakpoints.
SurfaceTransforms ft_surface_both(const InterpolatedSurface& surface, double u);

/// Both transforms at u_i = i * step, i = 0..count-1.
void ft_surface_grid(const InterpolatedSurface& surface, double step, Eigen::Index count, ComplexVector& plain,
                     ComplexVector& weighted);

/// E_n(z) = int_0^1 t^n e^{zt} dt for n = 0, 1, 2, given ez = e^z.
template <typename Scalar>
void exponential_moments(const std::complex<Scalar>& z, const std::complex<Scalar>& ez, std::complex<Scalar>& e0,
                         std::complex<Scalar>& e1, std::complex<Scalar>& e2) {
  if (std::abs(z) < Scalar(0.5)) {
    // sum_k z^k / (k! (n + k + 1))
    std::complex<Scalar> term(1);
    e0 = e1 = e2 = std::complex<Scalar>(0);
    for (int k = 0; k < 24; ++k) {
      e0 += term / Scalar(k + 1);
      e1 += term / Scalar(k + 2);
      e2 += term / Scalar(k + 3);
      term *= z / Scalar(k + 1);
    }
    return;
  }
  e0 = (ez - Scalar(1)) / z;
  e1 = (ez - e0) / z;
  e2 = (ez - Scalar(2) * e1) / z;
}

}  // namespace levycal
