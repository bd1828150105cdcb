#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "levycal/core.hpp"

namespace levycal {

template <typename Scalar>
struct QuadratureResult {
  Scalar value{};
  double error = 0.0;
  bool converged = true;
};

struct QuadratureSpec {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_subdivisions = 4000;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes on [-1, 1] (nonnegative half).
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename Scalar, typename F>
void gauss_kronrod_15(const F& f, double a, double b, Scalar& kronrod, double& error) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const Scalar fc = f(center);
  Scalar gauss = fc * kGaussWeights[3];
  kronrod = fc * kKronrodWeights[7];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const Scalar sum = f(center - dx) + f(center + dx);
    kronrod += sum * kKronrodWeights[i];
    if (i % 2 == 1) gauss += sum * kGaussWeights[i / 2];
  }
  kronrod *= half;
  gauss *= half;
  error = std::abs(kronrod - gauss);
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
/// Scalar may be real or complex.
template <typename Scalar = double, typename F>
QuadratureResult<Scalar> integrate(const F& f, double a, double b, const QuadratureSpec& spec = {}) {
  struct Segment {
    double a, b;
    Scalar value;
    double error;
  };
  std::vector<Segment> segments;
  segments.reserve(64);
  Segment first{a, b, Scalar{}, 0.0};
  detail::gauss_kronrod_15(f, a, b, first.value, first.error);
  segments.push_back(first);

  Scalar total = first.value;
  double total_error = first.error;
  for (int iter = 0; iter < spec.max_subdivisions; ++iter) {
    if (total_error <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) break;
    std::size_t worst = 0;
    for (std::size_t i = 1; i < segments.size(); ++i)
      if (segments[i].error > segments[worst].error) worst = i;
    const Segment s = segments[worst];
    const double mid = 0.5 * (s.a + s.b);
    if (!(mid > s.a && mid < s.b)) break;
    Segment left{s.a, mid, Scalar{}, 0.0};
    Segment right{mid, s.b, Scalar{}, 0.0};
    detail::gauss_kronrod_15(f, left.a, left.b, left.value, left.error);
    detail::gauss_kronrod_15(f, right.a, right.b, right.value, right.error);
    segments[worst] = left;
    segments.push_back(right);
    total = Scalar{};
    total_error = 0.0;
    for (const auto& seg : segments) {
      total += seg.value;
      total_error += seg.error;
    }
  }
  QuadratureResult<Scalar> result;
  result.value = total;
  result.error = total_error;
  result.converged = total_error <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total)) * 10.0;
  return result;
}

/// Integral over [a, +inf) through the map x = a + t / (1 - t).
template <typename Scalar = double, typename F>
QuadratureResult<Scalar> integrate_to_infinity(const F& f, double a, const QuadratureSpec& spec = {}) {
  auto mapped = [&](double t) -> Scalar {
    if (t >= 1.0) return Scalar{};
    const double one_minus = 1.0 - t;
    const double x = a + t / one_minus;
    const Scalar v = f(x);
    return v / (one_minus * one_minus);
  };
  return integrate<Scalar>(mapped, 0.0, 1.0, spec);
}

/// Integral over (-inf, b].
template <typename Scalar = double, typename F>
QuadratureResult<Scalar> integrate_from_minus_infinity(const F& f, double b, const QuadratureSpec& spec = {}) {
  return integrate_to_infinity<Scalar>([&](double y) { return f(-y); }, -b, spec);
}

/// Composite Simpson rule for samples on a uniform grid. An odd number of
/// intervals closes with a 3/8 panel.
template <typename Derived>
typename Derived::Scalar simpson(const Eigen::DenseBase<Derived>& y, double h) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = y.size();
  if (n < 2) return Scalar{};
  if (n == 2) return 0.5 * h * (y(0) + y(1));
  const Eigen::Index intervals = n - 1;
  Eigen::Index simpson_end = intervals % 2 == 0 ? intervals : intervals - 3;
  Scalar sum{};
  for (Eigen::Index i = 0; i + 2 <= simpson_end; i += 2) sum += y(i) + 4.0 * y(i + 1) + y(i + 2);
  sum *= h / 3.0;
  if (intervals % 2 == 1) {
    if (intervals == 1) return 0.5 * h * (y(0) + y(1));
    const Eigen::Index k = simpson_end;
    sum += 3.0 * h / 8.0 * (y(k) + 3.0 * y(k + 1) + 3.0 * y(k + 2) + y(k + 3));
  }
  return sum;
}

/// n-point Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Weights for the derivative of order `order` at `x0` from arbitrary nodes (Fornberg).
std::vector<double> finite_difference_weights(double x0, std::span<const double> nodes, int order);

}  // namespace levycal
