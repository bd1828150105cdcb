#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "levycal/core.hpp"
#include "levycal/quadrature.hpp"

namespace levycal {

/// Variance gamma parameters: Brownian motion with drift `theta` and scale
/// `sigma` time-changed by a gamma subordinator with variance rate `nu`.
struct VGParams {
  double sigma = 1.2;
  double nu = 0.2;
  double theta = -0.15;

  /// Exponential tilt of the Levy density, theta / sigma^2.
  double tilt() const { return theta / (sigma * sigma); }
  /// Exponential decay rate of the Levy density.
  double decay() const;
  /// Rejects parameters without a martingale drift (needs B - A > 1).
  void validate() const;
  /// E[e^{2 X_T}] < infinity, i.e. B - A > 2. Not enforced by validate():
  /// the nu = 0.5 benchmark model violates it.
  bool has_second_moment() const;
};

/// Finite-variation exponential Levy model described through its k-function,
/// nu(dx) = k(x) / |x| dx, and the drift fixed by the martingale condition.
struct LevyModel {
  double T = 1.0;
  double gamma = 0.0;
  /// k(0+) + k(0-).
  double alpha = 0.0;
  std::function<double(double)> k;
  /// z -> int (e^{izx} - 1) k(x)/|x| dx on the strip -1 <= Im z <= 0.
  std::function<Complex(Complex)> jump_exponent;
  /// Optional analytic one-sided derivatives: (order, side = +1 | -1) -> k^{(order)}(0 side).
  std::function<double(int, int)> k_derivative;

  /// psi(u) = (1/T) log phi_T(u - i) on the continuous branch with psi(0) = 0.
  Complex shifted_exponent(double u) const;
  /// phi_T(u - i).
  Complex char_shifted(double u) const { return std::exp(T * shifted_exponent(u)); }
  /// k_e(x) = sgn(x) e^x k(x).
  double k_e(double x) const;
};

LevyModel vg_model(const VGParams& params, double T);

/// Closed-form VG drift (1/nu) log(1 - theta nu - sigma^2 nu / 2).
double vg_martingale_drift(const VGParams& params);

/// gamma = -int (e^x - 1) k(x) / |x| dx by adaptive quadrature.
double martingale_drift(const std::function<double(double)>& k, const QuadratureSpec& spec = {});

struct OneSidedDerivative {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// k^{(order)}(0+) (side = +1) or k^{(order)}(0-) (side = -1) from one-sided
/// interpolation stencils with step halving and Richardson extrapolation.
OneSidedDerivative one_sided_derivative(const std::function<double(double)>& k, int order, int side,
                                        double initial_step = 1e-3);

/// Sums k^{(j)}(0+) + k^{(j)}(0-), j = 0..count-1.
std::vector<double> derivative_sums(const LevyModel& model, int count);

/// Forward recursion alpha_j = s_j/j! - sum_{m=1}^j (-1)^m/m! alpha_{j-m} from
/// the derivative sums s_j.
std::vector<double> alphas_from_derivative_sums(const std::vector<double>& sums);

/// True alpha_0..alpha_{s-2}.
std::vector<double> true_alphas(const LevyModel& model, int s);

/// Sato-process view: T' = 1, gamma' = T^H gamma, k'(x) = k(T^{-H} x).
LevyModel sato_reparameterize(const LevyModel& model, double H, double T);

}  // namespace levycal
