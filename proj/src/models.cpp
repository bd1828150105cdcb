#include "levycal/models.hpp"

#include <cmath>
#include <sstream>

namespace levycal {

double VGParams::decay() const {
  return std::sqrt(theta * theta + 2.0 * sigma * sigma / nu) / (sigma * sigma);
}

void VGParams::validate() const {
  require(sigma > 0.0 && std::isfinite(sigma), "VG: sigma must be positive");
  require(nu > 0.0 && std::isfinite(nu), "VG: nu must be positive");
  require(std::isfinite(theta), "VG: theta must be finite");
  require(1.0 - theta * nu - 0.5 * sigma * sigma * nu > 0.0,
          "VG: 1 - theta*nu - sigma^2*nu/2 must be positive for the martingale drift");
  require(decay() - tilt() > 1.0, "VG: exponential moment is infinite (B - A <= 1)");
}

bool VGParams::has_second_moment() const { return decay() - tilt() > 2.0; }

Complex LevyModel::shifted_exponent(double u) const {
  const Complex z(u, -1.0);
  return kI * gamma * z + jump_exponent(z);
}

double LevyModel::k_e(double x) const {
  if (x == 0.0) return 0.0;
  const double kx = k(x);
  if (kx == 0.0) return 0.0;
  return (x > 0.0 ? 1.0 : -1.0) * std::exp(x) * kx;
}

double vg_martingale_drift(const VGParams& p) {
  return std::log(1.0 - p.theta * p.nu - 0.5 * p.sigma * p.sigma * p.nu) / p.nu;
}

LevyModel vg_model(const VGParams& params, double T) {
  params.validate();
  require(T > 0.0, "vg_model: maturity must be positive");
  const double nu = params.nu;
  const double a = params.tilt();
  const double b = params.decay();
  const double half_var = 0.5 * params.sigma * params.sigma * nu;
  const double theta_nu = params.theta * nu;

  LevyModel model;
  model.T = T;
  model.alpha = 2.0 / nu;
  model.gamma = vg_martingale_drift(params);
  model.k = [=](double x) { return std::exp(a * x - b * std::abs(x)) / nu; };
  // On -1 <= Im z <= 0 the real part of the argument stays above
  // 1 - theta*nu - sigma^2*nu/2 > 0, so the principal logarithm is the
  // continuous branch started at z = 0.
  model.jump_exponent = [=](Complex z) {
    return -std::log(1.0 - kI * theta_nu * z + half_var * z * z) / nu;
  };
  model.k_derivative = [=](int order, int side) {
    const double rate = side > 0 ? a - b : a + b;
    return std::pow(rate, order) / nu;
  };
  return model;
}

double martingale_drift(const std::function<double(double)>& k, const QuadratureSpec& spec) {
  auto integrand = [&](double x) {
    const double kx = x == 0.0 ? 0.0 : k(x);
    if (kx == 0.0) return 0.0;
    return std::expm1(x) * kx / std::abs(x);
  };
  const auto right = integrate_to_infinity(integrand, 0.0, spec);
  const auto left = integrate_from_minus_infinity(integrand, 0.0, spec);
  if (!right.converged || !left.converged) {
    std::ostringstream msg;
    msg << "martingale_drift: quadrature did not converge (achieved error " << right.error + left.error << ")";
    throw NumericError(msg.str());
  }
  return -(right.value + left.value);
}

OneSidedDerivative one_sided_derivative(const std::function<double(double)>& k, int order, int side,
                                        double initial_step) {
  require(order >= 0, "one_sided_derivative: negative order");
  require(side == 1 || side == -1, "one_sided_derivative: side must be +1 or -1");
  const int points = order + 4;
  const int accuracy = points - order;
  // Cancellation grows like eps / h^order; widen the step for high orders.
  const double h0 = std::max(initial_step, std::pow(1e-16, 1.0 / points));

  auto estimate = [&](double h) {
    std::vector<double> nodes(points);
    for (int m = 0; m < points; ++m) nodes[m] = side * h * (m + 1);
    const auto w = finite_difference_weights(0.0, nodes, order);
    double sum = 0.0;
    for (int m = 0; m < points; ++m) sum += w[m] * k(nodes[m]);
    return sum;
  };
  const double coarse = estimate(h0);
  const double fine = estimate(0.5 * h0);
  const double factor = std::pow(2.0, accuracy);
  const double extrapolated = (factor * fine - coarse) / (factor - 1.0);
  return {extrapolated, std::abs(extrapolated - fine)};
}

std::vector<double> derivative_sums(const LevyModel& model, int count) {
  std::vector<double> sums(count);
  for (int j = 0; j < count; ++j) {
    if (model.k_derivative) {
      sums[j] = model.k_derivative(j, 1) + model.k_derivative(j, -1);
    } else {
      sums[j] = one_sided_derivative(model.k, j, 1).value + one_sided_derivative(model.k, j, -1).value;
    }
  }
  return sums;
}

std::vector<double> alphas_from_derivative_sums(const std::vector<double>& sums) {
  std::vector<double> alphas(sums.size());
  double j_factorial = 1.0;
  for (std::size_t j = 0; j < sums.size(); ++j) {
    if (j > 0) j_factorial *= static_cast<double>(j);
    double value = sums[j] / j_factorial;
    double m_factorial = 1.0;
    for (std::size_t m = 1; m <= j; ++m) {
      m_factorial *= static_cast<double>(m);
      const double sign = m % 2 == 0 ? 1.0 : -1.0;
      value -= sign / m_factorial * alphas[j - m];
    }
    alphas[j] = value;
  }
  return alphas;
}

std::vector<double> true_alphas(const LevyModel& model, int s) {
  require(s >= 2, "true_alphas: s must be at least 2");
  return alphas_from_derivative_sums(derivative_sums(model, s - 1));
}

LevyModel sato_reparameterize(const LevyModel& model, double H, double T) {
  require(H > 0.0 && T > 0.0, "sato_reparameterize: H and T must be positive");
  const double scale = std::pow(T, H);
  LevyModel out;
  out.T = 1.0;
  out.gamma = scale * model.gamma;
  out.alpha = model.alpha;
  auto k = model.k;
  out.k = [k, scale](double x) { return k(x / scale); };
  auto jump = model.jump_exponent;
  out.jump_exponent = [jump, scale](Complex z) { return jump(scale * z); };
  if (model.k_derivative) {
    auto deriv = model.k_derivative;
    out.k_derivative = [deriv, scale](int order, int side) {
      return deriv(order, side) * std::pow(scale, -order);
    };
  }
  return out;
}

}  // namespace levycal
