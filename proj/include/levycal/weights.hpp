#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "levycal/core.hpp"

namespace levycal {

enum class WeightKind { Gamma, Alpha };
enum class Parity { Odd, Even };

/// Polynomial filter w^U(u) = U^e w1(u/U) with
/// w1(v) = sign(v)^p |v|^{s-1} sum_m c_m |v|^m on [-1, 1], zero outside.
struct WeightFunction {
  WeightKind kind = WeightKind::Gamma;
  /// Index j of alpha_j; unused for gamma.
  int j = 0;
  int s = 2;
  double U = 1.0;
  Parity parity = Parity::Odd;
  Vector coeffs;
  int rescale_exponent = -2;
  double condition_number = 1.0;

  /// w1(v).
  double unit(double v) const;
  /// w^U(u).
  double operator()(double u) const;
  Vector operator()(const Vector& u) const { return u.unaryExpr([this](double v) { return (*this)(v); }); }
  /// The same filter at another cutoff.
  WeightFunction rescaled(double new_U) const;
  std::string label() const;
};

/// Solves the moment system for gamma (kind Gamma) or alpha_j (kind Alpha).
WeightFunction build_parameter_weight(WeightKind kind, int s, double U, int j = 0);

/// One moment condition int_a^b f(u) w(u) du = target, as checked by verify_moments.
struct MomentCondition {
  std::string name;
  double value;
  double target;
};

/// Every moment condition re-evaluated by adaptive quadrature.
std::vector<MomentCondition> moment_conditions(const WeightFunction& w);
/// Largest |value - target| over moment_conditions(w).
double verify_moments(const WeightFunction& w);

void write_weights_json(const std::vector<WeightFunction>& weights, const std::filesystem::path& path);

/// One-sided kernel W_k(x) = q(x) (-x(1+x))^r on [-1, 0] with
/// int W_k = 1 and int x^l W_k = 0 for l = 1..s-1, plus a table of its Fourier transform.
class KernelWk {
 public:
  KernelWk(int s, int r);

  int s() const { return s_; }
  int bump_exponent() const { return r_; }

  double operator()(double x) const;
  /// int e^{ivx} W_k(x) dx computed directly.
  Complex fourier(double v) const;
  /// FW_k(v) from the table (cubic interpolation); 0 beyond the table.
  Complex fourier_table(double v) const;
  double table_step() const { return table_step_; }
  double table_limit() const { return table_limit_; }
  /// Smallest V with |FW_k(v)| <= tol for all tabulated |v| >= V.
  double effective_support(double tol) const;
  /// int |W_k|.
  double l1_norm() const;
  /// Taylor coefficients of W_k at 0 and at -1.
  const std::vector<double>& taylor_at_zero() const { return taylor_zero_; }
  const std::vector<double>& taylor_at_minus_one() const { return taylor_minus_one_; }

 private:
  int s_, r_;
  Vector legendre_coeffs_;
  std::vector<double> taylor_zero_, taylor_minus_one_;
  double table_step_ = 0.01;
  double table_limit_ = 4096.0;
  std::vector<Complex> table_;
};

/// Bump exponent ceil(T * alpha_bar) + 3.
int kernel_bump_exponent(double T, double alpha_bar);

/// Built once per (s, r) and shared.
std::shared_ptr<const KernelWk> build_kernel(int s, double T, double alpha_bar);

}  // namespace levycal
