#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "levycal/core.hpp"
#include "levycal/surface.hpp"

namespace levycal {

/// sup_{y >= 1} |int_y^inf cos(x)/x dx|.
double cosine_tail_bound();
/// -min_{v >= 1} int_1^v cos(x)/x dx.
double cosine_partial_bound();
/// Ci(y) = -int_y^inf cos(x)/x dx.
double cosine_integral(double y);
/// Lower-bound constant C_phi(T, R) = exp(-T R (3 + 2e + 4 C2 + 2 C3)).
double char_lower_bound_constant(double T, double R);

/// Trimming threshold kappa(u).
struct TrimSpec {
  double T = 1.0;
  double R = 1.0;
  double alpha_bar = 40.0;
  /// 1/3 for fixed cutoffs, 1/2 for the adaptive threshold.
  double factor = 1.0 / 3.0;
  /// Replaces kappa by a 1e-12 floor.
  bool disabled = false;

  double c_phi() const { return char_lower_bound_constant(T, R); }
};

double kappa(double u, const TrimSpec& spec);

/// Radial projection onto {|z| >= k}; z = 0 maps to k.
template <typename Scalar>
std::complex<Scalar> trim(const std::complex<Scalar>& z, Scalar k) {
  const Scalar modulus = std::abs(z);
  if (modulus >= k) return z;
  if (modulus == Scalar(0)) return {k, Scalar(0)};
  return z * (k / modulus);
}

/// psi~ and psi~' sampled on a symmetric uniform grid u_i = (i - n) h.
struct SpectralGrid {
  double step = 0.0;
  Vector u;
  ComplexVector psi;
  ComplexVector psi_prime;
  std::vector<bool> trimmed;
  bool unwrap_ok = true;
  bool has_psi = false;
  bool has_psi_prime = false;

  Eigen::Index zero_index() const { return (u.size() - 1) / 2; }
  double half_width() const { return u.size() > 0 ? u(u.size() - 1) : 0.0; }
  double trimmed_fraction() const;
};

struct SpectralOptions {
  double step = 0.005;
  double half_width = 60.0;
  bool with_psi = true;
  bool with_psi_prime = true;
  int max_refinements = 3;
};

/// Symmetric uniform grid containing 0.
Vector symmetric_grid(double step, double half_width);

/// Empirical exponent (1/T) log v_kappa(1 + iu(1+iu) FO~(u)) with the phase
/// unwrapped outward from u = 0, and its derivative counterpart.
SpectralGrid spectral_grid(const InterpolatedSurface& surface, const TrimSpec& spec, const SpectralOptions& options);

/// psi~ only, on the given symmetric uniform grid.
SpectralGrid psi_tilde(const InterpolatedSurface& surface, const TrimSpec& spec, const Vector& u_grid);
/// psi~' only, on the given symmetric uniform grid.
SpectralGrid psi_prime_tilde(const InterpolatedSurface& surface, const TrimSpec& spec, const Vector& u_grid);

/// Grid filled from exact exponent functions (oracles, synthetic exponents).
SpectralGrid spectral_grid_from(const std::function<Complex(double)>& psi,
                                const std::function<Complex(double)>& psi_prime, double step, double half_width);

void write_spectral_csv(const SpectralGrid& grid, const std::filesystem::path& path);

}  // namespace levycal
