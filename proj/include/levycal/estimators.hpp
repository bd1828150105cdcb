#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "levycal/core.hpp"
#include "levycal/pricing.hpp"
#include "levycal/spectral.hpp"
#include "levycal/weights.hpp"

namespace levycal {

/// int_{-U}^{U} Re or Im psi~(u) w(u) du on the spectral grid: Romberg-extrapolated
/// trapezoid sums on each half-line, Gauss-Legendre on the remainder.
double filter_spectral(const SpectralGrid& grid, const WeightFunction& w, bool imaginary);

double estimate_gamma(const SpectralGrid& grid, const WeightFunction& w);
/// Re psi~ for even j, Im psi~ for odd j.
double estimate_alpha(const SpectralGrid& grid, const WeightFunction& w);
/// alpha_0..alpha_{s-2} at cutoff U; alpha_0 optionally clamped to [0, alpha_bar].
std::vector<double> estimate_alphas(const SpectralGrid& grid, int s, double U, bool clamp = false,
                                    double alpha_bar = 40.0);

/// Cell midpoints of an even number of cells covering [-C, C].
Vector k_grid(double C, double cell_width = 0.02);

/// k_e estimate on x: (1/2pi) int e^{-iux} (-gamma_hat - i psi~'(u)) FW_k(+-u/U) du,
/// with + for x > 0 and - for x < 0, truncated where |FW_k| < support_tol.
Vector estimate_k_e(const SpectralGrid& grid, double gamma_hat, const KernelWk& kernel, double U, const Vector& x,
                    double support_tol = 1e-10);

/// (sgn(x) e^{-x} k_e(x) v 0) restricted to [-C, C].
Vector truncate_k(const Vector& x, const Vector& k_e, double C);
/// Decreasing rearrangement on x > 0 and increasing on x < 0 (values sorted by |x|).
Vector rearrange(const Vector& x, const Vector& k);
/// Discrete L2 norm sqrt(sum f^2 dx) on a uniform cell grid.
double grid_l2_norm(const Vector& x, const Vector& f);

/// k^{(j)}(0+) + k^{(j)}(0-) = j! (alpha_j + sum_{m=1}^j (-1)^m/m! alpha_{j-m}).
std::vector<double> derivative_sums_from_alphas(const std::vector<double>& alphas);

struct CalibrationDiagnostics {
  double trim_fraction = 0.0;
  bool unwrap_ok = true;
  double max_weight_defect = 0.0;
  double noise_level = 0.0;
};

struct CalibrationResult {
  double gamma_hat = 0.0;
  std::vector<double> alpha_hats;
  std::vector<double> derivative_sums;
  double U_used = 0.0;
  double U_k = 0.0;
  double C = 0.0;
  Vector x;
  Vector k_e_hat;
  Vector k_hat;
  Vector k_star;
  CalibrationDiagnostics diagnostics;
};

struct CalibrationConfig {
  int s = 6;
  double alpha_bar = 40.0;
  double R = 1.0;
  bool clamp = true;
  bool trim = true;
  /// Fine grid for the parameter filters.
  double fine_step = 0.005;
  /// Coarse wide grid for psi~' in the k_e inversion.
  double coarse_step = 0.05;
  double coarse_limit = 2048.0;
  /// Rearrangement support; <= 0 selects min(A, 5).
  double C = 0.0;
  double k_cell = 0.02;
  bool estimate_k = true;
  double kernel_tol = 1e-10;

  TrimSpec trim_spec(double T, double factor = 1.0 / 3.0) const;
  void validate() const;
};

/// All estimators at fixed cutoffs (U for parameters, U_k for k_e).
CalibrationResult calibrate_fixed(const ObservationSet& obs, const CalibrationConfig& cfg, double U, double U_k);
/// Same with an explicit trimming threshold.
CalibrationResult calibrate_fixed(const ObservationSet& obs, const CalibrationConfig& cfg, const TrimSpec& trim,
                                  double U, double U_k);

/// Rearrangement support for the given data: cfg.C or min(A, 5).
double support_bound(const ObservationSet& obs, const CalibrationConfig& cfg);

nlohmann::ordered_json calibration_json(const CalibrationResult& result);
void write_calibration_json(const CalibrationResult& result, const std::filesystem::path& path);
/// Columns x,k_hat,k_star.
void write_k_csv(const CalibrationResult& result, const std::filesystem::path& path);

}  // namespace levycal
