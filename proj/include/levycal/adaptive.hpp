#pragma once

#include <utility>

#include "levycal/estimators.hpp"

namespace levycal {

struct AdaptiveConfig {
  /// s, alpha_bar, R, clamp and grid settings.
  CalibrationConfig calibration;
  /// Every pre_stride-th strike goes to the preestimator sample.
  int pre_stride = 5;

  void validate() const;
};

/// (pre, main): pre holds strikes stride, 2 stride, ... (1-based), main the rest.
std::pair<ObservationSet, ObservationSet> split_sample(const ObservationSet& obs, int stride);

/// Fixed cutoff eps^{-2/(2s + 2 T alpha + 1)}.
double rate_cutoff(double eps, int s, double T, double alpha);
/// Cutoff for k_e: eps^{-2/(2s + 2 T alpha + 5)}.
double rate_cutoff_k(double eps, int s, double T, double alpha);

struct AdaptiveCutoff {
  double U = 0.0;
  double U_k = 0.0;
  /// alpha_pre + 1/|log eps|.
  double alpha_bar_pre = 0.0;
  TrimSpec trim;
};

/// Data-driven cutoffs and trimming threshold from the preestimate of alpha.
AdaptiveCutoff adaptive_cutoff(double alpha_pre, double eps, double T, const AdaptiveConfig& cfg);

struct AdaptiveResult {
  CalibrationResult result;
  double alpha_pre = 0.0;
  double U_pre = 0.0;
  double eps_pre = 0.0;
  double eps = 0.0;
  std::size_t pre_size = 0;
  std::size_t main_size = 0;
};

/// Split, preestimate alpha at U_{alpha_bar}, then calibrate the main sample at the adaptive cutoffs.
AdaptiveResult estimate_adaptive(const ObservationSet& obs, const AdaptiveConfig& cfg);

}  // namespace levycal
