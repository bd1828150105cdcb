#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "levycal/adaptive.hpp"
#include "levycal/models.hpp"

namespace levycal {

/// count log-spaced cutoffs in [lo, hi].
Vector log_cutoff_grid(double lo = 0.5, double hi = 60.0, int count = 60);

struct OracleChoice {
  double U = 0.0;
  double estimate = 0.0;
  double error = 0.0;
};

/// argmin_U |estimate(U) - truth| over the grid; ties go to the smaller U.
OracleChoice oracle_cutoff(const std::function<double(double)>& estimate, double truth, const Vector& U_grid);

/// Estimates at their oracle cutoffs for one data set with a known model.
struct OracleCalibration {
  /// gamma, alpha0..alpha{s-2} and, with estimate_k, k_e.
  std::vector<std::string> quantities;
  /// For k_e, `estimate` holds the grid L2 norm of the chosen k_e estimate.
  std::vector<OracleChoice> choices;
  /// U_used is the gamma oracle cutoff, U_k the k_e one.
  CalibrationResult result;
  /// Truncated true k on result.x.
  Vector k_true;
};

OracleCalibration oracle_calibration(const ObservationSet& obs, const LevyModel& model, const CalibrationConfig& cfg,
                                     const Vector& U_grid = log_cutoff_grid());

struct BenchConfig {
  CalibrationConfig calibration;
  int pre_stride = 5;
  DesignSpec design;
  int reps = 200;
  std::uint64_t seed = 1;
  int workers = 1;
  Vector U_grid = log_cutoff_grid();
  bool estimate_k = true;
  bool adaptive = true;
  /// Free-form description echoed into the JSON report.
  nlohmann::ordered_json echo = nlohmann::ordered_json::object();

  void validate() const;
};

struct RiskRow {
  std::string quantity;
  double truth = 0.0;
  double oracle_rmse = 0.0;
  double adaptive_rmse = 0.0;
  int reps = 0;
};

struct KFunctionSample {
  Vector x, k_true, k_hat, k_star;
};

struct RiskTable {
  std::vector<RiskRow> rows;
  std::uint64_t seed = 0;
  int reps_requested = 0;
  int failures = 0;
  /// More than 5% of the replications failed.
  bool flagged = false;
  double mean_noise_level = 0.0;
  /// Replications where the rearranged estimate was farther from k than the truncated one.
  int rearrangement_violations = 0;
  /// Largest ||k*-k|| - ||k^-k|| over the replications.
  double max_rearrangement_gain = 0.0;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  KFunctionSample last_k;

  const RiskRow& row(const std::string& quantity) const;
};

/// Replicated simulate-and-estimate runs with oracle and adaptive cutoffs.
/// Identical for any number of workers.
RiskTable monte_carlo(const LevyModel& model, const BenchConfig& cfg);

struct RatePoint {
  double delta = 0.0;
  double mean_noise_level = 0.0;
  double rmse_gamma = 0.0;
  int reps = 0;
};

struct RateStudy {
  std::vector<RatePoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  double theoretical_exponent = 0.0;
  std::uint64_t seed = 0;
};

/// RMSE of the oracle gamma estimate against the mean noise level over a delta grid,
/// with a least-squares slope in log-log coordinates.
RateStudy rate_study(const LevyModel& model, const BenchConfig& cfg, const std::vector<double>& delta_grid);

/// 2s / (2s + 2 T alpha + 1).
double theoretical_rate(int s, double T, double alpha);

void emit_report(const RiskTable& table, const std::filesystem::path& dir);
void emit_report(const RateStudy& study, const std::filesystem::path& dir);
nlohmann::ordered_json risk_table_json(const RiskTable& table);
RiskTable read_risk_table_json(const std::filesystem::path& path);

/// L2 norm of k_e over the real line.
double k_e_l2_norm(const LevyModel& model);

}  // namespace levycal
