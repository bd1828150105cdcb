#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "levycal/core.hpp"
#include "levycal/models.hpp"

namespace levycal {

/// Noisy option function samples O_j = O(x_j) + delta_j eps_j.
struct ObservationSet {
  Vector x;      ///< negative log-forward moneyness, strictly increasing
  Vector price;  ///< normalized OTM prices
  Vector delta;  ///< noise standard deviations
  double T = 1.0;
  double r = 0.0;
  double S0 = 1.0;

  Eigen::Index size() const { return x.size(); }
  /// Largest consecutive strike gap.
  double max_gap() const;
  /// min(x_N, -x_1).
  double half_width() const;
  void validate() const;
  /// Rows selected by index, metadata carried over.
  ObservationSet subset(const std::vector<Eigen::Index>& rows) const;
};

/// eps = Delta^{3/2} + Delta^{1/2} max_j delta_j.
double noise_level(const ObservationSet& obs);

struct DesignSpec {
  enum class Law { Normal, Explicit };
  enum class NoiseRule { Proportional, Explicit };

  int N = 100;
  Law law = Law::Normal;
  double design_variance = 1.0 / 3.0;
  std::vector<double> explicit_x;
  NoiseRule noise_rule = NoiseRule::Proportional;
  double noise_delta = 0.01;
  std::vector<double> explicit_delta;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Independent random stream keyed by (seed, stream, substream).
std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0);

/// FO(u) = (1 - phi_T(u - i)) / (u (u - i)), continuous through u = 0.
Complex fourier_option_transform(const LevyModel& model, double u);

struct InversionSettings {
  double u_max = 2048.0;
  double step = 0.05;
  /// Largest allowed change between (u_max, step) and (2 u_max, step / 2).
  double tolerance = 1e-6;
};

/// Normalized Black-Scholes OTM price for log-return variance `total_variance`.
double black_scholes_option_function(double x, double total_variance);

/// Evaluates the option function O(x) by Fourier inversion of FO. The
/// Black-Scholes option function with matched kink is inverted in closed form
/// and only the smooth difference is integrated numerically (midpoint rule).
class OptionPricer {
 public:
  explicit OptionPricer(const LevyModel& model, InversionSettings settings = {});

  double operator()(double x) const;
  Vector operator()(const Vector& x) const;

  /// Largest coarse/fine discrepancy seen so far.
  double max_discrepancy() const { return max_discrepancy_.load(); }

 private:
  double difference_sum(const std::vector<Complex>& terms, double step, double x) const;

  InversionSettings settings_;
  double reference_variance_;
  std::vector<Complex> coarse_;
  std::vector<Complex> fine_;
  // Shared by concurrent callers.
  mutable std::atomic<double> max_discrepancy_{0.0};
};

Vector option_function(const LevyModel& model, const Vector& x, const InversionSettings& settings = {});

ObservationSet simulate_observations(const LevyModel& model, const DesignSpec& spec);
ObservationSet simulate_observations(const OptionPricer& pricer, double T, const DesignSpec& spec);

void write_observations_csv(const ObservationSet& obs, const std::filesystem::path& path);
ObservationSet read_observations_csv(const std::filesystem::path& path);

}  // namespace levycal
