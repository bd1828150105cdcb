#include "levycal/adaptive.hpp"

#include <algorithm>
#include <cmath>

namespace levycal {

void AdaptiveConfig::validate() const {
  calibration.validate();
  require(pre_stride >= 2, "adaptive: pre_stride must be at least 2");
}

std::pair<ObservationSet, ObservationSet> split_sample(const ObservationSet& obs, int stride) {
  require(stride >= 2, "split_sample: stride must be at least 2");
  require(obs.size() >= 2 * static_cast<Eigen::Index>(stride), "split_sample: need at least 2*stride strikes");
  std::vector<Eigen::Index> pre, main;
  for (Eigen::Index i = 0; i < obs.size(); ++i) ((i + 1) % stride == 0 ? pre : main).push_back(i);
  return {obs.subset(pre), obs.subset(main)};
}

double rate_cutoff(double eps, int s, double T, double alpha) {
  require(eps > 0.0 && eps < 1.0, "cutoff: noise level must lie in (0, 1)");
  return std::pow(eps, -2.0 / (2.0 * s + 2.0 * T * alpha + 1.0));
}

double rate_cutoff_k(double eps, int s, double T, double alpha) {
  require(eps > 0.0 && eps < 1.0, "cutoff: noise level must lie in (0, 1)");
  return std::pow(eps, -2.0 / (2.0 * s + 2.0 * T * alpha + 5.0));
}

AdaptiveCutoff adaptive_cutoff(double alpha_pre, double eps, double T, const AdaptiveConfig& cfg) {
  require(eps > 0.0 && eps < 1.0, "adaptive_cutoff: noise level must lie in (0, 1)");
  const CalibrationConfig& c = cfg.calibration;
  const double alpha = std::clamp(alpha_pre, 0.0, c.alpha_bar);
  AdaptiveCutoff cut;
  cut.U = rate_cutoff(eps, c.s, T, alpha);
  cut.U_k = rate_cutoff_k(eps, c.s, T, alpha);
  cut.alpha_bar_pre = alpha + 1.0 / std::abs(std::log(eps));
  cut.trim = c.trim_spec(T, 0.5);
  cut.trim.alpha_bar = cut.alpha_bar_pre;
  return cut;
}

AdaptiveResult estimate_adaptive(const ObservationSet& obs, const AdaptiveConfig& cfg) {
  cfg.validate();
  const CalibrationConfig& c = cfg.calibration;
  auto [pre, main] = split_sample(obs, cfg.pre_stride);

  AdaptiveResult out;
  out.pre_size = static_cast<std::size_t>(pre.size());
  out.main_size = static_cast<std::size_t>(main.size());
  out.eps_pre = noise_level(pre);
  out.U_pre = rate_cutoff(out.eps_pre, c.s, obs.T, c.alpha_bar);

  SpectralOptions options;
  options.step = c.fine_step;
  options.half_width = out.U_pre + 2.0 * c.fine_step;
  options.with_psi_prime = false;
  const SpectralGrid pre_grid = spectral_grid(build_surface(pre), c.trim_spec(obs.T), options);
  const double alpha_pre = estimate_alpha(pre_grid, build_parameter_weight(WeightKind::Alpha, c.s, out.U_pre, 0));
  out.alpha_pre = std::clamp(alpha_pre, 0.0, c.alpha_bar);

  out.eps = noise_level(main);
  const AdaptiveCutoff cut = adaptive_cutoff(out.alpha_pre, out.eps, obs.T, cfg);
  out.result = calibrate_fixed(main, c, cut.trim, cut.U, cut.U_k);
  return out;
}

}  // namespace levycal
