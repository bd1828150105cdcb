#include "levycal/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include <json.hpp>

#include "levycal/quadrature.hpp"

namespace levycal {

namespace {

// psi~ at an off-grid u by four-point Lagrange interpolation.
Complex interpolate_psi(const SpectralGrid& grid, double u) {
  const Eigen::Index size = grid.u.size();
  const double pos = (u - grid.u(0)) / grid.step;
  auto i0 = static_cast<Eigen::Index>(std::floor(pos)) - 1;
  i0 = std::clamp<Eigen::Index>(i0, 0, size - 4);
  const double t = pos - static_cast<double>(i0);
  Complex value = 0.0;
  for (int a = 0; a < 4; ++a) {
    double l = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a) l *= (t - b) / static_cast<double>(a - b);
    value += l * grid.psi(i0 + a);
  }
  return value;
}

double part_of(const Complex& z, bool imaginary) { return imaginary ? z.imag() : z.real(); }

// Romberg extrapolation of trapezoid sums with steps h, 2h, 4h, 8h (error O(h^8));
// values.size() - 1 must be a multiple of 8.
double romberg(const Vector& values, double h) {
  const Eigen::Index n = values.size() - 1;
  double table[4];
  for (int level = 0; level < 4; ++level) {
    const Eigen::Index stride = Eigen::Index{1} << level;
    double sum = 0.5 * (values(0) + values(n));
    for (Eigen::Index i = stride; i < n; i += stride) sum += values(i);
    table[level] = sum * h * static_cast<double>(stride);
  }
  // table[k] has step 2^k h; eliminate h^2, h^4, h^6.
  double factor = 4.0;
  for (int order = 1; order < 4; ++order, factor *= 4.0)
    for (int k = 0; k + order < 4; ++k) table[k] = (factor * table[k] - table[k + 1]) / (factor - 1.0);
  return table[0];
}

// int_0^U part(psi~(side t)) w(side t) dt, i.e. the integral over [0, U] or [-U, 0].
double half_line_filter(const SpectralGrid& grid, const WeightFunction& w, bool imaginary, int side) {
  const double h = grid.step;
  const double U = w.U;
  const Eigen::Index center = grid.zero_index();
  const auto n = 8 * static_cast<Eigen::Index>(std::floor(U / (8.0 * h) + 1e-9));
  double total = 0.0;
  if (n > 0) {
    Vector values(n + 1);
    for (Eigen::Index i = 0; i <= n; ++i) {
      const Eigen::Index index = center + side * i;
      values(i) = part_of(grid.psi(index), imaginary) * w(grid.u(index));
    }
    total = romberg(values, h);
  }
  // Remainder of length < 8h: Gauss-Legendre on interpolated psi~, one panel per grid step.
  static const auto rule = [] {
    std::pair<std::vector<double>, std::vector<double>> nw;
    gauss_legendre(6, nw.first, nw.second);
    return nw;
  }();
  double a = static_cast<double>(n) * h;
  while (U - a > 1e-12 * std::max(1.0, U)) {
    const double b = std::min(a + h, U);
    for (std::size_t q = 0; q < rule.first.size(); ++q) {
      const double u = side * (a + 0.5 * (b - a) * (rule.first[q] + 1.0));
      total += 0.5 * (b - a) * rule.second[q] * part_of(interpolate_psi(grid, u), imaginary) * w(u);
    }
    a = b;
  }
  return total;
}

}  // namespace

double filter_spectral(const SpectralGrid& grid, const WeightFunction& w, bool imaginary) {
  require(grid.has_psi, "estimator: spectral grid has no psi values");
  require(w.U <= grid.half_width() + 1e-9 * std::max(1.0, w.U), "estimator: spectral grid narrower than the cutoff U");
  require(grid.u.size() >= 7, "estimator: spectral grid too small");
  return half_line_filter(grid, w, imaginary, +1) + half_line_filter(grid, w, imaginary, -1);
}

double estimate_gamma(const SpectralGrid& grid, const WeightFunction& w) {
  require(w.kind == WeightKind::Gamma, "estimate_gamma: weight is not a gamma filter");
  return filter_spectral(grid, w, true);
}

double estimate_alpha(const SpectralGrid& grid, const WeightFunction& w) {
  require(w.kind == WeightKind::Alpha, "estimate_alpha: weight is not an alpha filter");
  return filter_spectral(grid, w, w.j % 2 == 1);
}

std::vector<double> estimate_alphas(const SpectralGrid& grid, int s, double U, bool clamp, double alpha_bar) {
  std::vector<double> alphas;
  for (int j = 0; j <= s - 2; ++j) alphas.push_back(estimate_alpha(grid, build_parameter_weight(WeightKind::Alpha, s, U, j)));
  if (clamp && !alphas.empty()) alphas[0] = std::clamp(alphas[0], 0.0, alpha_bar);
  return alphas;
}

Vector k_grid(double C, double cell_width) {
  require(C > 0.0 && cell_width > 0.0, "k_grid: need C > 0 and a positive cell width");
  const auto half = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(C / cell_width - 1e-9)));
  const double dx = C / static_cast<double>(half);
  Vector x(2 * half);
  for (Eigen::Index i = 0; i < 2 * half; ++i) x(i) = -C + (static_cast<double>(i) + 0.5) * dx;
  return x;
}

Vector estimate_k_e(const SpectralGrid& grid, double gamma_hat, const KernelWk& kernel, double U, const Vector& x,
                    double support_tol) {
  require(grid.has_psi_prime, "estimate_k_e: spectral grid has no psi' values");
  require(U > 0.0, "estimate_k_e: U must be positive");
  const double h = grid.step;
  const double u_max = std::min(kernel.effective_support(support_tol) * U, grid.half_width());
  const auto count = static_cast<Eigen::Index>(std::floor(u_max / h + 1e-9)) + 1;
  const Eigen::Index center = grid.zero_index();

  // Integrands for x > 0 and x < 0 on u >= 0; both are Hermitian in u, so
  // k_e(x) = (1/pi) Re int_0^inf e^{-iux} H(u) du.
  std::vector<Complex> plus(static_cast<std::size_t>(count)), minus(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) {
    const double u = grid.u(center + i);
    const Complex g = -gamma_hat - kI * grid.psi_prime(center + i);
    const double weight = (i == 0 ? 0.5 : 1.0) * h / kPi;
    plus[static_cast<std::size_t>(i)] = weight * g * kernel.fourier_table(u / U);
    minus[static_cast<std::size_t>(i)] = weight * g * kernel.fourier_table(-u / U);
  }

  const Eigen::Index n = x.size();
  Vector result = Vector::Zero(n);
  Vector c(n), s(n), c_step(n), s_step(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    c_step(k) = std::cos(h * x(k));
    s_step(k) = std::sin(h * x(k));
  }
  for (Eigen::Index i = 0; i < count; ++i) {
    const double u = grid.u(center + i);
    if (i % 256 == 0) {
      for (Eigen::Index k = 0; k < n; ++k) {
        c(k) = std::cos(u * x(k));
        s(k) = std::sin(u * x(k));
      }
    } else {
      for (Eigen::Index k = 0; k < n; ++k) {
        const double ck = c(k) * c_step(k) - s(k) * s_step(k);
        s(k) = s(k) * c_step(k) + c(k) * s_step(k);
        c(k) = ck;
      }
    }
    const Complex hp = plus[static_cast<std::size_t>(i)], hm = minus[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < n; ++k) {
      const Complex& hk = x(k) >= 0.0 ? hp : hm;
      result(k) += c(k) * hk.real() + s(k) * hk.imag();
    }
  }
  return result;
}

Vector truncate_k(const Vector& x, const Vector& k_e, double C) {
  require(C > 0.0, "truncate_k: C must be positive");
  require(x.size() == k_e.size(), "truncate_k: size mismatch");
  Vector k(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double sign = x(i) > 0.0 ? 1.0 : (x(i) < 0.0 ? -1.0 : 0.0);
    k(i) = std::abs(x(i)) <= C ? std::max(sign * std::exp(-x(i)) * k_e(i), 0.0) : 0.0;
  }
  return k;
}

Vector rearrange(const Vector& x, const Vector& k) {
  require(x.size() == k.size(), "rearrange: size mismatch");
  Vector out = k;
  for (int side : {+1, -1}) {
    std::vector<Eigen::Index> cells;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (side * x(i) > 0.0) cells.push_back(i);
    std::sort(cells.begin(), cells.end(), [&](Eigen::Index a, Eigen::Index b) { return std::abs(x(a)) < std::abs(x(b)); });
    std::vector<double> values;
    for (Eigen::Index i : cells) values.push_back(k(i));
    std::sort(values.begin(), values.end(), std::greater<>());
    for (std::size_t m = 0; m < cells.size(); ++m) out(cells[m]) = values[m];
  }
  return out;
}

double grid_l2_norm(const Vector& x, const Vector& f) {
  require(x.size() == f.size() && x.size() >= 2, "grid_l2_norm: need matching grids of size >= 2");
  return std::sqrt(f.squaredNorm() * (x(1) - x(0)));
}

std::vector<double> derivative_sums_from_alphas(const std::vector<double>& alphas) {
  std::vector<double> sums(alphas.size());
  double factorial = 1.0;
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    if (j > 0) factorial *= static_cast<double>(j);
    double value = alphas[j];
    double inv_fact = 1.0;
    for (std::size_t m = 1; m <= j; ++m) {
      inv_fact /= static_cast<double>(m);
      value += (m % 2 == 0 ? 1.0 : -1.0) * inv_fact * alphas[j - m];
    }
    sums[j] = factorial * value;
  }
  return sums;
}

TrimSpec CalibrationConfig::trim_spec(double T, double factor) const {
  TrimSpec spec;
  spec.T = T;
  spec.R = R;
  spec.alpha_bar = alpha_bar;
  spec.factor = factor;
  spec.disabled = !trim;
  return spec;
}

void CalibrationConfig::validate() const {
  require(s >= 2, "config: s must be at least 2");
  require(alpha_bar > 0.0, "config: alpha_bar must be positive");
  require(R > 0.0, "config: R must be positive");
  require(fine_step > 0.0 && coarse_step > 0.0 && coarse_limit > 0.0, "config: grid settings must be positive");
  require(k_cell > 0.0, "config: k_cell must be positive");
}

double support_bound(const ObservationSet& obs, const CalibrationConfig& cfg) {
  return cfg.C > 0.0 ? cfg.C : std::min(obs.half_width(), 5.0);
}

CalibrationResult calibrate_fixed(const ObservationSet& obs, const CalibrationConfig& cfg, double U, double U_k) {
  return calibrate_fixed(obs, cfg, cfg.trim_spec(obs.T), U, U_k);
}

CalibrationResult calibrate_fixed(const ObservationSet& obs, const CalibrationConfig& cfg, const TrimSpec& trim,
                                  double U, double U_k) {
  cfg.validate();
  require(U > 0.0 && std::isfinite(U), "calibrate: cutoff U must be positive");
  const InterpolatedSurface surface = build_surface(obs);

  SpectralOptions fine;
  fine.step = cfg.fine_step;
  fine.half_width = U + 2.0 * cfg.fine_step;
  fine.with_psi_prime = false;
  const SpectralGrid grid = spectral_grid(surface, trim, fine);

  CalibrationResult result;
  result.U_used = U;
  result.diagnostics.trim_fraction = grid.trimmed_fraction();
  result.diagnostics.unwrap_ok = grid.unwrap_ok;
  result.diagnostics.noise_level = noise_level(obs);

  const WeightFunction wg = build_parameter_weight(WeightKind::Gamma, cfg.s, U);
  result.gamma_hat = estimate_gamma(grid, wg);
  double defect = verify_moments(wg);
  for (int j = 0; j <= cfg.s - 2; ++j) {
    const WeightFunction wa = build_parameter_weight(WeightKind::Alpha, cfg.s, U, j);
    result.alpha_hats.push_back(estimate_alpha(grid, wa));
    defect = std::max(defect, verify_moments(wa.rescaled(1.0)));
  }
  if (cfg.clamp) result.alpha_hats[0] = std::clamp(result.alpha_hats[0], 0.0, cfg.alpha_bar);
  result.diagnostics.max_weight_defect = defect;
  result.derivative_sums = derivative_sums_from_alphas(result.alpha_hats);

  if (cfg.estimate_k) {
    require(U_k > 0.0 && std::isfinite(U_k), "calibrate: cutoff U_k must be positive");
    const auto kernel = build_kernel(cfg.s, obs.T, cfg.alpha_bar);
    SpectralOptions coarse;
    coarse.step = cfg.coarse_step;
    coarse.half_width = std::min(cfg.coarse_limit, kernel->effective_support(cfg.kernel_tol) * U_k + cfg.coarse_step);
    coarse.with_psi = false;
    const SpectralGrid wide = spectral_grid(surface, trim, coarse);
    result.U_k = U_k;
    result.C = support_bound(obs, cfg);
    result.x = k_grid(result.C, cfg.k_cell);
    result.k_e_hat = estimate_k_e(wide, result.gamma_hat, *kernel, U_k, result.x, cfg.kernel_tol);
    result.k_hat = truncate_k(result.x, result.k_e_hat, result.C);
    result.k_star = rearrange(result.x, result.k_hat);
  }
  return result;
}

nlohmann::ordered_json calibration_json(const CalibrationResult& result) {
  nlohmann::ordered_json out;
  out["gamma_hat"] = result.gamma_hat;
  out["alpha_hats"] = result.alpha_hats;
  out["derivative_sums"] = result.derivative_sums;
  out["U_used"] = result.U_used;
  out["U_k"] = result.U_k;
  out["C"] = result.C;
  auto to_vector = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  out["k_grid"] = {{"x", to_vector(result.x)}, {"k_e_hat", to_vector(result.k_e_hat)},
                   {"k_hat", to_vector(result.k_hat)}, {"k_star", to_vector(result.k_star)}};
  out["diagnostics"] = {{"trim_fraction", result.diagnostics.trim_fraction},
                        {"unwrap_ok", result.diagnostics.unwrap_ok},
                        {"max_weight_defect", result.diagnostics.max_weight_defect},
                        {"noise_level", result.diagnostics.noise_level}};
  return out;
}

void write_calibration_json(const CalibrationResult& result, const std::filesystem::path& path) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file << calibration_json(result).dump(2) << '\n';
}

void write_k_csv(const CalibrationResult& result, const std::filesystem::path& path) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file << std::setprecision(17) << "x,k_hat,k_star\n";
  for (Eigen::Index i = 0; i < result.x.size(); ++i)
    file << result.x(i) << ',' << result.k_hat(i) << ',' << result.k_star(i) << '\n';
}

}  // namespace levycal
