#include <doctest.h>

#include <cmath>
#include <random>

#include "levycal/bench.hpp"
#include "levycal/estimators.hpp"
#include "support.hpp"

using namespace levycal;

namespace {

/// i gamma u - alpha_0 log|u| + sum_j i^j (j-1)! alpha_j u^{-j} + D(sign u); 0 at u = 0.
std::function<Complex(double)> expansion_exponent(double gamma, std::vector<double> alpha, Complex D) {
  return [=](double u) -> Complex {
    if (u == 0.0) return 0.0;
    Complex v = kI * gamma * u - alpha[0] * std::log(std::abs(u)) + (u > 0.0 ? D : std::conj(D));
    double factorial = 1.0;
    for (std::size_t j = 1; j < alpha.size(); ++j) {
      if (j > 1) factorial *= static_cast<double>(j - 1);
      v += std::pow(kI, static_cast<int>(j)) * factorial * alpha[j] * std::pow(u, -static_cast<int>(j));
    }
    return v;
  };
}

Complex exact_psi_prime(const LevyModel& m, const VGParams& p, double u) {
  // i gamma + i F k_e(u) for the VG k-function
  const double a = p.tilt(), b = p.decay();
  const Complex ft = (1.0 / p.nu) / Complex(b - a - 1.0, -u) - (1.0 / p.nu) / Complex(1.0 + a + b, u);
  return kI * m.gamma + kI * ft;
}

}  // namespace

TEST_SUITE("estimators") {
  TEST_CASE("pure drift is recovered exactly") {
    const SpectralGrid g = spectral_grid_from([](double u) { return Complex(0.0, 0.37 * u); }, nullptr, 0.005, 5.0);
    for (double U : {0.7, 2.0, 4.9})
      CHECK(std::abs(estimate_gamma(g, build_parameter_weight(WeightKind::Gamma, 6, U)) - 0.37) < 1e-10);
  }

  TEST_CASE("pure log term gives alpha_0") {
    const SpectralGrid g =
        spectral_grid_from([](double u) { return u == 0.0 ? Complex(0.0) : Complex(-7.5 * std::log(std::abs(u))); },
                           nullptr, 0.005, 5.0);
    CHECK(estimate_alpha(g, build_parameter_weight(WeightKind::Alpha, 6, 3.0, 0)) == doctest::Approx(7.5).epsilon(1e-9));
  }

  TEST_CASE("all parameters from an exact expansion") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    for (int draw = 0; draw < 5; ++draw) {
      const double gamma = d(rng);
      std::vector<double> alpha{std::abs(d(rng)) * 5.0, d(rng), d(rng), d(rng), d(rng)};
      const auto psi = expansion_exponent(gamma, alpha, Complex(d(rng), d(rng)));
      const double U = 2.0 + std::abs(d(rng));
      const SpectralGrid g = spectral_grid_from(psi, nullptr, 0.005, U + 0.01);
      CHECK(std::abs(estimate_gamma(g, build_parameter_weight(WeightKind::Gamma, 6, U)) - gamma) < 1e-8);
      const auto hats = estimate_alphas(g, 6, U);
      for (std::size_t j = 0; j < alpha.size(); ++j) CHECK(std::abs(hats[j] - alpha[j]) < 1e-8);
    }
  }

  TEST_CASE("alpha_0 clamping") {
    const SpectralGrid g =
        spectral_grid_from([](double u) { return u == 0.0 ? Complex(0.0) : Complex(80.0 * std::log(std::abs(u))); },
                           nullptr, 0.005, 3.0);
    CHECK(estimate_alphas(g, 6, 2.0, false)[0] == doctest::Approx(-80.0).epsilon(1e-9));
    CHECK(estimate_alphas(g, 6, 2.0, true, 40.0)[0] == 0.0);
    const SpectralGrid big =
        spectral_grid_from([](double u) { return u == 0.0 ? Complex(0.0) : Complex(-80.0 * std::log(std::abs(u))); },
                           nullptr, 0.005, 3.0);
    CHECK(estimate_alphas(big, 6, 2.0, true, 40.0)[0] == 40.0);
  }

  TEST_CASE("noise-free wide data: drift at the oracle cutoff") {
    const LevyModel m = vg_model(VGParams{}, 0.25);
    const ObservationSet obs = simulate_observations(m, test::clean_design(4000, 8.0));
    TrimSpec trim;
    trim.T = 0.25;
    SpectralOptions o;
    o.half_width = 60.02;
    o.with_psi_prime = false;
    const SpectralGrid g = spectral_grid(build_surface(obs), trim, o);
    const Vector grid = log_cutoff_grid();
    const OracleChoice best = oracle_cutoff(
        [&](double U) { return estimate_gamma(g, build_parameter_weight(WeightKind::Gamma, 6, U)); }, m.gamma, grid);
    MESSAGE("oracle U " << best.U << ", error " << best.error);
    CHECK(best.error < 5e-3);
  }

  TEST_CASE("k_e from the exact derivative exponent") {
    const VGParams p;
    const LevyModel m = vg_model(p, 0.25);
    const SpectralGrid g =
        spectral_grid_from(nullptr, [&](double u) { return exact_psi_prime(m, p, u); }, 0.05, 2048.0);
    const auto kernel = build_kernel(6, 0.25, 40.0);
    const Vector x = k_grid(3.0);
    const Vector truth = x.unaryExpr([&](double v) { return m.k_e(v); });
    const Vector ke = estimate_k_e(g, m.gamma, *kernel, 10.0, x);
    CHECK(grid_l2_norm(x, ke - truth) < 0.1);
  }

  TEST_CASE("k_e from noise-free wide data") {
    const LevyModel m = vg_model(VGParams{}, 0.25);
    const ObservationSet obs = simulate_observations(m, test::clean_design(4000, 8.0));
    TrimSpec trim;
    trim.T = 0.25;
    SpectralOptions o;
    o.step = 0.05;
    o.half_width = 2048.0;
    o.with_psi = false;
    const SpectralGrid g = spectral_grid(build_surface(obs), trim, o);
    const auto kernel = build_kernel(6, 0.25, 40.0);
    const Vector x = k_grid(3.0);
    const Vector truth = x.unaryExpr([&](double v) { return m.k_e(v); });
    // FW_k(u/U) has lobes out to u ~ 100 U, and past u ~ 200 the interpolation
    // error exceeds |phi_T| so the data exponent is useless there. Only U ~ 1 fits.
    const double error = grid_l2_norm(x, estimate_k_e(g, m.gamma, *kernel, 1.0, x) - truth);
    MESSAGE("L2 error " << error << " against norm " << grid_l2_norm(x, truth));
    CHECK(error < 0.25);
  }

  TEST_CASE("no jumps, exact drift: k_e vanishes") {
    const SpectralGrid g = spectral_grid_from(nullptr, [](double) { return Complex(0.0, -0.6); }, 0.05, 500.0);
    const auto kernel = build_kernel(6, 0.25, 40.0);
    const Vector x = k_grid(2.0);
    CHECK(estimate_k_e(g, -0.6, *kernel, 3.0, x).cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("cell grid") {
    const Vector x = k_grid(1.0, 0.1);
    CHECK(x.size() == 20);
    CHECK(x(0) == doctest::Approx(-0.95));
    CHECK(x(19) == doctest::Approx(0.95));
    CHECK(grid_l2_norm(x, Vector::Ones(20)) == doctest::Approx(std::sqrt(2.0)));
  }

  TEST_CASE("truncation") {
    Vector x(6), ke(6);
    x << -2.5, -1.0, -0.1, 0.1, 1.0, 2.5;
    ke << -1.0, 0.5, -2.0, 3.0, -1.0, 4.0;
    const Vector k = truncate_k(x, ke, 2.0);
    CHECK(k(0) == 0.0);
    CHECK(k(1) == 0.0);
    CHECK(k(2) == doctest::Approx(2.0 * std::exp(0.1)));
    CHECK(k(3) == doctest::Approx(3.0 * std::exp(-0.1)));
    CHECK(k(4) == 0.0);
    CHECK(k(5) == 0.0);
  }

  TEST_CASE("rearrangement examples") {
    Vector x(6), k(6);
    x << -0.3, -0.2, -0.1, 0.1, 0.2, 0.3;
    k << 1.0, 3.0, 2.0, 3.0, 1.0, 2.0;
    Vector expected(6);
    expected << 1.0, 2.0, 3.0, 3.0, 2.0, 1.0;
    CHECK(rearrange(x, k) == expected);
    CHECK(rearrange(x, expected) == expected);
  }

  TEST_CASE("rearrangement never increases the error against a monotone truth") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> noise(0.0, 1.0);
    const Vector x = k_grid(2.0, 0.05);
    for (int trial = 0; trial < 200; ++trial) {
      const double scale = 1.0 + trial % 7;
      const Vector truth = x.unaryExpr([&](double v) { return scale * std::exp(-(1.0 + 0.3 * (trial % 5)) * std::abs(v)); });
      Vector estimate = truth;
      for (Eigen::Index i = 0; i < x.size(); ++i) estimate(i) = std::max(0.0, estimate(i) + 0.3 * scale * noise(rng));
      const Vector star = rearrange(x, estimate);
      CHECK(grid_l2_norm(x, star - truth) <= grid_l2_norm(x, estimate - truth) + 1e-12);
      for (Eigen::Index i = 1; i < x.size(); ++i) {
        if (x(i) < 0.0) CHECK(star(i) >= star(i - 1));
        if (x(i - 1) > 0.0) CHECK(star(i) <= star(i - 1));
      }
    }
  }

  TEST_CASE("derivative sums from alphas") {
    CHECK(derivative_sums_from_alphas({10.0})[0] == 10.0);
    const auto sums = derivative_sums_from_alphas({10.0, 4.79});
    CHECK(sums[1] == doctest::Approx(-5.21).epsilon(1e-12));
    const LevyModel m = vg_model(VGParams{}, 0.25);
    const auto back = derivative_sums_from_alphas(true_alphas(m, 8));
    for (int j = 0; j < 7; ++j) {
      const double exact = m.k_derivative(j, 1) + m.k_derivative(j, -1);
      CHECK(std::abs(back[static_cast<std::size_t>(j)] - exact) <= 1e-10 * std::max(1.0, std::abs(exact)));
    }
  }

  TEST_CASE("fixed-cutoff calibration output shape") {
    DesignSpec d;
    d.seed = 21;
    const ObservationSet obs = simulate_observations(vg_model(VGParams{}, 0.25), d);
    CalibrationConfig cfg;
    const CalibrationResult r = calibrate_fixed(obs, cfg, 1.5, 1.5);
    CHECK(std::isfinite(r.gamma_hat));
    CHECK(r.alpha_hats.size() == 5);
    CHECK(r.alpha_hats[0] >= 0.0);
    CHECK(r.alpha_hats[0] <= cfg.alpha_bar);
    CHECK(r.derivative_sums.size() == 5);
    CHECK(r.C == doctest::Approx(std::min(obs.half_width(), 5.0)));
    REQUIRE(r.k_star.size() == r.x.size());
    for (Eigen::Index i = 0; i < r.x.size(); ++i) {
      CHECK(r.k_star(i) >= 0.0);
      if (i > 0 && r.x(i) < 0.0) CHECK(r.k_star(i) >= r.k_star(i - 1));
      if (i > 0 && r.x(i - 1) > 0.0) CHECK(r.k_star(i) <= r.k_star(i - 1));
    }
    CalibrationConfig bad;
    bad.s = 1;
    CHECK_THROWS_AS(calibrate_fixed(obs, bad, 1.5, 1.5), InputError);
  }
}
