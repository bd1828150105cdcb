#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "levycal/quadrature.hpp"
#include "levycal/spectral.hpp"
#include "support.hpp"

using namespace levycal;

namespace {

Complex ft_k_e(const LevyModel& m, double u) {
  QuadratureSpec spec;
  spec.abs_tol = 1e-11;
  spec.rel_tol = 1e-11;
  auto f = [&](double x) { return std::exp(Complex(0.0, u * x)) * m.k_e(x); };
  return integrate_from_minus_infinity<Complex>(f, 0.0, spec).value + integrate_to_infinity<Complex>(f, 0.0, spec).value;
}

SpectralGrid clean_grid(const LevyModel& m, int N, double A, double half_width) {
  const ObservationSet obs = simulate_observations(m, test::clean_design(N, A));
  TrimSpec trim;
  trim.T = m.T;
  SpectralOptions o;
  o.step = 0.01;
  o.half_width = half_width;
  return spectral_grid(build_surface(obs), trim, o);
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("trimming threshold") {
    TrimSpec spec;
    spec.T = 0.25;
    spec.R = 1.0;
    CHECK(kappa(0.5, spec) == doctest::Approx(std::exp(-0.25) / 3.0).epsilon(1e-14));
    CHECK(kappa(-0.5, spec) == kappa(0.5, spec));
    double previous = kappa(1.0, spec);
    for (double u = 1.0; u < 1e4; u *= 1.1) {
      const double k = kappa(u, spec);
      CHECK(k > 0.0);
      CHECK(k <= previous);
      previous = k;
    }
    spec.disabled = true;
    CHECK(kappa(3.0, spec) == 1e-12);
  }

  TEST_CASE("cosine integral constants against quadrature") {
    QuadratureSpec q;
    q.abs_tol = 1e-13;
    q.rel_tol = 1e-13;
    // Ci(y) = gamma_E + log y + int_0^y (cos t - 1)/t dt
    auto ci = [&](double y) {
      const double tail = integrate([](double t) { return t == 0.0 ? 0.0 : (std::cos(t) - 1.0) / t; }, 0.0, y, q).value;
      return 0.57721566490153286 + std::log(y) + tail;
    };
    double sup = 0.0;
    for (double y = 1.0; y <= 60.0; y += 0.005) sup = std::max(sup, std::abs(ci(y)));
    CHECK(cosine_tail_bound() == doctest::Approx(sup).epsilon(1e-5));
    CHECK(cosine_tail_bound() == doctest::Approx(0.472001).epsilon(1e-6));
    for (double y : {0.5, 1.0, 3.3, 25.0}) CHECK(cosine_integral(y) == doctest::Approx(ci(y)).epsilon(1e-11));
    double lowest = 0.0;
    for (double v = 1.0; v <= 60.0; v += 0.005) lowest = std::min(lowest, ci(v) - ci(1.0));
    CHECK(cosine_partial_bound() == doctest::Approx(-lowest).epsilon(1e-5));
  }

  TEST_CASE("radial projection") {
    CHECK(trim(Complex(2.0, 0.0), 0.5) == Complex(2.0, 0.0));
    CHECK(std::abs(trim(Complex(0.25, 0.0), 0.5) - Complex(0.5, 0.0)) < 1e-16);
    CHECK(trim(Complex(0.0, 0.0), 0.5) == Complex(0.5, 0.0));
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      const Complex z(n(rng), n(rng));
      const double k = std::abs(n(rng));
      const Complex once = trim(z, k);
      CHECK(std::abs(once) >= k * (1.0 - 1e-15));
      CHECK(std::abs(trim(once, k) - once) <= 1e-15 * std::abs(once));
      CHECK(std::arg(once) == doctest::Approx(std::arg(z)).epsilon(1e-12));
    }
  }

  TEST_CASE("empirical exponent: origin and symmetry") {
    DesignSpec d;
    d.seed = 2;
    const LevyModel m = vg_model(VGParams{}, 0.25);
    const ObservationSet obs = simulate_observations(m, d);
    TrimSpec trim;
    trim.T = 0.25;
    SpectralOptions o;
    o.half_width = 30.0;
    const SpectralGrid g = spectral_grid(build_surface(obs), trim, o);
    const Eigen::Index c = g.zero_index();
    CHECK(g.u(c) == 0.0);
    CHECK(std::abs(g.psi(c)) < 1e-12);
    for (Eigen::Index i = 1; i <= c; i += 97) {
      CHECK(g.u(c - i) == -g.u(c + i));
      CHECK(std::abs(g.psi(c - i) - std::conj(g.psi(c + i))) < 1e-10);
      CHECK(std::abs(g.psi_prime(c - i) + std::conj(g.psi_prime(c + i))) < 1e-10);
    }
  }

  TEST_CASE("noise-free dense data recover psi and psi'") {
    // Wide strike range: the truncated tails of the option function stay below 1e-6.
    const LevyModel m = vg_model(VGParams{}, 0.25);
    const SpectralGrid g = clean_grid(m, 4000, 8.0, 10.0);
    double psi_error = 0.0, prime_error = 0.0;
    for (Eigen::Index i = 0; i < g.u.size(); i += 25) {
      const double u = g.u(i);
      psi_error = std::max(psi_error, std::abs(g.psi(i) - m.shifted_exponent(u)));
      prime_error = std::max(prime_error, std::abs(g.psi_prime(i) - kI * m.gamma - kI * ft_k_e(m, u)));
    }
    MESSAGE("sup errors " << psi_error << ", " << prime_error);
    CHECK(psi_error < 5e-3);
    CHECK(prime_error < 1e-2);
    CHECK(std::abs(g.psi_prime(g.zero_index()) - kI * (m.gamma + ft_k_e(m, 0.0).real())) < 1e-2);
    CHECK(g.unwrap_ok);
  }

  TEST_CASE("no trimming on noise-free benchmark data") {
    const LevyModel m = vg_model(VGParams{}, 0.25);
    DesignSpec d;
    d.seed = 4;
    d.noise_delta = 0.0;
    TrimSpec trim;
    trim.T = 0.25;
    SpectralOptions o;
    o.half_width = 60.0;
    const SpectralGrid g = spectral_grid(build_surface(simulate_observations(m, d)), trim, o);
    CHECK(g.trimmed_fraction() == 0.0);
  }

  TEST_CASE("exponent expansion converges at high frequency") {
    const LevyModel m = vg_model(VGParams{}, 0.25);
    const auto alpha = true_alphas(m, 6);
    auto remainder = [&](double u) {
      Complex r = m.shifted_exponent(u) - kI * m.gamma * u + alpha[0] * std::log(std::abs(u));
      double factorial = 1.0;
      for (int j = 1; j <= 4; ++j) {
        if (j > 1) factorial *= j - 1;
        r -= std::pow(kI, j) * factorial * alpha[static_cast<std::size_t>(j)] * std::pow(u, -j);
      }
      return r;
    };
    for (double sign : {1.0, -1.0}) {
      const Complex reference = remainder(sign * 100.0);
      double spread = 0.0;
      for (double u = 100.0; u <= 1000.0; u += 5.0) spread = std::max(spread, std::abs(remainder(sign * u) - reference));
      CHECK(spread < 5e-2);
    }
  }

  TEST_CASE("grid from exact exponents") {
    const LevyModel m = vg_model(VGParams{}, 0.25);
    const SpectralGrid g = spectral_grid_from([&](double u) { return m.shifted_exponent(u); }, nullptr, 0.1, 5.0);
    CHECK(g.has_psi);
    CHECK_FALSE(g.has_psi_prime);
    CHECK(g.u.size() == 101);
    CHECK(g.half_width() == doctest::Approx(5.0));
  }

  TEST_CASE("spectral CSV dump") {
    const test::TempDir dir("spectral");
    const SpectralGrid g = spectral_grid_from([](double u) { return Complex(0.0, u); }, [](double) { return kI; }, 0.5, 1.0);
    write_spectral_csv(g, dir / "grid.csv");
    std::ifstream in(dir / "grid.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "u,re_psi,im_psi,re_psip,im_psip,trimmed");
  }
}
