#include <doctest.h>

#include <cmath>

#include "levycal/models.hpp"

using namespace levycal;

TEST_SUITE("models") {
  TEST_CASE("vg jump activity is 2/nu") {
    VGParams p;
    CHECK(vg_model(p, 0.25).alpha == doctest::Approx(10.0).epsilon(1e-14));
    p.nu = 0.05;
    CHECK(vg_model(p, 0.25).alpha == doctest::Approx(40.0).epsilon(1e-14));
  }

  TEST_CASE("martingale condition at u = 0") {
    for (double nu : {0.05, 0.1, 0.2, 0.5}) {
      VGParams p;
      p.nu = nu;
      for (double T : {0.25, 1.0}) CHECK(std::abs(vg_model(p, T).char_shifted(0.0) - 1.0) < 1e-12);
    }
  }

  TEST_CASE("empty jump measure has zero drift") {
    CHECK(martingale_drift([](double) { return 0.0; }) == 0.0);
  }

  TEST_CASE("quadrature drift matches the closed form") {
    for (double nu : {0.05, 0.1, 0.2, 0.5}) {
      VGParams p;
      p.nu = nu;
      const double closed = vg_martingale_drift(p);
      const double quad = martingale_drift(vg_model(p, 0.25).k);
      CHECK(std::abs(quad - closed) <= 1e-8 * std::abs(closed));
    }
    CHECK(vg_martingale_drift(VGParams{}) == doctest::Approx(std::log(0.886) / 0.2).epsilon(1e-12));
  }

  TEST_CASE("true alphas for VG nu = 0.2") {
    const VGParams p;
    const LevyModel m = vg_model(p, 0.25);
    const auto alphas = true_alphas(m, 6);
    REQUIRE(alphas.size() == 5);
    CHECK(alphas[0] == doctest::Approx(10.0).epsilon(1e-12));
    // k'(0+) + k'(0-) = 2A/nu
    const double slope_sum = 2.0 * p.tilt() / p.nu;
    CHECK(alphas[1] == doctest::Approx(slope_sum + alphas[0]).epsilon(1e-12));
  }

  TEST_CASE("numeric one-sided derivatives agree with the analytic ones") {
    const LevyModel m = vg_model(VGParams{}, 0.25);
    for (int order = 0; order <= 4; ++order)
      for (int side : {1, -1}) {
        const double exact = m.k_derivative(order, side);
        const auto numeric = one_sided_derivative(m.k, order, side);
        CHECK(numeric.value == doctest::Approx(exact).epsilon(order < 3 ? 1e-6 : 1e-5));
      }
  }

  TEST_CASE("two-sided exponential k has alpha = 2c") {
    LevyModel m;
    m.T = 1.0;
    const double c = 1.7;
    m.k = [c](double x) { return c * std::exp(-std::abs(x)); };
    CHECK(true_alphas(m, 2)[0] == doctest::Approx(2.0 * c).epsilon(1e-9));
  }

  TEST_CASE("sato reparameterization") {
    LevyModel m = vg_model(VGParams{}, 1.0);
    SUBCASE("T = 1 is the identity") {
      const LevyModel out = sato_reparameterize(m, 0.37, 1.0);
      CHECK(out.gamma == doctest::Approx(m.gamma).epsilon(1e-15));
      for (double x : {-2.0, -0.1, 0.3, 1.5}) CHECK(out.k(x) == doctest::Approx(m.k(x)).epsilon(1e-15));
    }
    SUBCASE("drift scales with T^H") {
      m.gamma = 0.5;
      CHECK(sato_reparameterize(m, 1.0, 4.0).gamma == doctest::Approx(2.0));
    }
    SUBCASE("support stretches with T^H") {
      LevyModel stub;
      stub.T = 1.0;
      stub.k = [](double x) { return x > 0.0 && x <= 1.0 ? 1.0 : 0.0; };
      const LevyModel out = sato_reparameterize(stub, 1.0, 2.0);
      CHECK(out.k(1.9) == 1.0);
      CHECK(out.k(2.0) == 1.0);
      CHECK(out.k(2.1) == 0.0);
    }
  }

  TEST_CASE("characteristic function symmetry and continuity") {
    const LevyModel m = vg_model(VGParams{}, 0.25);
    Complex previous = m.char_shifted(-50.0);
    for (double u = -50.0; u <= 50.0; u += 0.01) {
      const Complex v = m.char_shifted(u);
      CHECK(std::abs(m.char_shifted(-u) - std::conj(v)) < 1e-12);
      CHECK(std::abs(v - previous) < 0.05);
      previous = v;
    }
  }

  TEST_CASE("invalid parameters are rejected") {
    VGParams p;
    p.sigma = -1.0;
    CHECK_THROWS_AS(p.validate(), InputError);
    CHECK_THROWS_AS(vg_model(VGParams{}, 0.0), InputError);
  }
}
