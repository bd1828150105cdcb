#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "levycal/bench.hpp"
#include "support.hpp"

using namespace levycal;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

BenchConfig quick_config(int reps) {
  BenchConfig cfg;
  cfg.reps = reps;
  cfg.seed = 7;
  cfg.estimate_k = false;
  cfg.adaptive = false;
  return cfg;
}

}  // namespace

TEST_SUITE("bench") {
  TEST_CASE("log cutoff grid") {
    const Vector g = log_cutoff_grid();
    CHECK(g.size() == 60);
    CHECK(g(0) == doctest::Approx(0.5));
    CHECK(g(59) == doctest::Approx(60.0));
    for (Eigen::Index i = 2; i < g.size(); ++i) CHECK(g(i) / g(i - 1) == doctest::Approx(g(1) / g(0)));
  }

  TEST_CASE("oracle cutoff picks the grid point nearest the crossing") {
    Vector grid(4);
    grid << 1.0, 2.0, 3.0, 4.0;
    const OracleChoice c = oracle_cutoff([](double U) { return U - 2.3; }, 0.0, grid);
    CHECK(c.U == 2.0);
    CHECK(c.estimate == doctest::Approx(-0.3));
    CHECK(c.error == doctest::Approx(0.3));
    CHECK(oracle_cutoff([](double) { return 1.5; }, 1.5, grid).U == 1.0);
    CHECK_THROWS_AS(oracle_cutoff([](double) { return 0.0; }, 0.0, Vector()), InputError);
  }

  TEST_CASE("oracle error never exceeds any fixed cutoff error") {
    const LevyModel m = vg_model(VGParams{}, 0.25);
    const ObservationSet obs = simulate_observations(m, test::clean_design(400, 4.0));
    CalibrationConfig cfg;
    cfg.estimate_k = false;
    const Vector grid = log_cutoff_grid(0.5, 20.0, 25);
    const OracleCalibration oracle = oracle_calibration(obs, m, cfg, grid);
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
      const CalibrationResult fixed = calibrate_fixed(obs, cfg, grid(i), grid(i));
      CHECK(oracle.choices[0].error <= std::abs(fixed.gamma_hat - m.gamma));
    }
    CHECK(oracle.quantities.front() == "gamma");
    CHECK(oracle.quantities.size() == 6);
  }

  TEST_CASE("one clean replication reports the deterministic bias") {
    const LevyModel m = vg_model(VGParams{}, 0.25);
    BenchConfig cfg = quick_config(1);
    cfg.design.noise_delta = 0.0;
    const RiskTable table = monte_carlo(m, cfg);
    DesignSpec d = cfg.design;
    d.seed = make_engine(cfg.seed, 7, 0)();
    const OracleCalibration direct = oracle_calibration(simulate_observations(m, d), m, cfg.calibration, cfg.U_grid);
    CHECK(table.row("gamma").oracle_rmse == doctest::Approx(direct.choices[0].error).epsilon(1e-14));
    CHECK(table.row("alpha0").oracle_rmse == doctest::Approx(direct.choices[1].error).epsilon(1e-14));
    CHECK(table.row("gamma").truth == m.gamma);
    CHECK(std::isnan(table.row("gamma").adaptive_rmse));
  }

  TEST_CASE("identical results for any worker count") {
    const LevyModel m = vg_model(VGParams{}, 0.25);
    BenchConfig cfg = quick_config(4);
    cfg.estimate_k = true;
    cfg.adaptive = true;
    const test::TempDir dir("bench");
    cfg.workers = 1;
    emit_report(monte_carlo(m, cfg), dir / "one");
    cfg.workers = 3;
    emit_report(monte_carlo(m, cfg), dir / "three");
    CHECK(slurp(dir / "one/risk_table.json") == slurp(dir / "three/risk_table.json"));
    CHECK(slurp(dir / "one/k_function.csv") == slurp(dir / "three/k_function.csv"));
  }

  TEST_CASE("report round trip") {
    const LevyModel m = vg_model(VGParams{}, 0.25);
    const RiskTable table = monte_carlo(m, quick_config(2));
    const test::TempDir dir("report");
    emit_report(table, dir.path());
    const RiskTable back = read_risk_table_json(dir / "risk_table.json");
    CHECK(back.seed == table.seed);
    REQUIRE(back.rows.size() == table.rows.size());
    for (std::size_t i = 0; i < back.rows.size(); ++i) {
      CHECK(back.rows[i].quantity == table.rows[i].quantity);
      CHECK(back.rows[i].truth == table.rows[i].truth);
      CHECK(back.rows[i].oracle_rmse == table.rows[i].oracle_rmse);
      CHECK(back.rows[i].reps == table.rows[i].reps);
    }
    CHECK(risk_table_json(back).dump() == risk_table_json(table).dump());
  }

  TEST_CASE("empty table gives header-only files") {
    const test::TempDir dir("empty");
    emit_report(RiskTable{}, dir.path());
    CHECK(slurp(dir / "risk_table.csv") == "quantity,truth,oracle_rmse,adaptive_rmse,reps\n");
    CHECK(slurp(dir / "k_function.csv") == "x,k_true,k_hat,k_star\n");
  }

  TEST_CASE("drift RMSE beats the zero estimator") {
    const LevyModel m = vg_model(VGParams{}, 0.25);
    BenchConfig cfg = quick_config(20);
    cfg.adaptive = true;
    const RiskTable table = monte_carlo(m, cfg);
    CHECK(table.failures == 0);
    CHECK(table.row("gamma").oracle_rmse <= std::abs(m.gamma));
    CHECK(table.row("gamma").adaptive_rmse <= std::abs(m.gamma) * 2.0);
  }

  TEST_CASE("doubling the noise does not help") {
    const LevyModel m = vg_model(VGParams{}, 0.25);
    const OptionPricer pricer(m);
    CalibrationConfig cfg;
    cfg.estimate_k = false;
    std::vector<double> base, doubled;
    for (int seed = 0; seed < 100; ++seed) {
      DesignSpec d;
      d.seed = static_cast<std::uint64_t>(seed) + 1000;
      base.push_back(oracle_calibration(simulate_observations(pricer, 0.25, d), m, cfg).choices[1].error);
      d.noise_delta *= 2.0;
      doubled.push_back(oracle_calibration(simulate_observations(pricer, 0.25, d), m, cfg).choices[1].error);
    }
    auto median = [](std::vector<double> v) {
      std::nth_element(v.begin(), v.begin() + 50, v.end());
      return v[50];
    };
    MESSAGE("median |alpha0 error|: " << median(base) << " -> " << median(doubled));
    CHECK(median(doubled) >= median(base));
  }

  TEST_CASE("rate study inputs") {
    CHECK(theoretical_rate(6, 0.25, 10.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    const LevyModel m = vg_model(VGParams{}, 0.25);
    CHECK_THROWS_AS(rate_study(m, quick_config(1), {0.01}), InputError);
    CHECK_THROWS_AS(rate_study(m, quick_config(1), {0.01, 0.02, 0.03}), InputError);
  }

  TEST_CASE("k_e norm of the VG benchmark") {
    // int (e^x k)^2 = nu^-2 (1/(2(B - A - 1)) + 1/(2(1 + A + B)))
    const VGParams p;
    const double a = p.tilt(), b = p.decay();
    const double exact = std::sqrt((0.5 / (b - a - 1.0) + 0.5 / (1.0 + a + b)) / (p.nu * p.nu));
    CHECK(k_e_l2_norm(vg_model(p, 0.25)) == doctest::Approx(exact).epsilon(1e-9));
  }
}
