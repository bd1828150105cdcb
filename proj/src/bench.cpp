#include "levycal/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <thread>

#include "levycal/quadrature.hpp"

namespace levycal {

Vector log_cutoff_grid(double lo, double hi, int count) {
  require(lo > 0.0 && hi > lo && count >= 2, "log_cutoff_grid: need 0 < lo < hi and count >= 2");
  Vector grid(count);
  for (int i = 0; i < count; ++i) grid(i) = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return grid;
}

namespace {

OracleChoice oracle_from_values(const Vector& U_grid, const std::vector<double>& estimates, double truth) {
  OracleChoice best;
  best.error = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < U_grid.size(); ++i) {
    const double error = std::abs(estimates[static_cast<std::size_t>(i)] - truth);
    if (error < best.error) best = {U_grid(i), estimates[static_cast<std::size_t>(i)], error};
  }
  return best;
}

std::vector<std::string> quantity_names(int s, bool with_k) {
  std::vector<std::string> names{"gamma"};
  for (int j = 0; j <= s - 2; ++j) names.push_back("alpha" + std::to_string(j));
  if (with_k) names.push_back("k_e");
  return names;
}

Vector k_truth(const LevyModel& model, const Vector& x) { return x.unaryExpr([&](double v) { return model.k_e(v); }); }

}  // namespace

OracleChoice oracle_cutoff(const std::function<double(double)>& estimate, double truth, const Vector& U_grid) {
  require(U_grid.size() > 0, "oracle_cutoff: empty cutoff grid");
  std::vector<double> values;
  for (Eigen::Index i = 0; i < U_grid.size(); ++i) values.push_back(estimate(U_grid(i)));
  return oracle_from_values(U_grid, values, truth);
}

void BenchConfig::validate() const {
  calibration.validate();
  design.validate();
  require(reps >= 1, "bench: reps must be at least 1");
  require(workers >= 1, "bench: workers must be at least 1");
  require(U_grid.size() >= 1, "bench: empty cutoff grid");
  for (Eigen::Index i = 0; i < U_grid.size(); ++i) {
    require(U_grid(i) > 0.0 && std::isfinite(U_grid(i)), "bench: cutoffs must be positive and finite");
    if (i > 0) require(U_grid(i) > U_grid(i - 1), "bench: cutoff grid must be increasing");
  }
  require(pre_stride >= 2, "bench: pre_stride must be at least 2");
}

const RiskRow& RiskTable::row(const std::string& quantity) const {
  for (const RiskRow& r : rows)
    if (r.quantity == quantity) return r;
  throw InputError("risk table has no row " + quantity);
}

double k_e_l2_norm(const LevyModel& model) {
  QuadratureSpec spec;
  spec.abs_tol = 1e-12;
  auto square = [&](double x) {
    const double v = model.k_e(x);
    return v * v;
  };
  return std::sqrt(integrate_from_minus_infinity(square, 0.0, spec).value + integrate_to_infinity(square, 0.0, spec).value);
}

OracleCalibration oracle_calibration(const ObservationSet& obs, const LevyModel& model, const CalibrationConfig& c,
                                     const Vector& U_grid) {
  c.validate();
  require(U_grid.size() >= 1, "oracle_calibration: empty cutoff grid");
  std::vector<double> truths{model.gamma};
  const std::vector<double> alphas = true_alphas(model, c.s);
  truths.insert(truths.end(), alphas.begin(), alphas.end());

  const InterpolatedSurface surface = build_surface(obs);
  const TrimSpec trim = c.trim_spec(obs.T);
  const double U_max = U_grid(U_grid.size() - 1);

  SpectralOptions fine;
  fine.step = c.fine_step;
  fine.half_width = U_max + 2.0 * c.fine_step;
  fine.with_psi_prime = false;
  const SpectralGrid grid = spectral_grid(surface, trim, fine);

  const int params = c.s;  // gamma and alpha_0..alpha_{s-2}
  std::vector<std::vector<double>> estimates(static_cast<std::size_t>(params));
  for (Eigen::Index i = 0; i < U_grid.size(); ++i) {
    const double U = U_grid(i);
    estimates[0].push_back(estimate_gamma(grid, build_parameter_weight(WeightKind::Gamma, c.s, U)));
    for (int j = 0; j <= c.s - 2; ++j) {
      double a = estimate_alpha(grid, build_parameter_weight(WeightKind::Alpha, c.s, U, j));
      if (j == 0 && c.clamp) a = std::clamp(a, 0.0, c.alpha_bar);
      estimates[static_cast<std::size_t>(j + 1)].push_back(a);
    }
  }

  OracleCalibration out;
  out.quantities = quantity_names(c.s, c.estimate_k);
  for (int q = 0; q < params; ++q)
    out.choices.push_back(oracle_from_values(U_grid, estimates[static_cast<std::size_t>(q)], truths[static_cast<std::size_t>(q)]));
  CalibrationResult& r = out.result;
  r.gamma_hat = out.choices[0].estimate;
  for (int j = 0; j <= c.s - 2; ++j) r.alpha_hats.push_back(out.choices[static_cast<std::size_t>(j + 1)].estimate);
  r.derivative_sums = derivative_sums_from_alphas(r.alpha_hats);
  r.U_used = out.choices[0].U;
  r.diagnostics.trim_fraction = grid.trimmed_fraction();
  r.diagnostics.unwrap_ok = grid.unwrap_ok;
  r.diagnostics.noise_level = noise_level(obs);

  if (c.estimate_k) {
    const auto kernel = build_kernel(c.s, obs.T, c.alpha_bar);
    SpectralOptions coarse;
    coarse.step = c.coarse_step;
    coarse.half_width = std::min(c.coarse_limit, kernel->effective_support(c.kernel_tol) * U_max + c.coarse_step);
    coarse.with_psi = false;
    const SpectralGrid wide = spectral_grid(surface, trim, coarse);
    r.C = support_bound(obs, c);
    r.x = k_grid(r.C, c.k_cell);
    const Vector truth = k_truth(model, r.x);
    OracleChoice best;
    best.error = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < U_grid.size(); ++i) {
      Vector ke = estimate_k_e(wide, estimates[0][static_cast<std::size_t>(i)], *kernel, U_grid(i), r.x, c.kernel_tol);
      const double error = grid_l2_norm(r.x, ke - truth);
      if (error < best.error) {
        best = {U_grid(i), grid_l2_norm(r.x, ke), error};
        r.k_e_hat = std::move(ke);
      }
    }
    out.choices.push_back(best);
    r.U_k = best.U;
    r.k_hat = truncate_k(r.x, r.k_e_hat, r.C);
    r.k_star = rearrange(r.x, r.k_hat);
    out.k_true = r.x.unaryExpr([&](double v) { return std::abs(v) <= r.C ? model.k(v) : 0.0; });
  }
  return out;
}

namespace {

struct RepOutcome {
  bool ok = false;
  std::vector<double> oracle_sq;
  std::vector<double> adaptive_sq;
  double noise = 0.0;
  bool has_k = false;
  double k_hat_error = 0.0;
  double k_star_error = 0.0;
  KFunctionSample sample;
};

RepOutcome replicate(const LevyModel& model, const OptionPricer& pricer, const BenchConfig& cfg,
                     const std::vector<double>& truths, int rep) {
  const CalibrationConfig& c = cfg.calibration;
  DesignSpec design = cfg.design;
  design.seed = make_engine(cfg.seed, 7, static_cast<std::uint64_t>(rep))();
  const ObservationSet obs = simulate_observations(pricer, model.T, design);

  RepOutcome out;
  out.noise = noise_level(obs);
  CalibrationConfig oc = c;
  oc.estimate_k = cfg.estimate_k;
  const OracleCalibration oracle = oracle_calibration(obs, model, oc, cfg.U_grid);
  for (const OracleChoice& choice : oracle.choices) {
    if (!std::isfinite(choice.error)) throw NumericError("oracle estimate is not finite");
    out.oracle_sq.push_back(choice.error * choice.error);
  }
  if (cfg.estimate_k) {
    const CalibrationResult& r = oracle.result;
    out.has_k = true;
    out.k_hat_error = grid_l2_norm(r.x, r.k_hat - oracle.k_true);
    out.k_star_error = grid_l2_norm(r.x, r.k_star - oracle.k_true);
    out.sample = {r.x, oracle.k_true, r.k_hat, r.k_star};
  }

  if (cfg.adaptive) {
    AdaptiveConfig acfg;
    acfg.calibration = c;
    acfg.calibration.estimate_k = cfg.estimate_k;
    acfg.pre_stride = cfg.pre_stride;
    const AdaptiveResult adaptive = estimate_adaptive(obs, acfg);
    const CalibrationResult& r = adaptive.result;
    out.adaptive_sq.push_back(std::pow(r.gamma_hat - truths[0], 2));
    for (int j = 0; j <= c.s - 2; ++j)
      out.adaptive_sq.push_back(std::pow(r.alpha_hats[static_cast<std::size_t>(j)] - truths[static_cast<std::size_t>(j + 1)], 2));
    if (cfg.estimate_k) out.adaptive_sq.push_back(std::pow(grid_l2_norm(r.x, r.k_e_hat - k_truth(model, r.x)), 2));
  }
  out.ok = true;
  return out;
}

nlohmann::ordered_json config_echo(const BenchConfig& cfg) {
  const CalibrationConfig& c = cfg.calibration;
  nlohmann::ordered_json j;
  j["s"] = c.s;
  j["alpha_bar"] = c.alpha_bar;
  j["R"] = c.R;
  j["clamp"] = c.clamp;
  j["trim"] = c.trim;
  j["fine_step"] = c.fine_step;
  j["coarse_step"] = c.coarse_step;
  j["coarse_limit"] = c.coarse_limit;
  j["C"] = c.C;
  j["k_cell"] = c.k_cell;
  j["kernel_tol"] = c.kernel_tol;
  j["pre_stride"] = cfg.pre_stride;
  j["N"] = cfg.design.N;
  j["design_variance"] = cfg.design.design_variance;
  j["delta"] = cfg.design.noise_delta;
  j["U_grid"] = {{"min", cfg.U_grid(0)}, {"max", cfg.U_grid(cfg.U_grid.size() - 1)}, {"count", cfg.U_grid.size()}};
  j["estimate_k"] = cfg.estimate_k;
  j["adaptive"] = cfg.adaptive;
  j["model"] = cfg.echo;
  return j;
}

double json_number(const nlohmann::ordered_json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

RiskTable monte_carlo(const LevyModel& model, const BenchConfig& cfg) {
  cfg.validate();
  const CalibrationConfig& c = cfg.calibration;
  std::vector<double> truths{model.gamma};
  const std::vector<double> alphas = true_alphas(model, c.s);
  truths.insert(truths.end(), alphas.begin(), alphas.end());
  const std::vector<std::string> names = quantity_names(c.s, cfg.estimate_k);
  if (cfg.estimate_k) truths.push_back(k_e_l2_norm(model));

  const OptionPricer pricer(model);
  if (cfg.estimate_k) build_kernel(c.s, model.T, c.alpha_bar);

  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(cfg.reps));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int rep = next++; rep < cfg.reps; rep = next++) {
      try {
        outcomes[static_cast<std::size_t>(rep)] = replicate(model, pricer, cfg, truths, rep);
      } catch (const std::exception&) {
        outcomes[static_cast<std::size_t>(rep)].ok = false;
      }
    }
  };
  const int workers = std::min(cfg.workers, cfg.reps);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(work);
  }

  // Reduction in replication order, independent of the schedule.
  RiskTable table;
  table.seed = cfg.seed;
  table.reps_requested = cfg.reps;
  table.config = config_echo(cfg);
  const std::size_t nq = names.size();
  std::vector<double> oracle_sum(nq, 0.0), adaptive_sum(nq, 0.0);
  int ok = 0;
  double noise_sum = 0.0;
  for (const RepOutcome& o : outcomes) {
    if (!o.ok) {
      ++table.failures;
      continue;
    }
    ++ok;
    noise_sum += o.noise;
    for (std::size_t q = 0; q < nq; ++q) {
      oracle_sum[q] += o.oracle_sq[q];
      if (cfg.adaptive) adaptive_sum[q] += o.adaptive_sq[q];
    }
    if (o.has_k) {
      const double gain = o.k_star_error - o.k_hat_error;
      if (gain > 1e-12) ++table.rearrangement_violations;
      table.max_rearrangement_gain = std::max(table.max_rearrangement_gain, gain);
      table.last_k = o.sample;
    }
  }
  table.flagged = table.failures > 0.05 * cfg.reps;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  table.mean_noise_level = ok > 0 ? noise_sum / ok : nan;
  for (std::size_t q = 0; q < nq; ++q) {
    RiskRow row;
    row.quantity = names[q];
    row.truth = truths[q];
    row.reps = ok;
    row.oracle_rmse = ok > 0 ? std::sqrt(oracle_sum[q] / ok) : nan;
    row.adaptive_rmse = ok > 0 && cfg.adaptive ? std::sqrt(adaptive_sum[q] / ok) : nan;
    table.rows.push_back(row);
  }
  return table;
}

double theoretical_rate(int s, double T, double alpha) { return 2.0 * s / (2.0 * s + 2.0 * T * alpha + 1.0); }

RateStudy rate_study(const LevyModel& model, const BenchConfig& cfg, const std::vector<double>& delta_grid) {
  require(delta_grid.size() >= 3, "rate_study: need at least three noise levels");
  const auto [lo, hi] = std::minmax_element(delta_grid.begin(), delta_grid.end());
  require(*lo > 0.0 && *hi >= 10.0 * *lo, "rate_study: delta grid must be positive and span a decade");
  RateStudy study;
  study.seed = cfg.seed;
  study.theoretical_exponent = theoretical_rate(cfg.calibration.s, model.T, model.alpha);
  for (double delta : delta_grid) {
    BenchConfig run = cfg;
    run.design.noise_rule = DesignSpec::NoiseRule::Proportional;
    run.design.noise_delta = delta;
    run.estimate_k = false;
    run.adaptive = false;
    const RiskTable table = monte_carlo(model, run);
    study.points.push_back({delta, table.mean_noise_level, table.row("gamma").oracle_rmse, table.row("gamma").reps});
  }
  // Least squares fit of log RMSE on log eps.
  const auto n = static_cast<double>(study.points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const RatePoint& p : study.points) {
    const double lx = std::log(p.mean_noise_level), ly = std::log(p.rmse_gamma);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  study.slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : std::numeric_limits<double>::quiet_NaN();
  study.intercept = (sy - study.slope * sx) / n;
  return study;
}

nlohmann::ordered_json risk_table_json(const RiskTable& table) {
  nlohmann::ordered_json j;
  j["seed"] = table.seed;
  j["reps_requested"] = table.reps_requested;
  j["failures"] = table.failures;
  j["flagged"] = table.flagged;
  j["mean_noise_level"] = table.mean_noise_level;
  j["rearrangement_violations"] = table.rearrangement_violations;
  j["max_rearrangement_gain"] = table.max_rearrangement_gain;
  j["rows"] = nlohmann::ordered_json::array();
  for (const RiskRow& r : table.rows) {
    nlohmann::ordered_json row;
    row["quantity"] = r.quantity;
    row["truth"] = r.truth;
    row["oracle_rmse"] = r.oracle_rmse;
    row["adaptive_rmse"] = std::isnan(r.adaptive_rmse) ? nlohmann::ordered_json() : nlohmann::ordered_json(r.adaptive_rmse);
    row["reps"] = r.reps;
    j["rows"].push_back(row);
  }
  j["config"] = table.config;
  return j;
}

RiskTable read_risk_table_json(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw InputError("cannot read " + path.string());
  const auto j = nlohmann::ordered_json::parse(file);
  RiskTable table;
  table.seed = j.at("seed").get<std::uint64_t>();
  table.reps_requested = j.at("reps_requested").get<int>();
  table.failures = j.at("failures").get<int>();
  table.flagged = j.at("flagged").get<bool>();
  table.mean_noise_level = json_number(j.at("mean_noise_level"));
  table.rearrangement_violations = j.at("rearrangement_violations").get<int>();
  table.max_rearrangement_gain = json_number(j.at("max_rearrangement_gain"));
  for (const auto& row : j.at("rows"))
    table.rows.push_back({row.at("quantity").get<std::string>(), json_number(row.at("truth")),
                          json_number(row.at("oracle_rmse")), json_number(row.at("adaptive_rmse")),
                          row.at("reps").get<int>()});
  table.config = j.at("config");
  return table;
}

void emit_report(const RiskTable& table, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "risk_table.csv");
    if (!csv) throw std::runtime_error("cannot write " + (dir / "risk_table.csv").string());
    csv << std::setprecision(17) << "quantity,truth,oracle_rmse,adaptive_rmse,reps\n";
    for (const RiskRow& r : table.rows)
      csv << r.quantity << ',' << r.truth << ',' << r.oracle_rmse << ',' << r.adaptive_rmse << ',' << r.reps << '\n';
  }
  {
    std::ofstream json(dir / "risk_table.json");
    if (!json) throw std::runtime_error("cannot write " + (dir / "risk_table.json").string());
    json << risk_table_json(table).dump(2) << '\n';
  }
  std::ofstream k(dir / "k_function.csv");
  if (!k) throw std::runtime_error("cannot write " + (dir / "k_function.csv").string());
  k << std::setprecision(17) << "x,k_true,k_hat,k_star\n";
  const KFunctionSample& s = table.last_k;
  for (Eigen::Index i = 0; i < s.x.size(); ++i)
    k << s.x(i) << ',' << s.k_true(i) << ',' << s.k_hat(i) << ',' << s.k_star(i) << '\n';
}

void emit_report(const RateStudy& study, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "rate_study.csv");
  if (!csv) throw std::runtime_error("cannot write " + (dir / "rate_study.csv").string());
  csv << std::setprecision(17) << "delta,mean_noise_level,rmse_gamma,reps\n";
  for (const RatePoint& p : study.points)
    csv << p.delta << ',' << p.mean_noise_level << ',' << p.rmse_gamma << ',' << p.reps << '\n';
  nlohmann::ordered_json j;
  j["seed"] = study.seed;
  j["slope"] = study.slope;
  j["intercept"] = study.intercept;
  j["theoretical_exponent"] = study.theoretical_exponent;
  j["points"] = nlohmann::ordered_json::array();
  for (const RatePoint& p : study.points)
    j["points"].push_back({{"delta", p.delta}, {"mean_noise_level", p.mean_noise_level}, {"rmse_gamma", p.rmse_gamma}, {"reps", p.reps}});
  std::ofstream json(dir / "rate_study.json");
  if (!json) throw std::runtime_error("cannot write " + (dir / "rate_study.json").string());
  json << j.dump(2) << '\n';
}

}  // namespace levycal
