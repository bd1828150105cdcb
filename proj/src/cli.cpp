#include "levycal/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

#include "levycal/adaptive.hpp"
#include "levycal/bench.hpp"
#include "levycal/config.hpp"
#include "levycal/market.hpp"

namespace levycal::cli {

namespace {

constexpr int kUsage = 1;
constexpr int kNumeric = 2;

/// Command-line values that override config-file keys.
class Overrides {
 public:
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto* opt = app->add_option(flag, values_[key], help);
    options_.emplace_back(key, opt);
  }
  // VG is the only family, so VG parameters on the command line select it.
  void apply(KeyValueConfig& config) const {
    bool model_params = false;
    for (const auto& [key, opt] : options_)
      if (opt->count() > 0) {
        config.set(key, values_.at(key));
        model_params = model_params || key == "sigma" || key == "nu" || key == "theta";
      }
    if (model_params && !config.has("model")) config.set("model", "vg");
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::pair<std::string, CLI::Option*>> options_;
};

Settings settings_from(const std::string& config_path, const Overrides& overrides) {
  KeyValueConfig config = config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(config_path);
  overrides.apply(config);
  return load_settings(config);
}

LevyModel model_from(const Settings& settings) {
  return vg_model(settings.model.value_or(VGParams{}), settings.T);
}

nlohmann::ordered_json model_echo(const Settings& settings) {
  const VGParams p = settings.model.value_or(VGParams{});
  return {{"model", "vg"}, {"sigma", p.sigma}, {"nu", p.nu}, {"theta", p.theta}, {"T", settings.T}};
}

BenchConfig bench_from(const Settings& settings) {
  BenchConfig cfg;
  cfg.calibration = settings.adaptive.calibration;
  cfg.pre_stride = settings.adaptive.pre_stride;
  cfg.design = settings.design;
  cfg.reps = settings.reps;
  cfg.seed = settings.seed;
  cfg.workers = settings.workers;
  cfg.U_grid = log_cutoff_grid(settings.U_min, settings.U_max, settings.U_count);
  cfg.estimate_k = settings.adaptive.calibration.estimate_k;
  cfg.echo = model_echo(settings);
  return cfg;
}

std::filesystem::path k_path_for(const std::filesystem::path& out) {
  std::filesystem::path p = out;
  p.replace_filename(out.stem().string() + "_k.csv");
  return p;
}

int simulate(const Settings& settings, const std::string& out_path, std::ostream& out) {
  const LevyModel model = model_from(settings);
  ObservationSet obs = simulate_observations(model, settings.design);
  obs.r = settings.r;
  write_observations_csv(obs, out_path);
  out << "wrote " << obs.size() << " observations to " << out_path << '\n';
  return 0;
}

int calibrate(const Settings& settings, const std::string& in_path, const std::string& out_path, std::string k_out,
              std::ostream& out) {
  const ObservationSet obs = read_observations_csv(in_path);
  const CalibrationConfig& c = settings.adaptive.calibration;
  CalibrationResult result;
  nlohmann::ordered_json extra;
  switch (settings.cutoff.kind) {
    case CutoffMode::Kind::Fixed:
      result = calibrate_fixed(obs, c, settings.cutoff.U, settings.cutoff.U);
      extra["cutoff_mode"] = "fixed";
      break;
    case CutoffMode::Kind::Adaptive: {
      const AdaptiveResult a = estimate_adaptive(obs, settings.adaptive);
      result = a.result;
      extra["cutoff_mode"] = "adaptive";
      extra["alpha_pre"] = a.alpha_pre;
      extra["U_pre"] = a.U_pre;
      extra["eps_pre"] = a.eps_pre;
      extra["eps"] = a.eps;
      extra["pre_size"] = a.pre_size;
      extra["main_size"] = a.main_size;
      break;
    }
    case CutoffMode::Kind::Oracle: {
      require(settings.model.has_value(), "cutoff_mode = oracle needs the true model (model = vg)");
      LevyModel model = vg_model(*settings.model, obs.T);
      const OracleCalibration oracle =
          oracle_calibration(obs, model, c, log_cutoff_grid(settings.U_min, settings.U_max, settings.U_count));
      result = oracle.result;
      extra["cutoff_mode"] = "oracle";
      for (std::size_t q = 0; q < oracle.quantities.size(); ++q)
        extra["oracle_U"][oracle.quantities[q]] = oracle.choices[q].U;
      break;
    }
  }
  if (!std::isfinite(result.gamma_hat)) throw NumericError("calibration produced a non-finite drift");
  nlohmann::ordered_json json = calibration_json(result);
  for (auto it = extra.begin(); it != extra.end(); ++it) json[it.key()] = it.value();
  std::ofstream file(out_path);
  if (!file) throw InputError("cannot write " + out_path);
  file << json.dump(2) << '\n';
  if (c.estimate_k) {
    if (k_out.empty()) k_out = k_path_for(out_path).string();
    write_k_csv(result, k_out);
  }
  out << std::setprecision(6) << "gamma_hat = " << result.gamma_hat << "\n";
  for (std::size_t j = 0; j < result.alpha_hats.size(); ++j)
    out << "alpha" << j << "_hat = " << result.alpha_hats[j] << '\n';
  out << "U = " << result.U_used << '\n';
  return 0;
}

void print_table(const RiskTable& table, std::ostream& out) {
  out << std::left << std::setw(10) << "quantity" << std::setw(14) << "truth" << std::setw(14) << "oracle"
      << "adaptive\n";
  for (const RiskRow& r : table.rows)
    out << std::setw(10) << r.quantity << std::setw(14) << r.truth << std::setw(14) << r.oracle_rmse << r.adaptive_rmse
        << '\n';
  out << "failures: " << table.failures << " of " << table.reps_requested << (table.flagged ? " (flagged)" : "") << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonparametric calibration of exponential Levy models from option prices", "levycal"};
  app.require_subcommand(1);

  std::string config_path, in_path, out_path, k_out;
  bool no_k = false, no_adaptive = false;
  std::vector<double> deltas{0.0025, 0.005, 0.01, 0.02, 0.04};
  IngestOptions ingest_options;
  double spot = 0.0, maturity = 0.0, rate = 0.0;

  auto add_model = [&](CLI::App* sub, Overrides& o) {
    sub->add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    o.add(sub, "--sigma", "sigma", "VG volatility");
    o.add(sub, "--nu", "nu", "VG variance rate");
    o.add(sub, "--theta", "theta", "VG drift of the subordinated Brownian motion");
    o.add(sub, "--T", "T", "maturity in years");
    o.add(sub, "--N", "N", "number of strikes");
    o.add(sub, "--delta", "delta", "relative noise level");
    o.add(sub, "--seed", "seed", "master seed");
  };

  Overrides sim_o, cal_o, mc_o, rate_o;
  auto* sim = app.add_subcommand("simulate", "simulate noisy option prices from a VG model");
  add_model(sim, sim_o);
  sim->add_option("--out", out_path, "observation CSV")->required();

  auto* cal = app.add_subcommand("calibrate", "estimate drift, jump activity and k-function");
  cal->add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  cal->add_option("--in", in_path, "observation CSV")->required();
  cal->add_option("--out", out_path, "result JSON")->required();
  cal->add_option("--k-out", k_out, "k-function CSV (default <out>_k.csv)");
  cal_o.add(cal, "--cutoff", "cutoff_mode", "oracle | adaptive | fixed:<U>");

  auto* mc = app.add_subcommand("montecarlo", "Monte Carlo risk table");
  add_model(mc, mc_o);
  mc_o.add(mc, "--model", "model", "model family (vg)");
  mc_o.add(mc, "--reps", "reps", "replications");
  mc_o.add(mc, "--workers", "workers", "worker threads");
  mc->add_option("--out", out_path, "report directory")->required();
  mc->add_flag("--no-k", no_k, "skip the k-function");
  mc->add_flag("--no-adaptive", no_adaptive, "skip the adaptive estimator");

  auto* rs = app.add_subcommand("ratestudy", "oracle drift RMSE against the noise level");
  add_model(rs, rate_o);
  rate_o.add(rs, "--model", "model", "model family (vg)");
  rate_o.add(rs, "--reps", "reps", "replications per noise level");
  rate_o.add(rs, "--workers", "workers", "worker threads");
  rs->add_option("--deltas", deltas, "relative noise levels")->delimiter(',');
  rs->add_option("--out", out_path, "report directory")->required();

  auto* ing = app.add_subcommand("ingest", "convert a strike,call,put table to observations");
  ing->add_option("--in", in_path, "market CSV")->required();
  ing->add_option("--out", out_path, "observation CSV")->required();
  auto* spot_opt = ing->add_option("--spot", spot, "spot price");
  auto* maturity_opt = ing->add_option("--maturity", maturity, "maturity in years");
  auto* rate_opt = ing->add_option("--rate", rate, "interest rate (skips put-call parity)");
  ing->add_option("--spread", ingest_options.spread, "noise level as a fraction of the price");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (sim->parsed()) return simulate(settings_from(config_path, sim_o), out_path, out);
    if (cal->parsed()) return calibrate(settings_from(config_path, cal_o), in_path, out_path, k_out, out);
    if (mc->parsed()) {
      Settings settings = settings_from(config_path, mc_o);
      if (no_k) settings.adaptive.calibration.estimate_k = false;
      BenchConfig cfg = bench_from(settings);
      cfg.adaptive = !no_adaptive;
      const RiskTable table = monte_carlo(model_from(settings), cfg);
      emit_report(table, out_path);
      print_table(table, out);
      return table.flagged ? kNumeric : 0;
    }
    if (rs->parsed()) {
      const Settings settings = settings_from(config_path, rate_o);
      const RateStudy study = rate_study(model_from(settings), bench_from(settings), deltas);
      emit_report(study, out_path);
      out << "slope " << study.slope << " (theory " << study.theoretical_exponent << ")\n";
      return 0;
    }
    if (ing->parsed()) {
      if (spot_opt->count() > 0) ingest_options.spot = spot;
      if (maturity_opt->count() > 0) ingest_options.maturity = maturity;
      if (rate_opt->count() > 0) ingest_options.rate = rate;
      const ObservationSet obs = ingest_market_csv(in_path, ingest_options);
      write_observations_csv(obs, out_path);
      out << "wrote " << obs.size() << " observations, r = " << std::setprecision(10) << obs.r << '\n';
      return 0;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumeric;
  }
  return kUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace levycal::cli
