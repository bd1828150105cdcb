#include "levycal/config.hpp"

#include <fstream>
#include <sstream>

#include "levycal/bench.hpp"

namespace levycal {

namespace {

std::string strip(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_number(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw InputError("config: " + key + " expects a number, got '" + value + "'");
  }
  require(used == value.size(), "config: " + key + " expects a number, got '" + value + "'");
  return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig config;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, "config line " + std::to_string(number) + ": expected 'key = value'");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    require(!key.empty(), "config line " + std::to_string(number) + ": empty key");
    require(!config.has(key), "config: duplicate key " + key);
    config.values_[key] = value;
  }
  return config;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

double KeyValueConfig::number(const std::string& key, double fallback) const {
  const auto v = get(key);
  return v ? to_number(key, *v) : fallback;
}

int KeyValueConfig::integer(const std::string& key, int fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  const double d = to_number(key, *v);
  require(d == static_cast<double>(static_cast<int>(d)), "config: " + key + " expects an integer");
  return static_cast<int>(d);
}

bool KeyValueConfig::flag(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw InputError("config: " + key + " expects true or false, got '" + *v + "'");
}

std::string KeyValueConfig::text(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

void KeyValueConfig::reject_unknown(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_) require(known.count(key) > 0, "config: unknown key " + key);
}

CutoffMode parse_cutoff_mode(const std::string& text) {
  CutoffMode mode;
  if (text == "oracle") {
    mode.kind = CutoffMode::Kind::Oracle;
  } else if (text == "adaptive") {
    mode.kind = CutoffMode::Kind::Adaptive;
  } else if (text.rfind("fixed:", 0) == 0) {
    mode.kind = CutoffMode::Kind::Fixed;
    mode.U = to_number("cutoff_mode", text.substr(6));
    require(mode.U > 0.0, "cutoff_mode: fixed cutoff must be positive");
  } else {
    throw InputError("cutoff_mode must be oracle, adaptive or fixed:<U>, got '" + text + "'");
  }
  return mode;
}

std::set<std::string> settings_keys() {
  return {"s",          "T",           "r",         "alpha_bar", "R",           "pre_stride",  "clamp",
          "trim",       "cutoff_mode", "C",         "fine_step", "coarse_step", "coarse_limit", "k_cell",
          "estimate_k", "kernel_tol",  "model",     "sigma",     "nu",          "theta",       "N",
          "delta",      "design_variance", "seed",  "reps",      "workers",     "U_min",       "U_max",
          "U_count"};
}

Settings load_settings(const KeyValueConfig& config) {
  config.reject_unknown(settings_keys());
  Settings out;
  CalibrationConfig& c = out.adaptive.calibration;
  c.s = config.integer("s", c.s);
  c.alpha_bar = config.number("alpha_bar", c.alpha_bar);
  c.R = config.number("R", c.R);
  c.clamp = config.flag("clamp", c.clamp);
  c.trim = config.flag("trim", c.trim);
  c.C = config.number("C", c.C);
  c.fine_step = config.number("fine_step", c.fine_step);
  c.coarse_step = config.number("coarse_step", c.coarse_step);
  c.coarse_limit = config.number("coarse_limit", c.coarse_limit);
  c.k_cell = config.number("k_cell", c.k_cell);
  c.estimate_k = config.flag("estimate_k", c.estimate_k);
  c.kernel_tol = config.number("kernel_tol", c.kernel_tol);
  out.adaptive.pre_stride = config.integer("pre_stride", out.adaptive.pre_stride);
  out.adaptive.validate();

  out.cutoff = parse_cutoff_mode(config.text("cutoff_mode", "adaptive"));
  out.T = config.number("T", out.T);
  out.r = config.number("r", out.r);
  require(out.T > 0.0, "config: T must be positive");

  const std::string model = config.text("model", "none");
  if (model == "vg") {
    VGParams p;
    p.sigma = config.number("sigma", p.sigma);
    p.nu = config.number("nu", p.nu);
    p.theta = config.number("theta", p.theta);
    p.validate();
    out.model = p;
  } else {
    require(model == "none", "config: model must be vg or none, got '" + model + "'");
    for (const char* key : {"sigma", "nu", "theta"})
      require(!config.has(key), std::string("config: ") + key + " needs model = vg");
  }

  out.design.N = config.integer("N", out.design.N);
  out.design.noise_delta = config.number("delta", out.design.noise_delta);
  out.design.design_variance = config.number("design_variance", out.design.design_variance);
  const double seed = config.number("seed", 1.0);
  require(seed >= 0.0 && seed == static_cast<double>(static_cast<std::uint64_t>(seed)), "config: seed must be a nonnegative integer");
  out.seed = static_cast<std::uint64_t>(seed);
  out.design.seed = out.seed;
  out.design.validate();
  out.reps = config.integer("reps", out.reps);
  out.workers = config.integer("workers", out.workers);
  require(out.reps >= 1 && out.workers >= 1, "config: reps and workers must be at least 1");
  out.U_min = config.number("U_min", out.U_min);
  out.U_max = config.number("U_max", out.U_max);
  out.U_count = config.integer("U_count", out.U_count);
  log_cutoff_grid(out.U_min, out.U_max, out.U_count);
  return out;
}

}  // namespace levycal
