#include "levycal/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace levycal {

double ObservationSet::max_gap() const {
  double gap = 0.0;
  for (Eigen::Index j = 1; j < x.size(); ++j) gap = std::max(gap, x(j) - x(j - 1));
  return gap;
}

double ObservationSet::half_width() const {
  if (x.size() == 0) return 0.0;
  return std::min(x(x.size() - 1), -x(0));
}

void ObservationSet::validate() const {
  require(x.size() == price.size() && x.size() == delta.size(), "observations: column lengths differ");
  for (Eigen::Index j = 1; j < x.size(); ++j)
    require(x(j) > x(j - 1), "observations: strikes must be strictly increasing");
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    require(std::isfinite(x(j)) && std::isfinite(price(j)), "observations: non-finite entry");
    require(delta(j) >= 0.0, "observations: noise levels must be nonnegative");
  }
  require(T > 0.0 && S0 > 0.0, "observations: T and S0 must be positive");
}

ObservationSet ObservationSet::subset(const std::vector<Eigen::Index>& rows) const {
  ObservationSet out;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.x.resize(n);
  out.price.resize(n);
  out.delta.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.x(i) = x(rows[i]);
    out.price(i) = price(rows[i]);
    out.delta(i) = delta(rows[i]);
  }
  out.T = T;
  out.r = r;
  out.S0 = S0;
  return out;
}

double noise_level(const ObservationSet& obs) {
  require(obs.size() >= 2, "noise_level: need at least two strikes");
  const double gap = obs.max_gap();
  const double max_delta = obs.delta.size() > 0 ? obs.delta.maxCoeff() : 0.0;
  return std::pow(gap, 1.5) + std::sqrt(gap) * max_delta;
}

void DesignSpec::validate() const {
  require(N >= 4, "design: N must be at least 4");
  if (law == Law::Explicit) require(static_cast<int>(explicit_x.size()) == N, "design: explicit x has wrong length");
  if (law == Law::Normal) require(design_variance > 0.0, "design: variance must be positive");
  if (noise_rule == NoiseRule::Proportional) require(noise_delta >= 0.0, "design: delta must be nonnegative");
  if (noise_rule == NoiseRule::Explicit)
    require(static_cast<int>(explicit_delta.size()) == N, "design: explicit delta has wrong length");
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(substream), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

namespace {

struct Taylor {
  Complex first;
  Complex second;
};

// phi_T(u - i) ~ 1 + first u + second u^2 / 2 near u = 0.
Taylor char_taylor(const LevyModel& model) {
  auto central = [&](double h) {
    const Complex plus = model.char_shifted(h);
    const Complex minus = model.char_shifted(-h);
    const Complex center = model.char_shifted(0.0);
    return Taylor{(plus - minus) / (2.0 * h), (plus - 2.0 * center + minus) / (h * h)};
  };
  const Taylor coarse = central(2e-3);
  const Taylor fine = central(1e-3);
  return {(4.0 * fine.first - coarse.first) / 3.0, (4.0 * fine.second - coarse.second) / 3.0};
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

Complex fourier_option_transform(const LevyModel& model, double u) {
  constexpr double kSmall = 1e-6;
  if (std::abs(u) < kSmall) {
    const Taylor t = char_taylor(model);
    return -(t.first + 0.5 * t.second * u) / Complex(u, -1.0);
  }
  return (1.0 - model.char_shifted(u)) / (u * Complex(u, -1.0));
}

double black_scholes_option_function(double x, double total_variance) {
  const double sd = std::sqrt(total_variance);
  const double d1 = (-x + 0.5 * total_variance) / sd;
  const double d2 = d1 - sd;
  if (x >= 0.0) return normal_cdf(d1) - std::exp(x) * normal_cdf(d2);
  return std::exp(x) * normal_cdf(-d2) - normal_cdf(-d1);
}

namespace {

std::vector<Complex> difference_terms(const LevyModel& model, double variance, double u_max, double step) {
  const auto count = static_cast<std::size_t>(std::ceil(u_max / step));
  std::vector<Complex> terms(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double u = (static_cast<double>(k) + 0.5) * step;
    const Complex z(u, -1.0);
    const Complex reference = std::exp(-0.5 * variance * (kI * z + z * z));
    terms[k] = step * (reference - model.char_shifted(u)) / (u * z);
  }
  return terms;
}

}  // namespace

OptionPricer::OptionPricer(const LevyModel& model, InversionSettings settings)
    : settings_(settings), reference_variance_(0.04 * model.T) {
  require(settings_.u_max > 0.0 && settings_.step > 0.0, "OptionPricer: invalid inversion grid");
  coarse_ = difference_terms(model, reference_variance_, settings_.u_max, settings_.step);
  fine_ = difference_terms(model, reference_variance_, 2.0 * settings_.u_max, 0.5 * settings_.step);
}

double OptionPricer::difference_sum(const std::vector<Complex>& terms, double step, double x) const {
  // sum_k terms_k e^{-i u_k x}, u_k = (k + 1/2) step, by rotation with periodic re-anchoring.
  constexpr std::size_t kAnchor = 256;
  const double rc = std::cos(step * x), rs = -std::sin(step * x);
  // Only Re(term * phase) is needed; the phase recurrence runs in real arithmetic.
  double sum = 0.0, pc = 0.0, ps = 0.0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (k % kAnchor == 0) {
      const double angle = -(static_cast<double>(k) + 0.5) * step * x;
      pc = std::cos(angle);
      ps = std::sin(angle);
    }
    sum += terms[k].real() * pc - terms[k].imag() * ps;
    const double next = pc * rc - ps * rs;
    ps = ps * rc + pc * rs;
    pc = next;
  }
  return sum / kPi;
}

double OptionPricer::operator()(double x) const {
  const double reference = black_scholes_option_function(x, reference_variance_);
  const double coarse = reference + difference_sum(coarse_, settings_.step, x);
  const double fine = reference + difference_sum(fine_, 0.5 * settings_.step, x);
  const double discrepancy = std::abs(fine - coarse);
  double seen = max_discrepancy_.load();
  while (discrepancy > seen && !max_discrepancy_.compare_exchange_weak(seen, discrepancy)) {
  }
  if (discrepancy > settings_.tolerance) {
    std::ostringstream msg;
    msg << "option_function: inversion not converged at x=" << x << " (doubling moved result by " << discrepancy
        << ")";
    throw NumericError(msg.str());
  }
  return std::max(fine, 0.0);
}

Vector OptionPricer::operator()(const Vector& x) const {
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = (*this)(x(i));
  return out;
}

Vector option_function(const LevyModel& model, const Vector& x, const InversionSettings& settings) {
  for (Eigen::Index i = 0; i < x.size(); ++i) require(std::isfinite(x(i)), "option_function: non-finite strike");
  return OptionPricer(model, settings)(x);
}

ObservationSet simulate_observations(const LevyModel& model, const DesignSpec& spec) {
  return simulate_observations(OptionPricer(model), model.T, spec);
}

ObservationSet simulate_observations(const OptionPricer& pricer, double T, const DesignSpec& spec) {
  spec.validate();
  const int n = spec.N;
  std::vector<double> x;
  bool distinct = false;
  for (int attempt = 0; attempt < 100 && !distinct; ++attempt) {
    if (spec.law == DesignSpec::Law::Explicit) {
      x = spec.explicit_x;
    } else {
      auto engine = make_engine(spec.seed, 0, static_cast<std::uint64_t>(attempt));
      std::normal_distribution<double> design(0.0, std::sqrt(spec.design_variance));
      x.resize(n);
      for (auto& xi : x) xi = design(engine);
    }
    std::sort(x.begin(), x.end());
    distinct = true;
    for (int j = 1; j < n; ++j)
      if (x[j] - x[j - 1] < 1e-12) distinct = false;
    if (!distinct && spec.law == DesignSpec::Law::Explicit) break;
  }
  if (!distinct) throw InputError("simulate_observations: degenerate design (duplicate strikes)");

  ObservationSet obs;
  obs.T = T;
  obs.x = Eigen::Map<const Vector>(x.data(), n);
  const Vector clean = pricer(obs.x);
  obs.delta.resize(n);
  for (int j = 0; j < n; ++j)
    obs.delta(j) = spec.noise_rule == DesignSpec::NoiseRule::Proportional ? spec.noise_delta * clean(j)
                                                                           : spec.explicit_delta[j];
  auto engine = make_engine(spec.seed, 1);
  std::normal_distribution<double> noise(0.0, 1.0);
  obs.price.resize(n);
  for (int j = 0; j < n; ++j) {
    const double e = noise(engine);
    obs.price(j) = clean(j) + obs.delta(j) * e;
  }
  return obs;
}

void write_observations_csv(const ObservationSet& obs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  out << "# T=" << obs.T << "\n# r=" << obs.r << "\n# S0=" << obs.S0 << "\n";
  out << "x,price,delta\n";
  for (Eigen::Index j = 0; j < obs.size(); ++j) out << obs.x(j) << ',' << obs.price(j) << ',' << obs.delta(j) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

ObservationSet read_observations_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open observation file " + path.string());
  ObservationSet obs;
  std::vector<double> x, price, delta;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(std::remove(key.begin(), key.end(), ' '), key.end());
      const double value = std::stod(line.substr(eq + 1));
      if (key == "T") obs.T = value;
      else if (key == "r") obs.r = value;
      else if (key == "S0") obs.S0 = value;
      continue;
    }
    if (!header) {
      require(line == "x,price,delta", "observation file: expected header 'x,price,delta'");
      header = true;
      continue;
    }
    std::stringstream row(line);
    std::string a, b, c;
    std::getline(row, a, ',');
    std::getline(row, b, ',');
    std::getline(row, c, ',');
    x.push_back(std::stod(a));
    price.push_back(std::stod(b));
    delta.push_back(std::stod(c));
  }
  require(header, "observation file: missing header");
  const auto n = static_cast<Eigen::Index>(x.size());
  obs.x = Eigen::Map<Vector>(x.data(), n);
  obs.price = Eigen::Map<Vector>(price.data(), n);
  obs.delta = Eigen::Map<Vector>(delta.data(), n);
  obs.validate();
  return obs;
}

}  // namespace levycal
