#include "levycal/weights.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <tuple>

#include <json.hpp>

#include "levycal/quadrature.hpp"

namespace levycal {

namespace {

struct UnitSolution {
  Vector coeffs;
  double condition_number;
};

// Row of the moment system: full-line integral of f(u) |u|^{s-1+m} (parity-signed)
// over [-1, 1] for each basis index m.
using RowFunction = long double (*)(int s, int m, int l);

long double power_row(int s, int m, int l) { return 2.0L / (s + m + l); }
long double half_line_row(int s, int m, int) { return 1.0L / (s + m); }
long double log_row(int s, int m, int) { return -2.0L / ((s + m) * (s + m)); }

struct Condition {
  RowFunction row;
  int l;
  double target;
};

double factorial(int n) { return std::tgamma(n + 1.0); }

std::vector<Condition> system_conditions(WeightKind kind, int s, int j) {
  std::vector<Condition> conditions;
  if (kind == WeightKind::Gamma) {
    conditions.push_back({power_row, 1, 1.0});
    for (int l = 1; l <= s - 2; l += 2) conditions.push_back({power_row, -l, 0.0});
    conditions.push_back({half_line_row, 0, 0.0});
    return conditions;
  }
  if (j == 0) {
    conditions.push_back({log_row, 0, -1.0});
    for (int l = 2; l <= s - 2; l += 2) conditions.push_back({power_row, -l, 0.0});
    conditions.push_back({half_line_row, 0, 0.0});
    return conditions;
  }
  const double target = ((j / 2) % 2 == 0 ? 1.0 : -1.0) / factorial(j - 1);
  for (int l = (j % 2 == 0 ? 2 : 1); l <= s - 2; l += 2) conditions.push_back({power_row, -l, l == j ? target : 0.0});
  conditions.push_back({half_line_row, 0, 0.0});
  // Odd j: the drift term i*gamma*u sits in Im psi next to alpha_j and must be filtered out too.
  if (j % 2 == 1)
    conditions.push_back({power_row, 1, 0.0});
  else
    conditions.push_back({log_row, 0, 0.0});
  return conditions;
}

UnitSolution solve_unit_weight(WeightKind kind, int s, int j) {
  using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using LongVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const std::vector<Condition> conditions = system_conditions(kind, s, j);
  const auto size = static_cast<Eigen::Index>(conditions.size());
  LongMatrix system(size, size);
  LongVector rhs(size);
  for (Eigen::Index r = 0; r < size; ++r) {
    const Condition& c = conditions[static_cast<std::size_t>(r)];
    for (Eigen::Index m = 0; m < size; ++m) system(r, m) = c.row(s, static_cast<int>(m), c.l);
    rhs(r) = c.target;
  }
  const Eigen::JacobiSVD<Matrix> svd(system.cast<double>());
  const Vector sv = svd.singularValues();
  const double condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
  if (!(condition <= 1e12))
    throw NumericError("weight system is ill-conditioned (cond " + std::to_string(condition) +
                       "); use a larger polynomial basis");
  // Extended precision keeps the moment defects near double rounding despite cond ~ 1e7.
  const LongVector solution = system.partialPivLu().solve(rhs);
  return {solution.cast<double>(), condition};
}

const UnitSolution& cached_unit_weight(WeightKind kind, int s, int j) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, UnitSolution> cache;
  const std::lock_guard lock(mutex);
  const auto key = std::make_tuple(static_cast<int>(kind), s, j);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, solve_unit_weight(kind, s, j)).first;
  return it->second;
}

}  // namespace

double WeightFunction::unit(double v) const {
  const double a = std::abs(v);
  if (a > 1.0) return 0.0;
  double poly = 0.0;
  for (Eigen::Index m = coeffs.size() - 1; m >= 0; --m) poly = poly * a + coeffs(m);
  const double value = std::pow(a, s - 1) * poly;
  return parity == Parity::Odd && v < 0.0 ? -value : value;
}

double WeightFunction::operator()(double u) const { return std::pow(U, rescale_exponent) * unit(u / U); }

WeightFunction WeightFunction::rescaled(double new_U) const {
  require(new_U > 0.0, "weight: U must be positive");
  WeightFunction w = *this;
  w.U = new_U;
  return w;
}

std::string WeightFunction::label() const {
  return kind == WeightKind::Gamma ? "gamma" : "alpha_" + std::to_string(j);
}

WeightFunction build_parameter_weight(WeightKind kind, int s, double U, int j) {
  require(s >= 2, "weight: s must be at least 2");
  require(U > 0.0 && std::isfinite(U), "weight: U must be positive");
  if (kind == WeightKind::Alpha) require(j >= 0 && j <= s - 2, "weight: alpha index must lie in 0..s-2");
  const UnitSolution& unit = cached_unit_weight(kind, s, kind == WeightKind::Gamma ? 0 : j);
  WeightFunction w;
  w.kind = kind;
  w.j = kind == WeightKind::Gamma ? 0 : j;
  w.s = s;
  w.U = U;
  w.parity = (kind == WeightKind::Gamma || j % 2 == 1) ? Parity::Odd : Parity::Even;
  w.coeffs = unit.coeffs;
  w.rescale_exponent = kind == WeightKind::Gamma ? -2 : j - 1;
  w.condition_number = unit.condition_number;
  return w;
}

std::vector<MomentCondition> moment_conditions(const WeightFunction& w) {
  QuadratureSpec spec;
  spec.abs_tol = 1e-14;
  spec.rel_tol = 1e-13;
  const double U = w.U;
  auto full = [&](auto f) {
    return integrate([&](double u) { return f(u) * w(u); }, -U, 0.0, spec).value +
           integrate([&](double u) { return f(u) * w(u); }, 0.0, U, spec).value;
  };
  std::vector<MomentCondition> out;
  const bool gamma = w.kind == WeightKind::Gamma;
  out.push_back({"int u w", full([](double u) { return u; }), gamma ? 1.0 : 0.0});
  out.push_back({"int log|u| w", full([](double u) { return std::log(std::abs(u)); }),
                 !gamma && w.j == 0 ? -1.0 : 0.0});
  for (int l = 1; l <= w.s - 2; ++l) {
    double target = 0.0;
    if (!gamma && w.j == l) target = ((l / 2) % 2 == 0 ? 1.0 : -1.0) / factorial(l - 1);
    out.push_back({"int u^-" + std::to_string(l) + " w", full([l](double u) { return std::pow(u, -l); }), target});
  }
  out.push_back({"int_0^U w(u)", integrate([&](double u) { return w(u); }, 0.0, U, spec).value, 0.0});
  out.push_back({"int_0^U w(-u)", integrate([&](double u) { return w(-u); }, 0.0, U, spec).value, 0.0});
  return out;
}

double verify_moments(const WeightFunction& w) {
  double defect = 0.0;
  for (const MomentCondition& c : moment_conditions(w)) defect = std::max(defect, std::abs(c.value - c.target));
  return defect;
}

void write_weights_json(const std::vector<WeightFunction>& weights, const std::filesystem::path& path) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const WeightFunction& w : weights) {
    nlohmann::ordered_json item;
    item["kind"] = w.label();
    item["s"] = w.s;
    item["U"] = w.U;
    item["coeffs"] = std::vector<double>(w.coeffs.data(), w.coeffs.data() + w.coeffs.size());
    item["defect"] = verify_moments(w);
    item["condition_number"] = w.condition_number;
    out.push_back(item);
  }
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file << out.dump(2) << '\n';
}

// ---------------------------------------------------------------- kernel

namespace {

using Poly = std::vector<double>;

Poly multiply(const Poly& a, const Poly& b) {
  Poly c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k) c[i + k] += a[i] * b[k];
  return c;
}

Poly add_scaled(const Poly& a, double sa, const Poly& b, double sb) {
  Poly c(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) c[i] += sa * a[i];
  for (std::size_t i = 0; i < b.size(); ++i) c[i] += sb * b[i];
  return c;
}

// P_0..P_{n-1} composed with the linear map y = arg[0] + arg[1] t.
std::vector<Poly> legendre_polys(int n, const Poly& arg) {
  std::vector<Poly> p{{1.0}};
  if (n > 1) p.push_back(arg);
  for (int k = 1; k + 1 < n; ++k)
    p.push_back(add_scaled(multiply(arg, p[k]), (2.0 * k + 1) / (k + 1), p[k - 1], -static_cast<double>(k) / (k + 1)));
  p.resize(static_cast<std::size_t>(n));
  return p;
}

double legendre_sum(const Vector& a, double y) {
  double p0 = 1.0, p1 = y, sum = a(0);
  if (a.size() > 1) sum += a(1) * y;
  for (Eigen::Index k = 1; k + 1 < a.size(); ++k) {
    const double p2 = ((2.0 * k + 1) * y * p1 - k * p0) / (k + 1);
    sum += a(k + 1) * p2;
    p0 = p1;
    p1 = p2;
  }
  return sum;
}

Poly binomial_power(double a, double b, int r) {
  Poly result{1.0};
  for (int i = 0; i < r; ++i) result = multiply(result, Poly{a, b});
  return result;
}

constexpr int kDirectNodes = 400;
constexpr double kDirectLimit = 256.0;

// Sum over m of (-1)^m [e^{ivx} W^{(m)}(x)]_{-1}^{0} / (iv)^{m+1}, given Taylor
// coefficients of W at 0 and at -1.
Complex by_parts(const Poly& at_zero, const Poly& at_minus_one, double v) {
  const Complex inv(0.0, -1.0 / v);
  const Complex left_phase = std::polar(1.0, -v);
  Complex sum = 0.0, power = inv;
  double fact = 1.0;
  const std::size_t terms = std::max(at_zero.size(), at_minus_one.size());
  for (std::size_t m = 0; m < terms; ++m) {
    if (m > 0) fact *= static_cast<double>(m);
    const double d0 = m < at_zero.size() ? fact * at_zero[m] : 0.0;
    const double d1 = m < at_minus_one.size() ? fact * at_minus_one[m] : 0.0;
    const Complex term = (d0 - left_phase * d1) * power;
    sum += m % 2 == 0 ? term : -term;
    power *= inv;
  }
  return sum;
}

}  // namespace

KernelWk::KernelWk(int s, int r) : s_(s), r_(r) {
  require(s >= 1, "kernel: s must be at least 1");
  require(r >= 1, "kernel: bump exponent must be at least 1");
  // Gram system in shifted Legendre polynomials P_k(2x+1): int P_k W_k = P_k(1) = 1
  // for k < s is equivalent to the moment conditions and keeps the matrix well conditioned.
  std::vector<double> nodes, weights;
  gauss_legendre(s + r + 2, nodes, weights);
  Matrix gram = Matrix::Zero(s, s);
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const double x = 0.5 * (nodes[n] - 1.0);
    const double bump = std::pow(-x * (1.0 + x), r);
    Vector p(s);
    for (int k = 0; k < s; ++k) {
      Vector unit = Vector::Zero(s);
      unit(k) = 1.0;
      p(k) = legendre_sum(unit, 2.0 * x + 1.0);
    }
    gram += 0.5 * weights[n] * bump * p * p.transpose();
  }
  Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw NumericError("kernel: Gram system is singular");
  legendre_coeffs_ = ldlt.solve(Vector::Ones(s));

  // Taylor coefficients of W_k at 0 (in x) and at -1 (in t = x + 1).
  auto expand = [&](const Poly& arg, const Poly& bump) {
    const std::vector<Poly> basis = legendre_polys(s, arg);
    Poly q{0.0};
    for (int k = 0; k < s; ++k) q = add_scaled(q, 1.0, basis[static_cast<std::size_t>(k)], legendre_coeffs_(k));
    return multiply(q, bump);
  };
  // -x(1+x) = (-1)^r x^r (1+x)^r around 0 and t^r (1-t)^r around -1.
  Poly bump0(static_cast<std::size_t>(r), 0.0);
  Poly tail0 = binomial_power(1.0, 1.0, r);
  for (double& c : tail0) c *= (r % 2 == 0 ? 1.0 : -1.0);
  bump0.insert(bump0.end(), tail0.begin(), tail0.end());
  Poly bump1(static_cast<std::size_t>(r), 0.0);
  const Poly tail1 = binomial_power(1.0, -1.0, r);
  bump1.insert(bump1.end(), tail1.begin(), tail1.end());
  taylor_zero_ = expand(Poly{1.0, 2.0}, bump0);
  taylor_minus_one_ = expand(Poly{-1.0, 2.0}, bump1);

  // Table on [0, limit]; the negative side follows from conjugation.
  const auto count = static_cast<std::size_t>(std::llround(table_limit_ / table_step_)) + 1;
  table_.assign(count, Complex(0.0));
  std::vector<double> gl_nodes, gl_weights;
  gauss_legendre(kDirectNodes, gl_nodes, gl_weights);
  const std::size_t nodes_count = gl_nodes.size();
  std::vector<double> xs(nodes_count), ws(nodes_count);
  for (std::size_t n = 0; n < nodes_count; ++n) {
    xs[n] = 0.5 * (gl_nodes[n] - 1.0);
    ws[n] = 0.5 * gl_weights[n] * (*this)(xs[n]);
  }
  const auto direct_count = static_cast<std::size_t>(std::llround(kDirectLimit / table_step_));
  std::vector<double> c(nodes_count), sn(nodes_count), cs(nodes_count), ss(nodes_count);
  for (std::size_t n = 0; n < nodes_count; ++n) {
    cs[n] = std::cos(table_step_ * xs[n]);
    ss[n] = std::sin(table_step_ * xs[n]);
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double v = static_cast<double>(i) * table_step_;
    if (i > direct_count) {
      table_[i] = by_parts(taylor_zero_, taylor_minus_one_, v);
      continue;
    }
    if (i % 256 == 0) {
      for (std::size_t n = 0; n < nodes_count; ++n) {
        c[n] = std::cos(v * xs[n]);
        sn[n] = std::sin(v * xs[n]);
      }
    } else {
      for (std::size_t n = 0; n < nodes_count; ++n) {
        const double cn = c[n] * cs[n] - sn[n] * ss[n];
        sn[n] = sn[n] * cs[n] + c[n] * ss[n];
        c[n] = cn;
      }
    }
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < nodes_count; ++n) {
      re += ws[n] * c[n];
      im += ws[n] * sn[n];
    }
    table_[i] = {re, im};
  }
}

double KernelWk::operator()(double x) const {
  if (x < -1.0 || x > 0.0) return 0.0;
  return legendre_sum(legendre_coeffs_, 2.0 * x + 1.0) * std::pow(-x * (1.0 + x), r_);
}

Complex KernelWk::fourier(double v) const {
  if (std::abs(v) > kDirectLimit) return by_parts(taylor_zero_, taylor_minus_one_, v);
  static const auto rule = [] {
    std::pair<std::vector<double>, std::vector<double>> nw;
    gauss_legendre(kDirectNodes, nw.first, nw.second);
    return nw;
  }();
  Complex sum = 0.0;
  for (std::size_t n = 0; n < rule.first.size(); ++n) {
    const double x = 0.5 * (rule.first[n] - 1.0);
    sum += 0.5 * rule.second[n] * (*this)(x) * std::polar(1.0, v * x);
  }
  return sum;
}

Complex KernelWk::fourier_table(double v) const {
  const double a = std::abs(v);
  if (a > table_limit_) return 0.0;
  const double pos = a / table_step_;
  const auto last = static_cast<std::ptrdiff_t>(table_.size()) - 1;
  auto i = static_cast<std::ptrdiff_t>(std::floor(pos));
  i = std::clamp<std::ptrdiff_t>(i, 1, last - 2);
  const double t = pos - static_cast<double>(i);
  // Four-point Lagrange through i-1 .. i+2.
  const double w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
  const double w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  const double w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
  const double w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
  const Complex value = w0 * table_[static_cast<std::size_t>(i - 1)] + w1 * table_[static_cast<std::size_t>(i)] +
                        w2 * table_[static_cast<std::size_t>(i + 1)] + w3 * table_[static_cast<std::size_t>(i + 2)];
  return v < 0.0 ? std::conj(value) : value;
}

double KernelWk::effective_support(double tol) const {
  for (std::size_t i = table_.size(); i-- > 0;)
    if (std::abs(table_[i]) > tol) return static_cast<double>(i + 1) * table_step_;
  return 0.0;
}

double KernelWk::l1_norm() const {
  QuadratureSpec spec;
  spec.abs_tol = 1e-13;
  return integrate([this](double x) { return std::abs((*this)(x)); }, -1.0, 0.0, spec).value;
}

int kernel_bump_exponent(double T, double alpha_bar) {
  require(T > 0.0 && alpha_bar >= 0.0, "kernel: need T > 0 and alpha_bar >= 0");
  return static_cast<int>(std::ceil(T * alpha_bar - 1e-12)) + 3;
}

std::shared_ptr<const KernelWk> build_kernel(int s, double T, double alpha_bar) {
  const int r = kernel_bump_exponent(T, alpha_bar);
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const KernelWk>> cache;
  const std::lock_guard lock(mutex);
  auto& slot = cache[{s, r}];
  if (!slot) slot = std::make_shared<const KernelWk>(s, r);
  return slot;
}

}  // namespace levycal
