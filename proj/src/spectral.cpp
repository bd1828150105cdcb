#include "levycal/spectral.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "levycal/quadrature.hpp"

namespace levycal {

double cosine_integral(double y) {
  require(y > 0.0, "cosine_integral: y must be positive");
  constexpr double kEulerGamma = 0.57721566490153286061;
  QuadratureSpec spec;
  spec.abs_tol = 1e-14;
  // Ci(y) = gamma + log y + int_0^y (cos t - 1)/t dt, split into unit panels.
  double integral = 0.0;
  for (double a = 0.0; a < y; a += 1.0) {
    const double b = std::min(a + 1.0, y);
    integral += integrate([](double t) { return t == 0.0 ? 0.0 : (std::cos(t) - 1.0) / t; }, a, b, spec).value;
  }
  return kEulerGamma + std::log(y) + integral;
}

namespace {

struct CosineBounds {
  double tail;
  double partial;
};

// Ci' = cos(y)/y, so the extrema over [1, inf) sit at y = 1 and y = (k + 1/2) pi,
// with amplitudes shrinking in k.
CosineBounds compute_cosine_bounds() {
  const double ci_one = cosine_integral(1.0);
  double tail = std::abs(ci_one);
  double minimum = ci_one;
  for (int k = 0; k < 40; ++k) {
    const double ci = cosine_integral((k + 0.5) * kPi);
    tail = std::max(tail, std::abs(ci));
    minimum = std::min(minimum, ci);
  }
  return {tail, ci_one - minimum};
}

const CosineBounds& cosine_bounds() {
  static const CosineBounds bounds = compute_cosine_bounds();
  return bounds;
}

}  // namespace

double cosine_tail_bound() { return cosine_bounds().tail; }
double cosine_partial_bound() { return cosine_bounds().partial; }

double char_lower_bound_constant(double T, double R) {
  const double e = std::numbers::e;
  return std::exp(-T * R * (3.0 + 2.0 * e + 4.0 * cosine_tail_bound() + 2.0 * cosine_partial_bound()));
}

double kappa(double u, const TrimSpec& spec) {
  if (spec.disabled) return 1e-12;
  const double au = std::abs(u);
  if (au < 1.0) return spec.factor * std::exp(-spec.T * spec.R);
  return spec.factor * spec.c_phi() * std::pow(au, -spec.T * spec.alpha_bar);
}

double SpectralGrid::trimmed_fraction() const {
  if (trimmed.empty()) return 0.0;
  std::size_t count = 0;
  for (bool t : trimmed) count += t ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(trimmed.size());
}

Vector symmetric_grid(double step, double half_width) {
  require(step > 0.0 && half_width >= 0.0, "symmetric_grid: invalid step or width");
  const auto n = static_cast<Eigen::Index>(std::llround(std::ceil(half_width / step - 1e-9)));
  Vector u(2 * n + 1);
  for (Eigen::Index i = -n; i <= n; ++i) u(i + n) = static_cast<double>(i) * step;
  return u;
}

namespace {

double grid_step(const Vector& u) {
  require(u.size() >= 3 && u.size() % 2 == 1, "spectral grid: need an odd number of points");
  const Eigen::Index n = (u.size() - 1) / 2;
  require(u(n) == 0.0, "spectral grid: grid must contain 0 at its centre");
  const double h = u(n + 1) - u(n);
  require(h > 0.0, "spectral grid: grid must be increasing");
  for (Eigen::Index i = 0; i < u.size(); ++i)
    require(std::abs(u(i) - (i - n) * h) <= 1e-9 * std::max(1.0, std::abs(u(i))),
            "spectral grid: grid must be uniform and symmetric");
  return h;
}

double wrap(double angle) { return std::remainder(angle, 2.0 * kPi); }

struct Argument {
  Complex raw;
  Complex trimmed_value;
  bool trimmed;
  Complex ft;
  Complex ft_x;
};

Argument make_argument(const TrimSpec& spec, double u, const Complex& ft, const Complex& ft_x) {
  const Complex raw = 1.0 + Complex(-u * u, u) * ft;
  const double k = kappa(u, spec);
  return {raw, trim(raw, k), std::abs(raw) < k, ft, ft_x};
}

Argument evaluate_argument(const InterpolatedSurface& surface, const TrimSpec& spec, double u) {
  const SurfaceTransforms t = ft_surface_both(surface, u);
  return make_argument(spec, u, t.plain, t.weighted);
}

// Phase increment from u0 to u1, refining the interval while any increment
// exceeds pi/2. Returns false when max_refinements did not suffice.
bool phase_increment(const InterpolatedSurface& surface, const TrimSpec& spec, double u0, double u1,
                     const Complex& z0, const Complex& z1, int max_refinements, double& increment) {
  double jump = wrap(std::arg(z1) - std::arg(z0));
  if (std::abs(jump) <= 0.5 * kPi) {
    increment = jump;
    return true;
  }
  for (int level = 1; level <= max_refinements; ++level) {
    const int pieces = 1 << level;
    double total = 0.0;
    bool ok = true;
    Complex previous = z0;
    for (int p = 1; p <= pieces; ++p) {
      const Complex current =
          p == pieces ? z1 : evaluate_argument(surface, spec, u0 + (u1 - u0) * p / pieces).trimmed_value;
      const double d = wrap(std::arg(current) - std::arg(previous));
      if (std::abs(d) > 0.5 * kPi) ok = false;
      total += d;
      previous = current;
    }
    if (ok) {
      increment = total;
      return true;
    }
    jump = total;
  }
  increment = jump;
  return false;
}

SpectralGrid evaluate_grid(const InterpolatedSurface& surface, const TrimSpec& spec, const Vector& u_grid,
                           bool with_psi, bool with_psi_prime, int max_refinements) {
  require(spec.T > 0.0, "spectral grid: T must be positive");
  SpectralGrid grid;
  grid.step = grid_step(u_grid);
  grid.u = u_grid;
  grid.has_psi = with_psi;
  grid.has_psi_prime = with_psi_prime;
  const Eigen::Index size = u_grid.size();
  const Eigen::Index center = (size - 1) / 2;
  if (with_psi) grid.psi = ComplexVector::Zero(size);
  if (with_psi_prime) grid.psi_prime = ComplexVector::Zero(size);
  grid.trimmed.assign(static_cast<std::size_t>(size), false);

  ComplexVector ft, ft_x;
  ft_surface_grid(surface, grid.step, size - center, ft, ft_x);
  const double inv_t = 1.0 / spec.T;
  double phase = 0.0;
  Complex previous_value = 1.0;
  // Positive half-line, swept outward from 0; the negative half follows from
  // O~ being real: psi~(-u) = conj(psi~(u)), psi~'(-u) = -conj(psi~'(u)).
  for (Eigen::Index i = center; i < size; ++i) {
    const double u = u_grid(i);
    const Argument arg = make_argument(spec, u, ft(i - center), ft_x(i - center));
    grid.trimmed[static_cast<std::size_t>(i)] = arg.trimmed;
    grid.trimmed[static_cast<std::size_t>(2 * center - i)] = arg.trimmed;
    if (with_psi) {
      if (i == center) {
        grid.psi(i) = 0.0;
      } else {
        double increment = 0.0;
        if (!phase_increment(surface, spec, u_grid(i - 1), u, previous_value, arg.trimmed_value, max_refinements,
                             increment))
          grid.unwrap_ok = false;
        phase += increment;
        grid.psi(i) = inv_t * Complex(std::log(std::abs(arg.trimmed_value)), phase);
        grid.psi(2 * center - i) = std::conj(grid.psi(i));
      }
      previous_value = arg.trimmed_value;
    }
    if (with_psi_prime) {
      const Complex numerator = Complex(-2.0 * u, 1.0) * arg.ft - Complex(u, u * u) * arg.ft_x;
      grid.psi_prime(i) = inv_t * numerator / arg.trimmed_value;
      grid.psi_prime(2 * center - i) = -std::conj(grid.psi_prime(i));
    }
  }
  return grid;
}

}  // namespace

SpectralGrid spectral_grid(const InterpolatedSurface& surface, const TrimSpec& spec, const SpectralOptions& options) {
  return evaluate_grid(surface, spec, symmetric_grid(options.step, options.half_width), options.with_psi,
                       options.with_psi_prime, options.max_refinements);
}

SpectralGrid psi_tilde(const InterpolatedSurface& surface, const TrimSpec& spec, const Vector& u_grid) {
  return evaluate_grid(surface, spec, u_grid, true, false, 3);
}

SpectralGrid psi_prime_tilde(const InterpolatedSurface& surface, const TrimSpec& spec, const Vector& u_grid) {
  return evaluate_grid(surface, spec, u_grid, false, true, 3);
}

SpectralGrid spectral_grid_from(const std::function<Complex(double)>& psi,
                                const std::function<Complex(double)>& psi_prime, double step, double half_width) {
  SpectralGrid grid;
  grid.u = symmetric_grid(step, half_width);
  grid.step = step;
  const Eigen::Index size = grid.u.size();
  grid.trimmed.assign(static_cast<std::size_t>(size), false);
  if (psi) {
    grid.has_psi = true;
    grid.psi.resize(size);
    for (Eigen::Index i = 0; i < size; ++i) grid.psi(i) = psi(grid.u(i));
  }
  if (psi_prime) {
    grid.has_psi_prime = true;
    grid.psi_prime.resize(size);
    for (Eigen::Index i = 0; i < size; ++i) grid.psi_prime(i) = psi_prime(grid.u(i));
  }
  return grid;
}

void write_spectral_csv(const SpectralGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17) << "u,re_psi,im_psi,re_psip,im_psip,trimmed\n";
  for (Eigen::Index i = 0; i < grid.u.size(); ++i) {
    const Complex p = grid.has_psi ? grid.psi(i) : Complex(NAN, NAN);
    const Complex q = grid.has_psi_prime ? grid.psi_prime(i) : Complex(NAN, NAN);
    out << grid.u(i) << ',' << p.real() << ',' << p.imag() << ',' << q.real() << ',' << q.imag() << ','
        << (grid.trimmed[static_cast<std::size_t>(i)] ? 1 : 0) << '\n';
  }
}

}  // namespace levycal
