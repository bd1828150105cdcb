#include "levycal/surface.hpp"

#include <algorithm>
#include <vector>

namespace levycal {

InterpolatedSurface build_surface(const ObservationSet& obs) {
  obs.validate();
  require(obs.size() >= 4, "build_surface: need at least 4 strikes");
  const Eigen::Index n = obs.size();
  Eigen::Index j0 = 0;
  while (j0 < n && obs.x(j0) < 0.0) ++j0;
  require(j0 > 0 && j0 < n, "build_surface: no at-the-money bracket (all strikes on one side of 0)");

  InterpolatedSurface s;
  s.nodes_ = obs.x;
  s.values_ = obs.price;
  s.j0_ = j0;
  s.kink_left_ = obs.x(j0 - 1);
  s.kink_right_ = obs.x(j0);
  if (s.kink_right_ == 0.0) {
    require(j0 + 1 < n, "build_surface: strike at 0 needs a right neighbour");
    s.kink_right_ = obs.x(j0 + 1);
  }
  const double width = s.kink_right_ - s.kink_left_;
  s.beta0_a_ = s.kink_right_ / width;
  s.beta0_b_ = -s.kink_left_ / width;

  std::vector<double> breaks(obs.x.data(), obs.x.data() + n);
  if (obs.x(j0) != 0.0) breaks.insert(breaks.begin() + j0, 0.0);
  s.breaks_ = Eigen::Map<Vector>(breaks.data(), static_cast<Eigen::Index>(breaks.size()));
  s.break_values_.resize(s.breaks_.size());
  for (Eigen::Index i = 0; i < s.breaks_.size(); ++i) s.break_values_(i) = s(s.breaks_(i));

  const Eigen::Index m = s.breaks_.size();
  s.value_jumps_ = Vector::Zero(m);
  s.slope_jumps_ = Vector::Zero(m);
  s.value_jumps_(0) = s.break_values_(0);
  s.value_jumps_(m - 1) = -s.break_values_(m - 1);
  double previous_slope = 0.0;
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    const double slope = (s.break_values_(i + 1) - s.break_values_(i)) / (s.breaks_(i + 1) - s.breaks_(i));
    s.slope_jumps_(i) = slope - previous_slope;
    previous_slope = slope;
  }
  s.slope_jumps_(m - 1) = -previous_slope;
  return s;
}

double InterpolatedSurface::beta0(double x) const {
  if (x <= kink_left_ || x >= kink_right_) return 0.0;
  return x < 0.0 ? beta0_a_ * (x - kink_left_) : beta0_b_ * (kink_right_ - x);
}

double InterpolatedSurface::operator()(double x) const {
  const Eigen::Index n = nodes_.size();
  if (x < nodes_(0) || x > nodes_(n - 1)) return 0.0;
  const double* begin = nodes_.data();
  const auto it = std::upper_bound(begin, begin + n, x);
  Eigen::Index hi = it - begin;
  double value;
  if (hi >= n) {
    value = values_(n - 1);
  } else {
    const Eigen::Index lo = hi - 1;
    const double t = (x - nodes_(lo)) / (nodes_(hi) - nodes_(lo));
    value = (1.0 - t) * values_(lo) + t * values_(hi);
  }
  return value + beta0(x);
}

namespace {

// Below this |u| the jump sums cancel badly and the segment formula is used.
constexpr double kSegmentFormulaLimit = 2.0;
constexpr Eigen::Index kReanchorInterval = 256;

SurfaceTransforms segment_transforms(const InterpolatedSurface& surface, double u) {
  // Each linear segment [a, b] with end values fa, fb contributes
  //   int_a^b f(x) e^{iux} dx = e^{iua} L (fa E0 + (fb - fa) E1)
  //   int_a^b x f(x) e^{iux} dx = e^{iua} L (a fa E0 + (a (fb - fa) + L fa) E1 + L (fb - fa) E2)
  // with E_n = E_n(iuL); the series branch of E_n covers small |u L|.
  const Vector& x = surface.breakpoints();
  const Vector& f = surface.breakpoint_values();
  Complex plain = 0.0, weighted = 0.0;
  Complex left_phase = std::polar(1.0, u * x(0));
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    const double a = x(i);
    const double length = x(i + 1) - a;
    const double fa = f(i);
    const double slope = f(i + 1) - fa;
    const Complex right_phase = std::polar(1.0, u * x(i + 1));
    Complex e0, e1, e2;
    exponential_moments(Complex(0.0, u * length), right_phase * std::conj(left_phase), e0, e1, e2);
    const Complex scale = left_phase * length;
    plain += scale * (fa * e0 + slope * e1);
    weighted += scale * (a * fa * e0 + (a * slope + length * fa) * e1 + length * slope * e2);
    left_phase = right_phase;
  }
  return {plain, weighted};
}

struct JumpSums {
  Complex a0, a1, b0, b1;
};

// Integrating by parts, with J_k, S_k the value and slope jumps and w = 1/(iu):
//   int e^{iux} f = sum e^{iux_k} (-J_k w + S_k w^2)
//   int e^{iux} x f = sum e^{iux_k} (-x_k J_k w + (J_k + x_k S_k) w^2 - 2 S_k w^3)
SurfaceTransforms from_jump_sums(const JumpSums& s, double u) {
  const Complex w(0.0, -1.0 / u);
  const Complex w2 = w * w;
  return {-w * s.a0 + w2 * s.a1, -w * s.b0 + w2 * (s.a0 + s.b1) - 2.0 * w2 * w * s.a1};
}

}  // namespace

SurfaceTransforms ft_surface_both(const InterpolatedSurface& surface, double u) {
  if (std::abs(u) < kSegmentFormulaLimit) return segment_transforms(surface, u);
  const Vector& x = surface.breakpoints();
  const Vector& jump = surface.value_jumps();
  const Vector& slope = surface.slope_jumps();
  JumpSums sums;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const Complex e = std::polar(1.0, u * x(k));
    sums.a0 += e * jump(k);
    sums.a1 += e * slope(k);
    sums.b0 += e * (x(k) * jump(k));
    sums.b1 += e * (x(k) * slope(k));
  }
  return from_jump_sums(sums, u);
}

void ft_surface_grid(const InterpolatedSurface& surface, double step, Eigen::Index count, ComplexVector& plain,
                     ComplexVector& weighted) {
  require(step > 0.0 && count >= 0, "ft_surface_grid: invalid grid");
  plain.resize(count);
  weighted.resize(count);
  const Vector& x = surface.breakpoints();
  const Vector& jump = surface.value_jumps();
  const Vector& slope = surface.slope_jumps();
  const Eigen::Index m = x.size();
  // Phases kept as separate real arrays so the recurrence stays plain arithmetic.
  Vector cos_phase(m), sin_phase(m), cos_step(m), sin_step(m);
  const Vector x_jump = x.cwiseProduct(jump), x_slope = x.cwiseProduct(slope);
  for (Eigen::Index k = 0; k < m; ++k) {
    cos_step(k) = std::cos(step * x(k));
    sin_step(k) = std::sin(step * x(k));
  }
  Eigen::Index anchored = -1;
  for (Eigen::Index i = 0; i < count; ++i) {
    const double u = static_cast<double>(i) * step;
    if (std::abs(u) < kSegmentFormulaLimit) {
      const SurfaceTransforms t = segment_transforms(surface, u);
      plain(i) = t.plain;
      weighted(i) = t.weighted;
      continue;
    }
    if (anchored < 0 || i - anchored >= kReanchorInterval) {
      for (Eigen::Index k = 0; k < m; ++k) {
        cos_phase(k) = std::cos(u * x(k));
        sin_phase(k) = std::sin(u * x(k));
      }
      anchored = i;
    } else {
      for (Eigen::Index k = 0; k < m; ++k) {
        const double c = cos_phase(k) * cos_step(k) - sin_phase(k) * sin_step(k);
        sin_phase(k) = sin_phase(k) * cos_step(k) + cos_phase(k) * sin_step(k);
        cos_phase(k) = c;
      }
    }
    JumpSums sums;
    sums.a0 = {cos_phase.dot(jump), sin_phase.dot(jump)};
    sums.a1 = {cos_phase.dot(slope), sin_phase.dot(slope)};
    sums.b0 = {cos_phase.dot(x_jump), sin_phase.dot(x_jump)};
    sums.b1 = {cos_phase.dot(x_slope), sin_phase.dot(x_slope)};
    const SurfaceTransforms t = from_jump_sums(sums, u);
    plain(i) = t.plain;
    weighted(i) = t.weighted;
  }
}

Complex ft_surface(const InterpolatedSurface& surface, double u) { return ft_surface_both(surface, u).plain; }

Complex ft_x_surface(const InterpolatedSurface& surface, double u) { return ft_surface_both(surface, u).weighted; }

}  // namespace levycal
