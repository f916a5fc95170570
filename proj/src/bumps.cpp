#include "heis/bumps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace heis {

namespace {

const double kPsiInner = std::pow(2.0, -0.75);
const double kPhiInner = std::pow(2.0, 0.25);

void check(const BumpSpec& spec) {
  if (!(spec.radius > 0.0) || !std::isfinite(spec.radius)) throw std::invalid_argument("bump: radius must be positive");
}

// Unit-scale point delta_{1/r}(center^-1 . p).
Point unit_argument(const BumpSpec& spec, const Point& p) {
  const Point q = mul(inv(spec.center), p);
  const double s = 1.0 / spec.radius;
  return {s * q.x, s * q.y, s * s * q.t};
}

double profile(BumpKind kind, double rho) {
  const double a = bump_inner_radius(kind), b = bump_outer_radius(kind);
  const double s = smoothstep((rho - a) / (b - a));
  return kind == BumpKind::psi_ball ? 1.0 - s : s;
}

// d/dt of the unit profile at q: +-S'(u) / (b - a) * d rho / dt with d rho / dt = 8 t / rho^3.
double profile_dt(BumpKind kind, const Point& q) {
  const double rho = norm_koranyi(q);
  const double a = bump_inner_radius(kind), b = bump_outer_radius(kind);
  if (rho <= a || rho >= b) return 0.0;
  const double ds = smoothstep_derivative((rho - a) / (b - a)) / (b - a);
  const double v = ds * 8.0 * q.t / (rho * rho * rho);
  return kind == BumpKind::psi_ball ? -v : v;
}

double unit_dt_sup(BumpKind kind) {
  // Profile derivative in polar form: rho in the transition shell, angle between |z|^2 and 4t.
  double best = 0.0;
  const double a = bump_inner_radius(kind), b = bump_outer_radius(kind);
  const int n = 2000;
  for (int i = 0; i <= n; ++i) {
    const double rho = a + (b - a) * i / n;
    for (int j = 0; j <= n; ++j) {
      const double phase = 0.5 * std::numbers::pi * j / n;  // rho^2 cos = |z|^2, rho^2 sin = 4 t
      const double z2 = rho * rho * std::cos(phase);
      const double t = 0.25 * rho * rho * std::sin(phase);
      best = std::max(best, std::abs(profile_dt(kind, {std::sqrt(std::max(z2, 0.0)), 0.0, t})));
    }
  }
  return best;
}

}  // namespace

double smoothstep(double u) noexcept {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double smoothstep_derivative(double u) noexcept {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double w = u * (1.0 - u);
  return 30.0 * w * w;
}

double bump_inner_radius(BumpKind kind) noexcept { return kind == BumpKind::psi_ball ? kPsiInner : kPhiInner; }
double bump_outer_radius(BumpKind kind) noexcept { return kind == BumpKind::psi_ball ? 1.0 : 2.0; }

double bump(const BumpSpec& spec, const Point& p) {
  check(spec);
  return profile(spec.kind, norm_koranyi(unit_argument(spec, p)));
}

double bump_dt(const BumpSpec& spec, const Point& p) {
  check(spec);
  return profile_dt(spec.kind, unit_argument(spec, p)) / (spec.radius * spec.radius);
}

double bump_dt_sup(const BumpSpec& spec) {
  check(spec);
  static const double psi_sup = unit_dt_sup(BumpKind::psi_ball);
  static const double phi_sup = unit_dt_sup(BumpKind::phi_eps_exterior);
  const double unit = spec.kind == BumpKind::psi_ball ? psi_sup : phi_sup;
  return unit / (spec.radius * spec.radius);
}

}  // namespace heis
