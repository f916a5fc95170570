#pragma once

// Smooth radial bumps in the Koranyi variable.
//
// With the quintic smoothstep S(u) = 6u^5 - 15u^4 + 10u^3 and rho the Koranyi norm,
//   psi(q) = 1 - S((rho - 2^(-3/4)) / (1 - 2^(-3/4)))   equals 1 on B(0, 1/2), 0 off B(0, 1),
//   phi(q) = S((rho - 2^(1/4)) / (2 - 2^(1/4)))          equals 0 on B(0, 1), 1 off B(0, 2).
// The Koranyi radii follow from the cylinder shape of the box-norm balls: on B(0, r) the
// Koranyi norm is at most 2^(1/4) r, and it is at least r off B(0, r).

#include "heis/group.hpp"

namespace heis {

enum class BumpKind { psi_ball, phi_eps_exterior };

struct BumpSpec {
  Point center;
  double radius = 1.0;  // r for psi_{B(center, r)}, eps for phi_eps
  BumpKind kind = BumpKind::psi_ball;
};

double smoothstep(double u) noexcept;
double smoothstep_derivative(double u) noexcept;

/// Value at p of the rescaled bump: profile(delta_{1/r}(center^-1 . p)).
double bump(const BumpSpec& spec, const Point& p);
/// Closed-form t-derivative of bump(spec, .) at p.
double bump_dt(const BumpSpec& spec, const Point& p);
/// sup |bump_dt| over the group, from a fine scan of the unit-scale profile times r^-2.
double bump_dt_sup(const BumpSpec& spec);

/// Inner and outer Koranyi radii of the transition region at unit scale.
double bump_inner_radius(BumpKind kind) noexcept;
double bump_outer_radius(BumpKind kind) noexcept;

}  // namespace heis
