#include "heis/group.hpp"

#include <cmath>
#include <numbers>

namespace heis {

Point dilate(double lambda, const Point& p) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("dilate: lambda must be positive and finite");
  }
  return {lambda * p.x, lambda * p.y, lambda * lambda * p.t};
}

Point rotate(double theta, const Point& p) noexcept {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {p.x * c + p.y * s, -p.x * s + p.y * c, p.t};
}

VerticalPlane::VerticalPlane(double theta, double offset) {
  if (!std::isfinite(theta) || !std::isfinite(offset)) {
    throw std::invalid_argument("VerticalPlane: non-finite parameters");
  }
  constexpr double pi = std::numbers::pi;
  double th = std::fmod(theta, pi);
  if (th < 0.0) th += pi;
  // fmod(theta, pi) flips the normal once per odd multiple of pi.
  const double turns = std::floor(theta / pi);
  bool flipped = std::fmod(std::abs(turns), 2.0) == 1.0;
  if (th >= pi) {
    th = 0.0;
    flipped = !flipped;
  }
  theta_ = th;
  offset_ = flipped ? -offset : offset;
}

VerticalPlane VerticalPlane::through(double theta, const Point& z) {
  return VerticalPlane(theta, z.x * std::cos(theta) + z.y * std::sin(theta));
}

Point nearest_on_plane(const Point& p, const VerticalPlane& plane) noexcept {
  const double delta = plane.signed_distance(p);
  return mul(p, Point{-delta * plane.normal_x(), -delta * plane.normal_y(), 0.0});
}

}  // namespace heis
