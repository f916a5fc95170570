#pragma once

// Algebraic and metric primitives of the first Heisenberg group.
//
// Coordinates are (x, y, t) with the product
//   (x, y, t) . (x', y', t') = (x + x', y + y', t + t' + (x y' - x' y) / 2).
// The metric is d(p, q) = ||q^-1 . p|| with the box norm
//   ||(x, y, t)|| = max(|(x, y)|, 2 sqrt|t|),
// so B(0, r) is exactly the cylinder {|(x, y)| <= r, |t| <= r^2 / 4}.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace heis {

struct Point {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;

  friend constexpr bool operator==(const Point&, const Point&) = default;
};

/// Coordinates (y, t) of a point of the vertical subgroup W = {x = 0}.
struct PlaneCoord {
  double y = 0.0;
  double t = 0.0;

  friend constexpr bool operator==(const PlaneCoord&, const PlaneCoord&) = default;
};

constexpr Point mul(const Point& p, const Point& q) noexcept {
  return {p.x + q.x, p.y + q.y, p.t + q.t + 0.5 * (p.x * q.y - q.x * p.y)};
}

constexpr Point inv(const Point& p) noexcept { return {-p.x, -p.y, -p.t}; }

inline Point operator*(const Point& p, const Point& q) noexcept { return mul(p, q); }

/// Heisenberg dilation (lambda x, lambda y, lambda^2 t). Throws for lambda <= 0.
Point dilate(double lambda, const Point& p);

/// Box norm max(|(x, y)|, 2 sqrt|t|).
inline double norm_d(const Point& p) noexcept {
  return std::max(std::hypot(p.x, p.y), 2.0 * std::sqrt(std::abs(p.t)));
}

inline double dist(const Point& p, const Point& q) noexcept { return norm_d(mul(inv(q), p)); }

/// ((x^2 + y^2)^2 + 16 t^2)^(1/4).
inline double norm_koranyi(const Point& p) noexcept {
  const double r2 = p.x * p.x + p.y * p.y;
  return std::sqrt(std::sqrt(r2 * r2 + 16.0 * p.t * p.t));
}

/// R_theta(x, y, t) = (x cos + y sin, -x sin + y cos, t); an isometric automorphism.
Point rotate(double theta, const Point& p) noexcept;

/// Vertical projection onto W = {x = 0}: (y, t + x y / 2).
constexpr PlaneCoord proj_w(const Point& p) noexcept { return {p.y, p.t + 0.5 * p.x * p.y}; }

/// Horizontal projection onto V = x-axis, identified with R.
constexpr double proj_v(const Point& p) noexcept { return p.x; }

constexpr Point embed_w(const PlaneCoord& w) noexcept { return {0.0, w.y, w.t}; }

/// Left coset z . W_theta of the vertical subgroup W_theta = {x cos(theta) + y sin(theta) = 0}.
///
/// The coset is the set {(x, y, t) : x cos(theta) + y sin(theta) = offset}. theta is kept in
/// [0, pi); normalizing flips the sign of offset together with the normal.
class VerticalPlane {
 public:
  VerticalPlane() = default;
  VerticalPlane(double theta, double offset);

  double theta() const noexcept { return theta_; }
  double offset() const noexcept { return offset_; }
  double normal_x() const noexcept { return std::cos(theta_); }
  double normal_y() const noexcept { return std::sin(theta_); }

  /// Signed horizontal offset of p from the plane.
  double signed_distance(const Point& p) const noexcept {
    return p.x * std::cos(theta_) + p.y * std::sin(theta_) - offset_;
  }

  /// The plane through z parallel to W_theta.
  static VerticalPlane through(double theta, const Point& z);

 private:
  double theta_ = 0.0;
  double offset_ = 0.0;
};

/// dist(p, plane) = inf over coset points q of d(p, q) = |<(x, y), n_theta> - offset|.
inline double dist_to_plane(const Point& p, const VerticalPlane& plane) noexcept {
  return std::abs(plane.signed_distance(p));
}

/// Closest point of the plane to p: p . (-delta n_theta, 0).
Point nearest_on_plane(const Point& p, const VerticalPlane& plane) noexcept;

struct Ball {
  Point center;
  double radius = 1.0;

  Ball() = default;
  Ball(const Point& c, double r) : center(c), radius(r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("Ball: radius must be positive");
  }

  bool contains(const Point& p) const noexcept { return dist(p, center) <= radius; }

  /// Lebesgue volume (pi / 2) r^4, independent of the center.
  double volume() const noexcept {
    const double r2 = radius * radius;
    return 0.5 * std::numbers::pi * r2 * r2;
  }
};

/// Membership in B(0, r) written as the explicit cylinder.
inline bool in_origin_cylinder(const Point& p, double r) noexcept {
  return std::hypot(p.x, p.y) <= r && std::abs(p.t) <= 0.25 * r * r;
}

}  // namespace heis
