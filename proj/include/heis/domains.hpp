#pragma once

// Measurable sets of the Heisenberg group given by indicator oracles, and intrinsic graphs
// over the vertical plane W = {x = 0}.
//
// An intrinsic graph is parametrized by phi : W -> R through the graph map
//   Phi(y, t) = (0, y, t) . (phi(y, t), 0, 0) = (phi, y, t - phi y / 2),
// and its super-graph is {p : x > phi(proj_w(p))}. The surface measure on the graph is
// represented through the area formula: the pushforward of sqrt(1 + (grad phi)^2) dy dt,
// which agrees with the spherical measure up to one global constant.

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "heis/group.hpp"
#include "heis/quadrature.hpp"

namespace heis {

class Domain {
 public:
  using Indicator = std::function<bool(const Point&)>;

  Domain(Indicator indicator, std::string label)
      : indicator_(std::move(indicator)), label_(std::move(label)) {}

  bool contains(const Point& p) const { return indicator_(p); }
  bool operator()(const Point& p) const { return indicator_(p); }
  const std::string& label() const noexcept { return label_; }

 private:
  Indicator indicator_;
  std::string label_;
};

Domain complement(const Domain& omega);
/// q . Omega.
Domain left_translate(const Domain& omega, const Point& q);
/// delta_lambda(Omega).
Domain dilate(const Domain& omega, double lambda);

/// Vertical half-space {<(x, y), n_theta> > offset}; zero vertical oscillation everywhere.
Domain flat(double theta, double offset);
/// Coordinate half-space {coordinate > threshold} (or < when `greater` is false).
Domain coordinate_half_space(char axis, bool greater, double threshold);

/// Vertical Holder metadata: |phi(y,t) - phi(y,s)| <= constant |t-s|^((1 +- tau)/2).
struct HolderBound {
  double constant = 1.0;
  double tau = 1.0;
};

class IntrinsicGraph {
 public:
  using Function = std::function<double(double y, double t)>;

  IntrinsicGraph(Function phi, std::string label, double lip_bound = 0.0,
                 std::optional<HolderBound> holder = std::nullopt);

  double phi(const PlaneCoord& w) const { return phi_(w.y, w.t); }
  double phi(double y, double t) const { return phi_(y, t); }
  const Function& function() const noexcept { return phi_; }
  const std::string& label() const noexcept { return label_; }
  double lip_bound() const noexcept { return lip_bound_; }
  const std::optional<HolderBound>& holder() const noexcept { return holder_; }

  /// {x > phi(proj_w(p))}.
  Domain supergraph() const;
  /// {x < phi(proj_w(p))}.
  Domain subgraph() const;
  /// Horizontal offset x - phi(proj_w(p)); zero exactly on the graph.
  double offset(const Point& p) const { return p.x - phi(proj_w(p)); }

 private:
  Function phi_;
  std::string label_;
  double lip_bound_;
  std::optional<HolderBound> holder_;
};

Point graph_map(const IntrinsicGraph& g, const PlaneCoord& w);

/// Graph of the translated surface q . Gamma, again an intrinsic graph over W.
IntrinsicGraph left_translate(const IntrinsicGraph& g, const Point& q);
/// Graph of delta_lambda(Gamma): phi_lambda(y, t) = lambda phi(y / lambda, t / lambda^2).
IntrinsicGraph dilate(const IntrinsicGraph& g, double lambda);

// Built-in families.
IntrinsicGraph flat_graph(double offset = 0.0);
/// phi(y, t) = phi0(y) with phi0 Euclidean Lipschitz with constant lip.
IntrinsicGraph euclidean_lift(std::function<double(double)> phi0, double lip, std::string label);
/// phi0(y) = amplitude |y|.
IntrinsicGraph lift_abs(double amplitude = 0.5);
/// phi0(y) = amplitude sin(y).
IntrinsicGraph lift_sin(double amplitude = 0.5);
/// phi(y, t) = amplitude * s(t), s odd with s(t) = t^((1+tau)/2) on [0, 1] and t^((1-tau)/2) beyond.
IntrinsicGraph vertical_holder(double amplitude, double tau);
/// Odd profile used by vertical_holder.
double holder_profile(double t, double tau);

/// Burgers-type intrinsic gradient d_y phi + phi d_t phi by central differences with step h.
/// Falls back to Richardson extrapolation when |phi| is large. Throws std::domain_error when
/// phi is not finite near w.
double intrinsic_gradient(const IntrinsicGraph& g, const PlaneCoord& w, double h = 1e-5);

/// nu = (1 - i grad) / sqrt(1 + grad^2); nu_H = (Re nu, Im nu) is the inward horizontal normal
/// of the super-graph.
std::complex<double> normal_nu(double gradient);
std::complex<double> normal_nu(const IntrinsicGraph& g, const PlaneCoord& w);

/// Parallelogram in W: (a, b) in [-half_a, half_a] x [-half_b, half_b] maps to
/// (origin.y + a, origin.t + b + shear a). Unit Jacobian.
struct Chart {
  PlaneCoord origin;
  double half_a = 1.0;
  double half_b = 1.0;
  double shear = 0.0;

  static Chart rectangle(double y0, double y1, double t0, double t1);

  PlaneCoord at(double a, double b) const noexcept { return {origin.y + a, origin.t + b + shear * a}; }
  double area() const noexcept { return 4.0 * half_a * half_b; }
  bool contains(const PlaneCoord& w, double slack = 0.0) const noexcept;
  /// True when every point of `other` lies in this chart.
  bool covers(const Chart& other) const noexcept;
};

/// Chart around w whose graph image contains Gamma cap B(Phi(w), radius).
///
/// With a = y - y_w and b = t - t_w - phi(w) a, the W-projection of Phi(w)^-1 . Phi(w') is
/// exactly (a, b), and ||Phi(w)^-1 Phi(w')|| <= R forces |a| <= R and |b| <= 3 R^2 / 4.
Chart ball_chart(const IntrinsicGraph& g, const PlaneCoord& w, double radius);

struct SurfacePoint {
  PlaneCoord w;
  Point q;            // graph_map(w)
  double gradient;    // intrinsic gradient at w
  double weight;      // sqrt(1 + gradient^2) * area / n
};

struct WeightedSample {
  std::vector<SurfacePoint> points;
  Chart region;
  std::uint64_t seed = 0;
  /// Points come in antithetic pairs (a, b), (-a, b) stored consecutively.
  bool antithetic = false;

  double total_weight() const noexcept;
  /// Number of independent draws (pairs count once).
  std::size_t draws() const noexcept { return antithetic ? points.size() / 2 : points.size(); }
};

/// Uniform points of the chart pushed to the graph with area-formula weights.
WeightedSample surface_sample(const IntrinsicGraph& g, const Chart& region, std::size_t n, std::uint64_t seed,
                              bool antithetic = false);

/// Monte-Carlo estimate of sum over the sample of f(point) * weight, with the standard error
/// of the underlying mean (antithetic pairs are averaged first).
Estimate sample_sum(const WeightedSample& sample, const std::function<double(const SurfacePoint&)>& f);

struct DensityRatio {
  double radius;
  Estimate ratio;  // mu(B(p, r)) / r^3
};

/// mu(B(p, r)) / r^3 at p = graph_map(w) for each radius, from the given sample.
/// Throws std::invalid_argument if the sample region does not cover the largest ball.
std::vector<DensityRatio> regularity_check(const IntrinsicGraph& g, const WeightedSample& sample,
                                           const PlaneCoord& w, const std::vector<double>& radii);

/// Largest observed cone ratio |phi(w) - phi(w')| / ||proj_w(Phi(w')^-1 Phi(w))|| over random pairs.
double intrinsic_lipschitz_ratio(const IntrinsicGraph& g, const Chart& region, std::size_t pairs,
                                 std::uint64_t seed);

/// Result of parsing a domain spec string. `graph` is set when the domain is the super-graph
/// of an intrinsic graph over W.
struct ParsedDomain {
  Domain domain;
  std::optional<IntrinsicGraph> graph;
};

/// Parses the domain mini-language:
///   flat:theta=0,offset=0   (the Greek letter is accepted for theta)
///   lift:phi0=abs|sin|linear|zero[,a=0.5]
///   holder:H=1,tau=0.5
///   slab:t>0                 (any of x, y, t with > or <)
/// Throws std::invalid_argument with a message naming the offending part.
ParsedDomain parse_domain_spec(const std::string& spec);

}  // namespace heis
