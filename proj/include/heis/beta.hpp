#pragma once

// Vertical beta-numbers of weighted point sets, fitted over all vertical planes.
//
// For a plane with normal angle theta the horizontal offsets d_i = <z_i, n_theta> of the points
// determine the fit completely: dist(q_i, plane) = |d_i - offset|. For fixed theta the best
// offset is found exactly (midrange for L^inf, weighted median for L^1, weighted mean for L^2,
// golden section on the convex objective otherwise); theta is scanned on a grid and refined.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "heis/domains.hpp"
#include "heis/oscillation.hpp"

namespace heis {

struct WeightedPoint {
  Point q;
  double weight = 1.0;
};

/// How the L^p objective is normalized.
///  per_r3:      (1/r^3) sum w (dist/r)^p, the unnormalized 3-regular definition;
///  probability: (1/W) sum w (dist/r)^p with W the weight inside the ball, which makes the
///               numbers monotone in p (Jensen) and bounded by beta_inf.
enum class BetaNorm { per_r3, probability };

struct BetaOptions {
  int theta_grid = 180;
  int refine_iterations = 60;
  BetaNorm norm = BetaNorm::per_r3;
};

struct BetaResult {
  double value = 0.0;
  VerticalPlane plane;
  double p_exp = 1.0;              // infinity for beta_inf
  std::size_t points = 0;          // sample points inside the ball
  double weight = 0.0;             // their total weight
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Points of the sample that lie in the ball (weights kept).
std::vector<WeightedPoint> restrict_to_ball(const WeightedSample& sample, const Ball& b);
std::vector<WeightedPoint> restrict_to_ball(std::span<const WeightedPoint> points, const Ball& b);

/// inf over planes of max dist / r. Throws std::invalid_argument if no point is in the ball.
BetaResult beta_inf(std::span<const WeightedPoint> points, const Ball& b, const BetaOptions& opt = {});
BetaResult beta_inf(const WeightedSample& sample, const Ball& b, const BetaOptions& opt = {});

/// inf over planes of the normalized L^p average of dist / r. Throws std::invalid_argument for
/// p_exp < 1 or zero total weight inside the ball.
BetaResult beta_p(std::span<const WeightedPoint> points, const Ball& b, double p_exp, const BetaOptions& opt = {});
BetaResult beta_p(const WeightedSample& sample, const Ball& b, double p_exp, const BetaOptions& opt = {});

/// Optimal offset and objective sum w |d - c|^p for fixed offsets d (sorted or not).
struct OffsetFit {
  double offset;
  double cost;  // sum w |d - c|^p, or max |d - c| when p is infinite
};
OffsetFit fit_offset(std::span<const double> d, std::span<const double> w, double p_exp);

/// beta_1(B(p, r)) of a graph computed from a fresh surface sample of the chart around the
/// center; p must lie on the graph.
BetaResult graph_beta(const IntrinsicGraph& g, const Ball& b, double p_exp, std::size_t n, std::uint64_t seed,
                      const BetaOptions& opt = {});

struct OscBetaComparison {
  Estimate osc;            // osc_Omega(B(p, r))
  Estimate max_v;          // max over the osc s-nodes of v(B(p, r))(s) / r^4
  BetaResult beta1;        // beta_1(B(p, enlargement r))
  double ratio = 0.0;      // osc / beta1, 0 when both vanish
};

/// Both sides of the oscillation-versus-beta comparison at a ball centred on the graph.
OscBetaComparison osc_beta_compare(const IntrinsicGraph& g, const Ball& b, const SampleConfig& cfg,
                                   double enlargement = 24.0, int s_nodes = 32, const BetaOptions& opt = {});

struct PerimeterBetaConfig {
  double enlargement = 24.0;   // C
  std::size_t outer_samples = 48;
  std::size_t local_samples = 1500;
  BetaOptions beta;
};

struct PerimeterBeta {
  Estimate lhs;                // L^p vertical perimeter of the super-graph in B(p0, R)
  double r3_term = 0.0;        // R^3
  Estimate beta_term;          // int_{B(p0, C R) cap Gamma} (int beta_1(B(q, C r))^p dr/r)^(1/p) dmu(q)
  double rhs = 0.0;            // r3_term + beta_term
  double ratio = 0.0;          // lhs / rhs
  double log_measure = 0.0;    // total dr/r mass of the inner grid
};

/// Both sides of the vertical-perimeter-versus-beta inequality. The inner r-integral runs over
/// the grid points not exceeding R; the lhs uses `s_grid` for the vertical perimeter.
PerimeterBeta perimeter_beta_bound(const IntrinsicGraph& g, const Ball& b, double p_exp, const ScaleGrid& r_grid,
                                   const ScaleGrid& s_grid, const SampleConfig& cfg,
                                   const PerimeterBetaConfig& pcfg = {});

enum class CarlesonCoefficient { beta1, osc };

struct CarlesonConfig {
  std::size_t outer_samples = 48;
  std::size_t local_samples = 1500;   // surface points per beta evaluation / ball points per osc
  int s_nodes = 16;
  BetaOptions beta;
};

/// (1/R^3) int_{B(p0, R) cap Gamma} int_0^R coeff(B(q, r))^p dr/r dmu(q), with the r-integral
/// on the grid points not exceeding R.
Estimate carleson_scan(const IntrinsicGraph& g, const Point& p0, double radius, double p_exp, const ScaleGrid& r_grid,
                       std::uint64_t seed, CarlesonCoefficient coeff = CarlesonCoefficient::beta1,
                       const CarlesonConfig& ccfg = {});

}  // namespace heis
