#pragma once

// Vertical perimeter, vertical oscillation and their scale integrals.
//
//   v_Omega(U)(s)      = int_U |chi(p) - chi(p . (0, 0, s^2))| dp
//   osc_Omega(B(p, r)) = (1/r) int_0^r v_Omega(B(p, r))(s) / r^4 ds
//
// All s-dependent quantities at one ball share a single set of sample points, so profiles
// over s are smooth in s and differences between scales are not swamped by sampling noise.

#include <cstddef>
#include <vector>

#include "heis/bumps.hpp"
#include "heis/domains.hpp"
#include "heis/quadrature.hpp"

namespace heis {

/// Geometric grid s_k = s_min 2^(k / per_octave), k = 0, 1, ... while s_k <= s_max.
class ScaleGrid {
 public:
  ScaleGrid(double s_min, double s_max, int per_octave);

  /// [2^-10 r0, 2^10 r0].
  static ScaleGrid dini_default(double r0, int per_octave = 4);

  double s_min() const noexcept { return s_min_; }
  double s_max() const noexcept { return s_max_; }
  int per_octave() const noexcept { return per_octave_; }
  /// Spacing in log s.
  double dlog() const noexcept;
  const std::vector<double>& points() const noexcept { return points_; }

 private:
  double s_min_;
  double s_max_;
  int per_octave_;
  std::vector<double> points_;
};

Estimate vertical_perimeter(const Domain& omega, const Ball& u, double s, const SampleConfig& cfg);

/// v_Omega(U)(s) for every s, estimated on one common set of points.
std::vector<Estimate> vertical_profile(const Domain& omega, const Ball& u, const std::vector<double>& s_values,
                                       const SampleConfig& cfg);

/// Midpoint nodes s_k = r (k + 1/2) / s_nodes used by osc.
std::vector<double> osc_nodes(double r, int s_nodes);

/// osc_Omega(B) with the s-average taken inside the sample mean (one estimate per point).
/// Throws std::invalid_argument for s_nodes < 8.
Estimate osc(const Domain& omega, const Ball& b, const SampleConfig& cfg, int s_nodes = 32);

struct LpPerimeter {
  Estimate value;                  // (sum_k (v_k / s_k)^p dlog)^(1/p) over the grid
  double tail_bound = 0.0;         // bound for the s > s_max part of the p-th power: vol^p / (p s_max^p)
  std::vector<double> scales;
  std::vector<Estimate> profile;   // v_Omega(U)(s_k)
};

/// L^p vertical perimeter on a geometric grid. Throws std::invalid_argument for p_exp < 1.
LpPerimeter lp_vertical_perimeter(const Domain& omega, const Ball& u, double p_exp, const ScaleGrid& grid,
                                  const SampleConfig& cfg);

struct OscSample {
  double r;
  Estimate osc;
};

struct DiniResult {
  Estimate value;                  // sum_k osc(B(p0, r_k)) dlog
  std::vector<OscSample> profile;
};

/// Truncated Dini integral of osc at p0 over the grid radii. Each radius uses its own substream.
DiniResult dini_integral(const Domain& omega, const Point& p0, const ScaleGrid& grid, const SampleConfig& cfg,
                         int s_nodes = 32);

struct DtLemma {
  Estimate lhs;          // |r^-4 int_Omega d_t psi|
  Estimate osc_10r;      // osc_Omega(B(p, 10 r))
  double dt_sup = 0.0;   // sup |d_t psi|
  double bound = 0.0;    // dt_sup * osc_10r
};

/// Both sides of the d_t-integration estimate for a psi-type bump. Throws std::invalid_argument
/// if the bump is not a psi_ball bump or if a probe outside its ball finds a nonzero value.
DtLemma dt_lemma_check(const Domain& omega, const BumpSpec& psi, const SampleConfig& cfg, int s_nodes = 32);

}  // namespace heis
