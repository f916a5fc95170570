#include "heis/oscillation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace heis {

ScaleGrid::ScaleGrid(double s_min, double s_max, int per_octave)
    : s_min_(s_min), s_max_(s_max), per_octave_(per_octave) {
  if (!(s_min > 0.0) || !(s_min < s_max) || !std::isfinite(s_max)) {
    throw std::invalid_argument("ScaleGrid: requires 0 < s_min < s_max");
  }
  if (per_octave < 1) throw std::invalid_argument("ScaleGrid: per_octave must be at least 1");
  const double limit = s_max * (1.0 + 1e-12);
  for (int k = 0;; ++k) {
    const double s = s_min * std::exp2(static_cast<double>(k) / per_octave);
    if (s > limit) break;
    points_.push_back(s);
  }
}

ScaleGrid ScaleGrid::dini_default(double r0, int per_octave) {
  return ScaleGrid(std::exp2(-10.0) * r0, std::exp2(10.0) * r0, per_octave);
}

double ScaleGrid::dlog() const noexcept { return std::numbers::ln2 / per_octave_; }

std::vector<Estimate> vertical_profile(const Domain& omega, const Ball& u, const std::vector<double>& s_values,
                                       const SampleConfig& cfg) {
  for (double s : s_values) {
    if (!(s > 0.0)) throw std::invalid_argument("vertical_profile: scales must be positive");
  }
  const BallSampler sampler(u, cfg);
  const std::size_t k = s_values.size();
  std::vector<double> shifts(k);
  for (std::size_t i = 0; i < k; ++i) shifts[i] = s_values[i] * s_values[i];
  const auto m = accumulate(sampler.count(), cfg.seed, k, [&](std::size_t i, Rng& rng, std::span<double> out) {
    const Point p = sampler.point(i, rng);
    const bool inside = omega.contains(p);
    for (std::size_t j = 0; j < k; ++j) {
      out[j] = inside != omega.contains(Point{p.x, p.y, p.t + shifts[j]}) ? 1.0 : 0.0;
    }
  });
  std::vector<Estimate> out;
  out.reserve(k);
  for (const auto& mj : m) {
    Estimate e = to_estimate(mj, u.volume());
    if (cfg.method == Method::stratified_grid) e.std_error = 0.0;
    out.push_back(e);
  }
  return out;
}

Estimate vertical_perimeter(const Domain& omega, const Ball& u, double s, const SampleConfig& cfg) {
  return vertical_profile(omega, u, {s}, cfg).front();
}

std::vector<double> osc_nodes(double r, int s_nodes) {
  std::vector<double> s(static_cast<std::size_t>(s_nodes));
  for (int k = 0; k < s_nodes; ++k) s[static_cast<std::size_t>(k)] = r * (k + 0.5) / s_nodes;
  return s;
}

Estimate osc(const Domain& omega, const Ball& b, const SampleConfig& cfg, int s_nodes) {
  if (s_nodes < 8) throw std::invalid_argument("osc: at least 8 s-nodes required");
  const BallSampler sampler(b, cfg);
  std::vector<double> shifts = osc_nodes(b.radius, s_nodes);
  for (double& s : shifts) s *= s;
  const double per_node = 1.0 / s_nodes;
  const auto m = accumulate(sampler.count(), cfg.seed, 1, [&](std::size_t i, Rng& rng, std::span<double> out) {
    const Point p = sampler.point(i, rng);
    const bool inside = omega.contains(p);
    int changed = 0;
    for (double h : shifts) changed += inside != omega.contains(Point{p.x, p.y, p.t + h}) ? 1 : 0;
    out[0] = changed * per_node;
  });
  const double r2 = b.radius * b.radius;
  Estimate e = to_estimate(m[0], b.volume() / (r2 * r2));
  if (cfg.method == Method::stratified_grid) e.std_error = 0.0;
  return e;
}

LpPerimeter lp_vertical_perimeter(const Domain& omega, const Ball& u, double p_exp, const ScaleGrid& grid,
                                  const SampleConfig& cfg) {
  if (!(p_exp >= 1.0) || !std::isfinite(p_exp)) throw std::invalid_argument("lp_vertical_perimeter: p_exp must be >= 1");
  LpPerimeter out;
  out.scales = grid.points();
  out.profile = vertical_profile(omega, u, out.scales, cfg);
  const double dlog = grid.dlog();
  double sum = 0.0;
  std::vector<double> gradient(out.scales.size());
  for (std::size_t k = 0; k < out.scales.size(); ++k) {
    const double s = out.scales[k];
    const double v = out.profile[k].value;
    sum += dlog * std::pow(v / s, p_exp);
    gradient[k] = p_exp == 1.0 ? dlog / s : dlog * p_exp * std::pow(v, p_exp - 1.0) / std::pow(s, p_exp);
  }
  out.tail_bound = std::pow(u.volume(), p_exp) / (p_exp * std::pow(grid.s_max(), p_exp));

  // Delta method: the sum is linearized around the profile, and the linear form is one
  // integral over the same points, so its standard error accounts for correlated scales.
  double se_sum = 0.0;
  if (cfg.method == Method::monte_carlo && sum > 0.0) {
    const BallSampler sampler(u, cfg);
    const auto m = accumulate(sampler.count(), cfg.seed, 1, [&](std::size_t i, Rng& rng, std::span<double> o) {
      const Point p = sampler.point(i, rng);
      const bool inside = omega.contains(p);
      double acc = 0.0;
      for (std::size_t k = 0; k < out.scales.size(); ++k) {
        const double h = out.scales[k] * out.scales[k];
        if (inside != omega.contains(Point{p.x, p.y, p.t + h})) acc += gradient[k];
      }
      o[0] = acc;
    });
    se_sum = to_estimate(m[0], u.volume()).std_error;
  }
  const double value = std::pow(sum, 1.0 / p_exp);
  const double se = sum > 0.0 ? se_sum * std::pow(sum, 1.0 / p_exp - 1.0) / p_exp : 0.0;
  out.value = {value, se, out.profile.empty() ? 0 : out.profile.front().n};
  return out;
}

DiniResult dini_integral(const Domain& omega, const Point& p0, const ScaleGrid& grid, const SampleConfig& cfg,
                         int s_nodes) {
  DiniResult out;
  const double dlog = grid.dlog();
  double sum = 0.0, var = 0.0;
  std::size_t k = 0;
  for (double r : grid.points()) {
    SampleConfig c = cfg;
    c.seed = substream_seed(cfg.seed, k++);
    const Estimate e = osc(omega, Ball(p0, r), c, s_nodes);
    out.profile.push_back({r, e});
    sum += dlog * e.value;
    var += dlog * dlog * e.std_error * e.std_error;
  }
  out.value = {sum, std::sqrt(var), cfg.n};
  return out;
}

DtLemma dt_lemma_check(const Domain& omega, const BumpSpec& psi, const SampleConfig& cfg, int s_nodes) {
  if (psi.kind != BumpKind::psi_ball) throw std::invalid_argument("dt_lemma_check: bump must be a psi_ball bump");
  const Ball b(psi.center, psi.radius);

  // Support probe on the shell between r and 1.5 r.
  const auto probes = sample_ball(Ball(psi.center, 1.5 * psi.radius), {4096, cfg.seed ^ 0x5bd1e995ULL});
  for (const Point& q : probes) {
    if (!b.contains(q) && (bump(psi, q) != 0.0 || bump_dt(psi, q) != 0.0)) {
      throw std::invalid_argument("dt_lemma_check: bump does not vanish outside its ball");
    }
  }

  DtLemma out;
  const double r2 = psi.radius * psi.radius;
  Estimate integral = integrate_ball([&](const Point& p) { return omega.contains(p) ? bump_dt(psi, p) : 0.0; }, b, cfg);
  out.lhs = {std::abs(integral.value) / (r2 * r2), integral.std_error / (r2 * r2), integral.n};
  out.osc_10r = osc(omega, Ball(psi.center, 10.0 * psi.radius), cfg, s_nodes);
  out.dt_sup = bump_dt_sup(psi);
  out.bound = out.dt_sup * out.osc_10r.value;
  return out;
}

}  // namespace heis
