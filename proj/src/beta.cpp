#include "heis/beta.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace heis {

namespace {

constexpr double kPi = std::numbers::pi;
const double kGolden = 0.5 * (std::sqrt(5.0) - 1.0);

// Minimizes a unimodal function on [a, b] by golden-section search.
template <class F>
std::pair<double, double> golden_min(F&& f, double a, double b, int iterations) {
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iterations; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

double lp_cost(std::span<const double> d, std::span<const double> w, double c, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double e = std::abs(d[i] - c);
    s += w[i] * (p == 1.0 ? e : (p == 2.0 ? e * e : std::pow(e, p)));
  }
  return s;
}

struct Fit {
  double theta;
  double offset;
  double value;
};

class PlaneFitter {
 public:
  PlaneFitter(std::span<const WeightedPoint> pts, const Ball& b, double p_exp, const BetaOptions& opt)
      : pts_(pts), p_(p_exp), opt_(opt), r_(b.radius) {
    w_.reserve(pts.size());
    for (const auto& q : pts) {
      w_.push_back(q.weight);
      total_ += q.weight;
    }
    norm_ = opt.norm == BetaNorm::per_r3 ? r_ * r_ * r_ : total_;
  }

  Fit at(double theta) const {
    std::vector<double> d(pts_.size());
    const double c = std::cos(theta), s = std::sin(theta);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = pts_[i].q.x * c + pts_[i].q.y * s;
    const OffsetFit f = fit_offset(d, w_, p_);
    const double value = std::isinf(p_) ? f.cost / r_ : std::pow(f.cost / norm_, 1.0 / p_) / r_;
    return {theta, f.offset, value};
  }

  Fit solve() const {
    const int n = opt_.theta_grid;
    std::vector<Fit> grid(static_cast<std::size_t>(n));
    parallel_for(grid.size(), [&](std::size_t k) { grid[k] = at(kPi * static_cast<double>(k) / n); });
    std::size_t best = 0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
      if (grid[k].value < grid[best].value) best = k;
    }
    Fit result = grid[best];
    const double step = kPi / n;
    const auto refined = golden_min([&](double th) { return at(th).value; }, result.theta - step,
                                    result.theta + step, opt_.refine_iterations);
    if (refined.second < result.value) result = at(refined.first);
    return result;
  }

  double total() const noexcept { return total_; }

 private:
  std::span<const WeightedPoint> pts_;
  std::vector<double> w_;
  double p_;
  BetaOptions opt_;
  double r_;
  double total_ = 0.0;
  double norm_ = 1.0;
};

BetaResult finish(const Fit& fit, double p_exp, std::size_t n, double weight) {
  BetaResult out;
  out.value = fit.value;
  out.plane = VerticalPlane(fit.theta, fit.offset);
  out.p_exp = p_exp;
  out.points = n;
  out.weight = weight;
  return out;
}

}  // namespace

OffsetFit fit_offset(std::span<const double> d, std::span<const double> w, double p_exp) {
  if (d.empty()) throw std::invalid_argument("fit_offset: no points");
  if (std::isinf(p_exp)) {
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    return {0.5 * (*lo + *hi), 0.5 * (*hi - *lo)};
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("fit_offset: zero total weight");
  if (p_exp == 2.0) {
    double m = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) m += w[i] * d[i];
    m /= total;
    return {m, lp_cost(d, w, m, 2.0)};
  }
  if (p_exp == 1.0) {
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    const double half = 0.5 * total;
    double cum = 0.0;
    double c = d[order.back()];
    for (std::size_t k = 0; k < order.size(); ++k) {
      cum += w[order[k]];
      if (cum >= half) {
        c = d[order[k]];
        // Exactly half the weight on each side: every offset in the gap is optimal.
        if (k + 1 < order.size() && std::abs(cum - half) <= 1e-12 * total) {
          c = std::clamp(0.0, d[order[k]], d[order[k + 1]]);
        }
        break;
      }
    }
    return {c, lp_cost(d, w, c, 1.0)};
  }
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  if (*lo == *hi) return {*lo, 0.0};
  const auto best = golden_min([&](double c) { return lp_cost(d, w, c, p_exp); }, *lo, *hi, 100);
  return {best.first, best.second};
}

std::vector<WeightedPoint> restrict_to_ball(std::span<const WeightedPoint> points, const Ball& b) {
  std::vector<WeightedPoint> out;
  for (const auto& p : points) {
    if (b.contains(p.q)) out.push_back(p);
  }
  return out;
}

std::vector<WeightedPoint> restrict_to_ball(const WeightedSample& sample, const Ball& b) {
  std::vector<WeightedPoint> out;
  for (const auto& sp : sample.points) {
    if (b.contains(sp.q)) out.push_back({sp.q, sp.weight});
  }
  return out;
}

BetaResult beta_inf(std::span<const WeightedPoint> points, const Ball& b, const BetaOptions& opt) {
  const auto inside = restrict_to_ball(points, b);
  if (inside.empty()) throw std::invalid_argument("beta_inf: no sample points in the ball");
  const PlaneFitter fitter(inside, b, kInfinity, opt);
  return finish(fitter.solve(), kInfinity, inside.size(), fitter.total());
}

BetaResult beta_inf(const WeightedSample& sample, const Ball& b, const BetaOptions& opt) {
  const auto inside = restrict_to_ball(sample, b);
  return beta_inf(std::span<const WeightedPoint>(inside), b, opt);
}

BetaResult beta_p(std::span<const WeightedPoint> points, const Ball& b, double p_exp, const BetaOptions& opt) {
  if (std::isinf(p_exp)) return beta_inf(points, b, opt);
  if (!(p_exp >= 1.0)) throw std::invalid_argument("beta_p: p_exp must be >= 1");
  const auto inside = restrict_to_ball(points, b);
  const PlaneFitter fitter(inside, b, p_exp, opt);
  if (!(fitter.total() > 0.0)) throw std::invalid_argument("beta_p: zero total weight in the ball");
  return finish(fitter.solve(), p_exp, inside.size(), fitter.total());
}

BetaResult beta_p(const WeightedSample& sample, const Ball& b, double p_exp, const BetaOptions& opt) {
  const auto inside = restrict_to_ball(sample, b);
  return beta_p(std::span<const WeightedPoint>(inside), b, p_exp, opt);
}

BetaResult graph_beta(const IntrinsicGraph& g, const Ball& b, double p_exp, std::size_t n, std::uint64_t seed,
                      const BetaOptions& opt) {
  if (std::abs(g.offset(b.center)) > 1e-9 * (1.0 + std::abs(b.center.x))) {
    throw std::invalid_argument("graph_beta: ball must be centred on the graph");
  }
  const auto sample = surface_sample(g, ball_chart(g, proj_w(b.center), b.radius), n, seed);
  return beta_p(sample, b, p_exp, opt);
}

OscBetaComparison osc_beta_compare(const IntrinsicGraph& g, const Ball& b, const SampleConfig& cfg,
                                   double enlargement, int s_nodes, const BetaOptions& opt) {
  OscBetaComparison out;
  const Domain omega = g.supergraph();
  out.osc = osc(omega, b, cfg, s_nodes);
  const auto profile = vertical_profile(omega, b, osc_nodes(b.radius, s_nodes), cfg);
  const double r4 = std::pow(b.radius, 4);
  for (const auto& e : profile) {
    if (e.value / r4 >= out.max_v.value) out.max_v = {e.value / r4, e.std_error / r4, e.n};
  }
  out.beta1 = graph_beta(g, Ball(b.center, enlargement * b.radius), 1.0, cfg.n, cfg.seed, opt);
  if (out.beta1.value > 1e-12) {
    out.ratio = out.osc.value / out.beta1.value;
  } else {
    out.ratio = out.osc.value == 0.0 ? 0.0 : kInfinity;
  }
  return out;
}

namespace {

// Integral over Gamma cap B(p0, outer_radius) of (sum_k coeff(q, r_k)^p dlog)^root.
template <class Coefficient>
Estimate outer_integral(const IntrinsicGraph& g, const Point& p0, double outer_radius, double p_exp, double root,
                        const std::vector<double>& radii, double dlog, std::size_t outer_samples, std::uint64_t seed,
                        Coefficient&& coeff) {
  const auto sample = surface_sample(g, ball_chart(g, proj_w(p0), outer_radius), outer_samples, seed);
  const Ball outer(p0, outer_radius);
  std::vector<double> inner(sample.points.size(), 0.0);
  parallel_for(sample.points.size(), [&](std::size_t i) {
    const Point& q = sample.points[i].q;
    if (!outer.contains(q)) return;
    double s = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
      const double c = coeff(q, radii[k], substream_seed(seed, (i << 16) + k + 1));
      s += dlog * std::pow(c, p_exp);
    }
    inner[i] = std::pow(s, root);
  });
  const SurfacePoint* base = sample.points.data();
  return sample_sum(sample, [&](const SurfacePoint& sp) { return inner[static_cast<std::size_t>(&sp - base)]; });
}

std::vector<double> radii_up_to(const ScaleGrid& grid, double radius) {
  std::vector<double> out;
  for (double r : grid.points()) {
    if (r <= radius * (1.0 + 1e-12)) out.push_back(r);
  }
  if (out.empty()) throw std::invalid_argument("scale grid has no radius below R");
  return out;
}

}  // namespace

PerimeterBeta perimeter_beta_bound(const IntrinsicGraph& g, const Ball& b, double p_exp, const ScaleGrid& r_grid,
                                   const ScaleGrid& s_grid, const SampleConfig& cfg, const PerimeterBetaConfig& pcfg) {
  if (!(p_exp >= 1.0) || std::isinf(p_exp)) throw std::invalid_argument("perimeter_beta_bound: p_exp must be in [1, inf)");
  PerimeterBeta out;
  out.lhs = lp_vertical_perimeter(g.supergraph(), b, p_exp, s_grid, cfg).value;
  const double big_r = b.radius;
  out.r3_term = big_r * big_r * big_r;
  const auto radii = radii_up_to(r_grid, big_r);
  out.log_measure = static_cast<double>(radii.size()) * r_grid.dlog();
  const double c = pcfg.enlargement;
  out.beta_term = outer_integral(g, b.center, c * big_r, p_exp, 1.0 / p_exp, radii, r_grid.dlog(), pcfg.outer_samples, cfg.seed,
                                 [&](const Point& q, double r, std::uint64_t seed) {
                                   return graph_beta(g, Ball(q, c * r), 1.0, pcfg.local_samples, seed, pcfg.beta).value;
                                 });
  out.rhs = out.r3_term + out.beta_term.value;
  out.ratio = out.lhs.value / out.rhs;
  return out;
}

Estimate carleson_scan(const IntrinsicGraph& g, const Point& p0, double radius, double p_exp, const ScaleGrid& r_grid,
                       std::uint64_t seed, CarlesonCoefficient coeff, const CarlesonConfig& ccfg) {
  if (!(p_exp >= 1.0) || std::isinf(p_exp)) throw std::invalid_argument("carleson_scan: p_exp must be in [1, inf)");
  const auto radii = radii_up_to(r_grid, radius);
  const Domain omega = g.supergraph();
  Estimate e = outer_integral(g, p0, radius, p_exp, 1.0, radii, r_grid.dlog(), ccfg.outer_samples, seed,
                              [&](const Point& q, double r, std::uint64_t s) {
                                if (coeff == CarlesonCoefficient::beta1) {
                                  return graph_beta(g, Ball(q, r), 1.0, ccfg.local_samples, s, ccfg.beta).value;
                                }
                                return osc(omega, Ball(q, r), {ccfg.local_samples, s}, ccfg.s_nodes).value;
                              });
  const double r3 = radius * radius * radius;
  return {e.value / r3, e.std_error / r3, e.n};
}

}  // namespace heis
