#include "heis/riesz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace heis {

namespace {

struct Parts {
  double r2, rho4, rho6;
};

Parts parts(const Point& p) {
  const double r2 = p.x * p.x + p.y * p.y;
  const double rho4 = r2 * r2 + 16.0 * p.t * p.t;
  if (!(rho4 > 0.0)) throw std::domain_error("eval_kernel: kernels are singular at the origin");
  return {r2, rho4, rho4 * std::sqrt(rho4)};
}

double xg(const Point& p, const Parts& s) { return (-2.0 * s.r2 * p.x + 8.0 * p.t * p.y) / s.rho6; }
double yg(const Point& p, const Parts& s) { return (-2.0 * s.r2 * p.y - 8.0 * p.t * p.x) / s.rho6; }

std::complex<double> riesz_k(const Point& p) {
  const Parts s = parts(p);
  return {xg(p, s), -yg(p, s)};
}

RieszValue finish(const Moments& re, const Moments& im, bool sparse) {
  const Estimate a = to_estimate(re, 1.0), b = to_estimate(im, 1.0);
  return {{a.value, b.value}, std::hypot(a.std_error, b.std_error), a.n, sparse};
}

void check_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("truncated_riesz: eps must be positive");
}

// Truncation factor of the kernel at u = q^-1 p.
double truncation(const Point& u, double eps, Truncation mode) {
  if (mode == Truncation::sharp) return norm_d(u) < eps ? 0.0 : 1.0;
  return bump({{}, eps, BumpKind::phi_eps_exterior}, u);
}

}  // namespace

std::string_view kernel_name(KernelId id) noexcept {
  switch (id) {
    case KernelId::G: return "G";
    case KernelId::K: return "K";
    case KernelId::Kstar: return "Kstar";
    case KernelId::Ktilde: return "Ktilde";
    case KernelId::Khat: return "Khat";
    case KernelId::dtG: return "dtG";
    case KernelId::dtKtilde: return "dtKtilde";
    case KernelId::dtKhat: return "dtKhat";
    case KernelId::XG: return "XG";
    case KernelId::YG: return "YG";
    case KernelId::XtG: return "XtG";
    case KernelId::YtG: return "YtG";
  }
  return "?";
}

int kernel_degree(KernelId id) noexcept {
  switch (id) {
    case KernelId::G:
    case KernelId::Ktilde:
    case KernelId::Khat: return -2;
    case KernelId::dtG:
    case KernelId::dtKtilde:
    case KernelId::dtKhat: return -4;
    default: return -3;
  }
}

std::complex<double> eval_kernel(KernelId id, const Point& p) {
  const Parts s = parts(p);
  const double t = p.t;
  switch (id) {
    case KernelId::G: return 1.0 / std::sqrt(s.rho4);
    case KernelId::K: return riesz_k(p);
    case KernelId::Kstar: return riesz_k(inv(p));
    case KernelId::Ktilde: return 8.0 * t * s.r2 / s.rho6;
    case KernelId::Khat: return 2.0 * s.r2 * s.r2 / s.rho6;
    case KernelId::dtG: return -16.0 * t / s.rho6;
    case KernelId::dtKtilde: return 8.0 * s.r2 * (s.r2 * s.r2 - 32.0 * t * t) / (s.rho6 * s.rho4);
    case KernelId::dtKhat: return -96.0 * s.r2 * s.r2 * t / (s.rho6 * s.rho4);
    case KernelId::XG: return xg(p, s);
    case KernelId::YG: return yg(p, s);
    case KernelId::XtG: return (-2.0 * s.r2 * p.x - 8.0 * t * p.y) / s.rho6;
    case KernelId::YtG: return (-2.0 * s.r2 * p.y + 8.0 * t * p.x) / s.rho6;
  }
  throw std::invalid_argument("eval_kernel: unknown kernel");
}

Point flow(Field f, const Point& p, double s) noexcept {
  switch (f) {
    case Field::X: return {p.x + s, p.y, p.t - 0.5 * p.y * s};
    case Field::Y: return {p.x, p.y + s, p.t + 0.5 * p.x * s};
    case Field::Xt: return {p.x + s, p.y, p.t + 0.5 * p.y * s};
    case Field::Yt: return {p.x, p.y + s, p.t - 0.5 * p.x * s};
    case Field::T: return {p.x, p.y, p.t + s};
  }
  return p;
}

double field_derivative(Field f, const ScalarFunction& fn, const Point& p, double h) {
  return (fn(flow(f, p, h)) - fn(flow(f, p, -h))) / (2.0 * h);
}

double field_second_derivative(Field f, const ScalarFunction& fn, const Point& p, double h) {
  return (fn(flow(f, p, h)) - 2.0 * fn(p) + fn(flow(f, p, -h))) / (h * h);
}

double check_identity_form10(const Point& q) {
  const std::complex<double> lhs = eval_kernel(KernelId::K, inv(q));
  const std::complex<double> rhs{-eval_kernel(KernelId::XtG, q).real(), eval_kernel(KernelId::YtG, q).real()};
  const double scale = std::max(std::abs(lhs), std::pow(norm_koranyi(q), -3.0));
  return std::abs(lhs - rhs) / scale;
}

DivergencePair check_left_right_div(const VectorFunction& v, const Point& p, double h) {
  const ScalarFunction v1 = [&](const Point& q) { return v(q)[0]; };
  const ScalarFunction v2 = [&](const Point& q) { return v(q)[1]; };
  const ScalarFunction w = [&](const Point& q) {
    const auto a = v(q);
    return -q.y * a[0] + q.x * a[1];
  };
  DivergencePair out;
  out.left = field_derivative(Field::X, v1, p, h) + field_derivative(Field::Y, v2, p, h);
  out.right = field_derivative(Field::Xt, v1, p, h) + field_derivative(Field::Yt, v2, p, h) +
              field_derivative(Field::T, w, p, h);
  out.residual = std::abs(out.left - out.right);
  return out;
}

double harmonicity_residual(const Point& q, double h, bool right_invariant) {
  const ScalarFunction g = [](const Point& p) { return eval_kernel(KernelId::G, p).real(); };
  parts(q);
  const Field a = right_invariant ? Field::Xt : Field::X;
  const Field b = right_invariant ? Field::Yt : Field::Y;
  return std::abs(field_second_derivative(a, g, q, h) + field_second_derivative(b, g, q, h));
}

double partition_eta(int j, const Point& p) {
  const double eps = std::exp2(-j);
  return bump({{}, eps, BumpKind::phi_eps_exterior}, p) - bump({{}, 2.0 * eps, BumpKind::phi_eps_exterior}, p);
}

double partition_sum(int n, const Point& p) {
  const double rho = norm_koranyi(p);
  if (rho == 0.0) return 0.0;
  // phi_{2 eps} vanishes once rho <= 2^(1/4) 2 eps.
  const int j_min = std::min(n, static_cast<int>(std::floor(1.25 - std::log2(rho))) - 1);
  double sum = 0.0;
  for (int j = j_min; j <= n; ++j) sum += partition_eta(j, p);
  return sum;
}

std::complex<double> test_function(const Ball& ball, const SurfacePoint& sp) {
  return bump({ball.center, ball.radius, BumpKind::psi_ball}, sp.q) * normal_nu(sp.gradient);
}

double sample_spacing(const WeightedSample& sample) noexcept {
  const std::size_t draws = sample.points.size();
  if (draws == 0) return std::numeric_limits<double>::infinity();
  return std::cbrt(sample.region.area() / static_cast<double>(draws));
}

RieszValue truncated_riesz(const WeightedSample& sample, const std::function<std::complex<double>(const SurfacePoint&)>& f,
                           const Point& p, double eps, Truncation mode, bool adjoint) {
  check_eps(eps);
  const std::size_t draws = sample.draws();
  const bool sparse = sample_spacing(sample) > 0.25 * eps;
  if (draws == 0) return {{}, 0.0, 0, sparse};
  const std::size_t per_draw = sample.antithetic ? 2 : 1;
  const double scale = static_cast<double>(draws);
  const auto m = accumulate(draws, sample.seed, 2, [&](std::size_t i, Rng&, std::span<double> out) {
    std::complex<double> v;
    for (std::size_t k = 0; k < per_draw; ++k) {
      const SurfacePoint& sp = sample.points[i * per_draw + k];
      const Point u = mul(inv(sp.q), p);
      const double cut = truncation(u, eps, mode);
      if (cut == 0.0) continue;
      const std::complex<double> kern = riesz_k(adjoint ? inv(u) : u);
      v += cut * kern * f(sp) * sp.weight;
    }
    out[0] = v.real() * scale;
    out[1] = v.imag() * scale;
  });
  return finish(m[0], m[1], sparse);
}

std::vector<std::complex<double>> riesz_on_sample(const WeightedSample& sample,
                                                  const std::vector<std::complex<double>>& f, double eps,
                                                  Truncation mode, bool adjoint) {
  check_eps(eps);
  if (f.size() != sample.points.size()) throw std::invalid_argument("riesz_on_sample: one value per sample point");
  const std::size_t n = f.size();
  std::vector<std::complex<double>> out(n);
  parallel_for(n, [&](std::size_t i) {
    std::complex<double> acc;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const Point u = mul(inv(sample.points[j].q), sample.points[i].q);
      const double cut = truncation(u, eps, mode);
      if (cut == 0.0) continue;
      acc += cut * riesz_k(adjoint ? inv(u) : u) * f[j] * sample.points[j].weight;
    }
    out[i] = acc;
  });
  return out;
}

TestingTable testing_scan(const IntrinsicGraph& g, const std::vector<Ball>& balls, const std::vector<double>& eps_grid,
                          const std::vector<Point>& points, const TestingConfig& cfg) {
  for (double e : eps_grid) check_eps(e);
  auto on_graph = [&](const Point& q) { return std::abs(g.offset(q)) <= 1e-9 * (1.0 + std::abs(q.x)); };
  for (const Ball& b : balls) {
    if (!on_graph(b.center)) throw std::invalid_argument("testing_scan: ball centres must lie on the graph");
  }
  for (const Point& p : points) {
    if (!on_graph(p)) throw std::invalid_argument("testing_scan: evaluation points must lie on the graph");
  }
  const std::size_t ne = eps_grid.size();
  const double eps_min = *std::min_element(eps_grid.begin(), eps_grid.end());
  TestingTable table;
  for (std::size_t bi = 0; bi < balls.size(); ++bi) {
    const Ball& ball = balls[bi];
    const BumpSpec psi{ball.center, ball.radius, BumpKind::psi_ball};
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
      const Point& p = points[pi];
      const PlaneCoord wp = proj_w(p);
      // Nested charts around p with radii eps_min / 2, eps_min, ..., up to one that covers the
      // ball; each shell gets the same number of antithetic pairs.
      const double outer = dist(p, ball.center) + ball.radius;
      std::vector<double> radii{0.5 * eps_min};
      while (radii.back() < outer) radii.push_back(std::min(2.0 * radii.back(), outer));
      const std::size_t pairs = std::max<std::size_t>(1, cfg.n / (2 * radii.size()));
      std::vector<Estimate> sums(4 * ne);
      std::vector<double> spacing(radii.size());
      for (std::size_t level = 0; level < radii.size(); ++level) {
        const Chart chart = ball_chart(g, wp, radii[level]);
        const double inner_a = level ? radii[level - 1] : 0.0;
        const double inner_b = 0.75 * inner_a * inner_a;
        const double area = chart.area() - 3.0 * inner_a * inner_a * inner_a;
        spacing[level] = std::cbrt(area / static_cast<double>(2 * pairs));
        const double cell = area / static_cast<double>(2 * pairs);
        const double scale = static_cast<double>(pairs);
        const auto m = accumulate(pairs, substream_seed(cfg.seed, (bi << 40) + (pi << 20) + level), 4 * ne,
                                  [&](std::size_t, Rng& rng, std::span<double> out) {
          double a = 0.0, b = 0.0;
          do {
            a = rng.uniform(-chart.half_a, chart.half_a);
            b = rng.uniform(-chart.half_b, chart.half_b);
          } while (std::abs(a) <= inner_a && std::abs(b) <= inner_b);
          std::fill(out.begin(), out.end(), 0.0);
          for (double sa : {a, -a}) {
            const PlaneCoord w = chart.at(sa, b);
            const Point q = graph_map(g, w);
            const double bump_value = bump(psi, q);
            if (bump_value == 0.0) continue;
            const double grad = intrinsic_gradient(g, w);
            const std::complex<double> f = bump_value * normal_nu(grad) * std::sqrt(1.0 + grad * grad) * cell * scale;
            const Point u = mul(inv(q), p);
            if (norm_koranyi(u) == 0.0) continue;
            const std::complex<double> op = riesz_k(u) * f, adj = riesz_k(inv(u)) * f;
            for (std::size_t e = 0; e < ne; ++e) {
              const double cut = truncation(u, eps_grid[e], cfg.mode);
              out[4 * e] += cut * op.real();
              out[4 * e + 1] += cut * op.imag();
              out[4 * e + 2] += cut * adj.real();
              out[4 * e + 3] += cut * adj.imag();
            }
          }
        });
        // Shells are independent strata: sums and variances add.
        for (std::size_t d = 0; d < 4 * ne; ++d) {
          const Estimate e = to_estimate(m[d], 1.0);
          sums[d].value += e.value;
          sums[d].std_error = std::hypot(sums[d].std_error, e.std_error);
          sums[d].n += e.n;
        }
      }
      auto value = [&](std::size_t d, bool sparse) {
        return RieszValue{{sums[d].value, sums[d + 1].value},
                          std::hypot(sums[d].std_error, sums[d + 1].std_error), sums[d].n, sparse};
      };
      for (std::size_t e = 0; e < ne; ++e) {
        // Resolution at the truncation radius: spacing of the shell that contains it.
        std::size_t level = 0;
        while (level + 1 < radii.size() && radii[level] < eps_grid[e]) ++level;
        const bool sparse = spacing[level] > 0.25 * eps_grid[e];
        TestingEntry entry{bi, pi, eps_grid[e], value(4 * e, sparse), value(4 * e + 2, sparse)};
        table.sup_op = std::max(table.sup_op, std::abs(entry.op.value));
        table.sup_adjoint = std::max(table.sup_adjoint, std::abs(entry.adjoint.value));
        table.entries.push_back(entry);
      }
    }
  }
  return table;
}

VectorField bump_field(const Ball& support, double a, double b, std::string label) {
  const BumpSpec psi{support.center, support.radius, BumpKind::psi_ball};
  return {[psi, a, b](const Point& p) {
            const double v = bump(psi, p);
            return std::array<double, 2>{a * v, b * v};
          },
          support, std::move(label)};
}

DivergenceCheck divergence_check(const IntrinsicGraph& g, const VectorField& v, const SampleConfig& cfg) {
  const Ball& support = v.support;
  if (std::abs(g.offset(support.center)) > 1e-9 * (1.0 + std::abs(support.center.x))) {
    throw std::invalid_argument("divergence_check: the support centre must lie on the graph");
  }
  const double h = 1e-4 * support.radius;
  const Domain omega = g.supergraph();
  const ScalarFunction v1 = [&](const Point& q) { return v.value(q)[0]; };
  const ScalarFunction v2 = [&](const Point& q) { return v.value(q)[1]; };
  // div_H V integrates to 0 over the ball, so (chi - 1/2) halves the variance for free.
  DivergenceCheck out;
  const Estimate vol = integrate_ball(
      [&](const Point& p) {
        const double div = field_derivative(Field::X, v1, p, h) + field_derivative(Field::Y, v2, p, h);
        return -(omega.contains(p) ? 0.5 : -0.5) * div;
      },
      support, cfg);
  out.lhs = vol;

  const WeightedSample sample =
      surface_sample(g, ball_chart(g, proj_w(support.center), support.radius), cfg.n, substream_seed(cfg.seed, 1));
  out.rhs = sample_sum(sample, [&](const SurfacePoint& sp) {
    const auto a = v.value(sp.q);
    const std::complex<double> nu = normal_nu(sp.gradient);
    return a[0] * nu.real() + a[1] * nu.imag();
  });
  out.flagged = out.rhs.value == 0.0 || std::abs(out.rhs.value) <= 3.0 * out.rhs.std_error;
  if (out.rhs.value != 0.0) {
    out.c_hat = out.lhs.value / out.rhs.value;
    const double rl = out.lhs.value != 0.0 ? out.lhs.std_error / out.lhs.value : 0.0;
    const double rr = out.rhs.std_error / out.rhs.value;
    out.c_hat_error = std::abs(out.c_hat) * std::hypot(rl, rr);
  }
  return out;
}

}  // namespace heis
