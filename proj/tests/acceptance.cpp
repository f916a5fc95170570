// Acceptance suite: one line per criterion with the observed numbers, run at the stated
// sample sizes. Criteria listed in kKnownOpen are reported FAIL but do not fail the process;
// README.md explains each of them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "experiment.hpp"
#include "heis/beta.hpp"
#include "heis/riesz.hpp"

using namespace heis;

namespace {

// Frozen constants: calibrated once on the configurations below and not tuned afterwards.
constexpr double kBetaConstant = 32.0;       // osc against beta_1(B(p, 24 r))
constexpr double kPerimeterConstant = 0.05;  // vertical perimeter against R^3 + beta term

constexpr int kKnownOpen[] = {10};

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_error(const Point& a, const Point& b) {
  const double scale = 1.0 + std::max({std::abs(a.x), std::abs(a.y), std::abs(a.t)});
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.t - b.t)}) / scale;
}

Outcome algebra() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-3.0, 3.0), lam(0.1, 10.0);
  auto draw = [&] { return Point{u(rng), u(rng), u(rng)}; };
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Point p = draw(), q = draw(), r = draw();
    const double l = lam(rng);
    worst = std::max(worst, rel_error(mul(mul(p, q), r), mul(p, mul(q, r))));
    worst = std::max(worst, rel_error(mul(p, inv(p)), Point{}));
    const double d0 = dist(p, q);
    worst = std::max(worst, std::abs(dist(mul(r, p), mul(r, q)) - d0) / d0);
    const Point dp = dilate(l, p);
    worst = std::max(worst, std::abs(norm_d(dp) - l * norm_d(p)) / (l * norm_d(p)));
    worst = std::max(worst, std::abs(norm_koranyi(dp) - l * norm_koranyi(p)) / (l * norm_koranyi(p)));
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-12 && t < 5.0, fmt("max relative error %.3g (limit 1e-12), %.2f s (limit 5 s)", worst, t)};
}

Outcome kernels() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> u(-2.0, 2.0), lam(0.1, 10.0);
  auto draw = [&] {
    Point p{u(rng), u(rng), u(rng)};
    while (norm_koranyi(p) < 0.1) p = {u(rng), u(rng), u(rng)};
    return p;
  };
  double hom = 0.0, ident = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Point q = draw();
    const double l = lam(rng);
    for (KernelId id : kAllKernels) {
      const auto a = eval_kernel(id, dilate(l, q));
      const auto b = std::pow(l, kernel_degree(id)) * eval_kernel(id, q);
      hom = std::max(hom, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
    }
    if (i < 100) ident = std::max(ident, check_identity_form10(q));
  }
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 20; ++i) {
    const Point q = draw();
    for (bool right : {false, true}) {
      const double a = harmonicity_residual(q, 1e-2, right);
      const double b = harmonicity_residual(q, 5e-3, right);
      const double c = harmonicity_residual(q, 2.5e-3, right);
      for (double order : {std::log2(a / b), std::log2(b / c)}) {
        lo = std::min(lo, order);
        hi = std::max(hi, order);
      }
    }
  }
  const double t = seconds_since(t0);
  const bool ok = hom <= 1e-10 && ident <= 1e-10 && lo >= 1.8 && hi <= 2.2 && t < 30.0;
  return {ok, fmt("homogeneity %.3g, identity %.3g (limits 1e-10), harmonicity order in [%.3f, %.3f] "
                  "(limit [1.8, 2.2]), %.2f s",
                  hom, ident, lo, hi, t)};
}

Outcome closed_form_osc() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double half_space = 0.0;
  for (int i = 0; i < 10; ++i) {
    const Estimate e =
        osc(coordinate_half_space('x', true, 0.0), Ball({u(rng), u(rng), u(rng)}, 0.25 + std::abs(u(rng))),
            {20000, static_cast<std::uint64_t>(i)});
    half_space = std::max(half_space, std::abs(e.value));
  }
  const Domain slab = coordinate_half_space('t', true, 0.0);
  const Estimate o = osc(slab, Ball({}, 1.0), {200000, 7});
  const Estimate v = vertical_perimeter(slab, Ball({}, 1.0), 0.25, {200000, 8});
  const double pi = std::numbers::pi;
  const double dev_o = std::abs(o.value - pi / 6), tol_o = std::max(3 * o.std_error, 1e-2);
  const double dev_v = std::abs(v.value - pi / 16), tol_v = std::max(3 * v.std_error, 1e-2);
  const double t = seconds_since(t0);
  const bool ok = half_space == 0.0 && dev_o <= tol_o && dev_v <= tol_v && t < 60.0;
  return {ok, fmt("osc{x>0} max %.3g (must be 0), osc{t>0} %.5f vs pi/6 (|dev| %.2g <= %.2g), "
                  "v{t>0}(0.25) %.5f vs pi/16 (|dev| %.2g <= %.2g), %.1f s",
                  half_space, o.value, dev_o, tol_o, v.value, dev_v, tol_v, t)};
}

Outcome invariance() {
  const std::vector<std::pair<std::string, Domain>> domains{{"holder tau=0.5", vertical_holder(1.0, 0.5).supergraph()},
                                                            {"lift sin", lift_sin(0.8).supergraph()},
                                                            {"slab t>0", coordinate_half_space('t', true, 0.0)}};
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> u(-1.5, 1.5), lam(0.3, 3.0);
  std::string detail;
  bool ok = true;
  for (std::size_t d = 0; d < domains.size(); ++d) {
    const Domain& omega = domains[d].second;
    int agree = 0;
    for (int i = 0; i < 20; ++i) {
      const Point q{u(rng), u(rng), u(rng)};
      const Point p{0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng)};
      const double t = lam(rng);
      const Domain moved = dilate(left_translate(omega, q), t);
      const std::uint64_t seed = 1000 * d + 2 * i;
      const Estimate a = osc(omega, Ball(p, 1.0), {40000, seed});
      const Estimate b = osc(moved, Ball(dilate(t, mul(q, p)), t), {40000, seed + 1});
      const double diff = std::abs(a.value - b.value);
      if (diff == 0.0 || diff <= 3 * std::hypot(a.std_error, b.std_error)) ++agree;
    }
    ok = ok && agree >= 19;
    detail += fmt("%s%s %d/20", d ? ", " : "", domains[d].first.c_str(), agree);
  }
  return {ok, detail + " (need >= 19/20 each)"};
}

Outcome holder_decay() {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = true;
  for (double tau : {0.25, 0.5, 1.0}) {
    const IntrinsicGraph g = vertical_holder(1.0, tau);
    std::vector<std::pair<double, double>> prof;
    for (int k = -6; k <= 6; ++k) {
      if (k == 0) continue;
      const double r = std::exp2(k);
      prof.emplace_back(r, osc(g.supergraph(), Ball({}, r), {100000, static_cast<std::uint64_t>(200 + k)}).value);
    }
    const cli::DecayFit fit = cli::fit_decay(prof, false);
    const bool below = fit.slope_below && *fit.slope_below >= tau - 0.3 && *fit.slope_below <= tau + 0.4;
    const bool above = fit.slope_above && *fit.slope_above >= -tau - 0.4 && *fit.slope_above <= -tau + 0.3;
    ok = ok && below && above;
    detail += fmt("tau %.2f: %.3f in [%.2f, %.2f], %.3f in [%.2f, %.2f]; ", tau, fit.slope_below.value_or(NAN),
                  tau - 0.3, tau + 0.4, fit.slope_above.value_or(NAN), -tau - 0.4, -tau + 0.3);
  }
  const double t = seconds_since(t0);
  return {ok && t < 600.0, detail + fmt("%.1f s", t)};
}

Outcome osc_vs_beta() {
  const std::vector<IntrinsicGraph> graphs{flat_graph(0.0), lift_abs(0.5), lift_sin(0.5), vertical_holder(1.0, 0.5),
                                           vertical_holder(1.0, 1.0)};
  bool ok = true;
  double worst = 0.0, flat = 0.0;
  std::uint64_t seed = 300;
  for (const auto& g : graphs) {
    for (double r : {0.25, 1.0, 4.0}) {
      const auto c = osc_beta_compare(g, Ball(graph_map(g, {0, 0}), r), {100000, seed++});
      ok = ok && c.max_v.value <= kBetaConstant * c.beta1.value + 3 * c.max_v.std_error;
      if (c.beta1.value > 0.0) worst = std::max(worst, c.max_v.value / c.beta1.value);
      if (g.label().rfind("flat", 0) == 0) flat = std::max({flat, c.max_v.value, c.beta1.value});
    }
  }
  ok = ok && flat == 0.0;
  return {ok, fmt("largest max_v / beta_1 = %.3f against frozen K_beta = %.0f; flat plane both sides %.3g", worst,
                  kBetaConstant, flat)};
}

Outcome divergence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> c_hats;
  int flagged = 0;
  for (const auto& g : {lift_sin(0.5), vertical_holder(1.0, 1.0)}) {
    const Point c = graph_map(g, {0.1, 0.05});
    const std::vector<VectorField> fields{bump_field(Ball(c, 1.0), 1, 0), bump_field(Ball(c, 1.0), 1, 1),
                                          bump_field(Ball(c, 1.0), 1, -0.5), bump_field(Ball(c, 0.6), 1, 0.3),
                                          bump_field(Ball(c, 1.4), 0.7, 0.2)};
    std::uint64_t seed = 400;
    for (const auto& v : fields) {
      const DivergenceCheck d = divergence_check(g, v, {400000, seed++});
      flagged += d.flagged ? 1 : 0;
      c_hats.push_back(d.c_hat);
    }
  }
  const auto [lo, hi] = std::minmax_element(c_hats.begin(), c_hats.end());
  double mean = 0.0;
  for (double c : c_hats) mean += c / static_cast<double>(c_hats.size());
  const double spread = (*hi - *lo) / mean;
  const double t = seconds_since(t0);
  return {spread <= 0.05 && flagged == 0 && t < 120.0,
          fmt("c_hat in [%.4f, %.4f], relative spread %.4f (limit 0.05), %d flagged, %.1f s", *lo, *hi, spread,
              flagged, t)};
}

Outcome testing() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> eps;
  for (int j = 1; j <= 6; ++j) eps.push_back(std::exp2(-j));
  const IntrinsicGraph flat = flat_graph(0.0);
  const std::vector<Ball> flat_balls{Ball({}, 0.5), Ball({}, 1.0), Ball({}, 2.0)};
  const TestingTable ft = testing_scan(flat, flat_balls, eps, {Point{}}, {400000, 500});
  bool flat_ok = true;
  for (const auto& e : ft.entries) {
    flat_ok = flat_ok && std::abs(e.op.value) <= 3 * e.op.std_error + 1e-12 &&
              std::abs(e.adjoint.value) <= 3 * e.adjoint.std_error + 1e-12;
  }
  const IntrinsicGraph lift = lift_abs(0.5);
  const std::vector<Ball> balls{Ball(graph_map(lift, {0, 0}), 0.5), Ball(graph_map(lift, {0, 0}), 1.0),
                                Ball(graph_map(lift, {0.3, 0.1}), 2.0)};
  std::vector<Point> pts;
  for (int k = 0; k < 10; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 10;
    pts.push_back(graph_map(lift, {0.3 * std::cos(a), 0.05 * std::sin(a)}));
  }
  const TestingTable tab = testing_scan(lift, balls, eps, pts, {400000, 501});
  std::vector<double> op, adj;
  for (const auto& e : tab.entries) {
    op.push_back(std::abs(e.op.value));
    adj.push_back(std::abs(e.adjoint.value));
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  const double mo = median(op), ma = median(adj);
  const double t = seconds_since(t0);
  const bool ok = flat_ok && tab.sup_op <= 10 * mo && tab.sup_adjoint <= 10 * ma && t < 900.0;
  return {ok, fmt("flat centred |R| <= 3 se: %s (sup %.2g); lift table %zu entries: operator max %.4f, median %.4f "
                  "(ratio %.2f); adjoint max %.4f, median %.4f (ratio %.2f); limit 10; %.1f s",
                  flat_ok ? "yes" : "no", ft.sup_op, tab.entries.size(), tab.sup_op, mo, tab.sup_op / mo,
                  tab.sup_adjoint, ma, tab.sup_adjoint / ma, t)};
}

std::vector<WeightedPoint> plane_points(double offset, double chart_radius, double weight, std::size_t n,
                                        std::uint64_t seed) {
  const IntrinsicGraph g = flat_graph(offset);
  std::vector<WeightedPoint> out;
  for (const auto& sp : surface_sample(g, ball_chart(g, {0, 0}, chart_radius), n, seed).points) {
    out.push_back({sp.q, weight});
  }
  return out;
}

// min over theta of min_c (1/r^4) sum w |<z, n_theta> - c| by a dense scan and a weighted median.
double brute_force_l1(const std::vector<WeightedPoint>& pts, const Ball& b) {
  std::vector<WeightedPoint> in;
  for (const auto& q : pts) {
    if (b.contains(q.q)) in.push_back(q);
  }
  double total = 0.0;
  for (const auto& q : in) total += q.weight;
  auto cost = [&](double th) {
    std::vector<std::pair<double, double>> d;
    for (const auto& q : in) d.emplace_back(q.q.x * std::cos(th) + q.q.y * std::sin(th), q.weight);
    std::sort(d.begin(), d.end());
    double acc = 0.0, median = d.back().first;
    for (const auto& [v, w] : d) {
      acc += w;
      if (acc >= 0.5 * total) {
        median = v;
        break;
      }
    }
    double s = 0.0;
    for (const auto& [v, w] : d) s += w * std::abs(v - median);
    return s / std::pow(b.radius, 4);
  };
  const int n = 3600;
  double best = std::numeric_limits<double>::infinity(), best_th = 0.0;
  for (int k = 0; k < n; ++k) {
    const double th = std::numbers::pi * k / n;
    const double c = cost(th);
    if (c < best) best = c, best_th = th;
  }
  for (int k = -500; k <= 500; ++k) best = std::min(best, cost(best_th + std::numbers::pi / n * k / 500.0));
  return best;
}

Outcome beta_optimizer() {
  const Ball b({}, 1.0);
  // One plane x = 0.1: every beta vanishes and the fitted plane is x = 0.1.
  const auto single = plane_points(0.1, 1.5, 1.0 / 3000, 3000, 600);
  double single_err = 0.0;
  for (double p : {1.0, 2.0, kInfinity}) {
    const BetaResult r = std::isinf(p) ? beta_inf(single, b) : beta_p(single, b, p);
    single_err = std::max({single_err, r.value, std::abs(std::abs(r.plane.offset()) - 0.1) / 0.1});
  }
  // Planes x = 0 and x = 0.2, each carrying weight 1/2 inside the ball: beta_inf = 0.1, and
  // beta_1 = 0.1 with any offset in [0, 0.2] at the parallel plane.
  auto lower = plane_points(0.0, 1.0, 1.0, 3000, 601);
  auto upper = plane_points(0.2, 1.2, 1.0, 3000, 602);
  for (auto* set : {&lower, &upper}) {
    double in = 0.0;
    for (const auto& p : *set) in += b.contains(p.q) ? 1.0 : 0.0;
    for (auto& p : *set) p.weight = 0.5 / in;
  }
  auto two = lower;
  two.insert(two.end(), upper.begin(), upper.end());
  const double inf_err = std::abs(beta_inf(two, b).value - 0.1) / 0.1;
  BetaOptions parallel;
  parallel.theta_grid = 1;
  parallel.refine_iterations = 0;
  const double parallel_err = std::abs(beta_p(two, b, 1.0, parallel).value - 0.1) / 0.1;
  // A tilted plane crossing between the two does better than 0.1 in L^1, so the global optimum
  // is checked against a brute-force weighted-median scan over theta.
  const double l1 = beta_p(two, b, 1.0).value;
  const double oracle = brute_force_l1(two, b);
  const double l1_err = std::abs(l1 - oracle) / oracle;
  // Monotonicity in p under the probability normalization.
  std::mt19937_64 rng(603);
  std::uniform_real_distribution<double> u(-1, 1), wd(0.1, 2.0);
  BetaOptions prob;
  prob.norm = BetaNorm::probability;
  int monotone = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<WeightedPoint> pts;
    for (int i = 0; i < 40; ++i) pts.push_back({{u(rng), u(rng), 0.25 * u(rng)}, wd(rng)});
    const double b1 = beta_p(pts, b, 1.0, prob).value, b2 = beta_p(pts, b, 2.0, prob).value;
    const double bi = beta_inf(pts, b, prob).value;
    if (b1 <= b2 + 1e-12 && b2 <= bi + 1e-12) ++monotone;
  }
  const bool ok = single_err <= 1e-3 && inf_err <= 1e-3 && parallel_err <= 1e-3 && l1_err <= 1e-3 &&
                  monotone == 100;
  return {ok, fmt("single plane error %.2g; two planes: beta_inf rel error %.2g, beta_1 at the parallel plane "
                  "rel error %.2g, global beta_1 %.5f vs brute force %.5f (rel error %.2g) (limits 1e-3); "
                  "monotone in p on %d/100",
                  single_err, inf_err, parallel_err, l1, oracle, l1_err, monotone)};
}

Outcome perimeter_vs_beta() {
  const std::vector<IntrinsicGraph> graphs{lift_sin(0.5), vertical_holder(1.0, 0.5), vertical_holder(1.0, 1.0)};
  bool bound = true, stable = true;
  std::string detail;
  for (const auto& g : graphs) {
    std::vector<double> ratios;
    for (double big_r : {0.5, 1.0, 2.0}) {
      // Inner and vertical-perimeter grids span fixed numbers of octaves relative to R.
      const ScaleGrid r_grid(big_r / 64, big_r, 2), s_grid(big_r / 64, 64 * big_r, 2);
      const PerimeterBeta pb =
          perimeter_beta_bound(g, Ball(graph_map(g, {0, 0}), big_r), 1.0, r_grid, s_grid, {100000, 700});
      bound = bound && pb.lhs.value <= kPerimeterConstant * pb.rhs;
      ratios.push_back(pb.ratio);
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    const bool s = *hi == 0.0 || (*lo > 0.0 && *hi / *lo <= 2.0);
    stable = stable && s;
    detail += fmt("%s ratios %.3g, %.3g, %.3g (spread %s); ", g.label().c_str(), ratios[0], ratios[1], ratios[2],
                  *hi == 0.0 ? "all zero" : fmt("x%.2f", *lo > 0.0 ? *hi / *lo : INFINITY).c_str());
  }
  return {bound && stable, detail + fmt("bound with frozen K = %.2f: %s; stable within x2: %s", kPerimeterConstant,
                                        bound ? "yes" : "no", stable ? "yes" : "no")};
}

Outcome determinism() {
  using namespace heis::cli;
  const unsigned many = std::max(4u, std::thread::hardware_concurrency());
  std::vector<ExperimentConfig> configs;
  auto make = [&](Experiment e, const std::string& domain) {
    ExperimentConfig c;
    c.experiment = e;
    c.domain = domain;
    c.radii = {0.5, 2.0};
    c.samples = 5000;
    c.scales = {1.0 / 8, 8.0, 1};
    c.seed = 11;
    return c;
  };
  configs.push_back(make(Experiment::invariants, "holder:H=1,tau=0.5"));
  configs.back().samples = 2000;
  configs.push_back(make(Experiment::osc_scan, "holder:H=1,tau=0.5"));
  configs.push_back(make(Experiment::beta_scan, "lift:phi0=sin"));
  configs.push_back(make(Experiment::osc_vs_beta, "holder:H=1,tau=1"));
  configs.push_back(make(Experiment::dini, "holder:H=1,tau=0.5"));
  configs.push_back(make(Experiment::riesz_test, "lift:phi0=abs"));
  configs.back().eps_grid = {0.25, 0.0625};
  configs.back().points = 4;
  configs.push_back(make(Experiment::carleson, "lift:phi0=abs"));
  configs.push_back(make(Experiment::perimeter_beta, "holder:H=1,tau=0.5"));
  std::string detail;
  bool ok = true;
  for (const auto& c : configs) {
    std::string out[3];
    const unsigned threads[3] = {1, 1, many};
    for (int k = 0; k < 3; ++k) {
      set_thread_count(threads[k]);
      std::ostringstream os;
      write_table(c, run_experiment(c), os);
      out[k] = os.str();
    }
    set_thread_count(0);
    const bool same = out[0] == out[1] && out[0] == out[2];
    ok = ok && same;
    detail += fmt("%s%s %s", detail.empty() ? "" : ", ", experiment_name(c.experiment).c_str(), same ? "ok" : "DIFF");
  }
  return {ok, detail + fmt(" (threads 1 and %u)", many)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"algebra and metric suite", algebra},
      {"kernel suite", kernels},
      {"closed-form oscillation", closed_form_osc},
      {"oscillation invariance", invariance},
      {"Hoelder decay slopes", holder_decay},
      {"oscillation against beta_1", osc_vs_beta},
      {"divergence theorem", divergence},
      {"testing conditions", testing},
      {"beta optimizer", beta_optimizer},
      {"vertical perimeter against beta_1", perimeter_vs_beta},
      {"determinism", determinism}};
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool known = std::find(std::begin(kKnownOpen), std::end(kKnownOpen), number) != std::end(kKnownOpen);
    if (!o.passed && !known) ++unexpected;
    std::printf("criterion %2d %s: %s%s: %s\n", number, o.passed ? "PASS" : "FAIL", criteria[i].first.c_str(),
                !o.passed && known ? " (known open, see README)" : "", o.detail.c_str());
    std::fflush(stdout);
  }
  return unexpected == 0 ? 0 : 1;
}
