#include "experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "heis/beta.hpp"
#include "heis/oscillation.hpp"
#include "heis/riesz.hpp"

namespace heis::cli {

namespace {

constexpr std::pair<Experiment, const char*> kNames[] = {
    {Experiment::invariants, "invariants"},   {Experiment::osc_scan, "osc-scan"},
    {Experiment::beta_scan, "beta-scan"},     {Experiment::osc_vs_beta, "osc-vs-beta"},
    {Experiment::dini, "dini"},               {Experiment::riesz_test, "riesz-test"},
    {Experiment::carleson, "carleson"},       {Experiment::perimeter_beta, "perimeter-beta"},
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

template <class T>
T parse_integer(const std::string& text, const std::string& key) {
  const std::string s = trim(text);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + text + "'");
  }
  try {
    return static_cast<T>(std::stoull(s));
  } catch (const std::exception&) {
    throw ConfigError(key + ": integer out of range: '" + text + "'");
  }
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_number(v[i]);
  return out;
}

std::vector<double> powers_of_two(int lo, int hi) {
  std::vector<double> out;
  if (lo <= hi) {
    for (int k = lo; k <= hi; ++k) out.push_back(std::exp2(k));
  } else {
    for (int k = lo; k >= hi; --k) out.push_back(std::exp2(k));
  }
  return out;
}

std::string serialize_body(const ExperimentConfig& c, bool with_io) {
  std::ostringstream os;
  os << "[" << experiment_name(c.experiment) << "]\n";
  os << "domain = " << c.domain << "\n";
  os << "center = " << format_number(c.center.x) << "," << format_number(c.center.y) << ","
     << format_number(c.center.t) << "\n";
  os << "radii = " << join(c.radii) << "\n";
  os << "samples = " << c.samples << "\n";
  os << "seed = " << c.seed << "\n";
  os << "scales = " << format_number(c.scales.s_min) << ":" << format_number(c.scales.s_max) << ":"
     << c.scales.per_octave << "\n";
  os << "p_exp = " << format_number(c.p_exp) << "\n";
  os << "eps_grid = " << join(c.eps_grid) << "\n";
  os << "s_nodes = " << c.s_nodes << "\n";
  os << "points = " << c.points << "\n";
  if (with_io) {
    os << "format = " << (c.format == Format::csv ? "csv" : "json") << "\n";
    os << "out = " << c.out << "\n";
    os << "threads = " << c.threads << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------------------------
// Experiments.

struct Setup {
  ParsedDomain parsed;
  Point p0;
  std::string label;
};

Setup setup(const ExperimentConfig& cfg) {
  Setup s{parse_domain_spec(cfg.domain), cfg.center, ""};
  s.label = s.parsed.domain.label();
  // Balls are centred on the boundary: move the centre along its horizontal line onto the graph.
  if (s.parsed.graph) s.p0 = graph_map(*s.parsed.graph, proj_w(cfg.center));
  return s;
}

const IntrinsicGraph& need_graph(const Setup& s, const ExperimentConfig& cfg) {
  if (!s.parsed.graph) {
    throw ConfigError(experiment_name(cfg.experiment) + " needs an intrinsic graph domain (flat:theta=0, lift, holder)");
  }
  return *s.parsed.graph;
}

bool is_flat(const Setup& s) { return s.label.rfind("flat:", 0) == 0; }

std::vector<Cell> point_cells(const std::string& label, const Point& p) {
  return {label, p.x, p.y, p.t};
}

void add(std::vector<Check>& checks, std::string name, bool passed, double observed, double limit) {
  checks.push_back({std::move(name), passed, observed, limit});
}

std::vector<std::string> osc_columns() {
  return {"domain_label", "cx", "cy", "ct", "r", "s", "estimate", "stderr", "n", "seed"};
}

void osc_checks(const Setup& s, const std::vector<Estimate>& values, std::vector<Check>& checks) {
  double worst = 0.0, largest = 0.0;
  for (const auto& e : values) {
    worst = std::max(worst, e.value);
    largest = std::max(largest, std::abs(e.value));
  }
  add(checks, "oscillation bounded by pi/2", worst <= std::numbers::pi / 2, worst, std::numbers::pi / 2);
  if (is_flat(s)) add(checks, "vertical half-space has zero oscillation", largest == 0.0, largest, 0.0);
}

RunResult run_osc_scan(const ExperimentConfig& cfg) {
  const Setup s = setup(cfg);
  RunResult out;
  out.table.columns = osc_columns();
  std::vector<Estimate> values;
  for (std::size_t k = 0; k < cfg.radii.size(); ++k) {
    const double r = cfg.radii[k];
    const Estimate e = osc(s.parsed.domain, Ball(s.p0, r), {cfg.samples, substream_seed(cfg.seed, k)}, cfg.s_nodes);
    values.push_back(e);
    auto row = point_cells(s.label, s.p0);
    row.insert(row.end(), {r, std::string("avg"), e.value, e.std_error, static_cast<std::int64_t>(e.n),
                           static_cast<std::int64_t>(cfg.seed)});
    out.table.rows.push_back(std::move(row));
  }
  osc_checks(s, values, out.checks);
  return out;
}

nlohmann::json fit_json(const DecayFit& f) {
  nlohmann::json j;
  j["slope_below_1"] = f.slope_below ? nlohmann::json(*f.slope_below) : nlohmann::json("undefined");
  j["slope_above_1"] = f.slope_above ? nlohmann::json(*f.slope_above) : nlohmann::json("undefined");
  j["r2_below_1"] = f.r2_below;
  j["r2_above_1"] = f.r2_above;
  j["points_below_1"] = f.n_below;
  j["points_above_1"] = f.n_above;
  return j;
}

RunResult run_dini(const ExperimentConfig& cfg) {
  const Setup s = setup(cfg);
  const ScaleGrid grid(cfg.scales.s_min, cfg.scales.s_max, cfg.scales.per_octave);
  const DiniResult d = dini_integral(s.parsed.domain, s.p0, grid, {cfg.samples, cfg.seed}, cfg.s_nodes);
  RunResult out;
  out.table.columns = osc_columns();
  std::vector<Estimate> values;
  std::vector<std::pair<double, double>> profile;
  for (const auto& o : d.profile) {
    values.push_back(o.osc);
    profile.emplace_back(o.r, o.osc.value);
    auto row = point_cells(s.label, s.p0);
    row.insert(row.end(), {o.r, std::string("avg"), o.osc.value, o.osc.std_error,
                           static_cast<std::int64_t>(o.osc.n), static_cast<std::int64_t>(cfg.seed)});
    out.table.rows.push_back(std::move(row));
  }
  osc_checks(s, values, out.checks);
  out.summary["dini_integral"] = d.value.value;
  out.summary["dini_stderr"] = d.value.std_error;
  out.summary["decay_fit"] = fit_json(fit_decay(profile));
  return out;
}

RunResult run_beta_scan(const ExperimentConfig& cfg) {
  const Setup s = setup(cfg);
  const IntrinsicGraph& g = need_graph(s, cfg);
  RunResult out;
  out.table.columns = {"domain_label", "cx", "cy", "ct", "r", "p_exp", "beta", "theta", "offset", "n", "seed"};
  double largest = 0.0;
  for (std::size_t k = 0; k < cfg.radii.size(); ++k) {
    const double r = cfg.radii[k];
    const BetaResult b = graph_beta(g, Ball(s.p0, r), cfg.p_exp, cfg.samples, substream_seed(cfg.seed, k));
    largest = std::max(largest, b.value);
    auto row = point_cells(s.label, s.p0);
    row.insert(row.end(), {r, cfg.p_exp, b.value, b.plane.theta(), b.plane.offset(),
                           static_cast<std::int64_t>(b.points), static_cast<std::int64_t>(cfg.seed)});
    out.table.rows.push_back(std::move(row));
  }
  if (is_flat(s)) add(out.checks, "flat plane has zero beta", largest <= 1e-6, largest, 1e-6);
  out.summary["max_beta"] = largest;
  return out;
}

RunResult run_osc_vs_beta(const ExperimentConfig& cfg) {
  const Setup s = setup(cfg);
  const IntrinsicGraph& g = need_graph(s, cfg);
  RunResult out;
  out.table.columns = {"domain_label", "cx", "cy", "ct", "r", "osc", "osc_stderr", "max_v", "max_v_stderr",
                       "beta1_24r", "ratio", "n", "seed"};
  std::vector<Estimate> values;
  double worst = 0.0;
  for (std::size_t k = 0; k < cfg.radii.size(); ++k) {
    const double r = cfg.radii[k];
    const auto c = osc_beta_compare(g, Ball(s.p0, r), {cfg.samples, substream_seed(cfg.seed, k)}, 24.0, cfg.s_nodes);
    values.push_back(c.osc);
    if (c.beta1.value > 0.0) worst = std::max(worst, c.max_v.value / c.beta1.value);
    auto row = point_cells(s.label, s.p0);
    row.insert(row.end(), {r, c.osc.value, c.osc.std_error, c.max_v.value, c.max_v.std_error, c.beta1.value, c.ratio,
                           static_cast<std::int64_t>(c.osc.n), static_cast<std::int64_t>(cfg.seed)});
    out.table.rows.push_back(std::move(row));
  }
  osc_checks(s, values, out.checks);
  out.summary["observed_max_v_over_beta1"] = worst;
  return out;
}

std::string point_text(const Point& p) {
  return format_number(p.x) + " " + format_number(p.y) + " " + format_number(p.t);
}

RunResult run_riesz_test(const ExperimentConfig& cfg) {
  const Setup s = setup(cfg);
  const IntrinsicGraph& g = need_graph(s, cfg);
  if (cfg.radii.empty() || cfg.eps_grid.empty()) throw ConfigError("riesz-test: radii and eps_grid must be nonempty");
  std::vector<Ball> balls;
  for (double r : cfg.radii) balls.emplace_back(s.p0, r);
  // The ball centre first, then a ring of points inside the smallest ball.
  const double rm = *std::min_element(cfg.radii.begin(), cfg.radii.end());
  const PlaneCoord w0 = proj_w(s.p0);
  std::vector<Point> pts{s.p0};
  const std::size_t ring = is_flat(s) ? 0 : (cfg.points > 0 ? cfg.points - 1 : 0);
  for (std::size_t k = 0; k < ring; ++k) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(ring);
    pts.push_back(graph_map(g, {w0.y + 0.3 * rm * std::cos(a), w0.t + 0.05 * rm * rm * std::sin(a)}));
  }
  const TestingTable tab = testing_scan(g, balls, cfg.eps_grid, pts, {cfg.samples, cfg.seed, Truncation::smooth});
  RunResult out;
  out.table.columns = {"graph", "ball_center", "ball_radius", "eps", "point", "re", "im", "re_adj", "im_adj",
                       "stderr", "n", "seed"};
  std::vector<double> op, adj;
  bool zero = true;
  bool sparse = false;
  double max_op = 0.0, max_adj = 0.0;
  for (const auto& e : tab.entries) {
    // Once eps exceeds the ball radius the truncation removes most of the ball and the value
    // collapses towards 0, so such entries would only drag the median down.
    if (e.eps <= balls[e.ball].radius) {
      op.push_back(std::abs(e.op.value));
      adj.push_back(std::abs(e.adjoint.value));
      max_op = std::max(max_op, op.back());
      max_adj = std::max(max_adj, adj.back());
    }
    zero = zero && std::abs(e.op.value) <= 3 * e.op.std_error + 1e-12 &&
           std::abs(e.adjoint.value) <= 3 * e.adjoint.std_error + 1e-12;
    sparse = sparse || e.op.sparse;
    out.table.rows.push_back({s.label, point_text(balls[e.ball].center), balls[e.ball].radius, e.eps,
                              point_text(pts[e.point]), e.op.value.real(), e.op.value.imag(), e.adjoint.value.real(),
                              e.adjoint.value.imag(), std::max(e.op.std_error, e.adjoint.std_error),
                              static_cast<std::int64_t>(e.op.n), static_cast<std::int64_t>(cfg.seed)});
  }
  auto median = [](std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  const double mo = median(op), ma = median(adj);
  out.summary["sup_op"] = tab.sup_op;
  out.summary["sup_adjoint"] = tab.sup_adjoint;
  out.summary["median_op"] = mo;
  out.summary["median_adjoint"] = ma;
  out.summary["sparse_warning"] = sparse;
  if (is_flat(s)) {
    add(out.checks, "flat plane, centred balls: testing values vanish", zero, tab.sup_op, 0.0);
  } else {
    if (op.empty()) throw ConfigError("riesz-test: no eps in eps_grid is at most a ball radius");
    add(out.checks, "testing table max <= 10 x median, eps <= ball radius (operator)", max_op <= 10 * mo, max_op,
        10 * mo);
    add(out.checks, "testing table max <= 10 x median, eps <= ball radius (adjoint)", max_adj <= 10 * ma, max_adj,
        10 * ma);
  }
  return out;
}

RunResult run_carleson(const ExperimentConfig& cfg) {
  const Setup s = setup(cfg);
  const IntrinsicGraph& g = need_graph(s, cfg);
  CarlesonConfig ccfg;
  ccfg.outer_samples = 128;
  RunResult out;
  out.table.columns = {"domain_label", "cx", "cy", "ct", "R", "p_exp", "coefficient", "ratio", "stderr", "n", "seed"};
  double largest = 0.0, smallest = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cfg.radii.size(); ++k) {
    const double big_r = cfg.radii[k];
    // The scale grid is given in units of R, so every R sees the same octaves.
    const ScaleGrid grid(cfg.scales.s_min * big_r, cfg.scales.s_max * big_r, cfg.scales.per_octave);
    // One seed for every R: with common random numbers the rows differ only through the geometry.
    const Estimate e = carleson_scan(g, s.p0, big_r, cfg.p_exp, grid, cfg.seed, CarlesonCoefficient::beta1, ccfg);
    largest = std::max(largest, e.value);
    smallest = std::min(smallest, e.value);
    auto row = point_cells(s.label, s.p0);
    row.insert(row.end(), {big_r, cfg.p_exp, std::string("beta1"), e.value, e.std_error, static_cast<std::int64_t>(e.n),
                           static_cast<std::int64_t>(cfg.seed)});
    out.table.rows.push_back(std::move(row));
  }
  if (is_flat(s)) add(out.checks, "flat plane has zero packing ratio", largest <= 1e-6, largest, 1e-6);
  out.summary["max_ratio"] = largest;
  out.summary["min_ratio"] = smallest;
  return out;
}

RunResult run_perimeter_beta(const ExperimentConfig& cfg) {
  const Setup s = setup(cfg);
  const IntrinsicGraph& g = need_graph(s, cfg);
  PerimeterBetaConfig pcfg;
  pcfg.outer_samples = 128;
  RunResult out;
  out.table.columns = {"domain_label", "cx",       "cy",        "ct",          "R",   "p_exp", "lhs", "lhs_stderr",
                       "r3_term",      "beta_term", "beta_stderr", "rhs",       "ratio", "n",   "seed"};
  double worst = 0.0, lhs_max = 0.0;
  for (std::size_t k = 0; k < cfg.radii.size(); ++k) {
    const double big_r = cfg.radii[k];
    // The scale grid is given in units of R, so every R sees the same octaves.
    const ScaleGrid grid(cfg.scales.s_min * big_r, cfg.scales.s_max * big_r, cfg.scales.per_octave);
    const PerimeterBeta pb =
        perimeter_beta_bound(g, Ball(s.p0, big_r), cfg.p_exp, grid, grid, {cfg.samples, cfg.seed}, pcfg);
    worst = std::max(worst, pb.ratio);
    lhs_max = std::max(lhs_max, pb.lhs.value);
    auto row = point_cells(s.label, s.p0);
    row.insert(row.end(), {big_r, cfg.p_exp, pb.lhs.value, pb.lhs.std_error, pb.r3_term, pb.beta_term.value,
                           pb.beta_term.std_error, pb.rhs, pb.ratio, static_cast<std::int64_t>(pb.lhs.n),
                           static_cast<std::int64_t>(cfg.seed)});
    out.table.rows.push_back(std::move(row));
  }
  if (is_flat(s)) add(out.checks, "flat plane has zero vertical perimeter", lhs_max == 0.0, lhs_max, 0.0);
  out.summary["observed_K"] = worst;
  return out;
}

double rel_error(const Point& a, const Point& b) {
  const double scale = 1.0 + std::max({std::abs(a.x), std::abs(a.y), std::abs(a.t)});
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.t - b.t)}) / scale;
}

RunResult run_invariants(const ExperimentConfig& cfg) {
  const Setup s = setup(cfg);
  RunResult out;
  out.table.columns = {"check", "instances", "max_error", "tolerance", "passed"};
  auto row = [&](const std::string& name, std::int64_t count, double err, double tol, bool pass) {
    out.table.rows.push_back({name, count, err, tol, std::string(pass ? "yes" : "no")});
    add(out.checks, name, pass, err, tol);
  };
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0), lam(0.1, 10.0);
  auto draw = [&] { return Point{u(rng), u(rng), u(rng)}; };

  double assoc = 0, inverse = 0, left = 0, hom_d = 0, hom_k = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const Point p = draw(), q = draw(), r = draw();
    const double l = lam(rng);
    assoc = std::max(assoc, rel_error(mul(mul(p, q), r), mul(p, mul(q, r))));
    inverse = std::max(inverse, rel_error(mul(p, inv(p)), Point{}) + rel_error(mul(inv(p), p), Point{}));
    const double d0 = dist(p, q);
    left = std::max(left, std::abs(dist(mul(r, p), mul(r, q)) - d0) / std::max(d0, 1e-300));
    const Point dp = dilate(l, p);
    hom_d = std::max(hom_d, std::abs(norm_d(dp) - l * norm_d(p)) / (l * norm_d(p)));
    hom_k = std::max(hom_k, std::abs(norm_koranyi(dp) - l * norm_koranyi(p)) / (l * norm_koranyi(p)));
  }
  row("group associativity", n, assoc, 1e-12, assoc <= 1e-12);
  row("group inverse", n, inverse, 1e-12, inverse <= 1e-12);
  row("left invariance of d", n, left, 1e-12, left <= 1e-12);
  row("homogeneity of the box norm", n, hom_d, 1e-12, hom_d <= 1e-12);
  row("homogeneity of the Koranyi norm", n, hom_k, 1e-12, hom_k <= 1e-12);

  double kern = 0, ident = 0;
  const int nk = 1000;
  for (int i = 0; i < nk; ++i) {
    const Point q = draw();
    const double l = lam(rng);
    for (KernelId id : kAllKernels) {
      const auto a = eval_kernel(id, dilate(l, q));
      const auto b = std::pow(l, kernel_degree(id)) * eval_kernel(id, q);
      const double scale = std::max(std::abs(a), std::abs(b));
      if (scale > 0.0) kern = std::max(kern, std::abs(a - b) / scale);
    }
    ident = std::max(ident, check_identity_form10(q));
  }
  row("kernel homogeneity", nk * 12, kern, 1e-10, kern <= 1e-10);
  row("K at the inverse equals -XtG + i YtG", nk, ident, 1e-10, ident <= 1e-10);

  // Dilation and left-translation invariance of osc on the configured domain.
  int agree = 0;
  double worst = 0.0;
  const int transforms = 20;
  std::uniform_real_distribution<double> ut(-1.5, 1.5), lt(0.3, 3.0);
  for (int i = 0; i < transforms; ++i) {
    const Point q{ut(rng), ut(rng), ut(rng)};
    const double t = lt(rng);
    const Domain moved = dilate(left_translate(s.parsed.domain, q), t);
    const Estimate a = osc(s.parsed.domain, Ball(s.p0, 1.0), {cfg.samples, substream_seed(cfg.seed, 2 * i)}, cfg.s_nodes);
    const Estimate b = osc(moved, Ball(dilate(t, mul(q, s.p0)), t), {cfg.samples, substream_seed(cfg.seed, 2 * i + 1)},
                           cfg.s_nodes);
    const double se = std::hypot(a.std_error, b.std_error);
    const double diff = std::abs(a.value - b.value);
    if (diff <= 3 * se || diff == 0.0) ++agree;
    worst = std::max(worst, se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()));
  }
  row("oscillation invariant under dilation and left translation (agreeing of 20)", agree, worst, 3.0, agree >= 19);
  return out;
}

std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) {
    if (s->find_first_of(",\"\n") == std::string::npos) return *s;
    std::string q = "\"";
    for (char ch : *s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  return std::to_string(std::get<std::int64_t>(c));
}

nlohmann::json cell_json(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? nlohmann::json(*d) : nlohmann::json(format_number(*d));
  return std::get<std::int64_t>(c);
}

std::string hash_text(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

ExperimentConfig::ExperimentConfig() : radii(powers_of_two(-4, 4)), eps_grid(powers_of_two(-1, -6)) {}

std::string experiment_name(Experiment e) {
  for (const auto& [k, name] : kNames) {
    if (k == e) return name;
  }
  return "?";
}

Experiment parse_experiment(const std::string& name) {
  for (const auto& [k, n] : kNames) {
    if (name == n) return k;
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

double parse_number(const std::string& text) {
  const std::string s = trim(text);
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  auto number = [&](const std::string& part) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + text + "'");
    }
    if (used != part.size() || part.empty()) throw ConfigError("not a number: '" + text + "'");
    return v;
  };
  const auto caret = s.find('^');
  if (caret == std::string::npos) return number(s);
  return std::pow(number(s.substr(0, caret)), number(s.substr(caret + 1)));
}

std::vector<double> parse_list(const std::string& text) {
  const std::string s = trim(text);
  const auto dots = s.find("..");
  if (dots != std::string::npos) {
    const double a = parse_number(s.substr(0, dots)), b = parse_number(s.substr(dots + 2));
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
      throw ConfigError("range '" + text + "' needs positive finite ends");
    }
    std::vector<double> out;
    if (a <= b) {
      for (double v = a; v <= b * (1 + 1e-12); v *= 2.0) out.push_back(v);
    } else {
      for (double v = a; v >= b * (1 - 1e-12); v *= 0.5) out.push_back(v);
    }
    return out;
  }
  std::vector<double> out;
  if (s.empty()) return out;
  for (const auto& part : split(s, ',')) out.push_back(parse_number(part));
  return out;
}

ScaleSpec parse_scales(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ConfigError("scales: expected smin:smax:per_octave, got '" + text + "'");
  ScaleSpec s{parse_number(parts[0]), parse_number(parts[1]), parse_integer<int>(parts[2], "scales")};
  if (!(s.s_min > 0.0) || !(s.s_min < s.s_max) || !std::isfinite(s.s_max) || s.per_octave < 1) {
    throw ConfigError("scales: need 0 < smin < smax and per_octave >= 1");
  }
  return s;
}

Point parse_center(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw ConfigError("center: expected x,y,t, got '" + text + "'");
  const Point p{parse_number(parts[0]), parse_number(parts[1]), parse_number(parts[2])};
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.t)) throw ConfigError("center must be finite");
  return p;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void set_config_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  try {
    if (key == "experiment") {
      c.experiment = parse_experiment(v);
    } else if (key == "domain") {
      parse_domain_spec(v);
      c.domain = v;
    } else if (key == "center") {
      c.center = parse_center(v);
    } else if (key == "radii" || key == "radius") {
      auto r = parse_list(v);
      for (double x : r) {
        if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("radii must be positive and finite");
      }
      if (r.empty()) throw ConfigError("radii must not be empty");
      c.radii = std::move(r);
    } else if (key == "samples") {
      c.samples = parse_integer<std::size_t>(v, key);
      if (c.samples == 0) throw ConfigError("samples must be at least 1");
    } else if (key == "seed") {
      c.seed = parse_integer<std::uint64_t>(v, key);
    } else if (key == "scales") {
      c.scales = parse_scales(v);
    } else if (key == "p_exp") {
      c.p_exp = parse_number(v);
      if (!(c.p_exp >= 1.0)) throw ConfigError("p_exp must be >= 1");
    } else if (key == "eps_grid") {
      auto e = parse_list(v);
      for (double x : e) {
        if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("eps_grid entries must be positive");
      }
      c.eps_grid = std::move(e);
    } else if (key == "s_nodes") {
      c.s_nodes = parse_integer<int>(v, key);
      if (c.s_nodes < 8) throw ConfigError("s_nodes must be at least 8");
    } else if (key == "points") {
      c.points = parse_integer<std::size_t>(v, key);
      if (c.points == 0) throw ConfigError("points must be at least 1");
    } else if (key == "format") {
      if (v == "csv") c.format = Format::csv;
      else if (v == "json") c.format = Format::json;
      else throw ConfigError("format must be csv or json");
    } else if (key == "out") {
      if (v.empty()) throw ConfigError("out must not be empty");
      c.out = v;
    } else if (key == "threads") {
      c.threads = parse_integer<unsigned>(v, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

std::string serialize_config(const ExperimentConfig& cfg) { return serialize_body(cfg, true); }

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  bool have_section = false;
  std::vector<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const std::string where = "line " + std::to_string(number) + ": ";
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(where + "malformed section header");
      if (have_section) throw ConfigError(where + "only one experiment section is allowed");
      c.experiment = parse_experiment(trim(s.substr(1, s.size() - 2)));
      have_section = true;
      continue;
    }
    if (!have_section) throw ConfigError(where + "key before the [experiment] section");
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (key == "experiment") throw ConfigError(where + "the experiment is given by the section name");
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) throw ConfigError(where + "repeated key '" + key + "'");
    seen.push_back(key);
    try {
      set_config_key(c, key, s.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  if (!have_section) throw ConfigError("config has no [experiment] section");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_body(cfg, false)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

DecayFit fit_decay(const std::vector<std::pair<double, double>>& profile, bool exclude_extremes) {
  DecayFit fit;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& [r, v] : profile) {
    if (r > 0.0) {
      lo = std::min(lo, std::log2(r));
      hi = std::max(hi, std::log2(r));
    }
  }
  std::vector<double> xb, yb, xa, ya;
  for (const auto& [r, v] : profile) {
    if (!(r > 0.0) || !(v > 0.0) || !std::isfinite(v)) continue;
    const double l2 = std::log2(r);
    if (exclude_extremes && (l2 < lo + 1.0 - 1e-9 || l2 > hi - 1.0 + 1e-9)) continue;
    if (r < 1.0) {
      xb.push_back(std::log(r));
      yb.push_back(std::log(v));
    } else if (r > 1.0) {
      xa.push_back(std::log(r));
      ya.push_back(std::log(v));
    }
  }
  auto regress = [](const std::vector<double>& x, const std::vector<double>& y, std::optional<double>& slope,
                    double& r2) {
    if (x.size() < 4) return;
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      mx += x[i] / n;
      my += y[i] / n;
    }
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxx += (x[i] - mx) * (x[i] - mx);
      sxy += (x[i] - mx) * (y[i] - my);
      syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) return;
    slope = sxy / sxx;
    const double ss_res = syy - *slope * sxy;
    r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  };
  regress(xb, yb, fit.slope_below, fit.r2_below);
  regress(xa, ya, fit.slope_above, fit.r2_above);
  fit.n_below = xb.size();
  fit.n_above = xa.size();
  return fit;
}

bool RunResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::invariants: return run_invariants(cfg);
    case Experiment::osc_scan: return run_osc_scan(cfg);
    case Experiment::beta_scan: return run_beta_scan(cfg);
    case Experiment::osc_vs_beta: return run_osc_vs_beta(cfg);
    case Experiment::dini: return run_dini(cfg);
    case Experiment::riesz_test: return run_riesz_test(cfg);
    case Experiment::carleson: return run_carleson(cfg);
    case Experiment::perimeter_beta: return run_perimeter_beta(cfg);
  }
  throw ConfigError("unknown experiment");
}

nlohmann::json summary_json(const ExperimentConfig& cfg, const RunResult& result) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["experiment"] = experiment_name(cfg.experiment);
  j["config_hash"] = hash_text(config_hash(cfg));
  j["seed"] = cfg.seed;
  j["passed"] = result.passed();
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : result.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"observed", cell_json(c.observed)}, {"limit", cell_json(c.limit)}});
  }
  j["checks"] = checks;
  j["observed"] = result.summary;
  return j;
}

void write_table(const ExperimentConfig& cfg, const RunResult& result, std::ostream& out) {
  if (cfg.format == Format::json) {
    nlohmann::json j = summary_json(cfg, result);
    j["columns"] = result.table.columns;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : result.table.rows) {
      nlohmann::json r = nlohmann::json::array();
      for (const auto& c : row) r.push_back(cell_json(c));
      rows.push_back(r);
    }
    j["rows"] = rows;
    out << j.dump(2) << "\n";
    return;
  }
  out << "# heis " << kVersion << " experiment=" << experiment_name(cfg.experiment)
      << " config_hash=" << hash_text(config_hash(cfg)) << " seed=" << cfg.seed << "\n";
  for (std::size_t i = 0; i < result.table.columns.size(); ++i) out << (i ? "," : "") << result.table.columns[i];
  out << "\n";
  for (const auto& row : result.table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << cell_text(row[i]);
    out << "\n";
  }
}

}  // namespace heis::cli
