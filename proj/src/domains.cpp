#include "heis/domains.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace heis {

Domain complement(const Domain& omega) {
  return Domain([omega](const Point& p) { return !omega.contains(p); }, "complement(" + omega.label() + ")");
}

Domain left_translate(const Domain& omega, const Point& q) {
  const Point qi = inv(q);
  std::ostringstream label;
  label << "translate(" << omega.label() << ";" << q.x << "," << q.y << "," << q.t << ")";
  return Domain([omega, qi](const Point& p) { return omega.contains(mul(qi, p)); }, label.str());
}

Domain dilate(const Domain& omega, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("dilate: lambda must be positive");
  const double s = 1.0 / lambda;
  std::ostringstream label;
  label << "dilate(" << omega.label() << ";" << lambda << ")";
  return Domain([omega, s](const Point& p) { return omega.contains(Point{s * p.x, s * p.y, s * s * p.t}); },
                label.str());
}

Domain flat(double theta, double offset) {
  if (!std::isfinite(theta) || !std::isfinite(offset)) throw std::invalid_argument("flat: non-finite parameters");
  const double c = std::cos(theta), s = std::sin(theta);
  std::ostringstream label;
  label << "flat:theta=" << theta << ",offset=" << offset;
  return Domain([c, s, offset](const Point& p) { return p.x * c + p.y * s > offset; }, label.str());
}

Domain coordinate_half_space(char axis, bool greater, double threshold) {
  int index = 0;
  switch (axis) {
    case 'x': index = 0; break;
    case 'y': index = 1; break;
    case 't': index = 2; break;
    default: throw std::invalid_argument(std::string("coordinate_half_space: unknown axis '") + axis + "'");
  }
  std::ostringstream label;
  label << "slab:" << axis << (greater ? ">" : "<") << threshold;
  return Domain(
      [index, greater, threshold](const Point& p) {
        const double v = index == 0 ? p.x : (index == 1 ? p.y : p.t);
        return greater ? v > threshold : v < threshold;
      },
      label.str());
}

IntrinsicGraph::IntrinsicGraph(Function phi, std::string label, double lip_bound, std::optional<HolderBound> holder)
    : phi_(std::move(phi)), label_(std::move(label)), lip_bound_(lip_bound), holder_(holder) {
  if (!phi_) throw std::invalid_argument("IntrinsicGraph: empty function");
  if (lip_bound_ < 0.0) throw std::invalid_argument("IntrinsicGraph: negative Lipschitz bound");
}

Domain IntrinsicGraph::supergraph() const {
  const Function f = phi_;
  return Domain([f](const Point& p) {
    const PlaneCoord w = proj_w(p);
    return p.x > f(w.y, w.t);
  }, label_);
}

Domain IntrinsicGraph::subgraph() const {
  const Function f = phi_;
  return Domain([f](const Point& p) {
    const PlaneCoord w = proj_w(p);
    return p.x < f(w.y, w.t);
  }, "sub(" + label_ + ")");
}

Point graph_map(const IntrinsicGraph& g, const PlaneCoord& w) {
  return mul(embed_w(w), Point{g.phi(w), 0.0, 0.0});
}

IntrinsicGraph left_translate(const IntrinsicGraph& g, const Point& q) {
  // q . Phi(y, s) projects to (y0 + y, t0 + s + x0 y + x0 y0 / 2) with horizontal part x0 + phi.
  const auto f = g.function();
  const double x0 = q.x, y0 = q.y, t0 = q.t;
  std::ostringstream label;
  label << "translate(" << g.label() << ";" << x0 << "," << y0 << "," << t0 << ")";
  std::optional<HolderBound> holder;
  if (g.holder() && x0 == 0.0) holder = g.holder();
  return IntrinsicGraph(
      [f, x0, y0, t0](double y, double t) {
        const double dy = y - y0;
        return x0 + f(dy, t - t0 - 0.5 * x0 * y0 - x0 * dy);
      },
      label.str(), g.lip_bound(), holder);
}

IntrinsicGraph dilate(const IntrinsicGraph& g, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("dilate: lambda must be positive");
  const auto f = g.function();
  std::ostringstream label;
  label << "dilate(" << g.label() << ";" << lambda << ")";
  return IntrinsicGraph(
      [f, lambda](double y, double t) { return lambda * f(y / lambda, t / (lambda * lambda)); }, label.str(),
      g.lip_bound());
}

IntrinsicGraph flat_graph(double offset) {
  std::ostringstream label;
  label << "flat:theta=0,offset=" << offset;
  return IntrinsicGraph([offset](double, double) { return offset; }, label.str(), 0.0);
}

IntrinsicGraph euclidean_lift(std::function<double(double)> phi0, double lip, std::string label) {
  if (!phi0) throw std::invalid_argument("euclidean_lift: empty profile");
  return IntrinsicGraph([phi0 = std::move(phi0)](double y, double) { return phi0(y); }, std::move(label), lip);
}

IntrinsicGraph lift_abs(double amplitude) {
  std::ostringstream label;
  label << "lift:phi0=abs,a=" << amplitude;
  return euclidean_lift([amplitude](double y) { return amplitude * std::abs(y); }, std::abs(amplitude), label.str());
}

IntrinsicGraph lift_sin(double amplitude) {
  std::ostringstream label;
  label << "lift:phi0=sin,a=" << amplitude;
  return euclidean_lift([amplitude](double y) { return amplitude * std::sin(y); }, std::abs(amplitude), label.str());
}

double holder_profile(double t, double tau) {
  const double a = std::abs(t);
  const double v = a <= 1.0 ? std::pow(a, 0.5 * (1.0 + tau)) : std::pow(a, 0.5 * (1.0 - tau));
  return t < 0.0 ? -v : v;
}

IntrinsicGraph vertical_holder(double amplitude, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("vertical_holder: tau must lie in (0, 1]");
  if (!(amplitude > 0.0)) throw std::invalid_argument("vertical_holder: amplitude must be positive");
  std::ostringstream label;
  label << "holder:H=" << amplitude << ",tau=" << tau;
  // Both branches of the odd profile are subadditive on [0, inf), which gives
  // |s(t) - s(u)| <= 2^((1 + tau)/2) |t - u|^e for either exponent regime.
  const HolderBound bound{amplitude * std::pow(2.0, 0.5 * (1.0 + tau)), tau};
  return IntrinsicGraph([amplitude, tau](double, double t) { return amplitude * holder_profile(t, tau); },
                        label.str(), 0.0, bound);
}

namespace {

void require_finite(double v, const PlaneCoord& w) {
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "intrinsic_gradient: non-finite phi near (" << w.y << ", " << w.t << ")";
    throw std::domain_error(msg.str());
  }
}

struct Partials {
  double dy;
  double dt;
};

Partials central(const IntrinsicGraph& g, const PlaneCoord& w, double h) {
  const double yp = g.phi(w.y + h, w.t), ym = g.phi(w.y - h, w.t);
  const double tp = g.phi(w.y, w.t + h), tm = g.phi(w.y, w.t - h);
  for (double v : {yp, ym, tp, tm}) require_finite(v, w);
  return {(yp - ym) / (2.0 * h), (tp - tm) / (2.0 * h)};
}

}  // namespace

double intrinsic_gradient(const IntrinsicGraph& g, const PlaneCoord& w, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("intrinsic_gradient: step must be positive");
  const double value = g.phi(w);
  require_finite(value, w);
  Partials d = central(g, w, h);
  if (std::abs(value) > 10.0) {
    // The t-derivative error is multiplied by |phi|; one Richardson step removes the h^2 term.
    const Partials half = central(g, w, 0.5 * h);
    d = {(4.0 * half.dy - d.dy) / 3.0, (4.0 * half.dt - d.dt) / 3.0};
  }
  return d.dy + value * d.dt;
}

std::complex<double> normal_nu(double gradient) {
  const double s = 1.0 / std::sqrt(1.0 + gradient * gradient);
  return {s, -gradient * s};
}

std::complex<double> normal_nu(const IntrinsicGraph& g, const PlaneCoord& w) {
  return normal_nu(intrinsic_gradient(g, w));
}

Chart Chart::rectangle(double y0, double y1, double t0, double t1) {
  if (!(y0 < y1) || !(t0 < t1)) throw std::invalid_argument("Chart::rectangle: empty rectangle");
  return {{0.5 * (y0 + y1), 0.5 * (t0 + t1)}, 0.5 * (y1 - y0), 0.5 * (t1 - t0), 0.0};
}

bool Chart::contains(const PlaneCoord& w, double slack) const noexcept {
  const double a = w.y - origin.y;
  const double b = w.t - origin.t - shear * a;
  return std::abs(a) <= half_a + slack && std::abs(b) <= half_b + slack;
}

bool Chart::covers(const Chart& other) const noexcept {
  constexpr double rel = 1e-12;
  const double slack = rel * (1.0 + std::abs(origin.t) + std::abs(origin.y) + half_a + half_b);
  for (double sa : {-1.0, 1.0}) {
    for (double sb : {-1.0, 1.0}) {
      if (!contains(other.at(sa * other.half_a, sb * other.half_b), slack)) return false;
    }
  }
  return true;
}

Chart ball_chart(const IntrinsicGraph& g, const PlaneCoord& w, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball_chart: radius must be positive");
  return {w, radius, 0.75 * radius * radius, g.phi(w)};
}

double WeightedSample::total_weight() const noexcept {
  double s = 0.0;
  for (const auto& p : points) s += p.weight;
  return s;
}

WeightedSample surface_sample(const IntrinsicGraph& g, const Chart& region, std::size_t n, std::uint64_t seed,
                              bool antithetic) {
  if (n == 0) throw std::invalid_argument("surface_sample: n must be at least 1");
  if (!(region.half_a > 0.0) || !(region.half_b > 0.0)) throw std::invalid_argument("surface_sample: empty region");
  const std::size_t draws = antithetic ? (n + 1) / 2 : n;
  const std::size_t per_draw = antithetic ? 2 : 1;
  WeightedSample sample;
  sample.region = region;
  sample.seed = seed;
  sample.antithetic = antithetic;
  sample.points.resize(draws * per_draw);
  const double cell = region.area() / static_cast<double>(sample.points.size());
  auto fill = [&](std::size_t slot, double a, double b) {
    SurfacePoint& sp = sample.points[slot];
    sp.w = region.at(a, b);
    sp.q = graph_map(g, sp.w);
    sp.gradient = intrinsic_gradient(g, sp.w);
    sp.weight = std::sqrt(1.0 + sp.gradient * sp.gradient) * cell;
  };
  accumulate(draws, seed, 0, [&](std::size_t i, Rng& rng, std::span<double>) {
    const double a = rng.uniform(-region.half_a, region.half_a);
    const double b = rng.uniform(-region.half_b, region.half_b);
    fill(i * per_draw, a, b);
    if (antithetic) fill(i * per_draw + 1, -a, b);
  });
  return sample;
}

Estimate sample_sum(const WeightedSample& sample, const std::function<double(const SurfacePoint&)>& f) {
  const std::size_t draws = sample.draws();
  if (draws == 0) return {};
  const std::size_t per_draw = sample.antithetic ? 2 : 1;
  const double scale = static_cast<double>(draws);
  const auto m = accumulate(draws, sample.seed, 1, [&](std::size_t i, Rng&, std::span<double> out) {
    double v = 0.0;
    for (std::size_t k = 0; k < per_draw; ++k) {
      const auto& sp = sample.points[i * per_draw + k];
      v += f(sp) * sp.weight;
    }
    out[0] = v * scale;
  });
  return to_estimate(m[0], 1.0);
}

std::vector<DensityRatio> regularity_check(const IntrinsicGraph& g, const WeightedSample& sample,
                                           const PlaneCoord& w, const std::vector<double>& radii) {
  if (radii.empty()) return {};
  const double r_max = *std::max_element(radii.begin(), radii.end());
  if (!sample.region.covers(ball_chart(g, w, r_max))) {
    std::ostringstream msg;
    msg << "regularity_check: sampled region too small for radius " << r_max;
    throw std::invalid_argument(msg.str());
  }
  const Point p = graph_map(g, w);
  std::vector<DensityRatio> out;
  out.reserve(radii.size());
  for (double r : radii) {
    const Estimate mass = sample_sum(sample, [&](const SurfacePoint& sp) { return dist(sp.q, p) <= r ? 1.0 : 0.0; });
    const double r3 = r * r * r;
    out.push_back({r, {mass.value / r3, mass.std_error / r3, mass.n}});
  }
  return out;
}

double intrinsic_lipschitz_ratio(const IntrinsicGraph& g, const Chart& region, std::size_t pairs,
                                 std::uint64_t seed) {
  const std::size_t chunks = (pairs + kChunkSize - 1) / kChunkSize;
  std::vector<double> best(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(substream_seed(seed, c));
    const std::size_t end = std::min(pairs, (c + 1) * kChunkSize);
    for (std::size_t i = c * kChunkSize; i < end; ++i) {
      const PlaneCoord w = region.at(rng.uniform(-region.half_a, region.half_a),
                                     rng.uniform(-region.half_b, region.half_b));
      const PlaneCoord v = region.at(rng.uniform(-region.half_a, region.half_a),
                                     rng.uniform(-region.half_b, region.half_b));
      const double fw = g.phi(w), fv = g.phi(v);
      const double dy = w.y - v.y;
      const double dt = w.t - v.t - fv * dy;
      const double denom = norm_d(Point{0.0, dy, dt});
      if (denom > 0.0) best[c] = std::max(best[c], std::abs(fw - fv) / denom);
    }
  });
  double m = 0.0;
  for (double b : best) m = std::max(m, b);
  return m;
}

namespace {

std::map<std::string, std::string> parse_params(const std::string& kind, const std::string& body) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  while (pos <= body.size() && !body.empty()) {
    const std::size_t comma = body.find(',', pos);
    const std::string item = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("domain spec '" + kind + "': expected key=value, got '" + item + "'");
    }
    std::string key = item.substr(0, eq);
    if (key == "θ") key = "theta";
    if (!out.emplace(key, item.substr(eq + 1)).second) {
      throw std::invalid_argument("domain spec '" + kind + "': duplicate key '" + key + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

double to_number(const std::string& kind, const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw std::invalid_argument("domain spec '" + kind + "': bad number for " + key + ": '" + text + "'");
  }
  return v;
}

double take(std::map<std::string, std::string>& params, const std::string& kind, const std::string& key,
            double fallback) {
  const auto it = params.find(key);
  if (it == params.end()) return fallback;
  const double v = to_number(kind, key, it->second);
  params.erase(it);
  return v;
}

void reject_rest(const std::map<std::string, std::string>& params, const std::string& kind) {
  if (!params.empty()) {
    throw std::invalid_argument("domain spec '" + kind + "': unknown key '" + params.begin()->first + "'");
  }
}

}  // namespace

ParsedDomain parse_domain_spec(const std::string& spec) {
  const std::size_t colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string body = colon == std::string::npos ? std::string() : spec.substr(colon + 1);

  if (kind == "slab") {
    const std::size_t op = body.find_first_of("<>");
    if (op != 1 || body.size() < 3 || std::string("xyt").find(body[0]) == std::string::npos) {
      throw std::invalid_argument("domain spec 'slab': expected <axis><op><value> such as t>0, got '" + body + "'");
    }
    const double threshold = to_number(kind, "threshold", body.substr(2));
    return {coordinate_half_space(body[0], body[1] == '>', threshold), std::nullopt};
  }

  auto params = parse_params(kind, body);
  if (kind == "flat") {
    const double theta = take(params, kind, "theta", 0.0);
    const double offset = take(params, kind, "offset", 0.0);
    reject_rest(params, kind);
    if (theta == 0.0) {
      IntrinsicGraph g = flat_graph(offset);
      return {g.supergraph(), g};
    }
    return {flat(theta, offset), std::nullopt};
  }
  if (kind == "lift") {
    std::string profile = "abs";
    if (auto it = params.find("phi0"); it != params.end()) {
      profile = it->second;
      params.erase(it);
    }
    const double a = take(params, kind, "a", 0.5);
    reject_rest(params, kind);
    std::optional<IntrinsicGraph> g;
    if (profile == "abs") {
      g = lift_abs(a);
    } else if (profile == "sin") {
      g = lift_sin(a);
    } else if (profile == "linear") {
      g = euclidean_lift([a](double y) { return a * y; }, std::abs(a), "lift:phi0=linear,a=" + std::to_string(a));
    } else if (profile == "zero") {
      g = euclidean_lift([](double) { return 0.0; }, 0.0, "lift:phi0=zero");
    } else {
      throw std::invalid_argument("domain spec 'lift': unknown phi0 '" + profile + "'");
    }
    return {g->supergraph(), g};
  }
  if (kind == "holder") {
    const double h = take(params, kind, "H", 1.0);
    const double tau = take(params, kind, "tau", 0.5);
    reject_rest(params, kind);
    IntrinsicGraph g = vertical_holder(h, tau);
    return {g.supergraph(), g};
  }
  throw std::invalid_argument("domain spec: unknown kind '" + kind + "' (expected flat, lift, holder or slab)");
}

}  // namespace heis
