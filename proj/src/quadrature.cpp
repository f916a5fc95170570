#include "heis/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace heis {

namespace {

std::atomic<unsigned> g_threads{0};
// Set on pool workers so that nested parallel loops run inline instead of spawning threads.
thread_local bool t_in_pool = false;

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void set_thread_count(unsigned threads) noexcept { g_threads.store(threads); }

unsigned thread_count() noexcept {
  const unsigned requested = g_threads.load();
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), count);
  if (workers <= 1 || t_in_pool) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    t_in_pool = true;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        body(i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

void Moments::add(double v) noexcept {
  ++n;
  const double delta = v - mean;
  mean += delta / static_cast<double>(n);
  m2 += delta * (v - mean);
}

void Moments::merge(const Moments& other) noexcept {
  if (other.n == 0) return;
  if (n == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n);
  const double nb = static_cast<double>(other.n);
  const double total = na + nb;
  const double delta = other.mean - mean;
  mean += delta * nb / total;
  m2 += other.m2 + delta * delta * na * nb / total;
  n += other.n;
}

double Moments::sem() const noexcept {
  if (n < 2) return 0.0;
  return std::sqrt(variance() / static_cast<double>(n));
}

std::vector<Moments> accumulate(std::size_t count, std::uint64_t seed, std::size_t dims,
                                const std::function<void(std::size_t, Rng&, std::span<double>)>& body) {
  const std::size_t chunks = (count + kChunkSize - 1) / kChunkSize;
  std::vector<std::vector<Moments>> partial(chunks, std::vector<Moments>(dims));
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(substream_seed(seed, c));
    std::vector<double> out(dims);
    auto& acc = partial[c];
    const std::size_t begin = c * kChunkSize;
    const std::size_t end = std::min(count, begin + kChunkSize);
    for (std::size_t i = begin; i < end; ++i) {
      std::fill(out.begin(), out.end(), 0.0);
      body(i, rng, out);
      for (std::size_t d = 0; d < dims; ++d) acc[d].add(out[d]);
    }
  });
  std::vector<Moments> total(dims);
  for (const auto& chunk : partial) {
    for (std::size_t d = 0; d < dims; ++d) total[d].merge(chunk[d]);
  }
  return total;
}

Estimate to_estimate(const Moments& m, double scale) noexcept {
  return {scale * m.mean, std::abs(scale) * m.sem(), m.n};
}

Point unit_ball_point(double u1, double u2, double u3) noexcept {
  const double rho = std::sqrt(u1);
  const double angle = 2.0 * std::numbers::pi * u2;
  return {rho * std::cos(angle), rho * std::sin(angle), 0.25 * (2.0 * u3 - 1.0)};
}

BallSampler::BallSampler(const Ball& ball, const SampleConfig& cfg) : ball_(ball), method_(cfg.method) {
  if (cfg.n == 0) throw std::invalid_argument("SampleConfig: n must be at least 1");
  if (method_ == Method::stratified_grid) {
    per_axis_ = static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(cfg.n)) - 1e-9));
    per_axis_ = std::max<std::size_t>(per_axis_, 1);
    count_ = per_axis_ * per_axis_ * per_axis_;
  } else {
    count_ = cfg.n;
  }
}

Point BallSampler::point(std::size_t index, Rng& rng) const noexcept {
  Point unit;
  if (method_ == Method::stratified_grid) {
    const std::size_t m = per_axis_;
    const double inv = 1.0 / static_cast<double>(m);
    const std::size_t a = index % m;
    const std::size_t b = (index / m) % m;
    const std::size_t c = index / (m * m);
    unit = unit_ball_point((a + 0.5) * inv, (b + 0.5) * inv, (c + 0.5) * inv);
  } else {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    const double u3 = rng.uniform();
    unit = unit_ball_point(u1, u2, u3);
  }
  const double r = ball_.radius;
  return mul(ball_.center, Point{r * unit.x, r * unit.y, r * r * unit.t});
}

std::vector<Point> sample_ball(const Ball& ball, const SampleConfig& cfg) {
  const BallSampler sampler(ball, cfg);
  std::vector<Point> points(sampler.count());
  accumulate(sampler.count(), cfg.seed, 0, [&](std::size_t i, Rng& rng, std::span<double>) {
    points[i] = sampler.point(i, rng);
  });
  return points;
}

Estimate integrate_ball(const std::function<double(const Point&)>& f, const Ball& ball,
                        const SampleConfig& cfg) {
  const BallSampler sampler(ball, cfg);
  const auto moments = accumulate(sampler.count(), cfg.seed, 1, [&](std::size_t i, Rng& rng, std::span<double> out) {
    const Point p = sampler.point(i, rng);
    const double v = f(p);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "integrate_ball: non-finite integrand at (" << p.x << ", " << p.y << ", " << p.t << ")";
      throw std::domain_error(msg.str());
    }
    out[0] = v;
  });
  Estimate e = to_estimate(moments[0], ball.volume());
  if (cfg.method == Method::stratified_grid) e.std_error = 0.0;
  return e;
}

double integrate_1d(const std::function<double(double)>& g, double a, double b, int nodes) {
  if (!(a < b)) throw std::invalid_argument("integrate_1d: requires a < b");
  if (nodes < 1) throw std::invalid_argument("integrate_1d: requires nodes >= 1");
  const double h = (b - a) / nodes;
  double sum = 0.0;
  for (int i = 0; i < nodes; ++i) sum += g(a + (i + 0.5) * h);
  return sum * h;
}

}  // namespace heis
