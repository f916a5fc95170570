#pragma once

// Seeded Monte-Carlo and grid integration over metric balls.
//
// Every sampler works on fixed-size chunks. Chunk k draws from its own generator seeded with
// substream_seed(seed, k), and partial sums are reduced in chunk order, so results depend only
// on (seed, n, method) and never on the number of worker threads.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "heis/group.hpp"

namespace heis {

enum class Method { monte_carlo, stratified_grid };

struct SampleConfig {
  std::size_t n = 200000;
  std::uint64_t seed = 0;
  Method method = Method::monte_carlo;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

inline constexpr std::size_t kChunkSize = 4096;

/// splitmix64 finalizer applied to (seed, stream); used to derive independent substreams.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) noexcept { return a + (b - a) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

/// Worker threads used by the chunked samplers. 0 selects hardware concurrency.
void set_thread_count(unsigned threads) noexcept;
unsigned thread_count() noexcept;

/// Calls body(i) for every i in [0, count) on the worker pool. Each index runs exactly once.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Running mean and centered second moment (Welford), mergeable in a fixed order.
struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) noexcept;
  void merge(const Moments& other) noexcept;
  double variance() const noexcept { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  /// Standard error of the mean.
  double sem() const noexcept;
};

/// Runs body(index, rng, out) for index in [0, count) and accumulates each of the `dims`
/// outputs written to out. The generator passed to body belongs to the index's chunk.
std::vector<Moments> accumulate(std::size_t count, std::uint64_t seed, std::size_t dims,
                                const std::function<void(std::size_t, Rng&, std::span<double>)>& body);

/// Estimate of scale * E[sample] from accumulated moments.
Estimate to_estimate(const Moments& m, double scale) noexcept;

/// Maps a point of the unit cube onto B(0, 1): rho = sqrt(u1), angle = 2 pi u2, t = (2 u3 - 1) / 4.
/// The map has constant Jacobian, so uniform inputs give Lebesgue-uniform points.
Point unit_ball_point(double u1, double u2, double u3) noexcept;

/// Draws from B(c, r) as c . delta_r(unit point). Left translations and dilations carry
/// Lebesgue measure to a constant multiple of itself, so the result is uniform on the ball.
class BallSampler {
 public:
  BallSampler(const Ball& ball, const SampleConfig& cfg);

  /// Number of points the configuration produces (m^3 for the grid, n otherwise).
  std::size_t count() const noexcept { return count_; }
  Point point(std::size_t index, Rng& rng) const noexcept;
  const Ball& ball() const noexcept { return ball_; }
  Method method() const noexcept { return method_; }

 private:
  Ball ball_;
  Method method_;
  std::size_t count_;
  std::size_t per_axis_ = 0;
};

std::vector<Point> sample_ball(const Ball& ball, const SampleConfig& cfg);

/// Integral of f over the ball with Lebesgue measure; exact volume normalization (pi/2) r^4.
/// Throws std::domain_error naming the point when f is not finite.
Estimate integrate_ball(const std::function<double(const Point&)>& f, const Ball& ball,
                        const SampleConfig& cfg);

/// Composite midpoint rule on [a, b].
double integrate_1d(const std::function<double(double)>& g, double a, double b, int nodes);

}  // namespace heis
