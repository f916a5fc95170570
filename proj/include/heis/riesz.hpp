#pragma once

// Kernels built from the fundamental solution G = ||p||_Kor^-2 of the sub-Laplacian, the
// truncated Riesz transform on surface samples of intrinsic graphs, the testing-condition
// scan and numerical checks of the divergence theorem and the kernel identities.
//
// With r2 = x^2 + y^2 and rho^4 = r2^2 + 16 t^2:
//   XG  = (-2 r2 x + 8 t y) / rho^6      YG  = (-2 r2 y - 8 t x) / rho^6
//   XtG = (-2 r2 x - 8 t y) / rho^6      YtG = (-2 r2 y + 8 t x) / rho^6
//   K = XG - i YG,  K*(p) = K(p^-1),  Ktilde = 8 t r2 / rho^6,  Khat = 2 r2^2 / rho^6
//   dtG = -16 t / rho^6,  dtKtilde = 8 r2 (r2^2 - 32 t^2) / rho^10,  dtKhat = -96 r2^2 t / rho^10
// X, Y are differentiation along s -> p . (s, 0, 0) and s -> p . (0, s, 0); the right-invariant
// Xt, Yt along s -> (s, 0, 0) . p and s -> (0, s, 0) . p.

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "heis/bumps.hpp"
#include "heis/domains.hpp"
#include "heis/quadrature.hpp"

namespace heis {

enum class KernelId { G, K, Kstar, Ktilde, Khat, dtG, dtKtilde, dtKhat, XG, YG, XtG, YtG };

inline constexpr std::array<KernelId, 12> kAllKernels{KernelId::G,     KernelId::K,        KernelId::Kstar,
                                                      KernelId::Ktilde, KernelId::Khat,    KernelId::dtG,
                                                      KernelId::dtKtilde, KernelId::dtKhat, KernelId::XG,
                                                      KernelId::YG,    KernelId::XtG,      KernelId::YtG};

std::string_view kernel_name(KernelId id) noexcept;
/// Homogeneity degree: eval(delta_l p) = l^degree eval(p).
int kernel_degree(KernelId id) noexcept;

/// Closed-form value; real kernels have zero imaginary part. Throws std::domain_error at p = 0.
std::complex<double> eval_kernel(KernelId id, const Point& p);

/// Horizontal fields acting on functions of a point.
enum class Field { X, Y, Xt, Yt, T };
using ScalarFunction = std::function<double(const Point&)>;

/// Point reached from p after time s along the field's flow.
Point flow(Field f, const Point& p, double s) noexcept;
/// Central difference of f along the field with step h.
double field_derivative(Field f, const ScalarFunction& fn, const Point& p, double h);
/// Second central difference along the one-parameter flow (exact second derivative up to O(h^2)).
double field_second_derivative(Field f, const ScalarFunction& fn, const Point& p, double h);

/// |K(q^-1) - (-XtG(q) + i YtG(q))| relative to max(|K(q^-1)|, ||q||_Kor^-3).
double check_identity_form10(const Point& q);

using VectorFunction = std::function<std::array<double, 2>(const Point&)>;

struct DivergencePair {
  double left;     // div_H V = X V1 + Y V2
  double right;    // right divergence plus d_t(-y V1 + x V2)
  double residual; // |left - right|
};

/// Both sides of div_H V = div~_H V + d_t(-y V1 + x V2) by central differences with step h.
DivergencePair check_left_right_div(const VectorFunction& v, const Point& p, double h);

/// |XXG + YYG|(q) (or the right-invariant sub-Laplacian) by second differences along the flows.
double harmonicity_residual(const Point& q, double h, bool right_invariant = false);

/// eta_j = phi_{2^-j} - phi_{2^-j+1}.
double partition_eta(int j, const Point& p);
/// sum_{j = j_min}^{n} eta_j(p) with j_min low enough that phi_{2^-j_min+1}(p) = 0.
double partition_sum(int n, const Point& p);

/// Accretive test function b_B = psi_B nu at a surface point.
std::complex<double> test_function(const Ball& ball, const SurfacePoint& sp);

enum class Truncation { sharp, smooth };

struct RieszValue {
  std::complex<double> value;
  double std_error = 0.0;   // combined real/imaginary standard error
  std::size_t n = 0;        // independent draws
  bool sparse = false;      // sample spacing coarser than eps / 4
};

/// Sample spacing in the homogeneous sense: (chart area / draws)^(1/3).
double sample_spacing(const WeightedSample& sample) noexcept;

/// sum_j Kern(q_j^-1 p) f(q_j) w_j with Kern = K (or K* when adjoint) truncated at eps: sharp
/// drops ||q_j^-1 p|| < eps, smooth multiplies by phi_eps. Throws std::invalid_argument for
/// eps <= 0.
RieszValue truncated_riesz(const WeightedSample& sample, const std::function<std::complex<double>(const SurfacePoint&)>& f,
                           const Point& p, double eps, Truncation mode, bool adjoint = false);

/// The operator applied at every sample point to f given on the sample:
/// out_i = sum_{j != i} Kern(q_j^-1 q_i) f_j w_j. Quadratic cost.
std::vector<std::complex<double>> riesz_on_sample(const WeightedSample& sample,
                                                  const std::vector<std::complex<double>>& f, double eps,
                                                  Truncation mode, bool adjoint = false);

struct TestingConfig {
  std::size_t n = 400000;     // surface points per (ball, point), split over the shells
  std::uint64_t seed = 0;
  Truncation mode = Truncation::smooth;
};

struct TestingEntry {
  std::size_t ball = 0;
  std::size_t point = 0;
  double eps = 0.0;
  RieszValue op;        // R_eps(b_B mu)(p)
  RieszValue adjoint;   // R*_eps(b_B mu)(p)
};

struct TestingTable {
  std::vector<TestingEntry> entries;  // ordered by ball, then point, then eps
  double sup_op = 0.0;
  double sup_adjoint = 0.0;
};

/// Testing-condition table |R_eps(b_B mu)(p)| over balls x points x eps. Each (ball, point)
/// is sampled on nested charts centred at p with radii eps_min / 2, eps_min, ... up to one that
/// covers the ball; every shell gets n / (number of shells) points in antithetic pairs, and the
/// same points serve all eps. Balls must be centred on the graph; points must lie on it.
TestingTable testing_scan(const IntrinsicGraph& g, const std::vector<Ball>& balls, const std::vector<double>& eps_grid,
                          const std::vector<Point>& points, const TestingConfig& cfg);

struct VectorField {
  VectorFunction value;
  Ball support;        // V vanishes off this ball
  std::string label;
};

/// V = (a psi_B, b psi_B) with psi the ball bump.
VectorField bump_field(const Ball& support, double a, double b, std::string label = "bump");

struct DivergenceCheck {
  Estimate lhs;        // -int_Omega div_H V
  Estimate rhs;        // int_Gamma <V, nu_H> d mu
  double c_hat = 0.0;  // lhs / rhs
  double c_hat_error = 0.0;
  bool flagged = false;  // rhs within 3 standard errors of 0: ratio ill-conditioned
};

/// Both sides of the divergence theorem for the super-graph. The support centre must lie on the
/// graph. Volume side: Monte Carlo over the support ball with derivatives by central differences.
DivergenceCheck divergence_check(const IntrinsicGraph& g, const VectorField& v, const SampleConfig& cfg);

}  // namespace heis
