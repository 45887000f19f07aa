#pragma once

// Circle-method tools: exponential sums over short windows, the window
// integral int_0^X |F_x(alpha)| dx, rational approximation and arc
// labels, the Vinogradov sum, and mean values of Dirichlet polynomials.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msl/characters.hpp"
#include "msl/parallel.hpp"
#include "msl/series.hpp"
#include "msl/typical.hpp"

namespace msl {

/// n alpha reduced mod 1 into [-1/2, 1/2). The product is formed exactly
/// (fma residual) before reduction, so large n keep full phase accuracy.
double reduce_phase(uint64_t n, double alpha);
/// e(t) = exp(2 pi i t) for |t| <= 1/2 (exact at multiples of 1/4).
std::complex<double> e_reduced(double t);
std::complex<double> e_n_alpha(uint64_t n, double alpha);
/// ||n alpha||, distance to the nearest integer.
double dist_to_int(uint64_t n, double alpha);

/// F_x(alpha) = sum_{x <= n <= x + H} f(n) e(n alpha).
std::complex<double> exp_sum(const RealTable& f, double x, double H, double alpha);

/// Exact int_0^X |F_x(alpha)| dx with window [x, x + H]: the integrand is
/// constant between the breakpoints {n} and {n - H}.
double fourier_integral(const RealTable& f, double X, double H, double alpha);

struct RationalApprox {
  int64_t a = 0;
  uint64_t q = 1;
  double err = 0;  // |alpha - a/q|
};

/// Last continued-fraction convergent a/q of alpha with q <= Q. Satisfies
/// q <= Q and |alpha - a/q| <= 1/(qQ). alpha is used mod 1.
RationalApprox dirichlet_approx(double alpha, double Q);

struct ArcLabel {
  double alpha = 0;
  int64_t a = 0;
  uint64_t q = 1;
  double err = 0;
  bool major = true;
  double W = 1;
  double Q1 = 2;
};
/// dirichlet_approx(alpha, Q1), major iff q <= W. Requires W >= 1, Q1 > W.
ArcLabel classify_arc(double alpha, double W, double Q1);
/// sum_{q <= W} phi(q) 2 / (q Q1): the nominal measure of the major arcs.
double major_arc_measure(double W, double Q1);

struct SupScanOptions {
  uint64_t q_max = 16;
  uint64_t grid = 256;
  /// Arc classification of the maximizer; W = 0 means q_max, Q1 = 0 means max(X, 2W).
  double W = 0;
  double Q1 = 0;
  uint64_t max_candidates = 1u << 22;
  Exec exec = Exec::parallel;
};

struct SupScanResult {
  double best_alpha = 0;
  double value = 0;  // a certified lower bound for the sup over alpha
  ArcLabel arc;
  std::vector<std::pair<double, double>> scanned;  // (alpha, integral), ascending alpha
};
/// Maximizes fourier_integral over Farey fractions a/q (q <= q_max) and the
/// grid k / grid, restricted to [0, 1/2] by the symmetry alpha -> 1 - alpha
/// of real f. Ties go to the smaller alpha.
SupScanResult sup_scan(const RealTable& f, double X, double H, const SupScanOptions& opts = {});

struct VinogradovSum {
  double value = 0;
  double bound = 0;  // H/q + H/P + (P + q) log(2q)
  double ratio = 0;
  int64_t a = 0;
  uint64_t q = 1;
};
/// sum_{1 <= n <= P} min(H/n, 1/||n alpha||), with ||n alpha|| = 0 taking H/n.
VinogradovSum vinogradov_sum(double alpha, double H, double P, int64_t a, uint64_t q);
/// Same with (a, q) = dirichlet_approx(alpha, H).
VinogradovSum vinogradov_sum(double alpha, double H, double P);

struct VinogradovCase {
  double alpha;
  double H;
  double P;
  int64_t a;
  uint64_t q;
};
/// Randomized regression cases: H in [2^8, 2^17], q in [2, H/16],
/// |alpha - a/q| <= 1/q^2, P in [q, H].
std::vector<VinogradovCase> vinogradov_regression_matrix(uint64_t seed, size_t count);

/// D(s) = sum_n a_n n^{-s} with coefficients on [lo, lo + size).
struct DirichletPoly {
  uint64_t lo = 1;
  std::vector<std::complex<double>> coeffs;
  std::string tag;

  uint64_t hi() const { return lo + coeffs.size(); }
  double sum_sq() const;
  /// Number of nonzero coefficients.
  uint64_t terms() const;
};

/// D(it).
std::complex<double> dirichlet_eval(const DirichletPoly& poly, double t);
/// int_{-T}^{T} |D(it)|^2 dt by the closed form over coefficient pairs.
double mean_value_exact(const DirichletPoly& poly, double T, Exec exec = Exec::parallel);
/// int_{T0}^{T1} |D(it)|^2 dt by the one-sided closed form.
double mean_value_exact_interval(const DirichletPoly& poly, double T0, double T1, Exec exec = Exec::parallel);
/// Composite Simpson on a uniform grid of spacing <= step; returns the
/// cumulative integral at each checkpoint (ascending, the first >= T0).
std::vector<double> mean_value_quadrature(const DirichletPoly& poly, double T0, const std::vector<double>& checkpoints,
                                          double step = 0.25);

/// a_n = 1_{S_d}(n) lambda(n) chi(n) / n on [Y, 2Y]; with `full_range` the
/// membership factor is dropped.
DirichletPoly restricted_liouville_poly(const TypicalParams& params, uint64_t d, const DirichletCharacter& chi,
                                        uint64_t Y, bool full_range = false);

struct MeanValueProfileOptions {
  std::optional<double> B;   // default 11 A
  std::optional<double> T0;  // default (log X)^{2B}, capped at T/2
  double step = 0.25;
  double exact_pair_budget = 2e9;
  bool full_range = false;
  Exec exec = Exec::parallel;
};

struct MeanValueProfile {
  uint64_t Y = 0;
  double T0 = 0;
  double T = 0;
  double B = 0;
  uint64_t terms = 0;
  double sum_sq = 0;
  std::vector<std::pair<double, double>> checkpoints;  // (t, int_{T0}^{t})
  double quadrature_total = 0;
  std::optional<double> exact_total;
  double relative_gap = 0;  // |quadrature - exact| / max(exact, tiny)
  double trivial_bound = 0;  // T sum |a_n|^2
  double target = 0;         // (Q1 T / Y + 1) (log X)^{-B}
};
MeanValueProfile twisted_mean_value_profile(const TypicalParams& params, uint64_t d, const DirichletCharacter& chi,
                                            uint64_t Y, double T, uint32_t steps,
                                            const MeanValueProfileOptions& opts = {});

struct ShortIntervalVariance {
  uint64_t Y = 0;
  double h = 0;
  double J = 0;       // int_Y^{2Y} |h^{-1} sum_{x <= m <= x+h, m in S_d} lambda(m) chi(m)|^2 dx
  double target = 0;  // Y / W^10, reported only
};
ShortIntervalVariance short_interval_variance(const TypicalParams& params, uint64_t d, const DirichletCharacter& chi,
                                              uint64_t Y, double h);

struct DecayPoint {
  double t;
  double value;
  double reference;
};
struct DecayCurve {
  double c = 0;  // least-squares fit of value ~ c log X / (1 + |t|)
  double log_X = 0;
  std::vector<DecayPoint> points;
};
/// |sum_{P <= p <= Q} chi(p) p^{-1-it}| on the grid. log X defaults to log Q.
DecayCurve prime_poly_decay(uint64_t P, uint64_t Q, const DirichletCharacter& chi, const std::vector<double>& t_grid,
                            std::optional<double> log_X = std::nullopt);

struct DecouplingCheck {
  double lhs = 0;
  double rhs = 0;  // F(X + 2H) times the scanned window integral
  double ratio = 0;
  double F = 0;
  double sup_value = 0;
  double best_alpha = 0;
};
/// lhs = sum_{|h| <= H} |sum_{n <= X} f(n) g(n + h)|^2 (g = 0 off the
/// positive integers), rhs = F(X + 2H) * sup_scan with window 2H.
DecouplingCheck fourier_decoupling_check(const Series& f, const Series& g, uint64_t X, uint64_t H,
                                         const SupScanOptions& scan = {});

}  // namespace msl
