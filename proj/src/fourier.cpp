#include "msl/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "msl/error.hpp"
#include "msl/rng.hpp"
#include "msl/sieve.hpp"

namespace msl {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

struct ComplexSum {
  CompensatedSum re;
  CompensatedSum im;
  void add(std::complex<double> z) {
    re.add(z.real());
    im.add(z.imag());
  }
  std::complex<double> value() const { return {re.value(), im.value()}; }
};

// Visits the maximal pieces of [a, b] on which the window [x, x + H] holds a
// fixed set of integers, passing (piece length, window sum of z). z[i] is
// the term for n = base + i.
template <class Piece>
void sweep_windows(double a, double b, double H, uint64_t base, const std::vector<std::complex<double>>& z,
                   Piece&& piece) {
  if (!(b > a)) return;
  double k = std::floor(a) + 1;      // next integer breakpoint
  double m = std::floor(a + H) + 1;  // next breakpoint of the form m - H
  double pos = a;
  int64_t cur_lo = 0;
  int64_t cur_hi = -1;
  bool started = false;
  ComplexSum s;
  auto term = [&](int64_t n) { return z[static_cast<size_t>(n - static_cast<int64_t>(base))]; };
  while (pos < b) {
    const double next = std::min({k, m - H, b});
    if (next > pos) {
      const double mid = 0.5 * (pos + next);
      const auto nl = static_cast<int64_t>(std::ceil(mid));
      const auto nh = static_cast<int64_t>(std::floor(mid + H));
      if (!started) {
        cur_lo = nl;
        cur_hi = nl - 1;
        started = true;
      }
      for (; cur_lo < nl; ++cur_lo)
        if (cur_lo <= cur_hi) {
          const auto t = term(cur_lo);
          if (t.real() != 0 || t.imag() != 0) s.add(-t);
        }
      while (cur_hi < nh) {
        ++cur_hi;
        if (cur_hi >= cur_lo) {
          const auto t = term(cur_hi);
          if (t.real() != 0 || t.imag() != 0) s.add(t);
        }
      }
      if (cur_lo > cur_hi) s = ComplexSum{};
      piece(next - pos, s.value());
    }
    if (next == k) k += 1;
    if (next == m - H) m += 1;
    pos = next;
  }
}

uint64_t floor_u(double v) { return v <= 0 ? 0 : static_cast<uint64_t>(std::floor(v)); }

template <class Body>
void parallel_indexed(size_t count, Exec exec, Body&& body) {
  const auto n = static_cast<int64_t>(count);
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1) num_threads(max_threads(exec)) if (exec == Exec::parallel && n > 1)
  for (int64_t i = 0; i < n; ++i) {
    try {
      body(static_cast<size_t>(i));
    } catch (...) {
#pragma omp critical(msl_fourier_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace

// ---------------------------------------------------------------------------
// Phases

double reduce_phase(uint64_t n, double alpha) {
  const auto nd = static_cast<double>(n);  // exact below 2^53
  const double hi = nd * alpha;
  const double lo = std::fma(nd, alpha, -hi);
  double r = (hi - std::nearbyint(hi)) + lo;
  if (r >= 0.5) r -= 1;
  if (r < -0.5) r += 1;
  return r;
}

std::complex<double> e_reduced(double t) {
  if (t == 0) return {1, 0};
  if (t == 0.5 || t == -0.5) return {-1, 0};
  if (t == 0.25) return {0, 1};
  if (t == -0.25) return {0, -1};
  return {std::cos(kTwoPi * t), std::sin(kTwoPi * t)};
}

std::complex<double> e_n_alpha(uint64_t n, double alpha) { return e_reduced(reduce_phase(n, alpha)); }

double dist_to_int(uint64_t n, double alpha) { return std::abs(reduce_phase(n, alpha)); }

std::complex<double> exp_sum(const RealTable& f, double x, double H, double alpha) {
  require(H >= 0, "exp_sum requires H >= 0");
  const double first = std::ceil(x);
  const double last = std::floor(x + H);
  if (last < first) return {0, 0};
  if (first < 1 || !f.covers(static_cast<uint64_t>(first), static_cast<uint64_t>(last) + 1))
    fail_validation("exp_sum: table does not cover the window");
  ComplexSum s;
  for (auto n = static_cast<uint64_t>(first); n <= static_cast<uint64_t>(last); ++n)
    if (f[n] != 0) s.add(f[n] * e_n_alpha(n, alpha));
  return s.value();
}

double fourier_integral(const RealTable& f, double X, double H, double alpha) {
  require(X >= 0 && H >= 0, "fourier_integral requires X, H >= 0");
  const uint64_t top = floor_u(X + H);
  if (top >= 1 && !f.covers(1, top + 1)) fail_validation("fourier_integral: table does not cover [1, X + H]");
  std::vector<std::complex<double>> z(top + 1, {0, 0});
  // e(n alpha) by recurrence, re-anchored exactly every 256 terms
  const auto step = e_n_alpha(1, alpha);
  std::complex<double> ph;
  for (uint64_t n = 1; n <= top; ++n) {
    ph = (n % 256 == 1) ? e_n_alpha(n, alpha) : ph * step;
    if (f[n] != 0) z[n] = f[n] * ph;
  }
  CompensatedSum total;
  if (H == std::floor(H) && X == std::floor(X) && H >= 1) {
    // integer H and X: on (k - 1, k) the window holds exactly n = k .. k + H - 1
    const auto Hi = static_cast<uint64_t>(H);
    const auto Xi = static_cast<uint64_t>(X);
    ComplexSum s;
    for (uint64_t n = 1; n < Hi && n <= top; ++n) s.add(z[n]);
    for (uint64_t k = 1; k <= Xi; ++k) {
      const auto in = z[k + Hi - 1];
      if (in.real() != 0 || in.imag() != 0) s.add(in);
      total.add(std::sqrt(std::norm(s.value())));
      const auto out = z[k];
      if (out.real() != 0 || out.imag() != 0) s.add(-out);
    }
    return total.value();
  }
  // sqrt of the norm: hypot's overflow guard is not needed at these magnitudes
  sweep_windows(0.0, X, H, 0, z, [&](double len, std::complex<double> s) { total.add(len * std::sqrt(std::norm(s))); });
  return total.value();
}

// ---------------------------------------------------------------------------
// Rational approximation and arcs

RationalApprox dirichlet_approx(double alpha, double Q) {
  require(Q >= 1 && std::isfinite(alpha), "dirichlet_approx requires Q >= 1 and finite alpha");
  alpha -= std::floor(alpha);
  if (alpha >= 1) alpha = 0;
  const double Qc = std::min(std::floor(Q), 0x1p62);
  const auto Qi = static_cast<unsigned __int128>(Qc);
  if (alpha == 0) return {0, 1, 0};
  // first partial quotient already exceeds Q: the convergent is 0/1 (or 1/1)
  if (alpha * (Qc + 1) <= 1) return {0, 1, alpha};
  if ((1 - alpha) * (Qc + 1) <= 1) return {1, 1, 1 - alpha};

  // alpha = m / 2^shift exactly, shift <= 53 + 63
  int exp2 = 0;
  const double mant = std::frexp(alpha, &exp2);
  using u128 = unsigned __int128;
  u128 r_num = static_cast<u128>(std::ldexp(mant, 53));
  u128 r_den = u128{1} << (53 - exp2);
  u128 p_prev = 1, q_prev = 0, p = 0, q = 1;
  while (r_num != 0) {
    const u128 a = r_den / r_num;
    if (a > (Qi - q_prev) / q) break;  // next denominator would exceed Q
    const u128 p_next = a * p + p_prev;
    const u128 q_next = a * q + q_prev;
    p_prev = p;
    q_prev = q;
    p = p_next;
    q = q_next;
    const u128 rem = r_den - a * r_num;
    r_den = r_num;
    r_num = rem;
  }
  RationalApprox out;
  out.a = static_cast<int64_t>(p);
  out.q = static_cast<uint64_t>(q);
  out.err = std::abs(std::fma(alpha, static_cast<double>(out.q), -static_cast<double>(out.a))) / static_cast<double>(out.q);
  return out;
}

ArcLabel classify_arc(double alpha, double W, double Q1) {
  require(W >= 1 && Q1 > W, "classify_arc requires W >= 1 and Q1 > W");
  const auto r = dirichlet_approx(alpha, Q1);
  ArcLabel l;
  l.alpha = alpha;
  l.a = r.a;
  l.q = r.q;
  l.err = r.err;
  l.major = static_cast<double>(r.q) <= W;
  l.W = W;
  l.Q1 = Q1;
  return l;
}

double major_arc_measure(double W, double Q1) {
  require(W >= 1 && Q1 > W, "major_arc_measure requires W >= 1 and Q1 > W");
  double m = 0;
  for (uint64_t q = 1; static_cast<double>(q) <= W; ++q) m += static_cast<double>(euler_phi(q)) * 2 / (static_cast<double>(q) * Q1);
  return m;
}

SupScanResult sup_scan(const RealTable& f, double X, double H, const SupScanOptions& opts) {
  require(opts.q_max >= 1 && opts.grid >= 1, "sup_scan requires q_max >= 1 and grid >= 1");
  // f is real, so the integral at 1 - alpha equals the one at alpha: scan [0, 1/2]
  std::vector<double> alphas;
  for (uint64_t q = 1; q <= opts.q_max; ++q)
    for (uint64_t a = 0; 2 * a <= q; ++a)
      if (std::gcd(a, q) == 1) alphas.push_back(static_cast<double>(a) / static_cast<double>(q));
  for (uint64_t k = 0; 2 * k <= opts.grid; ++k) alphas.push_back(static_cast<double>(k) / static_cast<double>(opts.grid));
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
  if (alphas.size() > opts.max_candidates) fail_budget("sup_scan: too many candidate frequencies");

  std::vector<double> values(alphas.size());
  parallel_indexed(alphas.size(), opts.exec, [&](size_t i) { values[i] = fourier_integral(f, X, H, alphas[i]); });

  SupScanResult r;
  r.best_alpha = alphas[0];
  r.value = values[0];
  for (size_t i = 1; i < alphas.size(); ++i)
    if (values[i] > r.value) {
      r.value = values[i];
      r.best_alpha = alphas[i];
    }
  r.scanned.reserve(alphas.size());
  for (size_t i = 0; i < alphas.size(); ++i) r.scanned.emplace_back(alphas[i], values[i]);
  const double W = opts.W > 0 ? opts.W : static_cast<double>(opts.q_max);
  double Q1 = opts.Q1 > 0 ? opts.Q1 : std::max(X, 2 * W);
  if (Q1 <= W) Q1 = 2 * W;
  r.arc = classify_arc(r.best_alpha, W, Q1);
  return r;
}

// ---------------------------------------------------------------------------
// Vinogradov sum

VinogradovSum vinogradov_sum(double alpha, double H, double P, int64_t a, uint64_t q) {
  require(H > 1 && P > 1, "vinogradov_sum requires H, P > 1");
  require(q >= 1, "vinogradov_sum requires q >= 1");
  VinogradovSum v;
  v.a = a;
  v.q = q;
  CompensatedSum s;
  const uint64_t top = floor_u(P);
  for (uint64_t n = 1; n <= top; ++n) {
    const double cap = H / static_cast<double>(n);
    const double d = dist_to_int(n, alpha);
    s.add(d == 0 ? cap : std::min(cap, 1 / d));
  }
  v.value = s.value();
  const auto qd = static_cast<double>(q);
  v.bound = H / qd + H / P + (P + qd) * std::log(2 * qd);
  v.ratio = v.value / v.bound;
  return v;
}

VinogradovSum vinogradov_sum(double alpha, double H, double P) {
  const auto r = dirichlet_approx(alpha, std::max(H, 1.0));
  return vinogradov_sum(alpha, H, P, r.a, r.q);
}

std::vector<VinogradovCase> vinogradov_regression_matrix(uint64_t seed, size_t count) {
  CounterRng rng(seed, "vinogradov-matrix");
  std::vector<VinogradovCase> out;
  out.reserve(count);
  while (out.size() < count) {
    const double H = std::floor(std::exp2(8 + 9 * rng.uniform()));
    const uint64_t q = rng.between(2, static_cast<uint64_t>(H / 16));
    uint64_t a = 1;
    do a = rng.between(1, q - 1);
    while (std::gcd(a, q) != 1);
    const double qd = static_cast<double>(q);
    const double theta = (2 * rng.uniform() - 1) / (qd * qd);
    const double alpha = static_cast<double>(a) / qd + theta;
    const auto P = static_cast<double>(rng.between(q, static_cast<uint64_t>(H)));
    if (P <= 1) continue;
    out.push_back({alpha, H, P, static_cast<int64_t>(a), q});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dirichlet polynomials

double DirichletPoly::sum_sq() const {
  CompensatedSum s;
  for (const auto& c : coeffs) s.add(std::norm(c));
  return s.value();
}

uint64_t DirichletPoly::terms() const {
  return static_cast<uint64_t>(std::count_if(coeffs.begin(), coeffs.end(), [](auto c) { return c != 0.0; }));
}

namespace {

struct Term {
  uint64_t n;
  std::complex<double> a;
  double log_n;
};

std::vector<Term> nonzero_terms(const DirichletPoly& poly) {
  std::vector<Term> t;
  for (size_t i = 0; i < poly.coeffs.size(); ++i)
    if (poly.coeffs[i] != 0.0) {
      const uint64_t n = poly.lo + i;
      t.push_back({n, poly.coeffs[i], std::log(static_cast<double>(n))});
    }
  return t;
}

}  // namespace

std::complex<double> dirichlet_eval(const DirichletPoly& poly, double t) {
  ComplexSum s;
  for (const auto& term : nonzero_terms(poly)) s.add(term.a * std::polar(1.0, -t * term.log_n));
  return s.value();
}

double mean_value_exact_interval(const DirichletPoly& poly, double T0, double T1, Exec exec) {
  require(poly.lo >= 1, "Dirichlet polynomial support starts at n >= 1");
  require(T1 >= T0, "mean value requires T1 >= T0");
  const auto terms = nonzero_terms(poly);
  const double mid = 0.5 * (T0 + T1);
  const double half = 0.5 * (T1 - T0);
  // row i collects the pairs (i, j > i):
  // 2 Re(a_i conj(a_j) e(mid L / 2pi) 2 sin(half L) / L), L = log(n_j / n_i)
  std::vector<double> rows(terms.size(), 0.0);
  parallel_indexed(terms.size(), exec, [&](size_t i) {
    CompensatedSum s;
    const double ni = static_cast<double>(terms[i].n);
    for (size_t j = i + 1; j < terms.size(); ++j) {
      const double L = std::log1p(static_cast<double>(terms[j].n - terms[i].n) / ni);
      const std::complex<double> prod = terms[i].a * std::conj(terms[j].a);
      const std::complex<double> phase = std::polar(1.0, mid * L);
      s.add(2 * (prod * phase).real() * 2 * std::sin(half * L) / L);
    }
    rows[i] = s.value();
  });
  CompensatedSum total;
  for (const auto& t : terms) total.add((T1 - T0) * std::norm(t.a));
  for (const double r : rows) total.add(r);
  return total.value();
}

double mean_value_exact(const DirichletPoly& poly, double T, Exec exec) {
  require(T >= 0, "mean value requires T >= 0");
  return mean_value_exact_interval(poly, -T, T, exec);
}

std::vector<double> mean_value_quadrature(const DirichletPoly& poly, double T0, const std::vector<double>& checkpoints,
                                          double step) {
  require(step > 0, "quadrature step must be positive");
  const auto terms = nonzero_terms(poly);
  std::vector<double> seg(checkpoints.size(), 0.0);
  if (terms.empty()) return seg;
  // |D(it)|^2 is band-limited by log(n_max / n_min); keep h * bandwidth <= 0.1
  const double band = terms.back().log_n - terms.front().log_n;
  const double h_max = band > 0 ? std::min(step, 0.1 / band) : step;
  parallel_indexed(checkpoints.size(), Exec::parallel, [&](size_t k) {
    const double a = k == 0 ? T0 : checkpoints[k - 1];
    const double b = checkpoints[k];
    require(b >= a, "checkpoints must ascend");
    if (b == a) return;
    uint64_t m = static_cast<uint64_t>(std::ceil((b - a) / h_max));
    m += m % 2;
    const double h = (b - a) / static_cast<double>(m);
    std::vector<std::complex<double>> ph(terms.size());
    std::vector<std::complex<double>> rot(terms.size());
    for (size_t i = 0; i < terms.size(); ++i) {
      ph[i] = terms[i].a * std::polar(1.0, -a * terms[i].log_n);
      rot[i] = std::polar(1.0, -h * terms[i].log_n);
    }
    CompensatedSum s;
    for (uint64_t j = 0; j <= m; ++j) {
      if (j > 0 && j % 512 == 0) {
        // reseed the phasors against drift
        const double t = a + h * static_cast<double>(j);
        for (size_t i = 0; i < terms.size(); ++i) ph[i] = terms[i].a * std::polar(1.0, -t * terms[i].log_n);
      }
      std::complex<double> d = 0;
      for (const auto& p : ph) d += p;
      const double w = (j == 0 || j == m) ? 1 : (j % 2 ? 4 : 2);
      s.add(w * std::norm(d));
      for (size_t i = 0; i < terms.size(); ++i) ph[i] *= rot[i];
    }
    seg[k] = s.value() * h / 3;
  });
  std::vector<double> cumulative(seg.size());
  CompensatedSum run;
  for (size_t k = 0; k < seg.size(); ++k) {
    run.add(seg[k]);
    cumulative[k] = run.value();
  }
  return cumulative;
}

DirichletPoly restricted_liouville_poly(const TypicalParams& params, uint64_t d, const DirichletCharacter& chi,
                                        uint64_t Y, bool full_range) {
  require(Y >= 1, "polynomial support requires Y >= 1");
  const uint64_t lo = Y;
  const uint64_t hi = 2 * Y + 1;
  const auto lambda = sieve_block(FunctionId::liouville(), lo, hi);
  std::optional<MembershipTable> member;
  if (!full_range) member = build_membership(params, d, lo, hi);
  DirichletPoly p;
  p.lo = lo;
  p.tag = full_range ? "lambda*chi/n" : "1_Sd*lambda*chi/n";
  p.coeffs.resize(hi - lo);
  const auto lv = lambda.values<int8_t>();
  for (uint64_t n = lo; n < hi; ++n) {
    if (member && !member->test(n)) continue;
    p.coeffs[n - lo] = static_cast<double>(lv[n - lo]) * chi(n) / static_cast<double>(n);
  }
  return p;
}

MeanValueProfile twisted_mean_value_profile(const TypicalParams& params, uint64_t d, const DirichletCharacter& chi,
                                            uint64_t Y, double T, uint32_t steps, const MeanValueProfileOptions& opts) {
  require(params.mode == ProfileMode::explicit_endpoints, "mean value profile requires an explicit-interval profile");
  require(steps >= 1 && T > 0, "mean value profile requires steps >= 1, T > 0");
  MeanValueProfile r;
  r.Y = Y;
  r.T = T;
  const double logX = std::log(params.X);
  r.B = opts.B.value_or(11 * params.A);
  r.T0 = opts.T0.value_or(std::min(std::pow(logX, 2 * r.B), T / 2));
  require(r.T0 >= 0 && r.T0 < T, "mean value profile requires 0 <= T0 < T");

  const auto poly = restricted_liouville_poly(params, d, chi, Y, opts.full_range);
  r.terms = poly.terms();
  r.sum_sq = poly.sum_sq();
  r.trivial_bound = T * r.sum_sq;
  r.target = (params.I1.hi * T / static_cast<double>(Y) + 1) * std::pow(logX, -r.B);

  std::vector<double> ts(steps);
  for (uint32_t k = 0; k < steps; ++k) ts[k] = r.T0 + (T - r.T0) * static_cast<double>(k + 1) / steps;
  ts.back() = T;
  const auto cum = mean_value_quadrature(poly, r.T0, ts, opts.step);
  for (uint32_t k = 0; k < steps; ++k) r.checkpoints.emplace_back(ts[k], cum[k]);
  r.quadrature_total = cum.back();
  const double pairs = 0.5 * static_cast<double>(r.terms) * static_cast<double>(r.terms);
  if (pairs <= opts.exact_pair_budget) {
    r.exact_total = mean_value_exact_interval(poly, r.T0, T, opts.exec);
    const double scale = std::max(std::abs(*r.exact_total), 1e-300);
    r.relative_gap = r.terms ? std::abs(r.quadrature_total - *r.exact_total) / scale : 0.0;
  }
  return r;
}

ShortIntervalVariance short_interval_variance(const TypicalParams& params, uint64_t d, const DirichletCharacter& chi,
                                              uint64_t Y, double h) {
  require(Y >= 1 && h > 0, "short-interval variance requires Y >= 1, h > 0");
  ShortIntervalVariance r;
  r.Y = Y;
  r.h = h;
  r.target = static_cast<double>(Y) / std::pow(params.W, 10);
  const uint64_t lo = Y;
  const uint64_t hi = floor_u(2 * static_cast<double>(Y) + h) + 1;
  const auto lambda = sieve_block(FunctionId::liouville(), lo, hi);
  const auto member = build_membership(params, d, lo, hi);
  std::vector<std::complex<double>> z(hi - lo, {0, 0});
  const auto lv = lambda.values<int8_t>();
  for (uint64_t m = lo; m < hi; ++m)
    if (member.test(m)) z[m - lo] = static_cast<double>(lv[m - lo]) * chi(m);
  CompensatedSum total;
  sweep_windows(static_cast<double>(Y), 2 * static_cast<double>(Y), h, lo, z,
                [&](double len, std::complex<double> s) { total.add(len * std::norm(s / h)); });
  r.J = total.value();
  return r;
}

DecayCurve prime_poly_decay(uint64_t P, uint64_t Q, const DirichletCharacter& chi, const std::vector<double>& t_grid,
                            std::optional<double> log_X) {
  DecayCurve c;
  c.log_X = log_X.value_or(std::log(static_cast<double>(std::max<uint64_t>(Q, 2))));
  std::vector<uint64_t> primes;
  if (Q >= P) primes = primes_in(std::max<uint64_t>(P, 2), Q + 1);
  double num = 0;
  double den = 0;
  for (const double t : t_grid) {
    ComplexSum s;
    for (const uint64_t p : primes) {
      const auto pd = static_cast<double>(p);
      s.add(chi(p) * std::polar(1.0 / pd, -t * std::log(pd)));
    }
    const double v = std::abs(s.value());
    const double ref = c.log_X / (1 + std::abs(t));
    num += v * ref;
    den += ref * ref;
    c.points.push_back({t, v, ref});
  }
  c.c = den > 0 ? num / den : 0.0;
  for (auto& p : c.points) p.reference *= c.c;
  return c;
}

DecouplingCheck fourier_decoupling_check(const Series& f, const Series& g, uint64_t X, uint64_t H,
                                         const SupScanOptions& scan) {
  require(X >= 1 && X <= 10000 && H <= 64, "decoupling check requires 1 <= X <= 10^4, H <= 64");
  const RealTable ft(f, 1, X + 2 * H + 1);
  const RealTable gt(g, 1, X + 2 * H + 1);
  DecouplingCheck r;
  CompensatedSum F;
  for (const double v : ft.values()) F.add(v * v);
  r.F = F.value();
  CompensatedSum lhs;
  for (int64_t h = -static_cast<int64_t>(H); h <= static_cast<int64_t>(H); ++h) {
    CompensatedSum s;
    for (uint64_t n = 1; n <= X; ++n) {
      const int64_t m = static_cast<int64_t>(n) + h;
      if (m >= 1) s.add(ft[n] * gt[static_cast<uint64_t>(m)]);
    }
    lhs.add(s.value() * s.value());
  }
  r.lhs = lhs.value();
  const auto sup = sup_scan(gt, static_cast<double>(X), 2 * static_cast<double>(H), scan);
  r.sup_value = sup.value;
  r.best_alpha = sup.best_alpha;
  r.rhs = r.F * sup.value;
  r.ratio = r.rhs > 0 ? r.lhs / r.rhs : (r.lhs > 0 ? std::numeric_limits<double>::infinity() : 0.0);
  return r;
}

}  // namespace msl
