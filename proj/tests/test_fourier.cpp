#include <cmath>
#include <numbers>
#include <numeric>

#include "doctest.h"
#include "msl/correlations.hpp"
#include "msl/error.hpp"
#include "msl/fourier.hpp"
#include "msl/rng.hpp"
#include "oracles.hpp"

using namespace msl;

namespace {

const double kGolden = (std::sqrt(5.0) - 1) / 2;

Series constant_series(double c) {
  return {"const", [c](uint64_t, uint64_t, std::span<double> out) { std::fill(out.begin(), out.end(), c); }, true};
}

// Quadrature oracle: integrate x -> |F_x(alpha)| piece by piece between the
// points where the window content can change, evaluating F_x from scratch.
double quadrature_window_integral(const RealTable& t, double X, double H, double alpha) {
  std::vector<double> cuts{0, X};
  for (double k = 1; k < X; ++k) cuts.push_back(k);
  for (double m = std::ceil(H); m - H < X; ++m)
    if (m - H > 0) cuts.push_back(m - H);
  std::sort(cuts.begin(), cuts.end());
  double total = 0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    total += oracle::integrate([&](double x) { return std::abs(exp_sum(t, x, H, alpha)); }, cuts[i], cuts[i + 1], 1e-12);
  }
  return total;
}

DirichletPoly random_poly(CounterRng& rng, size_t terms, uint64_t max_n, bool unit) {
  DirichletPoly p;
  p.lo = 1;
  p.coeffs.assign(max_n, {0, 0});
  for (size_t i = 0; i < terms; ++i) {
    const uint64_t n = rng.between(1, max_n);
    const double phase = 2 * std::numbers::pi * rng.uniform();
    const double r = unit ? 1.0 : rng.uniform();
    p.coeffs[n - 1] = std::polar(r, phase);
  }
  return p;
}

}  // namespace

TEST_CASE("phase reduction") {
  CHECK(reduce_phase(0, 0.3) == 0);
  CHECK(reduce_phase(4, 0.5) == 0);
  CHECK(std::abs(reduce_phase(3, 0.5)) == 0.5);
  CHECK(e_n_alpha(3, 0.5) == std::complex<double>(-1, 0));
  // large n: compare against exact rational arithmetic for alpha = k / 2^40
  const double alpha = 123456789.0 / 0x1p40;
  const uint64_t n = 987654321987ULL;
  const unsigned __int128 prod = static_cast<unsigned __int128>(n) * 123456789ULL;
  const uint64_t frac = static_cast<uint64_t>(prod & ((uint64_t{1} << 40) - 1));
  double expect = static_cast<double>(frac) / 0x1p40;
  if (expect >= 0.5) expect -= 1;
  CHECK(reduce_phase(n, alpha) == doctest::Approx(expect).epsilon(1e-15));
  CHECK(dist_to_int(n, alpha) == doctest::Approx(std::abs(expect)).epsilon(1e-15));
}

TEST_CASE("exponential sums") {
  const RealTable mu(arithmetic_series(FunctionId::mobius()), 1, 2000);
  double plain = 0;
  for (uint64_t n = 100; n <= 164; ++n) plain += mu[n];
  CHECK(exp_sum(mu, 100, 64, 0).real() == plain);
  CHECK(exp_sum(mu, 100, 64, 0).imag() == 0);

  const RealTable one(constant_series(1), 1, 2000);
  for (double alpha : {0.1, 0.37, kGolden, 1e-3}) {
    const double x = 10.3, H = 40.5;
    const double count = std::floor(x + H) - std::ceil(x) + 1;
    const auto e = [](double t) { return std::polar(1.0, 2 * std::numbers::pi * t); };
    const auto closed = e(std::ceil(x) * alpha) * (e(count * alpha) - 1.0) / (e(alpha) - 1.0);
    CHECK(std::abs(exp_sum(one, x, H, alpha) - closed) < 1e-11);
  }
  CounterRng rng(4, "conj");
  for (int i = 0; i < 200; ++i) {
    const double alpha = rng.uniform();
    const double x = static_cast<double>(rng.between(1, 1000));
    const auto a = exp_sum(mu, x, 64, alpha);
    const auto b = exp_sum(mu, x, 64, -alpha);
    CHECK(std::abs(b - std::conj(a)) <= 1e-12);
    CHECK(std::abs(a) <= 65);
  }
  CHECK_THROWS_AS(exp_sum(mu, 1990, 64, 0.1), Error);
}

TEST_CASE("window integral") {
  const RealTable zero(constant_series(0), 1, 2000);
  CHECK(fourier_integral(zero, 1000, 16, 0.3) == 0);

  const Series point{"delta", [](uint64_t lo, uint64_t hi, std::span<double> out) {
                       for (uint64_t n = lo; n < hi; ++n) out[n - lo] = n == 500 ? 1.0 : 0.0;
                     },
                     true};
  const RealTable delta(point, 1, 2000);
  CHECK(fourier_integral(delta, 1000, 16, 0.123) == doctest::Approx(16).epsilon(1e-14));
  CHECK(fourier_integral(delta, 1000, 16.5, 0.9) == doctest::Approx(16.5).epsilon(1e-14));

  const RealTable signs(random_sign_series(17), 1, 1100);
  const double exact = fourier_integral(signs, 1000, 16, 1.0 / 3);
  CHECK(exact == doctest::Approx(quadrature_window_integral(signs, 1000, 16, 1.0 / 3)).epsilon(1e-6));

  // 100 random small instances
  CounterRng rng(21, "fint");
  const RealTable mu(arithmetic_series(FunctionId::mobius()), 1, 400);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const double X = static_cast<double>(rng.between(20, 300));
    const double H = static_cast<double>(rng.between(1, 40)) + (i % 2 ? 0.5 : 0.0);
    const double alpha = rng.uniform();
    const RealTable& t = (i % 3 == 0) ? mu : signs;
    const double a = fourier_integral(t, X, H, alpha);
    const double b = quadrature_window_integral(t, X, H, alpha);
    CHECK(std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(b)));
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("sup scan") {
  const RealTable primes(arithmetic_series(FunctionId::prime_indicator()), 1, 10100);
  const auto r = sup_scan(primes, 10000, 64, SupScanOptions{.q_max = 12, .grid = 128});
  CHECK(r.best_alpha == 0);
  CHECK(r.arc.major);
  CHECK(r.value == doctest::Approx(fourier_integral(primes, 10000, 64, 0)));

  const RealTable zero(constant_series(0), 1, 2000);
  CHECK(sup_scan(zero, 1000, 16).value == 0);

  const RealTable signs(random_sign_series(3), 1, 3000);
  double last = 0;
  for (auto [q, g] : {std::pair<uint64_t, uint64_t>{1, 8}, {4, 8}, {4, 32}, {8, 64}, {16, 128}}) {
    const auto s = sup_scan(signs, 2000, 32, SupScanOptions{.q_max = q, .grid = g});
    CHECK(s.value >= last);
    last = s.value;
  }
  const auto serial = sup_scan(signs, 2000, 32, SupScanOptions{.q_max = 8, .grid = 64, .exec = Exec::serial});
  const auto parallel = sup_scan(signs, 2000, 32, SupScanOptions{.q_max = 8, .grid = 64});
  CHECK(serial.best_alpha == parallel.best_alpha);
  CHECK(serial.value == parallel.value);
}

TEST_CASE("dirichlet approximation") {
  auto r = dirichlet_approx(1.0 / 3, 10);
  CHECK(r.a == 1);
  CHECK(r.q == 3);
  CHECK(r.err < 1e-16);
  r = dirichlet_approx(0, 10);
  CHECK(r.a == 0);
  CHECK(r.q == 1);
  CHECK(r.err == 0);
  r = dirichlet_approx(std::numbers::pi - 3, 10);
  CHECK(r.a == 1);
  CHECK(r.q == 7);
  CHECK(r.err == doctest::Approx(std::abs(std::numbers::pi - 3 - 1.0 / 7)).epsilon(1e-9));
  CHECK(r.err == doctest::Approx(1.2644892673e-3).epsilon(1e-8));
  r = dirichlet_approx(std::numbers::pi - 3, 200);
  CHECK(r.q == 113);  // 355/113
  CHECK(r.a == 16);
  r = dirichlet_approx(1e-30, 1e6);
  CHECK(r.q == 1);
  CHECK(r.a == 0);
  r = dirichlet_approx(1 - 1e-12, 1e6);
  CHECK(r.q == 1);
  CHECK(r.a == 1);

  CounterRng rng(8, "dirichlet");
  bool ok = true;
  for (int i = 0; i < 10000; ++i) {
    const double alpha = rng.uniform();
    const double Q = std::floor(std::exp2(1 + 40 * rng.uniform()));
    const auto a = dirichlet_approx(alpha, Q);
    ok = ok && a.q >= 1 && static_cast<double>(a.q) <= Q;
    ok = ok && a.err <= 1 / (static_cast<double>(a.q) * Q);
    ok = ok && std::gcd(static_cast<uint64_t>(a.a), a.q) == 1;
  }
  CHECK(ok);
}

TEST_CASE("arc classification") {
  auto l = classify_arc(0.5, 10, 100);
  CHECK(l.major);
  CHECK(l.q == 2);
  l = classify_arc(3.0 / 37, 10, 100);
  CHECK_FALSE(l.major);
  CHECK(l.q == 37);
  CHECK_THROWS_AS(classify_arc(0.1, 10, 10), Error);

  // empirical major fraction against the nominal arc measure
  CounterRng rng(5, "arcs");
  const int trials = 200000;
  int major = 0;
  for (int i = 0; i < trials; ++i) major += classify_arc(rng.uniform(), 20, 1e4).major;
  const double measure = major_arc_measure(20, 1e4);
  const double frac = static_cast<double>(major) / trials;
  MESSAGE("major fraction " << frac << " vs arc measure " << measure);
  CHECK(frac <= measure * 1.1);
  CHECK(frac >= measure * 0.5);
}

TEST_CASE("vinogradov sums") {
  auto v = vinogradov_sum(0, 100, 10);
  double harmonic = 0;
  for (int n = 1; n <= 10; ++n) harmonic += 100.0 / n;
  CHECK(v.value == doctest::Approx(harmonic).epsilon(1e-14));
  CHECK(v.q == 1);

  v = vinogradov_sum(0.5, 10, 4);
  CHECK(v.value == doctest::Approx(11.5).epsilon(1e-14));
  CHECK(v.q == 2);
  CHECK(v.bound == doctest::Approx(10.0 / 2 + 10.0 / 4 + 6 * std::log(4.0)));

  v = vinogradov_sum(kGolden, 1e4, 1e3);
  CHECK(v.ratio <= 10);

  double worst = 0;
  for (const auto& c : vinogradov_regression_matrix(2024, 400)) {
    REQUIRE(std::abs(c.alpha - static_cast<double>(c.a) / static_cast<double>(c.q)) <= 1.0 / static_cast<double>(c.q * c.q) + 1e-15);
    worst = std::max(worst, vinogradov_sum(c.alpha, c.H, c.P, c.a, c.q).ratio);
  }
  MESSAGE("worst regression ratio " << worst);
  CHECK(worst <= 10);
}

TEST_CASE("mean values of Dirichlet polynomials") {
  DirichletPoly single;
  single.lo = 7;
  single.coeffs = {1};
  CHECK(mean_value_exact(single, 13) == doctest::Approx(26));

  DirichletPoly two;
  two.lo = 5;
  two.coeffs.assign(6, 0);
  two.coeffs[0] = 1;
  two.coeffs[5] = 1;
  const double T = 37;
  CHECK(mean_value_exact(two, T) == doctest::Approx(4 * T + 4 * std::sin(T * std::log(2.0)) / std::log(2.0)).epsilon(1e-13));

  CounterRng rng(6, "mvt");
  for (int i = 0; i < 10; ++i) {
    const auto p = random_poly(rng, 50, 60, false);
    const double exact = mean_value_exact(p, 100);
    const double quad = oracle::integrate([&](double t) { return std::norm(dirichlet_eval(p, t)); }, -100, 100, 1e-12);
    CHECK(exact == doctest::Approx(quad).epsilon(1e-6));
    const double one_sided = mean_value_exact_interval(p, 3, 80);
    const double quad_one = oracle::integrate([&](double t) { return std::norm(dirichlet_eval(p, t)); }, 3, 80, 1e-12);
    CHECK(one_sided == doctest::Approx(quad_one).epsilon(1e-6));
    const auto cum = mean_value_quadrature(p, 3, {10, 40, 80});
    CHECK(cum.back() == doctest::Approx(one_sided).epsilon(1e-6));
  }
  for (int i = 0; i < 20; ++i) {
    const auto p = random_poly(rng, 40, 80, true);
    const double TT = 100.0 * 80;
    const double ratio = mean_value_exact(p, TT) / (2 * TT * p.sum_sq());
    CHECK(ratio >= 0.8);
    CHECK(ratio <= 1.2);
  }
}

TEST_CASE("twisted mean value profile") {
  const auto params = derive_profile(1e6, 1e4, 0.2, 0.1, ProfileMode::explicit_endpoints,
                                     std::make_pair(Interval{5, 50}, Interval{100, 1000}));
  const auto chi4 = character(4, 1);
  const auto r = twisted_mean_value_profile(params, 1, chi4, 5000, 500, 8, MeanValueProfileOptions{.T0 = 10.0});
  CHECK(r.terms > 0);
  REQUIRE(r.exact_total.has_value());
  CHECK(r.relative_gap < 1e-5);
  CHECK(r.checkpoints.size() == 8);
  CHECK(r.checkpoints.back().second == r.quadrature_total);
  for (size_t k = 1; k < r.checkpoints.size(); ++k) CHECK(r.checkpoints[k].second >= r.checkpoints[k - 1].second);
  CHECK(r.quadrature_total <= r.trivial_bound);
  CHECK(r.T0 == 10);

  // default T0 = (log X)^{2B} capped at T/2
  const auto dflt = twisted_mean_value_profile(params, 1, chi4, 2000, 300, 2);
  CHECK(dflt.B == doctest::Approx(2.2));
  CHECK(dflt.T0 == doctest::Approx(std::min(std::pow(std::log(1e6), 4.4), 150.0)));

  // empty S_d: Y beyond X/d
  const auto empty = twisted_mean_value_profile(params, 4, chi4, 400000, 200, 2, MeanValueProfileOptions{.T0 = 10.0});
  CHECK(empty.terms == 0);
  CHECK(empty.quadrature_total == 0);
  CHECK(empty.exact_total.value() == 0);

  // principal character mod 1 on the full range is the plain lambda polynomial
  const auto chi1 = character(1, 0);
  const auto full = twisted_mean_value_profile(params, 1, chi1, 1000, 100, 2,
                                               MeanValueProfileOptions{.T0 = 5.0, .full_range = true});
  DirichletPoly plain;
  plain.lo = 1000;
  for (uint64_t n = 1000; n <= 2000; ++n) plain.coeffs.push_back(oracle::liouville(n) / static_cast<double>(n));
  CHECK(full.exact_total.value() == doctest::Approx(mean_value_exact_interval(plain, 5, 100)).epsilon(1e-12));
}

TEST_CASE("short interval variance") {
  const auto params = derive_profile(1e5, 1e3, 0.2, 0.1, ProfileMode::explicit_endpoints,
                                     std::make_pair(Interval{3, 20}, Interval{30, 500}));
  const auto chi = character(3, 1);
  const auto r = short_interval_variance(params, 1, chi, 300, 12);
  const auto spf = spf_table(1, 1000);
  double q = 0;
  for (double a = 300; a < 600; a += 1) {
    q += oracle::integrate(
        [&](double x) {
          std::complex<double> s = 0;
          for (double m = std::ceil(x); m <= std::floor(x + 12); ++m) {
            const auto n = static_cast<uint64_t>(m);
            if (has_typical_factorization(n, params, spf)) s += static_cast<double>(oracle::liouville(n)) * chi(n);
          }
          return std::norm(s / 12.0);
        },
        a, a + 1, 1e-12);
  }
  CHECK(r.J == doctest::Approx(q).epsilon(1e-9));
  CHECK(r.target == doctest::Approx(300 / std::pow(params.W, 10)));
}

TEST_CASE("prime polynomial decay") {
  const auto chi0 = character(1, 0);
  const auto c = prime_poly_decay(10, 1000, chi0, {0});
  double mertens = 0;
  for (uint64_t p = 10; p <= 1000; ++p)
    if (oracle::is_prime(p)) mertens += 1.0 / static_cast<double>(p);
  CHECK(c.points[0].value == doctest::Approx(mertens).epsilon(1e-13));
  const auto empty = prime_poly_decay(100, 50, chi0, {0, 1});
  CHECK(empty.points[0].value == 0);
  CHECK(empty.c == 0);

  const auto chi4 = character(4, 1);
  const auto d = prime_poly_decay(1000, 100000, chi4, {0, 1, 10, 100});
  REQUIRE(d.points.size() == 4);
  std::complex<double> direct = 0;
  for (uint64_t p = 1001; p <= 100000; p += 2)
    if (oracle::is_prime(p)) direct += chi4(p) * std::polar(1.0 / static_cast<double>(p), -10 * std::log(static_cast<double>(p)));
  CHECK(d.points[2].value == doctest::Approx(std::abs(direct)).epsilon(1e-9));
  MESSAGE("decay: " << d.points[0].value << " " << d.points[1].value << " " << d.points[2].value << " "
                    << d.points[3].value << " c=" << d.c);
}

TEST_CASE("fourier decoupling") {
  const Series zero = constant_series(0);
  const Series prime = arithmetic_series(FunctionId::prime_indicator());
  auto r = fourier_decoupling_check(prime, zero, 500, 8);
  CHECK(r.lhs == 0);
  CHECK(r.rhs == 0);
  r = fourier_decoupling_check(prime, prime, 1000, 16);
  CHECK(r.lhs <= 64 * r.rhs);
  MESSAGE("prime/prime ratio " << r.ratio);
  r = fourier_decoupling_check(zero, arithmetic_series(FunctionId::mobius()), 800, 12);
  CHECK(r.lhs == 0);
  CHECK(r.rhs == 0);
  // direct lhs oracle
  const auto f = arithmetic_series(FunctionId::mobius());
  const auto g = random_sign_series(4);
  r = fourier_decoupling_check(f, g, 300, 5);
  const RealTable gt(g, 1, 400);
  double lhs = 0;
  for (int h = -5; h <= 5; ++h) {
    double s = 0;
    for (int n = 1; n <= 300; ++n)
      if (n + h >= 1) s += oracle::mobius(n) * gt[static_cast<uint64_t>(n + h)];
    lhs += s * s;
  }
  CHECK(r.lhs == doctest::Approx(lhs).epsilon(1e-12));
  CHECK_THROWS_AS(fourier_decoupling_check(f, g, 20000, 5), Error);
}
