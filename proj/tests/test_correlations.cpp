#include <cmath>
#include <numbers>

#include "doctest.h"
#include "msl/correlations.hpp"
#include "msl/error.hpp"
#include "msl/rng.hpp"
#include "oracles.hpp"

using namespace msl;

namespace {

double oracle_value(FunctionId id, uint64_t n) {
  switch (id.fn) {
    case ArithFn::mobius: return oracle::mobius(n);
    case ArithFn::liouville: return oracle::liouville(n);
    case ArithFn::von_mangoldt: return oracle::von_mangoldt(n);
    case ArithFn::divisor: return static_cast<double>(oracle::divisor_k(id.k, n));
    case ArithFn::prime_indicator: return oracle::is_prime(n);
    case ArithFn::one: return 1;
    case ArithFn::spf: return static_cast<double>(oracle::spf(n));
  }
  return 0;
}

std::vector<double> oracle_table(FunctionId id, uint64_t N) {
  std::vector<double> v(N + 1, 0.0);
  for (uint64_t n = 1; n <= N; ++n) v[n] = oracle_value(id, n);
  return v;
}

}  // namespace

TEST_CASE("shifted correlation examples") {
  const auto one = shifted_correlation(FunctionId::one(), 1000, 20);
  for (const double c : one.C) CHECK(c == 168);
  CHECK(one.normalizer == 168);

  const auto mu = shifted_correlation(FunctionId::mobius(), 10, 3);
  CHECK(mu.C0 == -4);  // -pi(10)
  CHECK(mu.at(1) == 0);

  const auto mu_direct = shifted_correlation(FunctionId::mobius(), 10, 3, CorrelationBase::primes,
                                             CorrelationOptions{.method = CorrMethod::direct});
  CHECK(mu_direct.C == mu.C);
  CHECK(mu_direct.diag.used == CorrMethod::direct);
  CHECK_THROWS_AS(shifted_correlation(FunctionId::mobius(), 10, 11), Error);
  CHECK_THROWS_AS(shifted_correlation(FunctionId::mobius(), 1, 1), Error);
}

TEST_CASE("fft and direct agree exactly on integer correlands") {
  const FunctionId ids[] = {FunctionId::mobius(), FunctionId::liouville(), FunctionId::one(), FunctionId::divisor(2)};
  for (auto [X, H] : {std::pair<uint64_t, uint64_t>{10000, 64}, {100000, 256}}) {
    for (const auto id : ids) {
      const auto fft = shifted_correlation(id, X, H);
      const auto direct =
          shifted_correlation(id, X, H, CorrelationBase::primes, CorrelationOptions{.method = CorrMethod::direct});
      CHECK(fft.diag.used == CorrMethod::fft);
      CHECK_FALSE(fft.diag.fell_back);
      CHECK(fft.diag.rounded);
      CHECK(fft.diag.max_rounding_deviation < 0.49);
      CHECK(fft.diag.error_bound < 0.49);
      CHECK(fft.C == direct.C);
      CHECK(fft.C0 == direct.C0);
      // mass bound |C(h)| <= sum_{p <= X} |f(p + h)| <= pi(X) max|f|
      for (const double c : fft.C) CHECK(std::abs(c) <= fft.normalizer * (id.fn == ArithFn::divisor ? 1e9 : 1));
    }
  }
}

TEST_CASE("correlation against an independent double loop") {
  const uint64_t X = 3000, H = 40;
  const auto primes = oracle_table(FunctionId::prime_indicator(), X);
  for (const auto id : {FunctionId::mobius(), FunctionId::divisor(3), FunctionId::von_mangoldt()}) {
    const auto f = oracle_table(id, X + H);
    const auto rep = shifted_correlation(id, X, H);
    for (uint64_t h = 0; h <= H; ++h) {
      double s = 0;
      for (uint64_t p = 2; p <= X; ++p)
        if (primes[p] != 0) s += f[p + h];
      CHECK(rep.at(h) == doctest::Approx(s).epsilon(1e-12));
    }
  }
  const auto ints = shifted_correlation(FunctionId::mobius(), X, H, CorrelationBase::integers);
  CHECK(ints.normalizer == X);
  double s = 0;
  for (uint64_t n = 1; n <= X; ++n) s += oracle::mobius(n + 7);
  CHECK(ints.at(7) == s);
}

TEST_CASE("small FFT blocks, block order and thread policy do not change the result") {
  CorrelationOptions small{.fft_block = 1000};
  const auto a = shifted_correlation(FunctionId::mobius(), 50000, 128);
  const auto b = shifted_correlation(FunctionId::mobius(), 50000, 128, CorrelationBase::primes, small);
  CHECK(b.diag.blocks == 50);
  CHECK(a.C == b.C);
  auto shuffled = small;
  shuffled.block_order_seed = 77;
  const auto c = shifted_correlation(FunctionId::mobius(), 50000, 128, CorrelationBase::primes, shuffled);
  CHECK(c.aggregate == b.aggregate);
  CorrelationOptions serial{.method = CorrMethod::direct, .exec = Exec::serial, .block_order_seed = 5};
  const auto d = shifted_correlation(FunctionId::mobius(), 50000, 128, CorrelationBase::primes, serial);
  CHECK(d.C == a.C);
  CHECK(d.aggregate == a.aggregate);
}

TEST_CASE("fallback to direct when the FFT bound is too loose") {
  // d_5 values reach the thousands; a huge block drives the bound up
  const Series w = arithmetic_series(FunctionId::divisor(6));
  const Series f = arithmetic_series(FunctionId::divisor(6));
  CorrelationDiagnostics diag;
  const auto c = cross_correlate(w, f, 200000, 8, {}, &diag);
  CorrelationDiagnostics direct_diag;
  const auto d = cross_correlate(w, f, 200000, 8, CorrelationOptions{.method = CorrMethod::direct}, &direct_diag);
  CHECK(diag.error_bound > kFftFallbackThreshold);
  CHECK(diag.fell_back);
  CHECK(diag.used == CorrMethod::direct);
  CHECK(c == d);
}

TEST_CASE("restricted correlation decomposes exactly") {
  const auto params = derive_profile(1e5, 64, 1, 0.1, ProfileMode::explicit_endpoints,
                                     std::make_pair(Interval{5, 50}, Interval{100, 1000}));
  const auto r = restricted_shifted_correlation(FunctionId::mobius(), 100000, 64, params);
  CHECK(r.decomposition_gap() == 0);
  // direct-loop oracle for C_S
  const auto spf = spf_table(1, 100000 + 65);
  const auto prime = oracle_table(FunctionId::prime_indicator(), 100000);
  for (uint64_t h : {1u, 2u, 33u, 64u}) {
    double s = 0;
    for (uint64_t p = 2; p <= 100000; ++p)
      if (prime[p] != 0 && has_typical_factorization(p + h, params, spf)) s += oracle::mobius(p + h);
    CHECK(r.restricted.at(h) == s);
  }

  const Series everything{"all", [](uint64_t, uint64_t, std::span<double> out) { std::fill(out.begin(), out.end(), 1.0); }, true};
  const Series nothing{"none", [](uint64_t, uint64_t, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); }, true};
  const auto all = restricted_shifted_correlation(FunctionId::mobius(), 20000, 32, everything);
  CHECK(all.restricted.C == all.full.C);
  const auto none = restricted_shifted_correlation(FunctionId::mobius(), 20000, 32, nothing);
  for (const double c : none.restricted.C) CHECK(c == 0);
  CHECK(none.complement.C == none.full.C);
}

TEST_CASE("chowla sums") {
  const uint64_t zero[] = {0};
  for (uint64_t X : {1u, 10u, 1000u, 10000u}) CHECK(chowla_sum(X, zero) == oracle::mertens(X));
  const uint64_t twelve[] = {1, 2};
  CHECK(chowla_sum(10, twelve) == -2);
  const uint64_t same[] = {5, 5};
  int64_t squarefree = 0;
  for (uint64_t n = 6; n <= 1005; ++n) squarefree += oracle::mobius(n) != 0;
  CHECK(chowla_sum(1000, same) == squarefree);
  const uint64_t three[] = {1, 2, 5};
  int64_t brute = 0;
  for (uint64_t n = 1; n <= 5000; ++n) brute += oracle::mobius(n + 1) * oracle::mobius(n + 2) * oracle::mobius(n + 5);
  SieveConfig small_blocks;
  small_blocks.block_size = 777;
  CHECK(chowla_sum(5000, three, small_blocks) == brute);
  CHECK_THROWS_AS(chowla_sum(10, std::span<const uint64_t>{}), Error);
}

TEST_CASE("averaged chowla") {
  // prime-indicator weight reduces to the shifted correlation
  AveragedChowlaOptions prime_weight{.weight = ChowlaWeight::prime_indicator};
  const auto a = averaged_chowla(20000, 32, 1, {}, prime_weight);
  const auto s = shifted_correlation(FunctionId::mobius(), 20000, 32);
  CHECK(a.sum_abs == doctest::Approx(s.aggregate * 32 * s.normalizer).epsilon(1e-12));

  // H = 1, m = 1, tuple {0}: |sum Lambda(n) mu(n+1)|
  const auto single = averaged_chowla(10000, 1, 1, {0});
  double t = 0;
  for (uint64_t n = 1; n <= 10000; ++n) t += oracle::von_mangoldt(n) * oracle::mobius(n + 1);
  CHECK(single.sum_abs == doctest::Approx(std::abs(t)).epsilon(1e-10));
  CHECK(single.normalized == doctest::Approx(std::abs(t) / 10000).epsilon(1e-10));

  // m = 2 against 64 nested direct sums, with and without a Lambda tuple
  for (const std::vector<uint64_t>& tuple : {std::vector<uint64_t>{}, std::vector<uint64_t>{0}}) {
    const auto two = averaged_chowla(10000, 8, 2, tuple);
    const auto mu = oracle_table(FunctionId::mobius(), 10020);
    double total = 0;
    for (uint64_t h1 = 1; h1 <= 8; ++h1)
      for (uint64_t h2 = 1; h2 <= 8; ++h2) {
        double inner = 0;
        for (uint64_t n = 1; n <= 10000; ++n)
          inner += mu[n + h1] * mu[n + h2] * (tuple.empty() ? 1.0 : oracle::von_mangoldt(n));
        total += std::abs(inner);
      }
    CHECK(two.terms == 64);
    CHECK(two.sum_abs == doctest::Approx(total).epsilon(1e-10));
  }

  CHECK_THROWS_AS(averaged_chowla(1000, 8, 3, {}), Error);
  try {
    averaged_chowla(1000, 8, 3, {});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::budget);
  }

  // sampled mode: deterministic in the seed, and near the exhaustive value for m = 2
  AveragedChowlaOptions sampled{.sampled = true, .samples = 2000, .seed = 9};
  const auto s1 = averaged_chowla(10000, 8, 2, {}, sampled);
  const auto s2 = averaged_chowla(10000, 8, 2, {}, sampled);
  CHECK(s1.sum_abs == s2.sum_abs);
  const auto exact = averaged_chowla(10000, 8, 2, {});
  CHECK(std::abs(s1.normalized - exact.normalized) <= 5 * s1.standard_error + 1e-12);
  const auto s3 = averaged_chowla(5000, 16, 3, {}, sampled, 2.0);
  CHECK(s3.sampled);
  CHECK(s3.reference.value() == doctest::Approx(0.125));
}

TEST_CASE("singular series") {
  const int64_t single[] = {0};
  CHECK(singular_series(single, 1000).value == 1.0);
  CHECK(singular_series(single, 1000).tail_bound == 0.0);
  const int64_t adjacent[] = {0, 1};
  CHECK(singular_series(adjacent, 1000).value == 0.0);
  const int64_t twin[] = {0, 2};
  const auto s = singular_series(twin, 1000000);
  // independent Euler product: 2 prod_{p > 2} (1 - 1/(p-1)^2)
  double prod = 2;
  for (uint64_t p = 3; p <= 1000000; p += 2)
    if (oracle::is_prime(p)) prod *= 1 - 1.0 / static_cast<double>((p - 1) * (p - 1));
  CHECK(s.value == doctest::Approx(prod).epsilon(1e-10));
  CHECK(s.value == doctest::Approx(1.3203236).epsilon(1e-6));
  CHECK(s.tail_bound > 0);
  CHECK(s.tail_bound < 1e-5);
  const int64_t wide[] = {0, 10};
  CHECK_THROWS_AS(singular_series(wide, 7), Error);
  const int64_t dup[] = {3, 3};
  CHECK_THROWS_AS(singular_series(dup, 100), Error);
}

TEST_CASE("hardy-littlewood") {
  const int64_t single[] = {0};
  const auto psi = hl_ktuple(10000, single, 100);
  double cheb = 0;
  for (uint64_t n = 1; n <= 10000; ++n) cheb += oracle::von_mangoldt(n);
  CHECK(psi.lambda_sum == doctest::Approx(cheb).epsilon(1e-12));
  CHECK(psi.prediction == 10000);
  const int64_t adjacent[] = {0, 1};
  const auto dead = hl_ktuple(10000, adjacent, 100);
  CHECK(dead.prediction == 0);
  CHECK_FALSE(dead.ratio.has_value());
  const int64_t twin[] = {0, 2};
  const auto tw = hl_ktuple(1000000, twin, 1000000);
  REQUIRE(tw.ratio.has_value());
  CHECK(std::abs(*tw.ratio - 1) <= 0.1);
}

TEST_CASE("divisor correlations") {
  const auto plain = divisor_mobius_correlation(10000, 16, {}, {});
  const auto ints = shifted_correlation(FunctionId::mobius(), 10000, 16, CorrelationBase::integers);
  CHECK(plain.C == ints.C);
  CHECK(plain.aggregate == ints.aggregate);

  const auto d2 = divisor_mobius_correlation(100, 4, {2}, {0});
  for (uint64_t h = 1; h <= 4; ++h) {
    double s = 0;
    for (uint64_t n = 1; n <= 100; ++n) s += oracle::mobius(n + h) * static_cast<double>(oracle::divisor_k(2, n));
    CHECK(d2.at(h) == s);
  }
  CHECK(d2.normalizer == doctest::Approx(100 * std::log(100.0)));

  const auto ones = divisor_mobius_correlation(2000, 8, {2, 3}, {0, 1}, DivisorCorrelationOptions{.replace_mobius_by_one = true});
  double base = 0;
  for (uint64_t n = 1; n <= 2000; ++n)
    base += static_cast<double>(oracle::divisor_k(2, n) * oracle::divisor_k(3, n + 1));
  for (const double c : ones.C) CHECK(c == base);
  CHECK_THROWS_AS(divisor_mobius_correlation(100, 4, {1}, {0}), Error);
  CHECK_THROWS_AS(divisor_mobius_correlation(100, 4, {2, 2}, {0, 0}), Error);
}

TEST_CASE("exceptional scan") {
  const auto rep = shifted_correlation(FunctionId::mobius(), 100000, 128);
  CHECK(exceptional_scan(rep, 1.0).count == 0);
  const auto all_nonzero = exceptional_scan(rep, 0.0);
  uint64_t nonzero = 0;
  for (const double c : rep.C) nonzero += c != 0;
  CHECK(all_nonzero.count == nonzero);
  CHECK(all_nonzero.fraction == doctest::Approx(static_cast<double>(nonzero) / 128));
  double last = 1;
  for (double eps : {0.0, 0.001, 0.01, 0.05, 0.1}) {
    const auto e = exceptional_scan(rep, eps);
    CHECK(e.fraction <= last);
    last = e.fraction;
  }
}
