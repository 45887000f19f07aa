#include "msl/typical.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "factor_block.hpp"
#include "msl/error.hpp"

namespace msl {

double TypicalParams::psi_delta() const {
  const double logX = std::log(X);
  return std::min(psi, std::pow(logX, 1.0 / 3.0 - delta));
}

TypicalParams derive_profile(double X, double H, double A, double delta, ProfileMode mode,
                             std::optional<std::pair<Interval, Interval>> endpoints) {
  require(X >= 16, "profile requires X >= 16");
  require(H >= 2, "profile requires H >= 2");
  require(A >= 0 && delta >= 0, "profile requires A, delta >= 0");
  TypicalParams p;
  p.X = X;
  p.H = H;
  p.A = A;
  p.delta = delta;
  p.mode = mode;
  const double logX = std::log(X);
  p.psi = std::log(H) / std::log(logX);
  p.W = std::pow(logX, A);
  if (mode == ProfileMode::paper) {
    if (p.psi <= 37 * A)
      fail_validation("degenerate-intervals: psi = " + std::to_string(p.psi) + " <= 37A = " + std::to_string(37 * A));
    p.I1 = {std::pow(logX, 33 * A), std::pow(logX, p.psi - 4 * A)};
    p.I2 = {std::exp(std::pow(logX, 2.0 / 3.0 + delta / 2)), std::exp(std::pow(logX, 1.0 - delta / 2))};
    if (p.I2.empty()) fail_validation("degenerate-intervals: P2 > Q2");
  } else {
    require(endpoints.has_value(), "explicit mode needs interval endpoints");
    p.I1 = endpoints->first;
    p.I2 = endpoints->second;
    const bool ok = 2 <= p.I1.lo && p.I1.lo <= p.I1.hi && p.I1.hi < p.I2.lo && p.I2.lo <= p.I2.hi;
    if (!ok) fail_validation("overlapping-intervals: explicit endpoints need 2 <= P1 <= Q1 < P2 <= Q2");
  }
  return p;
}

namespace {

template <class Visit>
void for_each_prime_factor(uint64_t n, const ArithmeticTable& spf, Visit&& visit) {
  require(spf.function().fn == ArithFn::spf, "spf source must be an spf table");
  while (n > 1) {
    require(spf.contains(n), "spf table does not cover " + std::to_string(n));
    const auto p = static_cast<uint64_t>(spf.integer(n));
    visit(p);
    while (n % p == 0) n /= p;
  }
}

}  // namespace

bool has_typical_factorization(uint64_t n, const TypicalParams& params, const ArithmeticTable& spf) {
  bool one = false;
  bool two = false;
  for_each_prime_factor(n, spf, [&](uint64_t p) {
    one = one || params.I1.contains(p);
    two = two || params.I2.contains(p);
  });
  return one && two;
}

bool membership(uint64_t n, const TypicalParams& params, const ArithmeticTable& spf) {
  require(n >= 1 && static_cast<double>(n) <= params.X, "membership requires 1 <= n <= X");
  return has_typical_factorization(n, params, spf);
}

bool membership_refined(uint64_t m, uint64_t d, const TypicalParams& params, const ArithmeticTable& spf) {
  require(d >= 1 && static_cast<double>(d) < params.I1.lo, "refined membership requires 1 <= d < P1");
  require(m >= 1 && static_cast<double>(m) * static_cast<double>(d) <= params.X, "refined membership requires m <= X/d");
  return has_typical_factorization(m, params, spf);
}

void typical_factorization_block(const TypicalParams& params, uint64_t lo, uint64_t hi, std::span<uint8_t> out) {
  require(lo >= 1 && lo <= hi && out.size() == hi - lo, "bad membership block");
  if (lo == hi) return;
  // bit 0: factor in I1, bit 1: factor in I2
  std::fill(out.begin(), out.end(), uint8_t{0});
  detail::factor_block(lo, hi, [&](uint64_t i, uint64_t p, uint32_t) {
    if (params.I1.contains(p)) out[i] |= 1;
    if (params.I2.contains(p)) out[i] |= 2;
  });
  for (auto& b : out) b = (b == 3) ? 1 : 0;
}

uint64_t MembershipTable::count() const {
  return static_cast<uint64_t>(std::count(bits.begin(), bits.end(), uint8_t{1}));
}

MembershipTable build_membership(const TypicalParams& params, uint64_t d, uint64_t lo, uint64_t hi, bool apply_cutoff,
                                 Exec exec) {
  require(d >= 1 && static_cast<double>(d) < params.I1.lo, "membership table requires 1 <= d < P1");
  require(lo >= 1 && lo < hi, "membership table requires 1 <= lo < hi");
  MembershipTable t;
  t.params = params;
  t.d = d;
  t.lo = lo;
  t.hi = hi;
  t.bits.assign(hi - lo, 0);
  const auto blocks = split_blocks(lo, hi, uint64_t{1} << 18);
  const auto nb = static_cast<int64_t>(blocks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(max_threads(exec)) if (exec == Exec::parallel && nb > 1)
  for (int64_t b = 0; b < nb; ++b)
    typical_factorization_block(params, blocks[b].lo, blocks[b].hi,
                                std::span(t.bits).subspan(blocks[b].lo - lo, blocks[b].hi - blocks[b].lo));
  if (apply_cutoff) {
    const double limit = params.X / static_cast<double>(d);
    for (uint64_t m = lo; m < hi; ++m)
      if (static_cast<double>(m) > limit) t.bits[m - lo] = 0;
  }
  return t;
}

std::vector<RamareTerm> ramare_decompose(uint64_t n, double P, double Q) {
  require(n >= 1, "ramare_decompose requires n >= 1");
  std::vector<RamareTerm> out;
  if (Q < P || n < 2) return out;
  const Interval range{P, Q};
  const auto factors = factorize(n);
  int64_t in_range = 0;
  for (auto [p, a] : factors) in_range += range.contains(p);
  for (auto [p, a] : factors) {
    if (!range.contains(p)) continue;
    // m = n / p keeps p iff a >= 2
    const int64_t count_in_m = in_range - (a >= 2 ? 0 : 1);
    const int64_t p_not_dividing_m = (a >= 2) ? 0 : 1;
    out.push_back({p, Rational(1, count_in_m + p_not_dividing_m)});
  }
  return out;
}

ComplementCount complement_count(uint64_t X, double P, double Q, uint64_t h, const SieveConfig& cfg) {
  require(X >= 2 && h >= 1, "complement_count requires X >= 2, h >= 1");
  require(P >= 2 || Q < P, "complement_count requires P >= 2");
  ComplementCount c;
  const auto primes = primes_in(1, X + 1, cfg);
  c.pi_X = primes.size();
  const Interval range{P, Q};
  double prod = 1;
  double adjusted = 1;
  if (!range.empty()) {
    const double top = std::min(Q, static_cast<double>(X + h));
    for (const uint64_t q : primes_in(static_cast<uint64_t>(std::ceil(P)), static_cast<uint64_t>(std::floor(top)) + 1, cfg)) {
      prod *= 1.0 - 1.0 / static_cast<double>(q);
      if (h % q != 0) adjusted *= 1.0 - 1.0 / static_cast<double>(q - 1);
    }
  }
  if (range.empty()) {
    c.exact = c.pi_X;
  } else {
    // hit[i]: p + h = 1 + h + i has a prime factor in [P, Q]
    const uint64_t lo = 1 + h;
    const uint64_t hi = X + h + 1;
    std::vector<uint8_t> hit(hi - lo, 0);
    const auto blocks = split_blocks(lo, hi, cfg.block_size);
    const auto nb = static_cast<int64_t>(blocks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(max_threads(cfg.exec)) if (cfg.exec == Exec::parallel && nb > 1)
    for (int64_t b = 0; b < nb; ++b) {
      const uint64_t off = blocks[b].lo - lo;
      detail::factor_block(blocks[b].lo, blocks[b].hi, [&](uint64_t i, uint64_t q, uint32_t) {
        if (range.contains(q)) hit[off + i] = 1;
      });
    }
    for (const uint64_t p : primes) c.exact += hit[p + h - lo] == 0;
  }
  c.mertens_prediction = static_cast<double>(c.pi_X) * prod;
  c.adjusted_prediction = static_cast<double>(c.pi_X) * adjusted;
  c.ratio = c.mertens_prediction > 0 ? static_cast<double>(c.exact) / c.mertens_prediction : 0.0;
  c.adjusted_ratio = c.adjusted_prediction > 0 ? static_cast<double>(c.exact) / c.adjusted_prediction : 0.0;
  return c;
}

ComplementDensity complement_density(const TypicalParams& params) {
  ComplementDensity d;
  d.rho1 = std::log(params.I1.lo) / std::log(params.I1.hi);
  d.rho2 = std::log(params.I2.lo) / std::log(params.I2.hi);
  d.predicted_outside = d.rho1 + d.rho2 - d.rho1 * d.rho2;
  return d;
}

double measured_outside_fraction(const TypicalParams& params, uint64_t X, Exec exec) {
  require(X >= 1 && static_cast<double>(X) <= params.X, "measured fraction requires 1 <= X <= params.X");
  std::vector<uint8_t> bits(X);
  const auto blocks = split_blocks(1, X + 1, uint64_t{1} << 18);
  const auto nb = static_cast<int64_t>(blocks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(max_threads(exec)) if (exec == Exec::parallel && nb > 1)
  for (int64_t b = 0; b < nb; ++b)
    typical_factorization_block(params, blocks[b].lo, blocks[b].hi,
                                std::span(bits).subspan(blocks[b].lo - 1, blocks[b].hi - blocks[b].lo));
  const auto inside = std::count(bits.begin(), bits.end(), uint8_t{1});
  return 1.0 - static_cast<double>(inside) / static_cast<double>(X);
}

}  // namespace msl
