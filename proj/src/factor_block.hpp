#pragma once

// Internal block kernels shared by the sieve, typical-set and membership
// code. Not installed.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "msl/sieve.hpp"

namespace msl::detail {

inline uint64_t isqrt(uint64_t n) {
  auto r = static_cast<uint64_t>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

inline uint64_t first_multiple_at_least(uint64_t p, uint64_t lo) {
  return ((lo + p - 1) / p) * p;
}

/// Factors every n in [lo, hi) by dividing out the base primes up to
/// sqrt(hi - 1). Calls on_factor(index, prime, exponent) for each distinct
/// prime factor of lo + index in ascending order of prime; the cofactor
/// above the root (if any) comes last with exponent 1.
template <class OnFactor>
void factor_block(uint64_t lo, uint64_t hi, OnFactor&& on_factor) {
  const uint64_t n = hi - lo;
  std::vector<uint64_t> rem(n);
  for (uint64_t i = 0; i < n; ++i) rem[i] = lo + i;
  const auto root = static_cast<uint32_t>(isqrt(hi - 1));
  const PrimeList primes = primes_up_to(root);
  for (const uint32_t p : primes) {
    for (uint64_t m = first_multiple_at_least(p, lo); m < hi; m += p) {
      const uint64_t i = m - lo;
      uint32_t a = 0;
      do {
        rem[i] /= p;
        ++a;
      } while (rem[i] % p == 0);
      on_factor(i, uint64_t{p}, a);
    }
  }
  for (uint64_t i = 0; i < n; ++i)
    if (rem[i] > 1) on_factor(i, rem[i], 1u);
}

void mobius_block(uint64_t lo, uint64_t hi, std::span<int8_t> out);
void prime_indicator_block(uint64_t lo, uint64_t hi, std::span<int8_t> out);

}  // namespace msl::detail
