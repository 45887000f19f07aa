#pragma once

// Test-only reference implementations. Nothing here calls into the sieve
// code; every value is derived by trial division or direct enumeration.

#include <complex>
#include <functional>
#include <cstdint>
#include <utility>
#include <vector>

namespace oracle {

/// (prime, exponent) pairs by trial division.
std::vector<std::pair<uint64_t, uint32_t>> factor(uint64_t n);

int mobius(uint64_t n);
int liouville(uint64_t n);
double von_mangoldt(uint64_t n);
uint64_t divisor_k(uint32_t k, uint64_t n);
uint64_t spf(uint64_t n);
bool is_prime(uint64_t n);

/// Number of ordered k-tuples of positive integers with product n, by
/// recursive enumeration over divisors.
uint64_t ordered_factorizations(uint32_t k, uint64_t n);

int64_t mertens(uint64_t X);
uint64_t prime_pi(uint64_t X);

uint64_t gcd(uint64_t a, uint64_t b);
uint64_t euler_phi(uint64_t n);

/// Adaptive Gauss-Kronrod integral of a real function on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-12);

}  // namespace oracle
