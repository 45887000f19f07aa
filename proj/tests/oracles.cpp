#include "oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

namespace oracle {

std::vector<std::pair<uint64_t, uint32_t>> factor(uint64_t n) {
  std::vector<std::pair<uint64_t, uint32_t>> out;
  for (uint64_t p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    uint32_t a = 0;
    while (n % p == 0) {
      n /= p;
      ++a;
    }
    out.emplace_back(p, a);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

int mobius(uint64_t n) {
  int s = 1;
  for (auto [p, a] : factor(n)) {
    if (a > 1) return 0;
    s = -s;
  }
  return s;
}

int liouville(uint64_t n) {
  int s = 1;
  for (auto [p, a] : factor(n))
    if (a % 2) s = -s;
  return s;
}

double von_mangoldt(uint64_t n) {
  auto f = factor(n);
  return f.size() == 1 ? std::log(static_cast<double>(f[0].first)) : 0.0;
}

uint64_t divisor_k(uint32_t k, uint64_t n) {
  // multiplicative: d_k(p^a) = C(a+k-1, k-1)
  uint64_t r = 1;
  for (auto [p, a] : factor(n)) {
    uint64_t c = 1;
    for (uint64_t i = 1; i <= a; ++i) c = c * (k - 1 + i) / i;
    r *= c;
  }
  return r;
}

uint64_t spf(uint64_t n) {
  if (n == 1) return 1;
  return factor(n).front().first;
}

bool is_prime(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t p = 2; p * p <= n; ++p)
    if (n % p == 0) return false;
  return true;
}

uint64_t ordered_factorizations(uint32_t k, uint64_t n) {
  if (k == 1) return 1;
  uint64_t total = 0;
  for (uint64_t d = 1; d <= n; ++d)
    if (n % d == 0) total += ordered_factorizations(k - 1, n / d);
  return total;
}

int64_t mertens(uint64_t X) {
  int64_t s = 0;
  for (uint64_t n = 1; n <= X; ++n) s += mobius(n);
  return s;
}

uint64_t prime_pi(uint64_t X) {
  uint64_t c = 0;
  for (uint64_t n = 2; n <= X; ++n) c += is_prime(n);
  return c;
}

uint64_t gcd(uint64_t a, uint64_t b) {
  while (b) {
    a %= b;
    std::swap(a, b);
  }
  return a;
}

uint64_t euler_phi(uint64_t n) {
  uint64_t c = 0;
  for (uint64_t a = 1; a <= n; ++a) c += gcd(a, n) == 1;
  return c;
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  double err = 0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 30, rel_tol, &err);
}

}  // namespace oracle
