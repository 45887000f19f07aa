#pragma once

// Typical-factorization sets S and S_d: integers with a prime factor in each
// of two intervals [P1, Q1] and [P2, Q2], together with the parameter
// profile that fixes the intervals, the Ramare weighting and the sieve
// complement counts.

#include <boost/rational.hpp>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "msl/parallel.hpp"
#include "msl/sieve.hpp"

namespace msl {

enum class ProfileMode { paper, explicit_endpoints };

/// Closed real interval [lo, hi]. Membership of an integer compares the
/// exactly-converted integer against the real endpoints.
struct Interval {
  double lo = 0;
  double hi = 0;

  bool contains(uint64_t p) const {
    const auto v = static_cast<double>(p);  // exact below 2^53
    return v >= lo && v <= hi;
  }
  bool empty() const { return hi < lo; }
};

struct TypicalParams {
  double X = 0;
  double H = 0;
  double A = 0;
  double delta = 0;
  double psi = 0;  // log H / log log X
  double W = 0;    // (log X)^A
  Interval I1;
  Interval I2;
  ProfileMode mode = ProfileMode::paper;

  /// min{psi, (log X)^{1/3 - delta}}.
  double psi_delta() const;
};

/// Builds and validates a profile. X and H are reals because the formula
/// mode is also used symbolically far beyond 64-bit ranges.
///
/// Paper mode: P1 = (log X)^{33A}, Q1 = (log X)^{psi - 4A},
/// P2 = exp((log X)^{2/3 + delta/2}), Q2 = exp((log X)^{1 - delta/2});
/// rejects psi <= 37A and P2 > Q2.
/// Explicit mode: requires 2 <= P1 <= Q1 < P2 <= Q2.
TypicalParams derive_profile(double X, double H, double A, double delta, ProfileMode mode,
                             std::optional<std::pair<Interval, Interval>> endpoints = std::nullopt);

/// True iff n has a prime factor in each interval (no n <= X cutoff).
bool has_typical_factorization(uint64_t n, const TypicalParams& params, const ArithmeticTable& spf);

/// n in S(X, A, delta). Requires 1 <= n <= X and spf covering n.
bool membership(uint64_t n, const TypicalParams& params, const ArithmeticTable& spf);
/// m in S_d. Requires d < P1 and 1 <= m <= X/d.
bool membership_refined(uint64_t m, uint64_t d, const TypicalParams& params, const ArithmeticTable& spf);

/// Streaming predicate over [lo, hi): out[i] = has_typical_factorization(lo + i).
void typical_factorization_block(const TypicalParams& params, uint64_t lo, uint64_t hi, std::span<uint8_t> out);

struct MembershipTable {
  TypicalParams params;
  uint64_t d = 1;
  uint64_t lo = 1;
  uint64_t hi = 1;
  std::vector<uint8_t> bits;

  bool test(uint64_t m) const { return m >= lo && m < hi && bits[m - lo] != 0; }
  uint64_t count() const;
};

/// Membership in S_d over [lo, hi). With `apply_cutoff` the bound
/// m <= X/d is enforced; without it only the factorization property is
/// recorded (correlation windows run past X).
MembershipTable build_membership(const TypicalParams& params, uint64_t d, uint64_t lo, uint64_t hi,
                                 bool apply_cutoff = true, Exec exec = Exec::parallel);

using Rational = boost::rational<int64_t>;

struct RamareTerm {
  uint64_t p;
  Rational weight;
};

/// One term per prime p in [P, Q] dividing n, with weight
/// 1 / (#{q in [P, Q] prime : q | n/p} + [p does not divide n/p]).
/// The weights sum to exactly 1 when the list is non-empty.
std::vector<RamareTerm> ramare_decompose(uint64_t n, double P, double Q);

struct ComplementCount {
  uint64_t exact = 0;           // #{p <= X : q does not divide p+h for all primes q in [P, Q]}
  uint64_t pi_X = 0;
  double mertens_prediction = 0;   // pi(X) prod (1 - 1/q)
  double adjusted_prediction = 0;  // pi(X) prod_{q not dividing h} (1 - 1/(q - 1))
  double ratio = 0;                // exact / mertens_prediction
  double adjusted_ratio = 0;       // exact / adjusted_prediction
};
ComplementCount complement_count(uint64_t X, double P, double Q, uint64_t h, const SieveConfig& cfg = {});

struct ComplementDensity {
  double rho1 = 0;  // log P1 / log Q1
  double rho2 = 0;
  double predicted_outside = 0;  // rho1 + rho2 - rho1 rho2
};
ComplementDensity complement_density(const TypicalParams& params);

/// Exhaustive fraction of n <= X (X <= params.X) lying outside S.
double measured_outside_fraction(const TypicalParams& params, uint64_t X, Exec exec = Exec::parallel);

}  // namespace msl
