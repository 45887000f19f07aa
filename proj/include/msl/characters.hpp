#pragma once

// Dirichlet characters mod q built from the cyclic decomposition of
// (Z/qZ)^x. Generators: the smallest primitive root for odd prime powers,
// -1 for 4, and the pair (-1, 5) for 2^k with k >= 3. Values are kept as
// exact indices j meaning e(j / L), L the exponent of the group.

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

namespace msl {

inline constexpr uint64_t kMaxCharacterModulus = 1000000;

/// e(index / order); order == 0 encodes the value 0.
struct RootOfUnity {
  uint32_t order = 1;
  uint32_t index = 0;
  bool is_zero() const { return order == 0; }
  friend bool operator==(const RootOfUnity&, const RootOfUnity&) = default;
};

/// Shared structure of (Z/qZ)^x: one cyclic factor per generator.
struct CharacterGroupData {
  struct Factor {
    uint64_t modulus;  // prime power the factor lives in
    uint64_t generator;
    uint32_t order;
  };
  uint64_t q = 1;
  uint64_t phi = 1;
  uint32_t exponent = 1;  // lcm of factor orders
  std::vector<Factor> factors;
  // dlog[n * factors.size() + j]: discrete log of n in factor j; -1 if gcd(n, q) > 1
  std::vector<int32_t> dlog;
  std::vector<std::complex<double>> roots;  // roots[j] = e(j / exponent)
};

class DirichletCharacter {
 public:
  DirichletCharacter(std::shared_ptr<const CharacterGroupData> group, uint64_t index, std::vector<uint32_t> exponents);

  uint64_t modulus() const { return group_->q; }
  uint64_t index() const { return index_; }
  const std::vector<uint32_t>& exponents() const { return exponents_; }
  uint32_t group_exponent() const { return group_->exponent; }
  bool is_principal() const;

  /// Exact value index modulo the group exponent, -1 when gcd(n, q) > 1.
  int64_t value_index(uint64_t n) const;
  /// Value as a reduced root of unity (order 0 for the zero value).
  RootOfUnity root(uint64_t n) const;
  std::complex<double> operator()(uint64_t n) const;
  /// Order of the character in the character group.
  uint32_t order() const;

 private:
  std::shared_ptr<const CharacterGroupData> group_;
  uint64_t index_;
  std::vector<uint32_t> exponents_;
};

/// All phi(q) characters mod q, principal first, the rest in mixed-radix
/// order of their exponent vectors. 1 <= q <= 10^6.
std::vector<DirichletCharacter> character_group(uint64_t q);
std::shared_ptr<const CharacterGroupData> character_group_data(uint64_t q);
/// The character mod q with the given position in character_group(q).
DirichletCharacter character(uint64_t q, uint64_t index);

std::complex<double> evaluate(const DirichletCharacter& chi, uint64_t n);

struct OrthogonalityReport {
  uint64_t q = 1;
  uint64_t phi = 1;
  double max_row_deviation = 0;     // |sum_chi chi(a) conj chi(b) - phi(q) [a = b]|
  double max_column_deviation = 0;  // |sum_{n mod q} chi(n)| for nonprincipal chi
  double max_deviation = 0;
  bool exhaustive_pairs = true;     // false: pairs reduced to c = a b^-1
  bool pass(double tol = 1e-9) const { return max_deviation < tol; }
};

/// Requires q <= 10^4.
OrthogonalityReport orthogonality_check(uint64_t q);

uint64_t euler_phi(uint64_t q);

}  // namespace msl
