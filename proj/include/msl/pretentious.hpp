#pragma once

// Pretentious distance between multiplicative functions on primes, the
// infimum M(f; X, Q) over twists n^{it} chi(n), and the zero-free-region
// style prime sum used as a diagnostic.

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msl/characters.hpp"
#include "msl/parallel.hpp"
#include "msl/sieve.hpp"

namespace msl {

/// How f(p^k), k >= 2, is derived from f(p). Only prime values enter the
/// distance, so this matters for evaluation at composites.
enum class Completion { completely_multiplicative, mobius_like };

class MultFunctionSpec {
 public:
  /// mobius (mobius-like, f(p) = -1), liouville (completely multiplicative,
  /// -1), one (completely multiplicative, 1). Values on primes <= X.
  static MultFunctionSpec from_id(FunctionId id, uint64_t X);
  /// User table: `primes` ascending, |values| <= 1.
  static MultFunctionSpec from_table(std::string label, std::vector<uint64_t> primes,
                                     std::vector<std::complex<double>> values, Completion completion);
  static MultFunctionSpec from_prime_function(std::string label, uint64_t X,
                                              const std::function<std::complex<double>(uint64_t)>& f,
                                              Completion completion);
  /// n -> n^{it} chi(n), completely multiplicative.
  static MultFunctionSpec twisted_character(const DirichletCharacter& chi, double t, uint64_t X);

  const std::string& label() const { return label_; }
  Completion completion() const { return completion_; }
  std::span<const uint64_t> primes() const { return primes_; }
  std::span<const std::complex<double>> values() const { return values_; }
  /// Every prime <= covered() has a stored value.
  uint64_t covered() const { return covered_; }

  /// Throws validation error when p has no stored value.
  std::complex<double> at_prime(uint64_t p) const;
  /// f(n) through the completion rule.
  std::complex<double> operator()(uint64_t n) const;

 private:
  std::string label_;
  std::vector<uint64_t> primes_;
  std::vector<std::complex<double>> values_;
  Completion completion_ = Completion::completely_multiplicative;
  uint64_t covered_ = 0;
};

/// D(f, g; X)^2 = sum_{p <= X} (1 - Re f(p) conj g(p)) / p, ascending p,
/// compensated.
double distance_sq(const MultFunctionSpec& f, const MultFunctionSpec& g, uint64_t X);
double distance(const MultFunctionSpec& f, const MultFunctionSpec& g, uint64_t X);

/// sum_{p <= X} (log p) / p: Lipschitz constant of t -> D(f, n^{it} chi; X)^2.
double lipschitz_constant(uint64_t X);

struct PretendOptions {
  /// Grid spacing in t. Unset: 2^14 points over [-X, X].
  std::optional<double> t_resolution;
  uint64_t default_points = uint64_t{1} << 14;
  /// Largest (grid points) x (characters) x (primes) evaluated.
  double budget = 4e10;
  uint32_t refine_iterations = 80;
  Exec exec = Exec::parallel;
};

struct PretendGridMeta {
  uint64_t points = 0;
  double spacing = 0;
  double lipschitz = 0;
  uint64_t characters = 0;
  uint64_t primes = 0;
  uint64_t Q = 0;
};

struct PretendResult {
  double value = 0;  // attained at (witness_t, witness character)
  double witness_t = 0;
  uint64_t witness_q = 1;
  uint64_t witness_index = 0;
  double lower = 0;  // certified lower bound for the infimum
  double upper = 0;  // == value
  double grid_min = 0;
  PretendGridMeta grid;

  DirichletCharacter witness_chi() const { return character(witness_q, witness_index); }
};

/// inf over |t| <= X and chi mod q, q <= Q, of D(f, n^{it} chi(n); X)^2.
PretendResult pretend_measure(const MultFunctionSpec& f, uint64_t X, uint64_t Q, const PretendOptions& opts = {});

/// X^2 / H^{2 - rho}, the length at which M(f; ., Q) enters the
/// shifted-prime theorem for non-pretentious f. rho in (0, 1/8).
double nonpretentious_cutoff(double X, double H, double rho);

struct VkDiagnostic {
  double lower_limit = 0;  // exp((log X)^{2/3 + eps})
  double sum = 0;          // sum_{lower <= p <= X} (1 + Re chi(p) p^{it}) / p
  double reference = 0;    // (1/3 - eps) log log X
  uint64_t primes = 0;
};
VkDiagnostic vk_diagnostic(uint64_t X, double epsilon, const DirichletCharacter& chi, double t);

}  // namespace msl
