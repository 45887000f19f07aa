#pragma once

// Segmented sieves for mu, lambda, Lambda, d_k, smallest prime factor and
// the prime indicator over arbitrary ranges [lo, hi), plus exact summatory
// functions.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "msl/parallel.hpp"

namespace msl {

enum class ArithFn : uint32_t {
  mobius = 1,
  liouville = 2,
  von_mangoldt = 3,
  divisor = 4,
  spf = 5,
  prime_indicator = 6,
  one = 7,
};

struct FunctionId {
  ArithFn fn = ArithFn::mobius;
  uint32_t k = 0;  // only meaningful for divisor

  static FunctionId mobius() { return {ArithFn::mobius, 0}; }
  static FunctionId liouville() { return {ArithFn::liouville, 0}; }
  static FunctionId von_mangoldt() { return {ArithFn::von_mangoldt, 0}; }
  static FunctionId divisor(uint32_t k) { return {ArithFn::divisor, k}; }
  static FunctionId spf() { return {ArithFn::spf, 0}; }
  static FunctionId prime_indicator() { return {ArithFn::prime_indicator, 0}; }
  static FunctionId one() { return {ArithFn::one, 0}; }

  bool integer_valued() const { return fn != ArithFn::von_mangoldt; }
  friend bool operator==(const FunctionId&, const FunctionId&) = default;
};

/// "mobius", "liouville", "von_mangoldt", "d3" / "divisor3", "spf", "prime", "one".
FunctionId parse_function_id(std::string_view name);
std::string to_string(FunctionId id);

/// Validated [lo, hi) range with its sieving granularity.
struct Segment {
  uint64_t lo;
  uint64_t hi;
  uint64_t block_size;

  Segment(uint64_t lo, uint64_t hi, uint64_t block_size = uint64_t{1} << 20);
  uint64_t size() const { return hi - lo; }
};

struct SieveConfig {
  uint64_t block_size = uint64_t{1} << 20;
  /// Largest table a single call may materialize.
  uint64_t max_entries = uint64_t{1} << 31;
  Exec exec = Exec::parallel;
};

/// Values of one arithmetic function on [lo, hi). Payload width follows the
/// block cache format: i8 for mu/lambda/indicators, u32 for spf, f64 for
/// Lambda, u64 for d_k.
class ArithmeticTable {
 public:
  using Storage = std::variant<std::vector<int8_t>, std::vector<uint32_t>,
                               std::vector<double>, std::vector<uint64_t>>;

  ArithmeticTable(FunctionId id, uint64_t lo, uint64_t hi, Storage values);

  FunctionId function() const { return id_; }
  uint64_t lo() const { return lo_; }
  uint64_t hi() const { return hi_; }
  uint64_t size() const { return hi_ - lo_; }
  bool covers(uint64_t a, uint64_t b) const { return lo_ <= a && b <= hi_; }
  bool contains(uint64_t n) const { return lo_ <= n && n < hi_; }

  /// Value at n as a real number.
  double value(uint64_t n) const;
  /// Exact value at n; throws for von_mangoldt.
  int64_t integer(uint64_t n) const;

  const Storage& storage() const { return values_; }
  Storage& storage() { return values_; }

  template <class T>
  std::span<const T> values() const {
    return std::get<std::vector<T>>(values_);
  }

  /// Real-valued copy (used to feed correlation kernels).
  std::vector<double> to_real() const;

 private:
  FunctionId id_;
  uint64_t lo_;
  uint64_t hi_;
  Storage values_;
};

/// Primes up to `limit` (inclusive). The list is shared from a process-wide
/// cache; holding the object keeps the storage alive.
class PrimeList {
 public:
  PrimeList(std::shared_ptr<const std::vector<uint32_t>> data, size_t count)
      : data_(std::move(data)), count_(count) {}
  std::span<const uint32_t> view() const { return {data_->data(), count_}; }
  size_t size() const { return count_; }
  auto begin() const { return view().begin(); }
  auto end() const { return view().end(); }

 private:
  std::shared_ptr<const std::vector<uint32_t>> data_;
  size_t count_;
};
PrimeList primes_up_to(uint32_t limit);

/// Primes in [lo, hi), segmented.
std::vector<uint64_t> primes_in(uint64_t lo, uint64_t hi, const SieveConfig& cfg = {});

ArithmeticTable sieve_block(FunctionId id, uint64_t lo, uint64_t hi, const SieveConfig& cfg = {});
ArithmeticTable sieve_block(FunctionId id, const Segment& seg, Exec exec = Exec::parallel);
ArithmeticTable divisor_table(uint32_t k, uint64_t lo, uint64_t hi, const SieveConfig& cfg = {});
ArithmeticTable spf_table(uint64_t lo, uint64_t hi, const SieveConfig& cfg = {});

/// Fills `out` (length hi - lo) with real values of `id` on [lo, hi), no
/// budget check. This is the streaming entry point used by the block
/// correlation kernels.
void fill_real(FunctionId id, uint64_t lo, uint64_t hi, std::span<double> out);

/// Sum of mu(n) for n <= X.
int64_t mertens(uint64_t X, const SieveConfig& cfg = {});
/// Number of primes <= X.
uint64_t prime_pi(uint64_t X, const SieveConfig& cfg = {});

/// Verifies mu(n) = sum_{d^2 | n} mu(d) lambda(n/d^2) for all n <= X.
struct InversionReport {
  bool pass = true;
  uint64_t checked = 0;
  std::optional<uint64_t> first_failure;
};
InversionReport lambda_from_mobius_convolution(uint64_t X, const SieveConfig& cfg = {});
/// Same check against caller-supplied tables on [1, X] (fault injection).
InversionReport lambda_from_mobius_convolution(const ArithmeticTable& mu, const ArithmeticTable& lambda);

/// Distinct prime factors of n with exponents, ascending. Uses the same
/// block kernel as the sieves (n < 2^62).
std::vector<std::pair<uint64_t, uint32_t>> factorize(uint64_t n);

/// Binomial C(n, r) with overflow check.
uint64_t binomial(uint64_t n, uint64_t r);

}  // namespace msl
