#pragma once

// Real sequences on the positive integers, produced range by range, and
// materialized tables of them.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "msl/sieve.hpp"
#include "msl/typical.hpp"

namespace msl {

/// A real sequence on the positive integers, produced in ranges on demand.
struct Series {
  std::string label;
  std::function<void(uint64_t lo, uint64_t hi, std::span<double> out)> fill;
  bool integer_valued = true;
};

Series arithmetic_series(FunctionId id);
/// n -> prod_i f_i(n + a_i). Empty lists give the constant 1.
Series shifted_product_series(std::vector<FunctionId> ids, std::vector<uint64_t> shifts);
/// 1 on integers with a typical factorization (no n <= X cutoff).
Series typical_indicator_series(const TypicalParams& params);
Series product_series(Series a, Series b);
/// n -> a(n) (1 - b(n)) for an indicator b.
Series masked_complement_series(Series a, Series indicator);

/// n -> +-1 from a counter-based generator (independent fair signs).
Series random_sign_series(uint64_t seed);

/// Values of a series on [lo, hi).
class RealTable {
 public:
  RealTable() = default;
  RealTable(uint64_t lo, std::vector<double> values) : lo_(lo), values_(std::move(values)) {}
  RealTable(const Series& s, uint64_t lo, uint64_t hi);

  uint64_t lo() const { return lo_; }
  uint64_t hi() const { return lo_ + values_.size(); }
  bool covers(uint64_t a, uint64_t b) const { return lo_ <= a && b <= hi(); }
  double operator[](uint64_t n) const { return values_[n - lo_]; }
  std::span<const double> values() const { return values_; }

 private:
  uint64_t lo_ = 1;
  std::vector<double> values_;
};

}  // namespace msl
