#pragma once

#include <cstdint>
#include <vector>

namespace msl {

/// Execution policy for the data-parallel kernels. `serial` is the reference
/// path: same arithmetic, same reduction order, no threads.
enum class Exec { serial, parallel };

int max_threads(Exec exec);

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std_abs(sum_) >= std_abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  static double std_abs(double v) { return v < 0 ? -v : v; }
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Splits [lo, hi) into consecutive blocks of at most `block` entries.
struct BlockRange {
  uint64_t lo;
  uint64_t hi;
};
std::vector<BlockRange> split_blocks(uint64_t lo, uint64_t hi, uint64_t block);

}  // namespace msl
