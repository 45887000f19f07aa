#pragma once

// Shifted correlation sums C(h) = sum_{n <= X} w(n) f(n + h) with an FFT
// fast path (blockwise, FFTW) and a direct double-loop path, plus the
// Chowla, Hardy-Littlewood and divisor-Moebius correlations built on them.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msl/parallel.hpp"
#include "msl/sieve.hpp"
#include "msl/series.hpp"
#include "msl/typical.hpp"

namespace msl {

enum class CorrMethod { fft, direct };
const char* to_string(CorrMethod m);
CorrMethod parse_method(std::string_view name);

struct CorrelationOptions {
  CorrMethod method = CorrMethod::fft;
  uint64_t fft_block = uint64_t{1} << 22;     // weight entries per FFT block
  uint64_t direct_block = uint64_t{1} << 16;  // weight entries per direct block
  Exec exec = Exec::parallel;
  /// Bytes of FFT workspace allowed per thread.
  uint64_t max_block_bytes = uint64_t{1} << 31;
  /// Longest input range X + H accepted.
  uint64_t max_range = uint64_t{1} << 36;
  /// Nonzero: blocks are visited in a seeded random order (the reduction is
  /// ordered by block index either way).
  uint64_t block_order_seed = 0;
};

struct CorrelationDiagnostics {
  CorrMethod requested = CorrMethod::fft;
  CorrMethod used = CorrMethod::fft;
  bool fell_back = false;
  bool rounded = false;               // integer correlands rounded after FFT
  double error_bound = 0;             // a-priori FFT rounding bound, summed over blocks
  double max_rounding_deviation = 0;  // max |C - round(C)| before rounding
  uint64_t blocks = 0;
};

/// FFT results above this deviation (bound or measured) are recomputed directly.
inline constexpr double kFftFallbackThreshold = 0.49;

/// c[h] = sum_{n=1}^{X} w(n) f(n + h) for h = 0..H.
std::vector<double> cross_correlate(const Series& w, const Series& f, uint64_t X, uint64_t H,
                                    const CorrelationOptions& opts = {}, CorrelationDiagnostics* diag = nullptr);

enum class CorrelationBase { primes, integers };

struct CorrelationReport {
  uint64_t X = 0;
  uint64_t H = 0;
  std::string f_id;
  std::string g_id;       // the base / weight sequence
  std::vector<double> C;  // C[h - 1] for h = 1..H
  double C0 = 0;          // the h = 0 slot, diagnostic only
  double normalizer = 0;  // pi(X) for prime bases, X for integer bases
  double aggregate = 0;   // sum_h |C(h)| / (H normalizer)
  CorrelationDiagnostics diag;

  double at(uint64_t h) const { return h == 0 ? C0 : C.at(h - 1); }
};

CorrelationReport correlation_report(const Series& w, const Series& f, uint64_t X, uint64_t H, double normalizer,
                                     const CorrelationOptions& opts = {});

/// C(h) = sum_{p <= X} f(p + h) (primes base) or sum_{n <= X} f(n + h).
CorrelationReport shifted_correlation(FunctionId f, uint64_t X, uint64_t H,
                                      CorrelationBase base = CorrelationBase::primes,
                                      const CorrelationOptions& opts = {});

struct RestrictedCorrelation {
  CorrelationReport full;
  CorrelationReport restricted;  // f replaced by 1_S f
  CorrelationReport complement;  // f replaced by (1 - 1_S) f
  /// max_h |full - restricted - complement|
  double decomposition_gap() const;
};

RestrictedCorrelation restricted_shifted_correlation(FunctionId f, uint64_t X, uint64_t H, const Series& indicator,
                                                     const CorrelationOptions& opts = {});
RestrictedCorrelation restricted_shifted_correlation(FunctionId f, uint64_t X, uint64_t H,
                                                     const TypicalParams& params,
                                                     const CorrelationOptions& opts = {});

/// Exact sum_{n <= X} prod_j mu(n + h_j). Shifts must be >= 0.
int64_t chowla_sum(uint64_t X, std::span<const uint64_t> shifts, const SieveConfig& cfg = {});

enum class ChowlaWeight { lambda_product, prime_indicator };

struct AveragedChowlaOptions {
  ChowlaWeight weight = ChowlaWeight::lambda_product;
  bool sampled = false;
  uint64_t samples = 4096;
  uint64_t seed = 0;
  /// Largest H^m * X handled exhaustively.
  double exhaustive_budget = 4e11;
  CorrelationOptions corr;
};

struct AveragedChowlaReport {
  uint64_t X = 0;
  uint64_t H = 0;
  uint32_t m = 0;
  std::vector<uint64_t> tuple;
  bool sampled = false;
  uint64_t terms = 0;       // shift tuples evaluated
  double sum_abs = 0;       // exhaustive sum, or H^m * sample mean
  double normalized = 0;    // sum_abs / (X H^m)
  double standard_error = 0;  // of `normalized`, sampled mode only
  std::optional<double> reference;  // 1 / psi_delta^m when supplied
};

/// sum over (h_1..h_m) in [1, H]^m of |sum_{n <= X} prod_j mu(n + h_j) prod_i Lambda(n + a_i)|.
AveragedChowlaReport averaged_chowla(uint64_t X, uint64_t H, uint32_t m, std::vector<uint64_t> tuple,
                                     const AveragedChowlaOptions& opts = {},
                                     std::optional<double> psi_delta = std::nullopt);

struct SingularSeries {
  double value = 0;
  double tail_bound = 0;  // bound on |log| of the omitted factors p > p_max
  uint64_t p_max = 0;
};
SingularSeries singular_series(std::span<const int64_t> tuple, uint64_t p_max);

struct HardyLittlewood {
  double lambda_sum = 0;
  double prediction = 0;
  std::optional<double> ratio;  // empty when the singular series vanishes
  SingularSeries series;
};
/// Requires a_i >= 0, X >= 10^3.
HardyLittlewood hl_ktuple(uint64_t X, std::span<const int64_t> tuple, uint64_t p_max, const SieveConfig& cfg = {});

struct DivisorCorrelationOptions {
  bool replace_mobius_by_one = false;
  CorrelationOptions corr;
};

/// C(h) = sum_{n <= X} mu(n + h) prod_i d_{k_i}(n + a_i), normalized by
/// H X (log X)^{k - j}, k = sum k_i, j = #k_list.
CorrelationReport divisor_mobius_correlation(uint64_t X, uint64_t H, std::vector<uint32_t> k_list,
                                             std::vector<uint64_t> tuple,
                                             const DivisorCorrelationOptions& opts = {});

struct ExceptionalSet {
  double epsilon = 0;
  std::vector<uint64_t> shifts;
  uint64_t count = 0;
  double fraction = 0;
};
/// {h <= H : |C(h)| > epsilon * normalizer}.
ExceptionalSet exceptional_scan(const CorrelationReport& report, double epsilon);

}  // namespace msl
