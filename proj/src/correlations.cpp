#include "msl/correlations.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <set>

#include "msl/error.hpp"
#include "msl/rng.hpp"

namespace msl {

const char* to_string(CorrMethod m) { return m == CorrMethod::fft ? "fft" : "direct"; }

CorrMethod parse_method(std::string_view name) {
  if (name == "fft") return CorrMethod::fft;
  if (name == "direct") return CorrMethod::direct;
  fail_validation("unknown correlation method: " + std::string(name));
}

// ---------------------------------------------------------------------------
// Cross-correlation kernels

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftPlans {
  size_t n = 0;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit FftPlans(size_t size) : n(size) {
    std::lock_guard lock(fftw_planner_mutex());
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(n), out, in, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
  }
  ~FftPlans() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
};

// Per-thread FFT buffers; fftw_malloc alignment makes them valid for the
// new-array execute calls on the shared plans.
struct FftWorkspace {
  size_t n;
  double* a;
  double* b;
  fftw_complex* fa;
  fftw_complex* fb;

  explicit FftWorkspace(size_t size)
      : n(size),
        a(fftw_alloc_real(size)),
        b(fftw_alloc_real(size)),
        fa(fftw_alloc_complex(size / 2 + 1)),
        fb(fftw_alloc_complex(size / 2 + 1)) {
    if (!a || !b || !fa || !fb) fail_budget("cannot allocate FFT workspace of " + std::to_string(size) + " points");
  }
  ~FftWorkspace() {
    fftw_free(a);
    fftw_free(b);
    fftw_free(fa);
    fftw_free(fb);
  }
  FftWorkspace(const FftWorkspace&) = delete;
  FftWorkspace& operator=(const FftWorkspace&) = delete;
};

uint64_t next_pow2(uint64_t v) {
  uint64_t n = 1;
  while (n < v) n <<= 1;
  return n;
}

std::vector<size_t> visit_order(size_t nb, uint64_t seed) {
  std::vector<size_t> order(nb);
  for (size_t i = 0; i < nb; ++i) order[i] = i;
  if (seed != 0) {
    CounterRng rng(seed, "block-order");
    for (size_t i = nb; i > 1; --i) std::swap(order[i - 1], order[rng.between(0, i - 1)]);
  }
  return order;
}

template <class Body>
void run_blocks(const std::vector<size_t>& order, Exec exec, Body&& body) {
  const auto nb = static_cast<int64_t>(order.size());
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1) num_threads(max_threads(exec)) if (exec == Exec::parallel && nb > 1)
  for (int64_t k = 0; k < nb; ++k) {
    try {
      body(order[static_cast<size_t>(k)]);
    } catch (...) {
#pragma omp critical(msl_corr_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

// Sums the per-block partials in block-index order.
std::vector<double> ordered_reduce(const std::vector<std::vector<double>>& partial, uint64_t H) {
  std::vector<double> c(H + 1, 0.0);
  for (uint64_t h = 0; h <= H; ++h) {
    CompensatedSum s;
    for (const auto& p : partial) s.add(p[h]);
    c[h] = s.value();
  }
  return c;
}

std::vector<double> correlate_direct(const Series& w, const Series& f, uint64_t X, uint64_t H,
                                     const CorrelationOptions& opts, CorrelationDiagnostics& diag) {
  const auto blocks = split_blocks(1, X + 1, std::max<uint64_t>(opts.direct_block, 1));
  std::vector<std::vector<double>> partial(blocks.size());
  run_blocks(visit_order(blocks.size(), opts.block_order_seed), opts.exec, [&](size_t b) {
    const uint64_t lo = blocks[b].lo;
    const uint64_t len = blocks[b].hi - lo;
    std::vector<double> wv(len);
    std::vector<double> fv(len + H);
    w.fill(lo, lo + len, wv);
    f.fill(lo, lo + len + H, fv);
    std::vector<CompensatedSum> acc(H + 1);
    for (uint64_t i = 0; i < len; ++i) {
      const double wi = wv[i];
      if (wi == 0.0) continue;
      for (uint64_t h = 0; h <= H; ++h) acc[h].add(wi * fv[i + h]);
    }
    partial[b].resize(H + 1);
    for (uint64_t h = 0; h <= H; ++h) partial[b][h] = acc[h].value();
  });
  diag.used = CorrMethod::direct;
  diag.blocks = blocks.size();
  return ordered_reduce(partial, H);
}

std::vector<double> correlate_fft(const Series& w, const Series& f, uint64_t X, uint64_t H,
                                  const CorrelationOptions& opts, CorrelationDiagnostics& diag) {
  const uint64_t B = std::min<uint64_t>(std::max<uint64_t>(opts.fft_block, 1), X);
  const uint64_t N = next_pow2(B + H + 1);
  const uint64_t bytes = N * 2 * sizeof(double) + (N / 2 + 1) * 2 * sizeof(fftw_complex) + (B + H) * sizeof(double);
  if (bytes > opts.max_block_bytes)
    fail_budget("FFT block of " + std::to_string(N) + " points needs " + std::to_string(bytes) + " bytes");
  const FftPlans plans(N);
  const auto blocks = split_blocks(1, X + 1, B);
  std::vector<std::vector<double>> partial(blocks.size());
  std::vector<double> bounds(blocks.size(), 0.0);
  const double unit = std::numeric_limits<double>::epsilon() / 2;
  const double log_n = std::log2(static_cast<double>(N));

  run_blocks(visit_order(blocks.size(), opts.block_order_seed), opts.exec, [&](size_t b) {
    FftWorkspace ws(N);
    const uint64_t lo = blocks[b].lo;
    const uint64_t len = blocks[b].hi - lo;
    std::fill(ws.a, ws.a + N, 0.0);
    std::fill(ws.b, ws.b + N, 0.0);
    w.fill(lo, lo + len, std::span(ws.a, len));
    f.fill(lo, lo + len + H, std::span(ws.b, len + H));
    double wn = 0;
    double fn = 0;
    for (uint64_t i = 0; i < len; ++i) wn += ws.a[i] * ws.a[i];
    for (uint64_t i = 0; i < len + H; ++i) fn += ws.b[i] * ws.b[i];
    // forward/backward rounding of a radix-2 style transform pair plus the
    // pointwise product, relative to ||w||_2 ||f||_2
    bounds[b] = std::sqrt(wn) * std::sqrt(fn) * unit * (10 * log_n + 10);

    fftw_execute_dft_r2c(plans.forward, ws.a, ws.fa);
    fftw_execute_dft_r2c(plans.forward, ws.b, ws.fb);
    for (uint64_t k = 0; k <= N / 2; ++k) {
      // conj(A) * B
      const double ar = ws.fa[k][0], ai = -ws.fa[k][1];
      const double br = ws.fb[k][0], bi = ws.fb[k][1];
      ws.fb[k][0] = ar * br - ai * bi;
      ws.fb[k][1] = ar * bi + ai * br;
    }
    fftw_execute_dft_c2r(plans.backward, ws.fb, ws.a);
    partial[b].resize(H + 1);
    const double scale = 1.0 / static_cast<double>(N);
    for (uint64_t h = 0; h <= H; ++h) partial[b][h] = ws.a[h] * scale;
  });
  diag.used = CorrMethod::fft;
  diag.blocks = blocks.size();
  for (const double e : bounds) diag.error_bound += e;
  return ordered_reduce(partial, H);
}

}  // namespace

std::vector<double> cross_correlate(const Series& w, const Series& f, uint64_t X, uint64_t H,
                                    const CorrelationOptions& opts, CorrelationDiagnostics* diag_out) {
  require(X >= 1, "correlation requires X >= 1");
  if (X + H > opts.max_range) fail_budget("correlation range X + H = " + std::to_string(X + H) + " exceeds budget");
  CorrelationDiagnostics diag;
  diag.requested = opts.method;
  std::vector<double> c;
  if (opts.method == CorrMethod::direct) {
    c = correlate_direct(w, f, X, H, opts, diag);
  } else {
    c = correlate_fft(w, f, X, H, opts, diag);
    if (w.integer_valued && f.integer_valued) {
      for (const double v : c) diag.max_rounding_deviation = std::max(diag.max_rounding_deviation, std::abs(v - std::nearbyint(v)));
      if (diag.error_bound > kFftFallbackThreshold || diag.max_rounding_deviation > kFftFallbackThreshold) {
        const double bound = diag.error_bound;
        const double dev = diag.max_rounding_deviation;
        c = correlate_direct(w, f, X, H, opts, diag);
        diag.fell_back = true;
        diag.error_bound = bound;
        diag.max_rounding_deviation = dev;
      } else {
        for (double& v : c) v = std::nearbyint(v);
        diag.rounded = true;
      }
    }
  }
  if (diag_out) *diag_out = diag;
  return c;
}

// ---------------------------------------------------------------------------
// Reports

CorrelationReport correlation_report(const Series& w, const Series& f, uint64_t X, uint64_t H, double normalizer,
                                     const CorrelationOptions& opts) {
  require(H >= 1 && H <= X, "correlation requires 1 <= H <= X");
  CorrelationReport r;
  r.X = X;
  r.H = H;
  r.f_id = f.label;
  r.g_id = w.label;
  const auto c = cross_correlate(w, f, X, H, opts, &r.diag);
  r.C0 = c[0];
  r.C.assign(c.begin() + 1, c.end());
  r.normalizer = normalizer;
  CompensatedSum s;
  for (const double v : r.C) s.add(std::abs(v));
  r.aggregate = normalizer > 0 ? s.value() / (static_cast<double>(H) * normalizer) : 0.0;
  return r;
}

CorrelationReport shifted_correlation(FunctionId f, uint64_t X, uint64_t H, CorrelationBase base,
                                      const CorrelationOptions& opts) {
  require(X >= 2, "shifted correlation requires X >= 2");
  if (base == CorrelationBase::primes)
    return correlation_report(arithmetic_series(FunctionId::prime_indicator()), arithmetic_series(f), X, H,
                              static_cast<double>(prime_pi(X)), opts);
  return correlation_report(arithmetic_series(FunctionId::one()), arithmetic_series(f), X, H,
                            static_cast<double>(X), opts);
}

double RestrictedCorrelation::decomposition_gap() const {
  double gap = std::abs(full.C0 - restricted.C0 - complement.C0);
  for (size_t i = 0; i < full.C.size(); ++i)
    gap = std::max(gap, std::abs(full.C[i] - restricted.C[i] - complement.C[i]));
  return gap;
}

RestrictedCorrelation restricted_shifted_correlation(FunctionId f, uint64_t X, uint64_t H, const Series& indicator,
                                                     const CorrelationOptions& opts) {
  require(X >= 2, "shifted correlation requires X >= 2");
  const Series w = arithmetic_series(FunctionId::prime_indicator());
  const Series fs = arithmetic_series(f);
  const double pi = static_cast<double>(prime_pi(X));
  RestrictedCorrelation r;
  r.full = correlation_report(w, fs, X, H, pi, opts);
  r.restricted = correlation_report(w, product_series(fs, indicator), X, H, pi, opts);
  r.complement = correlation_report(w, masked_complement_series(fs, indicator), X, H, pi, opts);
  return r;
}

RestrictedCorrelation restricted_shifted_correlation(FunctionId f, uint64_t X, uint64_t H,
                                                     const TypicalParams& params, const CorrelationOptions& opts) {
  return restricted_shifted_correlation(f, X, H, typical_indicator_series(params), opts);
}

// ---------------------------------------------------------------------------
// Chowla-type sums

namespace {

void require_distinct(std::vector<int64_t> v, const char* what) {
  std::sort(v.begin(), v.end());
  require(std::adjacent_find(v.begin(), v.end()) == v.end(), std::string(what) + " must be distinct");
}

std::vector<int64_t> as_signed(std::span<const uint64_t> v) { return {v.begin(), v.end()}; }

}  // namespace

int64_t chowla_sum(uint64_t X, std::span<const uint64_t> shifts, const SieveConfig& cfg) {
  require(!shifts.empty(), "chowla_sum requires at least one shift");
  require(X >= 1, "chowla_sum requires X >= 1");
  const uint64_t lo_shift = *std::min_element(shifts.begin(), shifts.end());
  const uint64_t hi_shift = *std::max_element(shifts.begin(), shifts.end());
  if (X + hi_shift >= (uint64_t{1} << 62)) fail_budget("chowla_sum range exceeds sieved tables");
  int64_t total = 0;
  for (const auto& blk : split_blocks(1, X + 1, std::max<uint64_t>(cfg.block_size, 2))) {
    const auto mu = sieve_block(FunctionId::mobius(), blk.lo + lo_shift, blk.hi + hi_shift, cfg);
    const auto v = mu.values<int8_t>();
    for (uint64_t n = blk.lo; n < blk.hi; ++n) {
      int64_t prod = 1;
      for (const uint64_t h : shifts) {
        prod *= v[n + h - mu.lo()];
        if (prod == 0) break;
      }
      total += prod;
    }
  }
  return total;
}

AveragedChowlaReport averaged_chowla(uint64_t X, uint64_t H, uint32_t m, std::vector<uint64_t> tuple,
                                     const AveragedChowlaOptions& opts, std::optional<double> psi_delta) {
  require(X >= 1 && H >= 1, "averaged_chowla requires X, H >= 1");
  require(m >= 1, "averaged_chowla requires m >= 1");
  require_distinct(as_signed(tuple), "tuple entries");
  AveragedChowlaReport r;
  r.X = X;
  r.H = H;
  r.m = m;
  r.tuple = tuple;
  r.sampled = opts.sampled;
  if (psi_delta) r.reference = std::pow(*psi_delta, -static_cast<double>(m));
  const double Hm = std::pow(static_cast<double>(H), m);

  Series weight;
  if (opts.weight == ChowlaWeight::prime_indicator) {
    require(tuple.empty(), "prime-indicator weight takes no tuple");
    weight = arithmetic_series(FunctionId::prime_indicator());
  } else {
    weight = shifted_product_series(std::vector<FunctionId>(tuple.size(), FunctionId::von_mangoldt()), tuple);
  }
  const Series mu = arithmetic_series(FunctionId::mobius());

  if (!opts.sampled) {
    if (m >= 3) fail_budget("averaged Chowla sums with m >= 3 are available in sampled mode only");
    if (Hm * static_cast<double>(X) > opts.exhaustive_budget) fail_budget("averaged Chowla: H^m X exceeds budget");
    CompensatedSum total;
    if (m == 1) {
      const auto c = cross_correlate(weight, mu, X, H, opts.corr);
      for (uint64_t h = 1; h <= H; ++h) total.add(std::abs(c[h]));
    } else {
      for (uint64_t h1 = 1; h1 <= H; ++h1) {
        const Series shifted = shifted_product_series({FunctionId::mobius()}, {h1});
        const auto c = cross_correlate(product_series(weight, shifted), mu, X, H, opts.corr);
        for (uint64_t h2 = 1; h2 <= H; ++h2) total.add(std::abs(c[h2]));
      }
    }
    r.terms = static_cast<uint64_t>(Hm);
    r.sum_abs = total.value();
    r.normalized = r.sum_abs / (static_cast<double>(X) * Hm);
    return r;
  }

  require(opts.samples >= 2, "sampled mode needs at least two samples");
  if (X + H > opts.corr.max_range) fail_budget("averaged Chowla range exceeds budget");
  std::vector<double> wv(X);
  std::vector<double> muv(X + H);
  weight.fill(1, X + 1, wv);
  mu.fill(1, X + H + 1, muv);
  CounterRng rng(opts.seed, "averaged-chowla");
  std::vector<uint64_t> shifts(opts.samples * m);
  for (auto& h : shifts) h = rng.between(1, H);
  std::vector<double> value(opts.samples);
  const auto ns = static_cast<int64_t>(opts.samples);
#pragma omp parallel for schedule(dynamic, 16) num_threads(max_threads(opts.corr.exec)) if (opts.corr.exec == Exec::parallel)
  for (int64_t s = 0; s < ns; ++s) {
    const uint64_t* hs = &shifts[static_cast<size_t>(s) * m];
    CompensatedSum acc;
    for (uint64_t n = 1; n <= X; ++n) {
      double t = wv[n - 1];
      for (uint32_t j = 0; j < m && t != 0.0; ++j) t *= muv[n + hs[j] - 1];
      if (t != 0.0) acc.add(t);
    }
    value[static_cast<size_t>(s)] = std::abs(acc.value());
  }
  CompensatedSum sum;
  for (const double v : value) sum.add(v);
  const double mean = sum.value() / static_cast<double>(opts.samples);
  CompensatedSum sq;
  for (const double v : value) sq.add((v - mean) * (v - mean));
  const double var = sq.value() / static_cast<double>(opts.samples - 1);
  r.terms = opts.samples;
  r.sum_abs = mean * Hm;
  r.normalized = mean / static_cast<double>(X);
  r.standard_error = std::sqrt(var / static_cast<double>(opts.samples)) / static_cast<double>(X);
  return r;
}

// ---------------------------------------------------------------------------
// Singular series and Hardy-Littlewood

SingularSeries singular_series(std::span<const int64_t> tuple, uint64_t p_max) {
  require(!tuple.empty(), "singular series needs a nonempty tuple");
  require_distinct({tuple.begin(), tuple.end()}, "tuple entries");
  require(p_max <= std::numeric_limits<uint32_t>::max(), "p_max too large");
  const auto [mn, mx] = std::minmax_element(tuple.begin(), tuple.end());
  const auto diameter = static_cast<uint64_t>(*mx - *mn);
  if (p_max < diameter)
    fail_validation("p_max = " + std::to_string(p_max) + " is below the tuple diameter " + std::to_string(diameter));
  const auto k = static_cast<double>(tuple.size());
  SingularSeries s;
  s.p_max = p_max;
  CompensatedSum log_sum;
  std::vector<int64_t> residues(tuple.size());
  for (const uint32_t p : primes_up_to(static_cast<uint32_t>(p_max))) {
    const auto pp = static_cast<int64_t>(p);
    for (size_t i = 0; i < tuple.size(); ++i) residues[i] = ((tuple[i] % pp) + pp) % pp;
    std::sort(residues.begin(), residues.end());
    const auto nu = static_cast<double>(std::unique(residues.begin(), residues.end()) - residues.begin());
    const double pd = p;
    if (nu >= pd) return s;  // a covered residue system: the product vanishes
    log_sum.add(std::log1p(-nu / pd) - k * std::log1p(-1.0 / pd));
  }
  s.value = std::exp(log_sum.value());
  // |log(1 - k/p) - k log(1 - 1/p)| <= k^2 / (2 p^2 (1 - k/p)) for p > p_max,
  // summed against sum_{n > p_max} 1/n^2 <= 1/p_max
  if (tuple.size() == 1) {
    s.tail_bound = 0;
  } else if (k >= static_cast<double>(p_max) + 1) {
    s.tail_bound = std::numeric_limits<double>::infinity();
  } else {
    s.tail_bound = k * k / (2 * (1 - k / (static_cast<double>(p_max) + 1)) * static_cast<double>(p_max));
  }
  return s;
}

HardyLittlewood hl_ktuple(uint64_t X, std::span<const int64_t> tuple, uint64_t p_max, const SieveConfig& cfg) {
  require(X >= 1000, "hl_ktuple requires X >= 10^3");
  require(!tuple.empty(), "hl_ktuple needs a nonempty tuple");
  std::vector<uint64_t> shifts;
  for (const int64_t a : tuple) {
    require(a >= 0, "hl_ktuple shifts must be >= 0");
    shifts.push_back(static_cast<uint64_t>(a));
  }
  HardyLittlewood r;
  r.series = singular_series(tuple, p_max);
  const Series w = shifted_product_series(std::vector<FunctionId>(shifts.size(), FunctionId::von_mangoldt()), shifts);
  const auto blocks = split_blocks(1, X + 1, std::max<uint64_t>(cfg.block_size, 2));
  std::vector<double> partial(blocks.size());
  run_blocks(visit_order(blocks.size(), 0), cfg.exec, [&](size_t b) {
    std::vector<double> v(blocks[b].hi - blocks[b].lo);
    w.fill(blocks[b].lo, blocks[b].hi, v);
    CompensatedSum s;
    for (const double x : v) s.add(x);
    partial[b] = s.value();
  });
  CompensatedSum total;
  for (const double p : partial) total.add(p);
  r.lambda_sum = total.value();
  r.prediction = r.series.value * static_cast<double>(X);
  if (r.prediction > 0) r.ratio = r.lambda_sum / r.prediction;
  return r;
}

// ---------------------------------------------------------------------------
// Divisor correlations and exceptional shifts

CorrelationReport divisor_mobius_correlation(uint64_t X, uint64_t H, std::vector<uint32_t> k_list,
                                             std::vector<uint64_t> tuple, const DivisorCorrelationOptions& opts) {
  require(X >= 2, "divisor correlation requires X >= 2");
  require(k_list.size() == tuple.size(), "divisor correlation needs one shift per divisor order");
  require_distinct(as_signed(tuple), "tuple entries");
  std::vector<FunctionId> ids;
  uint32_t k = 0;
  for (const uint32_t ki : k_list) {
    require(ki >= 2, "divisor orders must be >= 2");
    ids.push_back(FunctionId::divisor(ki));
    k += ki;
  }
  const double j = static_cast<double>(k_list.size());
  const double normalizer = static_cast<double>(X) * std::pow(std::log(static_cast<double>(X)), static_cast<double>(k) - j);
  const Series f = arithmetic_series(opts.replace_mobius_by_one ? FunctionId::one() : FunctionId::mobius());
  return correlation_report(shifted_product_series(std::move(ids), std::move(tuple)), f, X, H, normalizer, opts.corr);
}

ExceptionalSet exceptional_scan(const CorrelationReport& report, double epsilon) {
  require(epsilon >= 0, "epsilon must be >= 0");
  ExceptionalSet e;
  e.epsilon = epsilon;
  const double cut = epsilon * report.normalizer;
  for (uint64_t h = 1; h <= report.C.size(); ++h)
    if (std::abs(report.C[h - 1]) > cut) e.shifts.push_back(h);
  e.count = e.shifts.size();
  e.fraction = report.C.empty() ? 0.0 : static_cast<double>(e.count) / static_cast<double>(report.C.size());
  return e;
}

}  // namespace msl
