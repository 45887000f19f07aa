#include "msl/sieve.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <mutex>

#include "factor_block.hpp"
#include "msl/error.hpp"

namespace msl {

int max_threads(Exec exec) { return exec == Exec::serial ? 1 : omp_get_max_threads(); }

std::vector<BlockRange> split_blocks(uint64_t lo, uint64_t hi, uint64_t block) {
  std::vector<BlockRange> out;
  if (block == 0) block = 1;
  for (uint64_t s = lo; s < hi; s += std::min(block, hi - s)) out.push_back({s, std::min(hi, s + block)});
  return out;
}

// ---------------------------------------------------------------------------
// Function ids

FunctionId parse_function_id(std::string_view name) {
  if (name == "mobius" || name == "mu") return FunctionId::mobius();
  if (name == "liouville" || name == "lambda") return FunctionId::liouville();
  if (name == "von_mangoldt" || name == "Lambda" || name == "vonmangoldt") return FunctionId::von_mangoldt();
  if (name == "spf") return FunctionId::spf();
  if (name == "prime" || name == "prime_indicator" || name == "primes") return FunctionId::prime_indicator();
  if (name == "one" || name == "1") return FunctionId::one();
  std::string_view digits;
  if (name.starts_with("divisor_")) digits = name.substr(8);
  else if (name.starts_with("divisor")) digits = name.substr(7);
  else if (name.starts_with("d")) digits = name.substr(1);
  if (!digits.empty()) {
    uint32_t k = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && k >= 1) return FunctionId::divisor(k);
  }
  fail_validation("unknown function id '" + std::string(name) + "'");
}

std::string to_string(FunctionId id) {
  switch (id.fn) {
    case ArithFn::mobius: return "mobius";
    case ArithFn::liouville: return "liouville";
    case ArithFn::von_mangoldt: return "von_mangoldt";
    case ArithFn::divisor: return "d" + std::to_string(id.k);
    case ArithFn::spf: return "spf";
    case ArithFn::prime_indicator: return "prime";
    case ArithFn::one: return "one";
  }
  return "?";
}

Segment::Segment(uint64_t lo_, uint64_t hi_, uint64_t block_size_) : lo(lo_), hi(hi_), block_size(block_size_) {
  require(lo >= 1 && lo < hi, "segment requires 1 <= lo < hi");
  require(block_size >= 2, "segment block_size must be >= 2");
}

// ---------------------------------------------------------------------------
// ArithmeticTable

ArithmeticTable::ArithmeticTable(FunctionId id, uint64_t lo, uint64_t hi, Storage values)
    : id_(id), lo_(lo), hi_(hi), values_(std::move(values)) {
  const size_t n = std::visit([](const auto& v) { return v.size(); }, values_);
  require(n == hi - lo, "table length must equal hi - lo");
}

double ArithmeticTable::value(uint64_t n) const {
  require(contains(n), "table does not cover n = " + std::to_string(n));
  return std::visit([&](const auto& v) { return static_cast<double>(v[n - lo_]); }, values_);
}

int64_t ArithmeticTable::integer(uint64_t n) const {
  require(contains(n), "table does not cover n = " + std::to_string(n));
  require(id_.integer_valued(), "von_mangoldt table has no exact integer values");
  return std::visit([&](const auto& v) { return static_cast<int64_t>(v[n - lo_]); }, values_);
}

std::vector<double> ArithmeticTable::to_real() const {
  return std::visit([](const auto& v) { return std::vector<double>(v.begin(), v.end()); }, values_);
}

// ---------------------------------------------------------------------------
// Base primes

namespace {

std::vector<uint32_t> simple_sieve(uint32_t limit) {
  std::vector<uint32_t> primes;
  if (limit < 2) return primes;
  std::vector<uint8_t> composite(static_cast<size_t>(limit) + 1, 0);
  for (uint64_t i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    primes.push_back(static_cast<uint32_t>(i));
    for (uint64_t j = i * i; j <= limit; j += i) composite[j] = 1;
  }
  return primes;
}

}  // namespace

PrimeList primes_up_to(uint32_t limit) {
  static std::mutex mutex;
  static std::shared_ptr<const std::vector<uint32_t>> cache;
  static uint32_t cached_limit = 0;
  std::shared_ptr<const std::vector<uint32_t>> data;
  {
    std::lock_guard lock(mutex);
    if (!cache || cached_limit < limit) {
      const uint64_t target = std::min<uint64_t>(
          std::max<uint64_t>({limit, uint64_t{1} << 16, uint64_t{cached_limit} * 2}),
          std::numeric_limits<uint32_t>::max());
      cache = std::make_shared<const std::vector<uint32_t>>(simple_sieve(static_cast<uint32_t>(target)));
      cached_limit = static_cast<uint32_t>(target);
    }
    data = cache;
  }
  const size_t count = std::upper_bound(data->begin(), data->end(), limit) - data->begin();
  return PrimeList(std::move(data), count);
}

// ---------------------------------------------------------------------------
// Block kernels

namespace detail {

void mobius_block(uint64_t lo, uint64_t hi, std::span<int8_t> out) {
  const uint64_t n = hi - lo;
  std::vector<uint64_t> prod(n, 1);
  std::fill(out.begin(), out.end(), int8_t{1});
  const auto root = static_cast<uint32_t>(isqrt(hi - 1));
  for (const uint32_t p : primes_up_to(root)) {
    for (uint64_t m = first_multiple_at_least(p, lo); m < hi; m += p) {
      out[m - lo] = static_cast<int8_t>(-out[m - lo]);
      prod[m - lo] *= p;
    }
    const uint64_t pp = uint64_t{p} * p;
    for (uint64_t m = first_multiple_at_least(pp, lo); m < hi; m += pp) out[m - lo] = 0;
  }
  // one prime factor above the root remains when the product falls short
  for (uint64_t i = 0; i < n; ++i)
    if (out[i] != 0 && prod[i] != lo + i) out[i] = static_cast<int8_t>(-out[i]);
}

void prime_indicator_block(uint64_t lo, uint64_t hi, std::span<int8_t> out) {
  std::fill(out.begin(), out.end(), int8_t{1});
  for (uint64_t n = lo; n < std::min<uint64_t>(hi, 2); ++n) out[n - lo] = 0;
  const auto root = static_cast<uint32_t>(isqrt(hi - 1));
  for (const uint32_t p : primes_up_to(root)) {
    const uint64_t pp = uint64_t{p} * p;
    for (uint64_t m = std::max(pp, first_multiple_at_least(p, lo)); m < hi; m += p) out[m - lo] = 0;
  }
}

}  // namespace detail

std::vector<std::pair<uint64_t, uint32_t>> factorize(uint64_t n) {
  require(n >= 1 && n < (uint64_t{1} << 62), "factorize requires 1 <= n < 2^62");
  std::vector<std::pair<uint64_t, uint32_t>> out;
  if (n == 1) return out;
  detail::factor_block(n, n + 1, [&](uint64_t, uint64_t p, uint32_t a) { out.emplace_back(p, a); });
  return out;
}

uint64_t binomial(uint64_t n, uint64_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  unsigned __int128 acc = 1;
  for (uint64_t i = 1; i <= r; ++i) {
    acc = acc * (n - r + i) / i;
    if (acc > std::numeric_limits<uint64_t>::max()) fail_budget("binomial overflow");
  }
  return static_cast<uint64_t>(acc);
}

namespace {

void liouville_block(uint64_t lo, uint64_t hi, std::span<int8_t> out) {
  std::fill(out.begin(), out.end(), int8_t{1});
  detail::factor_block(lo, hi, [&](uint64_t i, uint64_t, uint32_t a) {
    if (a & 1u) out[i] = static_cast<int8_t>(-out[i]);
  });
}

void von_mangoldt_block(uint64_t lo, uint64_t hi, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<uint8_t> distinct(hi - lo, 0);
  detail::factor_block(lo, hi, [&](uint64_t i, uint64_t p, uint32_t) {
    if (++distinct[i] == 1)
      out[i] = std::log(static_cast<double>(p));
    else
      out[i] = 0.0;
  });
}

void divisor_block(uint32_t k, uint64_t lo, uint64_t hi, std::span<uint64_t> out) {
  // d_k(p^a) = C(a + k - 1, k - 1); exponents are below 64
  std::vector<uint64_t> local(65);
  for (uint32_t a = 0; a <= 64; ++a) {
    try {
      local[a] = binomial(uint64_t{a} + k - 1, k - 1);
    } catch (const Error&) {
      local[a] = 0;  // unreachable exponent for this k; flagged below if hit
    }
  }
  std::fill(out.begin(), out.end(), uint64_t{1});
  detail::factor_block(lo, hi, [&](uint64_t i, uint64_t, uint32_t a) {
    const uint64_t f = local[a];
    if (f == 0) fail_budget("d_k value overflows u64");
    const unsigned __int128 v = static_cast<unsigned __int128>(out[i]) * f;
    if (v > std::numeric_limits<uint64_t>::max()) fail_budget("d_k value overflows u64");
    out[i] = static_cast<uint64_t>(v);
  });
}

void spf_block(uint64_t lo, uint64_t hi, std::span<uint32_t> out) {
  std::fill(out.begin(), out.end(), 0u);
  detail::factor_block(lo, hi, [&](uint64_t i, uint64_t p, uint32_t) {
    if (out[i] == 0) out[i] = static_cast<uint32_t>(p);
  });
  if (lo == 1) out[0] = 1;
}

void validate_request(FunctionId id, uint64_t lo, uint64_t hi) {
  require(lo >= 1 && lo < hi, "sieve range requires 1 <= lo < hi");
  if (id.fn == ArithFn::divisor) require(id.k >= 1, "divisor_k requires k >= 1");
  if (id.fn == ArithFn::spf) require(hi - 1 <= std::numeric_limits<uint32_t>::max(), "spf tables are limited to n < 2^32");
  require(hi <= (uint64_t{1} << 62), "sieve range above 2^62");
}

ArithmeticTable::Storage make_storage(FunctionId id, uint64_t n) {
  switch (id.fn) {
    case ArithFn::von_mangoldt: return std::vector<double>(n);
    case ArithFn::divisor: return std::vector<uint64_t>(n);
    case ArithFn::spf: return std::vector<uint32_t>(n);
    default: return std::vector<int8_t>(n);
  }
}

void fill_block(FunctionId id, uint64_t lo, uint64_t hi, uint64_t offset, ArithmeticTable::Storage& st) {
  const uint64_t n = hi - lo;
  switch (id.fn) {
    case ArithFn::mobius:
      detail::mobius_block(lo, hi, std::span(std::get<std::vector<int8_t>>(st)).subspan(offset, n));
      break;
    case ArithFn::liouville:
      liouville_block(lo, hi, std::span(std::get<std::vector<int8_t>>(st)).subspan(offset, n));
      break;
    case ArithFn::prime_indicator:
      detail::prime_indicator_block(lo, hi, std::span(std::get<std::vector<int8_t>>(st)).subspan(offset, n));
      break;
    case ArithFn::one: {
      auto s = std::span(std::get<std::vector<int8_t>>(st)).subspan(offset, n);
      std::fill(s.begin(), s.end(), int8_t{1});
      break;
    }
    case ArithFn::von_mangoldt:
      von_mangoldt_block(lo, hi, std::span(std::get<std::vector<double>>(st)).subspan(offset, n));
      break;
    case ArithFn::divisor:
      divisor_block(id.k, lo, hi, std::span(std::get<std::vector<uint64_t>>(st)).subspan(offset, n));
      break;
    case ArithFn::spf:
      spf_block(lo, hi, std::span(std::get<std::vector<uint32_t>>(st)).subspan(offset, n));
      break;
  }
}

}  // namespace

ArithmeticTable sieve_block(FunctionId id, uint64_t lo, uint64_t hi, const SieveConfig& cfg) {
  validate_request(id, lo, hi);
  if (hi - lo > cfg.max_entries)
    fail_budget("range of " + std::to_string(hi - lo) + " entries exceeds budget " + std::to_string(cfg.max_entries));
  ArithmeticTable::Storage st = make_storage(id, hi - lo);
  const auto blocks = split_blocks(lo, hi, std::max<uint64_t>(cfg.block_size, 2));
  const auto nb = static_cast<int64_t>(blocks.size());
  // blocks write disjoint slices; errors are carried out of the region
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1) num_threads(max_threads(cfg.exec)) if (cfg.exec == Exec::parallel && nb > 1)
  for (int64_t b = 0; b < nb; ++b) {
    try {
      fill_block(id, blocks[b].lo, blocks[b].hi, blocks[b].lo - lo, st);
    } catch (...) {
#pragma omp critical(msl_sieve_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return ArithmeticTable(id, lo, hi, std::move(st));
}

ArithmeticTable sieve_block(FunctionId id, const Segment& seg, Exec exec) {
  SieveConfig cfg;
  cfg.block_size = seg.block_size;
  cfg.exec = exec;
  return sieve_block(id, seg.lo, seg.hi, cfg);
}

ArithmeticTable divisor_table(uint32_t k, uint64_t lo, uint64_t hi, const SieveConfig& cfg) {
  require(k >= 1, "divisor_k requires k >= 1");
  return sieve_block(FunctionId::divisor(k), lo, hi, cfg);
}

ArithmeticTable spf_table(uint64_t lo, uint64_t hi, const SieveConfig& cfg) {
  return sieve_block(FunctionId::spf(), lo, hi, cfg);
}

void fill_real(FunctionId id, uint64_t lo, uint64_t hi, std::span<double> out) {
  require(out.size() == hi - lo, "fill_real output length mismatch");
  if (lo >= hi) return;
  validate_request(id, lo, hi);
  if (id.fn == ArithFn::von_mangoldt) {
    von_mangoldt_block(lo, hi, out);
    return;
  }
  ArithmeticTable::Storage st = make_storage(id, hi - lo);
  fill_block(id, lo, hi, 0, st);
  std::visit([&](const auto& v) { std::copy(v.begin(), v.end(), out.begin()); }, st);
}

std::vector<uint64_t> primes_in(uint64_t lo, uint64_t hi, const SieveConfig& cfg) {
  std::vector<uint64_t> out;
  lo = std::max<uint64_t>(lo, 1);
  if (lo >= hi) return out;
  const auto blocks = split_blocks(lo, hi, cfg.block_size);
  std::vector<std::vector<uint64_t>> parts(blocks.size());
  const auto nb = static_cast<int64_t>(blocks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(max_threads(cfg.exec)) if (cfg.exec == Exec::parallel && nb > 1)
  for (int64_t b = 0; b < nb; ++b) {
    std::vector<int8_t> ind(blocks[b].hi - blocks[b].lo);
    detail::prime_indicator_block(blocks[b].lo, blocks[b].hi, ind);
    for (uint64_t i = 0; i < ind.size(); ++i)
      if (ind[i]) parts[b].push_back(blocks[b].lo + i);
  }
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// ---------------------------------------------------------------------------
// Summatory functions

namespace {

template <class BlockSum>
int64_t ordered_block_sum(uint64_t X, const SieveConfig& cfg, BlockSum&& block_sum) {
  const auto blocks = split_blocks(1, X + 1, std::max<uint64_t>(cfg.block_size, 2));
  std::vector<int64_t> partial(blocks.size(), 0);
  const auto nb = static_cast<int64_t>(blocks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(max_threads(cfg.exec)) if (cfg.exec == Exec::parallel && nb > 1)
  for (int64_t b = 0; b < nb; ++b) partial[b] = block_sum(blocks[b].lo, blocks[b].hi);
  int64_t total = 0;
  for (const int64_t v : partial) total += v;
  return total;
}

}  // namespace

int64_t mertens(uint64_t X, const SieveConfig& cfg) {
  require(X >= 1, "mertens requires X >= 1");
  return ordered_block_sum(X, cfg, [](uint64_t lo, uint64_t hi) {
    std::vector<int8_t> mu(hi - lo);
    detail::mobius_block(lo, hi, mu);
    int64_t s = 0;
    for (const int8_t v : mu) s += v;
    return s;
  });
}

uint64_t prime_pi(uint64_t X, const SieveConfig& cfg) {
  require(X >= 1, "prime_pi requires X >= 1");
  return static_cast<uint64_t>(ordered_block_sum(X, cfg, [](uint64_t lo, uint64_t hi) {
    std::vector<int8_t> ind(hi - lo);
    detail::prime_indicator_block(lo, hi, ind);
    int64_t s = 0;
    for (const int8_t v : ind) s += v;
    return s;
  }));
}

InversionReport lambda_from_mobius_convolution(const ArithmeticTable& mu, const ArithmeticTable& lambda) {
  require(mu.function().fn == ArithFn::mobius && lambda.function().fn == ArithFn::liouville,
          "inversion check needs a mobius and a liouville table");
  require(mu.lo() == 1 && lambda.lo() == 1 && mu.hi() == lambda.hi(), "inversion check needs tables on [1, X]");
  const uint64_t X = mu.hi() - 1;
  const auto m = mu.values<int8_t>();
  const auto l = lambda.values<int8_t>();
  // h(d^2) = mu(d), so (lambda * h)(n) = sum_{d^2 | n} mu(d) lambda(n / d^2)
  std::vector<int32_t> acc(X + 1, 0);
  for (uint64_t d = 1; d * d <= X; ++d) {
    const int32_t md = m[d - 1];
    if (md == 0) continue;
    const uint64_t dd = d * d;
    for (uint64_t k = 1; k * dd <= X; ++k) acc[k * dd] += md * l[k - 1];
  }
  InversionReport rep;
  for (uint64_t n = 1; n <= X; ++n) {
    ++rep.checked;
    if (acc[n] != m[n - 1]) {
      rep.pass = false;
      rep.first_failure = n;
      break;
    }
  }
  return rep;
}

InversionReport lambda_from_mobius_convolution(uint64_t X, const SieveConfig& cfg) {
  require(X >= 1, "inversion check requires X >= 1");
  return lambda_from_mobius_convolution(sieve_block(FunctionId::mobius(), 1, X + 1, cfg),
                                        sieve_block(FunctionId::liouville(), 1, X + 1, cfg));
}

}  // namespace msl
