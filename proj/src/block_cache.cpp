#include "msl/block_cache.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <unordered_map>

namespace msl {

namespace fs = std::filesystem;

uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

namespace {

template <class T>
void put_le(std::vector<unsigned char>& out, T v) {
  uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof(T));
  for (size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

template <class T>
T get_le(const unsigned char* p) {
  uint64_t bits = 0;
  for (size_t i = 0; i < sizeof(T); ++i) bits |= uint64_t{p[i]} << (8 * i);
  T v;
  std::memcpy(&v, &bits, sizeof(T));
  return v;
}

std::vector<unsigned char> encode_payload(const ArithmeticTable& t) {
  std::vector<unsigned char> out;
  std::visit(
      [&](const auto& vals) {
        using T = typename std::decay_t<decltype(vals)>::value_type;
        out.reserve(vals.size() * sizeof(T));
        for (const T v : vals) put_le(out, v);
      },
      t.storage());
  return out;
}

size_t value_width(ArithFn fn) {
  switch (fn) {
    case ArithFn::von_mangoldt:
    case ArithFn::divisor: return 8;
    case ArithFn::spf: return 4;
    default: return 1;
  }
}

template <class T>
std::vector<T> decode(const unsigned char* p, uint64_t n) {
  std::vector<T> v(n);
  for (uint64_t i = 0; i < n; ++i) v[i] = get_le<T>(p + i * sizeof(T));
  return v;
}

std::mutex& key_mutex(const fs::path& p) {
  static std::mutex guard;
  static std::unordered_map<std::string, std::unique_ptr<std::mutex>> locks;
  std::lock_guard lock(guard);
  auto& m = locks[p.string()];
  if (!m) m = std::make_unique<std::mutex>();
  return *m;
}

}  // namespace

void write_block(const fs::path& path, const ArithmeticTable& table) {
  const auto payload = encode_payload(table);
  std::vector<unsigned char> header;
  header.insert(header.end(), {'M', 'S', 'L', 'B', 'L', 'O', 'C', 'K'});
  put_le<uint32_t>(header, kBlockFormatVersion);
  put_le<uint32_t>(header, static_cast<uint32_t>(table.function().fn));
  put_le<uint32_t>(header, table.function().k);
  put_le<uint64_t>(header, table.lo());
  put_le<uint64_t>(header, table.hi());
  put_le<uint64_t>(header, fnv1a64(payload));
  // write to a sibling then rename, so readers never see a partial block
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail_io("cannot write cache block " + tmp.string());
    out.write(reinterpret_cast<const char*>(header.data()), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (!out) fail_io("short write on cache block " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail_io("cannot move cache block into place: " + path.string() + ": " + ec.message());
}

ArithmeticTable read_block(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("cannot open cache block " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < kBlockHeaderBytes || std::memcmp(bytes.data(), "MSLBLOCK", 8) != 0)
    fail_io("not a cache block: " + path.string());
  const unsigned char* h = bytes.data();
  const auto version = get_le<uint32_t>(h + 8);
  if (version != kBlockFormatVersion) fail_io("cache block version " + std::to_string(version) + " unsupported: " + path.string());
  FunctionId id{static_cast<ArithFn>(get_le<uint32_t>(h + 12)), get_le<uint32_t>(h + 16)};
  const auto lo = get_le<uint64_t>(h + 20);
  const auto hi = get_le<uint64_t>(h + 28);
  const auto checksum = get_le<uint64_t>(h + 36);
  if (id.fn < ArithFn::mobius || id.fn > ArithFn::one || hi <= lo) fail_io("malformed cache block header: " + path.string());
  const uint64_t n = hi - lo;
  const size_t width = value_width(id.fn);
  if (bytes.size() != kBlockHeaderBytes + n * width) fail_io("cache block length mismatch: " + path.string());
  const unsigned char* payload = h + kBlockHeaderBytes;
  if (fnv1a64({payload, n * width}) != checksum) throw CacheCorruption("checksum mismatch in " + path.string());
  switch (id.fn) {
    case ArithFn::von_mangoldt: return ArithmeticTable(id, lo, hi, decode<double>(payload, n));
    case ArithFn::divisor: return ArithmeticTable(id, lo, hi, decode<uint64_t>(payload, n));
    case ArithFn::spf: return ArithmeticTable(id, lo, hi, decode<uint32_t>(payload, n));
    default: return ArithmeticTable(id, lo, hi, decode<int8_t>(payload, n));
  }
}

BlockCache::BlockCache(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) fail_io("cannot create cache dir " + dir_.string() + ": " + ec.message());
}

fs::path BlockCache::path_for(FunctionId id, uint64_t lo, uint64_t hi) const {
  return dir_ / (to_string(id) + "_" + std::to_string(lo) + "_" + std::to_string(hi) + ".mslb");
}

std::optional<ArithmeticTable> BlockCache::load(FunctionId id, uint64_t lo, uint64_t hi) {
  const fs::path p = path_for(id, lo, hi);
  std::lock_guard lock(key_mutex(p));
  if (!fs::exists(p)) {
    ++stats_.misses;
    return std::nullopt;
  }
  try {
    auto t = read_block(p);
    if (!(t.function() == id) || t.lo() != lo || t.hi() != hi) {
      ++stats_.misses;
      return std::nullopt;
    }
    std::error_code ec;
    fs::last_write_time(p, fs::file_time_type::clock::now(), ec);
    ++stats_.hits;
    return t;
  } catch (const Error& e) {
    ++stats_.corrupt;
    if (log_) log_("cache: " + std::string(e.what()) + "; resieving");
    return std::nullopt;
  }
}

void BlockCache::store(const ArithmeticTable& table) {
  const fs::path p = path_for(table.function(), table.lo(), table.hi());
  std::lock_guard lock(key_mutex(p));
  write_block(p, table);
}

ArithmeticTable BlockCache::fetch(FunctionId id, uint64_t lo, uint64_t hi, const SieveConfig& cfg) {
  require(lo >= 1 && lo < hi, "cache fetch requires 1 <= lo < hi");
  if (hi - lo > cfg.max_entries) fail_budget("range exceeds budget");
  const uint64_t bs = std::max<uint64_t>(cfg.block_size, 2);
  // blocks are aligned to multiples of the block size so that overlapping
  // requests share files
  const uint64_t first = (lo / bs) * bs;
  ArithmeticTable::Storage out;
  bool init = false;
  for (uint64_t s = first; s < hi; s += bs) {
    const uint64_t blo = std::max<uint64_t>(s, 1);
    const uint64_t bhi = s + bs;
    auto block = load(id, blo, bhi);
    if (!block) {
      SieveConfig inner = cfg;
      inner.max_entries = bs;
      block = sieve_block(id, blo, bhi, inner);
      store(*block);
    }
    const uint64_t take_lo = std::max(lo, blo);
    const uint64_t take_hi = std::min(hi, bhi);
    std::visit(
        [&](const auto& src) {
          using V = std::decay_t<decltype(src)>;
          if (!init) {
            out = V{};
            init = true;
          }
          auto& dst = std::get<V>(out);
          dst.insert(dst.end(), src.begin() + static_cast<std::ptrdiff_t>(take_lo - blo),
                     src.begin() + static_cast<std::ptrdiff_t>(take_hi - blo));
        },
        block->storage());
  }
  return ArithmeticTable(id, lo, hi, std::move(out));
}

fs::path resolve_cache_dir(const fs::path& fallback) {
  if (const char* env = std::getenv("MSL_CACHE_DIR"); env && *env) return fs::path(env);
  return fallback;
}

}  // namespace msl
