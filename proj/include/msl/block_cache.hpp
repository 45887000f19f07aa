#pragma once

// On-disk sieve block cache.
//
// File layout (all integers little-endian, no padding):
//   magic    8 bytes  "MSLBLOCK"
//   version  u32
//   function u32      ArithFn value
//   k        u32      divisor order (0 otherwise)
//   lo, hi   u64      half-open range
//   checksum u64      FNV-1a 64 of the payload bytes
//   payload           (hi - lo) fixed-width values: i8 for mu/lambda/indicators,
//                     u32 for spf, f64 for Lambda, u64 for d_k

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "msl/error.hpp"
#include "msl/sieve.hpp"

namespace msl {

inline constexpr uint32_t kBlockFormatVersion = 1;
inline constexpr size_t kBlockHeaderBytes = 44;

/// Thrown when a block's payload does not match its checksum.
class CacheCorruption : public Error {
 public:
  explicit CacheCorruption(const std::string& what) : Error(ErrorKind::io, what) {}
};

uint64_t fnv1a64(std::span<const unsigned char> bytes);

void write_block(const std::filesystem::path& path, const ArithmeticTable& table);
/// Throws Error(io) on unreadable / malformed files, CacheCorruption on a
/// checksum mismatch.
ArithmeticTable read_block(const std::filesystem::path& path);

struct CacheStats {
  uint64_t hits = 0;
  uint64_t misses = 0;
  uint64_t corrupt = 0;
};

class BlockCache {
 public:
  explicit BlockCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path_for(FunctionId id, uint64_t lo, uint64_t hi) const;

  /// Cached table for exactly (id, lo, hi), or nullopt when missing or
  /// corrupt. A hit refreshes the file's modification time (LRU clock).
  std::optional<ArithmeticTable> load(FunctionId id, uint64_t lo, uint64_t hi);
  void store(const ArithmeticTable& table);

  /// Table on [lo, hi) assembled from cache-aligned blocks of
  /// `cfg.block_size`, sieving and storing the ones that are missing.
  ArithmeticTable fetch(FunctionId id, uint64_t lo, uint64_t hi, const SieveConfig& cfg = {});

  const CacheStats& stats() const { return stats_; }
  void set_logger(std::function<void(const std::string&)> log) { log_ = std::move(log); }

 private:
  std::filesystem::path dir_;
  CacheStats stats_;
  std::function<void(const std::string&)> log_;
};

/// MSL_CACHE_DIR when set, otherwise `fallback`.
std::filesystem::path resolve_cache_dir(const std::filesystem::path& fallback);

}  // namespace msl
