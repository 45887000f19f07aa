#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "msl/block_cache.hpp"
#include "msl/rng.hpp"

using namespace msl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("msl_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("block round trip is bit exact for every payload width") {
  const auto dir = scratch("roundtrip");
  CounterRng rng(11, "cache");
  for (auto id : {FunctionId::mobius(), FunctionId::liouville(), FunctionId::von_mangoldt(), FunctionId::divisor(3),
                  FunctionId::spf(), FunctionId::prime_indicator(), FunctionId::one()}) {
    const uint64_t lo = rng.between(1, 1000000);
    const uint64_t hi = lo + rng.between(1, 5000);
    const auto t = sieve_block(id, lo, hi);
    const auto path = dir / "b.mslb";
    write_block(path, t);
    const auto back = read_block(path);
    CHECK(back.function() == id);
    CHECK(back.lo() == lo);
    CHECK(back.hi() == hi);
    CHECK(back.storage() == t.storage());
  }
}

TEST_CASE("header layout") {
  const auto dir = scratch("layout");
  const auto t = sieve_block(FunctionId::spf(), 10, 20);
  write_block(dir / "x.mslb", t);
  CHECK(fs::file_size(dir / "x.mslb") == kBlockHeaderBytes + 10 * 4);
  std::ifstream in(dir / "x.mslb", std::ios::binary);
  char magic[8];
  in.read(magic, 8);
  CHECK(std::string(magic, 8) == "MSLBLOCK");
  unsigned char rest[36];
  in.read(reinterpret_cast<char*>(rest), 36);
  CHECK(rest[0] == 1);   // version
  CHECK(rest[4] == 5);   // spf
  CHECK(rest[12] == 10); // lo
  CHECK(rest[20] == 20); // hi
}

TEST_CASE("corrupted payload is detected and resieved") {
  const auto dir = scratch("corrupt");
  BlockCache cache(dir);
  std::vector<std::string> log;
  cache.set_logger([&](const std::string& m) { log.push_back(m); });
  SieveConfig cfg;
  cfg.block_size = 1000;
  const auto first = cache.fetch(FunctionId::mobius(), 1, 3000, cfg);
  CHECK(cache.stats().misses == 3);

  const auto victim = cache.path_for(FunctionId::mobius(), 1000, 2000);
  {
    std::fstream f(victim, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(kBlockHeaderBytes + 17);
    char c = 0x55;
    f.write(&c, 1);
  }
  CHECK_THROWS_AS(read_block(victim), CacheCorruption);
  const auto again = cache.fetch(FunctionId::mobius(), 1, 3000, cfg);
  CHECK(again.storage() == first.storage());
  CHECK(cache.stats().corrupt == 1);
  CHECK(cache.stats().hits == 2);
  CHECK(log.size() == 1);
  // resieved block was rewritten
  CHECK_NOTHROW(read_block(victim));
}

TEST_CASE("unaligned fetch equals direct sieve") {
  const auto dir = scratch("fetch");
  BlockCache cache(dir);
  SieveConfig cfg;
  cfg.block_size = 4096;
  for (auto id : {FunctionId::von_mangoldt(), FunctionId::divisor(2)}) {
    const auto a = cache.fetch(id, 777, 20001, cfg);
    const auto b = sieve_block(id, 777, 20001);
    CHECK(a.storage() == b.storage());
    const auto c = cache.fetch(id, 5000, 9000, cfg);
    CHECK(c.storage() == sieve_block(id, 5000, 9000).storage());
  }
}

TEST_CASE("garbage files are io errors") {
  const auto dir = scratch("garbage");
  {
    std::ofstream out(dir / "g.mslb");
    out << "hello";
  }
  try {
    read_block(dir / "g.mslb");
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
  CHECK_THROWS_AS(read_block(dir / "missing.mslb"), Error);
}

TEST_CASE("cache dir environment override") {
  setenv("MSL_CACHE_DIR", "/tmp/msl_env_cache", 1);
  CHECK(resolve_cache_dir("/nowhere") == fs::path("/tmp/msl_env_cache"));
  unsetenv("MSL_CACHE_DIR");
  CHECK(resolve_cache_dir("/nowhere") == fs::path("/nowhere"));
}
