#include <cmath>

#include "doctest.h"
#include "msl/error.hpp"
#include "msl/rng.hpp"
#include "msl/sieve.hpp"
#include "oracles.hpp"

using namespace msl;

namespace {

std::vector<int64_t> ints(const ArithmeticTable& t) {
  std::vector<int64_t> out;
  for (uint64_t n = t.lo(); n < t.hi(); ++n) out.push_back(t.integer(n));
  return out;
}

}  // namespace

TEST_CASE("mobius on [1, 11) matches trial division") {
  const auto t = sieve_block(FunctionId::mobius(), 1, 11);
  CHECK(ints(t) == std::vector<int64_t>{1, -1, -1, 0, -1, 1, -1, 0, 0, 1});
  for (uint64_t n = 1; n < 11; ++n) CHECK(t.integer(n) == oracle::mobius(n));
  CHECK(ints(sieve_block(FunctionId::mobius(), 4, 5)) == std::vector<int64_t>{0});
}

TEST_CASE("liouville and von Mangoldt small values") {
  CHECK(ints(sieve_block(FunctionId::liouville(), 1, 9)) == std::vector<int64_t>{1, -1, -1, 1, -1, 1, -1, -1});
  const auto vm = sieve_block(FunctionId::von_mangoldt(), 8, 9);
  CHECK(vm.value(8) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(vm.integer(8), Error);
}

TEST_CASE("divisor tables") {
  CHECK(ints(divisor_table(2, 1, 7)) == std::vector<int64_t>{1, 2, 2, 3, 2, 4});
  CHECK(divisor_table(5, 1, 2).integer(1) == 1);
  CHECK(divisor_table(3, 4, 5).integer(4) == 6);
  CHECK(oracle::ordered_factorizations(3, 4) == 6);
  const auto d4 = divisor_table(4, 1, 2001);
  for (uint64_t n = 1; n <= 2000; n += 7) CHECK(d4.integer(n) == static_cast<int64_t>(oracle::ordered_factorizations(4, n)));
  CHECK_THROWS_AS(divisor_table(0, 1, 10), Error);
}

TEST_CASE("spf table") {
  const auto t = spf_table(1, 100);
  CHECK(t.integer(1) == 1);
  CHECK(t.integer(15) == 3);
  for (uint64_t n = 2; n < 100; ++n) CHECK(t.integer(n) == static_cast<int64_t>(oracle::spf(n)));
}

TEST_CASE("argument validation and budget") {
  CHECK_THROWS_AS(sieve_block(FunctionId::mobius(), 0, 10), Error);
  CHECK_THROWS_AS(sieve_block(FunctionId::mobius(), 10, 10), Error);
  CHECK_THROWS_AS(parse_function_id("zeta"), Error);
  SieveConfig tight;
  tight.max_entries = 100;
  try {
    sieve_block(FunctionId::mobius(), 1, 1000, tight);
    FAIL("expected budget error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::budget);
  }
  CHECK(parse_function_id("d3") == FunctionId::divisor(3));
  CHECK(parse_function_id("divisor_2") == FunctionId::divisor(2));
  CHECK(to_string(FunctionId::divisor(7)) == "d7");
}

TEST_CASE("summatory anchors") {
  CHECK(mertens(1) == 1);
  CHECK(mertens(10) == -1);
  CHECK(mertens(10000) == -23);
  CHECK(oracle::mertens(10000) == -23);
  CHECK(prime_pi(1) == 0);
  CHECK(prime_pi(100) == 25);
  CHECK(prime_pi(1000000) == 78498);
}

TEST_CASE("summatory functions are block-size invariant") {
  for (uint64_t bs : {2u, 3u, 97u, 1024u, 65536u}) {
    SieveConfig cfg;
    cfg.block_size = bs;
    CHECK(mertens(100000, cfg) == mertens(100000));
    CHECK(prime_pi(100000, cfg) == prime_pi(100000));
    cfg.exec = Exec::serial;
    CHECK(mertens(100000, cfg) == mertens(100000));
  }
}

TEST_CASE("serial and parallel tables are identical") {
  SieveConfig par;
  par.block_size = 4096;
  SieveConfig ser = par;
  ser.exec = Exec::serial;
  for (auto id : {FunctionId::mobius(), FunctionId::liouville(), FunctionId::divisor(3), FunctionId::spf(),
                  FunctionId::von_mangoldt(), FunctionId::prime_indicator()}) {
    const auto a = sieve_block(id, 12345, 112345, par);
    const auto b = sieve_block(id, 12345, 112345, ser);
    CHECK(a.storage() == b.storage());
  }
}

TEST_CASE("sum of mu over divisors is the indicator of 1") {
  const uint64_t X = 1000000;
  const auto mu = sieve_block(FunctionId::mobius(), 1, X + 1);
  const auto m = mu.values<int8_t>();
  std::vector<int32_t> acc(X + 1, 0);
  for (uint64_t d = 1; d <= X; ++d)
    if (m[d - 1])
      for (uint64_t n = d; n <= X; n += d) acc[n] += m[d - 1];
  bool ok = acc[1] == 1;
  for (uint64_t n = 2; n <= X; ++n) ok = ok && acc[n] == 0;
  CHECK(ok);
}

TEST_CASE("liouville is completely multiplicative") {
  const uint64_t X = 1000000;
  const auto lam = sieve_block(FunctionId::liouville(), 1, X + 1);
  const auto l = lam.values<int8_t>();
  bool ok = true;
  for (uint64_t m = 1; m <= X; ++m)
    for (uint64_t n = 1; m * n <= X; ++n) ok = ok && (l[m * n - 1] == l[m - 1] * l[n - 1]);
  CHECK(ok);
}

TEST_CASE("d_k is d_{k-1} convolved with 1") {
  const uint64_t X = 100000;
  for (uint32_t k = 2; k <= 5; ++k) {
    const auto prev_table = divisor_table(k - 1, 1, X + 1);
    const auto prev = prev_table.values<uint64_t>();
    const auto cur = divisor_table(k, 1, X + 1);
    std::vector<uint64_t> conv(X + 1, 0);
    for (uint64_t d = 1; d <= X; ++d)
      for (uint64_t n = d; n <= X; n += d) conv[n] += prev[d - 1];
    bool ok = true;
    for (uint64_t n = 1; n <= X; ++n) ok = ok && conv[n] == cur.values<uint64_t>()[n - 1];
    CHECK_MESSAGE(ok, "k = " << k);
  }
}

TEST_CASE("single-entry sieves match trial division for large random n") {
  CounterRng rng(7, "sieve-random");
  for (int i = 0; i < 300; ++i) {
    const uint64_t n = rng.between(2, 1000000000);
    CHECK(sieve_block(FunctionId::mobius(), n, n + 1).integer(n) == oracle::mobius(n));
    CHECK(sieve_block(FunctionId::divisor(3), n, n + 1).integer(n) == static_cast<int64_t>(oracle::divisor_k(3, n)));
    CHECK(sieve_block(FunctionId::spf(), n, n + 1).integer(n) == static_cast<int64_t>(oracle::spf(n)));
  }
}

TEST_CASE("mobius inversion through lambda") {
  CHECK(lambda_from_mobius_convolution(1).pass);
  const auto rep = lambda_from_mobius_convolution(100000);
  CHECK(rep.pass);
  CHECK(rep.checked == 100000);

  auto mu = sieve_block(FunctionId::mobius(), 1, 1001);
  const auto lam = sieve_block(FunctionId::liouville(), 1, 1001);
  std::get<std::vector<int8_t>>(mu.storage())[360 - 1] = 1;  // mu(360) is 0
  const auto bad = lambda_from_mobius_convolution(mu, lam);
  CHECK_FALSE(bad.pass);
  REQUIRE(bad.first_failure.has_value());
  CHECK(*bad.first_failure == 360);
}

TEST_CASE("segment validation") {
  CHECK_THROWS_AS(Segment(5, 5), Error);
  CHECK_THROWS_AS(Segment(1, 10, 1), Error);
  const Segment s(1, 100, 7);
  CHECK(sieve_block(FunctionId::mobius(), s).storage() == sieve_block(FunctionId::mobius(), 1, 100).storage());
}
