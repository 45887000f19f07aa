#include "msl/characters.hpp"

#include <numbers>
#include <numeric>

#include "msl/error.hpp"
#include "msl/sieve.hpp"

namespace msl {

namespace {

uint64_t mulmod(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

uint64_t powmod(uint64_t a, uint64_t e, uint64_t m) {
  uint64_t r = 1 % m;
  a %= m;
  for (; e; e >>= 1, a = mulmod(a, a, m))
    if (e & 1) r = mulmod(r, a, m);
  return r;
}

uint64_t smallest_primitive_root(uint64_t p, uint32_t e) {
  uint64_t pe = 1;
  for (uint32_t i = 0; i < e; ++i) pe *= p;
  const uint64_t phi = pe / p * (p - 1);
  std::vector<uint64_t> divisors_of_phi;
  for (auto [r, a] : factorize(phi)) divisors_of_phi.push_back(r);
  for (uint64_t g = 2; g < pe; ++g) {
    if (g % p == 0) continue;
    bool generator = true;
    for (const uint64_t r : divisors_of_phi)
      if (powmod(g, phi / r, pe) == 1) {
        generator = false;
        break;
      }
    if (generator) return g;
  }
  fail_validation("no primitive root mod " + std::to_string(pe));
}

}  // namespace

uint64_t euler_phi(uint64_t q) {
  uint64_t phi = q;
  for (auto [p, a] : factorize(q)) phi = phi / p * (p - 1);
  return phi;
}

std::shared_ptr<const CharacterGroupData> character_group_data(uint64_t q) {
  if (q < 1 || q > kMaxCharacterModulus) fail_validation("character modulus out of range: " + std::to_string(q));
  auto g = std::make_shared<CharacterGroupData>();
  g->q = q;
  g->phi = euler_phi(q);

  // per factor, the log of each residue of its prime-power modulus
  std::vector<std::vector<int32_t>> local_logs;
  for (auto [p, e] : factorize(q)) {
    uint64_t pe = 1;
    for (uint32_t i = 0; i < e; ++i) pe *= p;
    if (p == 2) {
      if (e == 1) continue;
      std::vector<int32_t> sign(pe, -1);
      std::vector<int32_t> five(pe, -1);
      const uint32_t order5 = e >= 3 ? static_cast<uint32_t>(pe / 4) : 1;
      uint64_t x = 1;
      for (uint32_t b = 0; b < order5; ++b, x = x * 5 % pe) {
        sign[x] = 0;
        five[x] = static_cast<int32_t>(b);
        sign[pe - x] = 1;
        five[pe - x] = static_cast<int32_t>(b);
      }
      g->factors.push_back({pe, pe - 1, 2});
      local_logs.push_back(std::move(sign));
      if (e >= 3) {
        g->factors.push_back({pe, 5, order5});
        local_logs.push_back(std::move(five));
      }
    } else {
      const uint64_t root = smallest_primitive_root(p, e);
      const auto order = static_cast<uint32_t>(pe / p * (p - 1));
      std::vector<int32_t> logs(pe, -1);
      uint64_t x = 1;
      for (uint32_t k = 0; k < order; ++k, x = x * root % pe) logs[x] = static_cast<int32_t>(k);
      g->factors.push_back({pe, root, order});
      local_logs.push_back(std::move(logs));
    }
  }

  const size_t r = g->factors.size();
  g->exponent = 1;
  for (const auto& f : g->factors) g->exponent = std::lcm(g->exponent, f.order);
  g->dlog.assign(q * std::max<size_t>(r, 1), -1);
  for (uint64_t n = 0; n < q; ++n) {
    if (std::gcd(n, q) != 1) continue;
    for (size_t j = 0; j < r; ++j) g->dlog[n * r + j] = local_logs[j][n % g->factors[j].modulus];
    if (r == 0) g->dlog[n] = 0;
  }
  g->roots.resize(g->exponent);
  for (uint32_t j = 0; j < g->exponent; ++j) {
    // exact values at the quarter points keep small orders free of rounding
    const uint64_t num = uint64_t{j} * 4;
    if (num % g->exponent == 0) {
      static constexpr std::complex<double> quarter[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
      g->roots[j] = quarter[num / g->exponent];
    } else {
      const double t = 2 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(g->exponent);
      g->roots[j] = {std::cos(t), std::sin(t)};
    }
  }
  return g;
}

DirichletCharacter::DirichletCharacter(std::shared_ptr<const CharacterGroupData> group, uint64_t index,
                                       std::vector<uint32_t> exponents)
    : group_(std::move(group)), index_(index), exponents_(std::move(exponents)) {
  require(exponents_.size() == group_->factors.size(), "exponent vector length mismatch");
  for (size_t j = 0; j < exponents_.size(); ++j)
    require(exponents_[j] < group_->factors[j].order, "exponent out of range");
}

bool DirichletCharacter::is_principal() const {
  for (const uint32_t c : exponents_)
    if (c) return false;
  return true;
}

int64_t DirichletCharacter::value_index(uint64_t n) const {
  const auto& g = *group_;
  const uint64_t r = n % g.q;
  const size_t nf = g.factors.size();
  if (g.dlog[r * std::max<size_t>(nf, 1)] < 0) return -1;
  uint64_t acc = 0;
  for (size_t j = 0; j < nf; ++j) {
    const uint64_t scale = g.exponent / g.factors[j].order;
    acc += uint64_t{exponents_[j]} * static_cast<uint64_t>(g.dlog[r * nf + j]) % g.factors[j].order * scale;
  }
  return static_cast<int64_t>(acc % g.exponent);
}

RootOfUnity DirichletCharacter::root(uint64_t n) const {
  const int64_t j = value_index(n);
  if (j < 0) return {0, 0};
  const auto d = std::gcd(static_cast<uint32_t>(j), group_->exponent);
  return {group_->exponent / d, static_cast<uint32_t>(j) / d};
}

std::complex<double> DirichletCharacter::operator()(uint64_t n) const {
  const int64_t j = value_index(n);
  return j < 0 ? std::complex<double>{0, 0} : group_->roots[static_cast<size_t>(j)];
}

uint32_t DirichletCharacter::order() const {
  uint32_t ord = 1;
  for (size_t j = 0; j < exponents_.size(); ++j) {
    const uint32_t n = group_->factors[j].order;
    ord = std::lcm(ord, n / std::gcd(n, exponents_[j]));
  }
  return ord;
}

std::vector<DirichletCharacter> character_group(uint64_t q) {
  const auto g = character_group_data(q);
  std::vector<DirichletCharacter> out;
  out.reserve(g->phi);
  std::vector<uint32_t> exps(g->factors.size(), 0);
  for (uint64_t idx = 0; idx < g->phi; ++idx) {
    out.emplace_back(g, idx, exps);
    // mixed-radix increment, last factor fastest
    for (size_t j = exps.size(); j-- > 0;) {
      if (++exps[j] < g->factors[j].order) break;
      exps[j] = 0;
    }
  }
  return out;
}

DirichletCharacter character(uint64_t q, uint64_t index) {
  const auto g = character_group_data(q);
  if (index >= g->phi) fail_validation("character index " + std::to_string(index) + " >= phi(q)");
  std::vector<uint32_t> exps(g->factors.size(), 0);
  uint64_t rest = index;
  for (size_t j = exps.size(); j-- > 0;) {
    exps[j] = static_cast<uint32_t>(rest % g->factors[j].order);
    rest /= g->factors[j].order;
  }
  return DirichletCharacter(g, index, std::move(exps));
}

std::complex<double> evaluate(const DirichletCharacter& chi, uint64_t n) { return chi(n); }

OrthogonalityReport orthogonality_check(uint64_t q) {
  if (q < 1 || q > 10000) fail_validation("orthogonality_check requires 1 <= q <= 10^4");
  const auto chars = character_group(q);
  OrthogonalityReport rep;
  rep.q = q;
  rep.phi = chars.size();
  std::vector<uint64_t> units;
  for (uint64_t a = 1; a <= q; ++a)
    if (std::gcd(a, q) == 1) units.push_back(a % q);
  const double phi = static_cast<double>(rep.phi);

  // row relation over all pairs while phi^3 stays small, otherwise over
  // c = a b^-1 (the summand depends on a, b only through c)
  rep.exhaustive_pairs = rep.phi * rep.phi * rep.phi <= 50'000'000;
  if (rep.exhaustive_pairs) {
    for (const uint64_t a : units)
      for (const uint64_t b : units) {
        std::complex<double> s = 0;
        for (const auto& chi : chars) s += chi(a) * std::conj(chi(b));
        rep.max_row_deviation = std::max(rep.max_row_deviation, std::abs(s - (a == b ? phi : 0.0)));
      }
  } else {
    for (const uint64_t c : units) {
      std::complex<double> s = 0;
      for (const auto& chi : chars) s += chi(c) * std::conj(chi(1));
      rep.max_row_deviation = std::max(rep.max_row_deviation, std::abs(s - (c % q == 1 % q ? phi : 0.0)));
    }
  }
  for (const auto& chi : chars) {
    if (chi.is_principal()) continue;
    std::complex<double> s = 0;
    for (uint64_t n = 0; n < q; ++n) s += chi(n);
    rep.max_column_deviation = std::max(rep.max_column_deviation, std::abs(s));
  }
  rep.max_deviation = std::max(rep.max_row_deviation, rep.max_column_deviation);
  return rep;
}

}  // namespace msl
