#include "msl/pretentious.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "msl/error.hpp"

namespace msl {

namespace {

std::vector<uint64_t> primes_to(uint64_t X) {
  if (X < 2) return {};
  return primes_in(2, X + 1);
}

}  // namespace

MultFunctionSpec MultFunctionSpec::from_id(FunctionId id, uint64_t X) {
  MultFunctionSpec s;
  s.label_ = to_string(id);
  s.primes_ = primes_to(X);
  double v = 0;
  switch (id.fn) {
    case ArithFn::mobius:
      v = -1;
      s.completion_ = Completion::mobius_like;
      break;
    case ArithFn::liouville:
      v = -1;
      break;
    case ArithFn::one:
      v = 1;
      break;
    default:
      fail_validation("not a unimodular multiplicative function: " + to_string(id));
  }
  s.values_.assign(s.primes_.size(), v);
  s.covered_ = X;
  return s;
}

MultFunctionSpec MultFunctionSpec::from_table(std::string label, std::vector<uint64_t> primes,
                                              std::vector<std::complex<double>> values, Completion completion) {
  require(primes.size() == values.size(), "prime table and value table differ in length");
  require(std::is_sorted(primes.begin(), primes.end()) &&
              std::adjacent_find(primes.begin(), primes.end()) == primes.end(),
          "prime table must be strictly ascending");
  for (size_t i = 0; i < values.size(); ++i)
    if (!(std::abs(values[i]) <= 1 + 1e-12))
      fail_validation("|f(p)| > 1 at p = " + std::to_string(primes[i]));
  MultFunctionSpec s;
  s.label_ = std::move(label);
  s.completion_ = completion;
  // coverage: every prime up to the first missing one
  uint64_t covered = 1;
  if (!primes.empty()) {
    require(primes.back() < (uint64_t{1} << 31), "prime table too large");
    const auto reference = primes_up_to(static_cast<uint32_t>(2 * primes.back() + 2));
    size_t i = 0;
    for (const uint32_t p : reference) {
      if (i < primes.size() && primes[i] == p) {
        ++i;
        continue;
      }
      covered = p - 1;
      break;
    }
    for (const uint64_t p : primes)
      if (factorize(p).size() != 1 || factorize(p)[0].second != 1) fail_validation(std::to_string(p) + " is not prime");
  }
  s.covered_ = covered;
  s.primes_ = std::move(primes);
  s.values_ = std::move(values);
  return s;
}

MultFunctionSpec MultFunctionSpec::from_prime_function(std::string label, uint64_t X,
                                                       const std::function<std::complex<double>(uint64_t)>& f,
                                                       Completion completion) {
  auto primes = primes_to(X);
  std::vector<std::complex<double>> values(primes.size());
  for (size_t i = 0; i < primes.size(); ++i) {
    values[i] = f(primes[i]);
    if (!(std::abs(values[i]) <= 1 + 1e-12)) fail_validation("|f(p)| > 1 at p = " + std::to_string(primes[i]));
  }
  MultFunctionSpec s;
  s.label_ = std::move(label);
  s.completion_ = completion;
  s.primes_ = std::move(primes);
  s.values_ = std::move(values);
  s.covered_ = X;
  return s;
}

MultFunctionSpec MultFunctionSpec::twisted_character(const DirichletCharacter& chi, double t, uint64_t X) {
  return from_prime_function(
      "chi" + std::to_string(chi.modulus()) + "_" + std::to_string(chi.index()) + "*n^it", X,
      [&](uint64_t p) { return chi(p) * std::polar(1.0, t * std::log(static_cast<double>(p))); },
      Completion::completely_multiplicative);
}

std::complex<double> MultFunctionSpec::at_prime(uint64_t p) const {
  const auto it = std::lower_bound(primes_.begin(), primes_.end(), p);
  if (it == primes_.end() || *it != p) fail_validation("missing prime value f(" + std::to_string(p) + ") in " + label_);
  return values_[static_cast<size_t>(it - primes_.begin())];
}

std::complex<double> MultFunctionSpec::operator()(uint64_t n) const {
  require(n >= 1, "f(n) needs n >= 1");
  std::complex<double> r = 1;
  for (auto [p, a] : factorize(n)) {
    if (a >= 2 && completion_ == Completion::mobius_like) return 0;
    r *= std::pow(at_prime(p), static_cast<int>(a));
  }
  return r;
}

double distance_sq(const MultFunctionSpec& f, const MultFunctionSpec& g, uint64_t X) {
  if (f.covered() < X) fail_validation("missing prime values: " + f.label() + " covers primes <= " + std::to_string(f.covered()));
  if (g.covered() < X) fail_validation("missing prime values: " + g.label() + " covers primes <= " + std::to_string(g.covered()));
  // both tables start with every prime <= X, in the same order
  CompensatedSum s;
  const auto fp = f.primes();
  for (size_t i = 0; i < fp.size() && fp[i] <= X; ++i) {
    const double re = (f.values()[i] * std::conj(g.values()[i])).real();
    s.add((1 - re) / static_cast<double>(fp[i]));
  }
  return std::max(0.0, s.value());
}

double distance(const MultFunctionSpec& f, const MultFunctionSpec& g, uint64_t X) {
  return std::sqrt(distance_sq(f, g, X));
}

double lipschitz_constant(uint64_t X) {
  CompensatedSum s;
  for (const uint64_t p : primes_to(X)) s.add(std::log(static_cast<double>(p)) / static_cast<double>(p));
  return s.value();
}

namespace {

// f(p) conj chi(p) / p for one character, zero terms dropped.
struct Twist {
  uint64_t q;
  uint64_t index;
  std::vector<double> log_p;
  std::vector<double> re;
  std::vector<double> im;
};

double twisted_distance_sq(const Twist& tw, double base, double t) {
  CompensatedSum s;
  s.add(base);
  for (size_t i = 0; i < tw.log_p.size(); ++i) {
    const auto z = std::polar(1.0, -t * tw.log_p[i]);
    s.add(-(tw.re[i] * z.real() - tw.im[i] * z.imag()));
  }
  return std::max(0.0, s.value());
}

struct CellMin {
  double value = std::numeric_limits<double>::infinity();
  uint64_t k = 0;
};

constexpr uint64_t kChunk = 512;

}  // namespace

PretendResult pretend_measure(const MultFunctionSpec& f, uint64_t X, uint64_t Q, const PretendOptions& opts) {
  require(X >= 2, "pretend_measure requires X >= 2");
  require(Q >= 1 && Q <= kMaxCharacterModulus, "pretend_measure requires 1 <= Q <= 10^6");
  if (f.covered() < X) fail_validation("missing prime values: " + f.label() + " covers primes <= " + std::to_string(f.covered()));
  const double Xd = static_cast<double>(X);
  uint64_t points = opts.default_points;
  if (opts.t_resolution) {
    require(*opts.t_resolution > 0, "t_resolution must be positive");
    const double n = std::ceil(2 * Xd / *opts.t_resolution) + 1;
    if (n > 1e12) fail_budget("t grid too fine");
    points = static_cast<uint64_t>(n);
  }
  require(points >= 2, "t grid needs at least two points");
  const double h = 2 * Xd / static_cast<double>(points - 1);

  const auto primes = primes_to(X);
  std::vector<Twist> twists;
  CompensatedSum base_sum;
  for (const uint64_t p : primes) base_sum.add(1.0 / static_cast<double>(p));
  const double base = base_sum.value();
  uint64_t characters = 0;
  for (uint64_t q = 1; q <= Q; ++q) characters += euler_phi(q);
  const double cost = static_cast<double>(points) * static_cast<double>(characters) * static_cast<double>(primes.size());
  if (cost > opts.budget)
    fail_budget("pretend grid needs " + std::to_string(cost) + " evaluations, budget " + std::to_string(opts.budget));

  twists.reserve(characters);
  for (uint64_t q = 1; q <= Q; ++q) {
    for (const auto& chi : character_group(q)) {
      Twist tw{q, chi.index(), {}, {}, {}};
      for (size_t i = 0; i < primes.size(); ++i) {
        const auto c = f.values()[i] * std::conj(chi(primes[i])) / static_cast<double>(primes[i]);
        if (c == std::complex<double>(0)) continue;
        tw.log_p.push_back(std::log(static_cast<double>(primes[i])));
        tw.re.push_back(c.real());
        tw.im.push_back(c.imag());
      }
      twists.push_back(std::move(tw));
    }
  }

  const uint64_t chunks = (points + kChunk - 1) / kChunk;
  const auto ncells = static_cast<int64_t>(twists.size() * chunks);
  std::vector<CellMin> cells(static_cast<size_t>(ncells));
  auto t_at = [&](uint64_t k) { return k + 1 == points ? Xd : -Xd + static_cast<double>(k) * h; };

#pragma omp parallel for schedule(dynamic, 1) num_threads(max_threads(opts.exec)) if (opts.exec == Exec::parallel)
  for (int64_t cell = 0; cell < ncells; ++cell) {
    const Twist& tw = twists[static_cast<size_t>(cell) / chunks];
    const uint64_t k0 = (static_cast<uint64_t>(cell) % chunks) * kChunk;
    const uint64_t len = std::min(kChunk, points - k0);
    double acc[kChunk] = {};
    const double t0 = -Xd + static_cast<double>(k0) * h;
    for (size_t i = 0; i < tw.log_p.size(); ++i) {
      // phasor recurrence along the grid; restarted at every chunk
      const auto z0 = std::polar(1.0, -t0 * tw.log_p[i]);
      const auto w = std::polar(1.0, -h * tw.log_p[i]);
      double zr = z0.real(), zi = z0.imag();
      const double wr = w.real(), wi = w.imag();
      const double ar = tw.re[i], ai = tw.im[i];
      for (uint64_t j = 0; j < len; ++j) {
        acc[j] += ar * zr - ai * zi;
        const double nr = zr * wr - zi * wi;
        zi = zr * wi + zi * wr;
        zr = nr;
      }
    }
    CellMin m;
    for (uint64_t j = 0; j < len; ++j) {
      const double v = base - acc[j];
      if (v < m.value) m = {v, k0 + j};
    }
    cells[static_cast<size_t>(cell)] = m;
  }

  PretendResult r;
  r.grid = {points, h, lipschitz_constant(X), characters, primes.size(), Q};
  r.grid_min = std::numeric_limits<double>::infinity();
  r.value = std::numeric_limits<double>::infinity();
  const double inv_phi = (std::sqrt(5.0) - 1) / 2;
  for (size_t c = 0; c < twists.size(); ++c) {
    CellMin best;
    for (uint64_t j = 0; j < chunks; ++j) {
      const auto& m = cells[c * chunks + j];
      if (m.value < best.value) best = m;
    }
    r.grid_min = std::min(r.grid_min, best.value);
    const Twist& tw = twists[c];
    double bt = t_at(best.k);
    double bv = twisted_distance_sq(tw, base, bt);
    // golden-section search on the neighbouring grid cells
    double a = std::max(-Xd, bt - h), b = std::min(Xd, bt + h);
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = twisted_distance_sq(tw, base, x1), f2 = twisted_distance_sq(tw, base, x2);
    for (uint32_t it = 0; it < opts.refine_iterations && b - a > 1e-13 * std::max(1.0, Xd); ++it) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - inv_phi * (b - a);
        f1 = twisted_distance_sq(tw, base, x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + inv_phi * (b - a);
        f2 = twisted_distance_sq(tw, base, x2);
      }
    }
    const double gt = f1 <= f2 ? x1 : x2;
    const double gv = std::min(f1, f2);
    if (gv < bv) {
      bv = gv;
      bt = gt;
    }
    // twists are in (q, index) order, so strict < keeps the smallest character on ties
    if (bv < r.value || (bv == r.value && bt < r.witness_t)) {
      r.value = bv;
      r.witness_t = bt;
      r.witness_q = tw.q;
      r.witness_index = tw.index;
    }
  }
  r.upper = r.value;
  // grid values carry recurrence rounding well below 1e-9
  r.lower = std::clamp(r.grid_min - r.grid.lipschitz * h / 2 - 1e-9, 0.0, r.value);
  return r;
}

double nonpretentious_cutoff(double X, double H, double rho) {
  require(rho > 0 && rho < 0.125, "rho must lie in (0, 1/8)");
  require(X >= 2 && H > 1, "cutoff needs X >= 2, H > 1");
  return X * X / std::pow(H, 2 - rho);
}

VkDiagnostic vk_diagnostic(uint64_t X, double epsilon, const DirichletCharacter& chi, double t) {
  require(X >= 3, "vk_diagnostic requires X >= 3");
  VkDiagnostic d;
  const double logX = std::log(static_cast<double>(X));
  d.lower_limit = std::exp(std::pow(logX, 2.0 / 3.0 + epsilon));
  d.reference = (1.0 / 3.0 - epsilon) * std::log(logX);
  if (d.lower_limit > static_cast<double>(X)) return d;
  CompensatedSum s;
  for (const uint64_t p : primes_in(static_cast<uint64_t>(std::ceil(d.lower_limit)), X + 1)) {
    const auto v = chi(p) * std::polar(1.0, t * std::log(static_cast<double>(p)));
    s.add((1 + v.real()) / static_cast<double>(p));
    ++d.primes;
  }
  d.sum = s.value();
  return d;
}

}  // namespace msl
