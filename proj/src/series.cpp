#include "msl/series.hpp"

#include <algorithm>

#include "msl/error.hpp"
#include "msl/rng.hpp"

namespace msl {

Series arithmetic_series(FunctionId id) {
  return {to_string(id), [id](uint64_t lo, uint64_t hi, std::span<double> out) { fill_real(id, lo, hi, out); },
          id.integer_valued()};
}

Series shifted_product_series(std::vector<FunctionId> ids, std::vector<uint64_t> shifts) {
  require(ids.size() == shifts.size(), "shifted product needs one shift per function");
  Series s;
  s.integer_valued = true;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (!s.label.empty()) s.label += "*";
    s.label += to_string(ids[i]) + "(n+" + std::to_string(shifts[i]) + ")";
    s.integer_valued = s.integer_valued && ids[i].integer_valued();
  }
  if (s.label.empty()) s.label = "one";
  s.fill = [ids = std::move(ids), shifts = std::move(shifts)](uint64_t lo, uint64_t hi, std::span<double> out) {
    std::fill(out.begin(), out.end(), 1.0);
    std::vector<double> tmp(hi - lo);
    for (size_t i = 0; i < ids.size(); ++i) {
      fill_real(ids[i], lo + shifts[i], hi + shifts[i], tmp);
      for (size_t j = 0; j < out.size(); ++j) out[j] *= tmp[j];
    }
  };
  return s;
}

Series typical_indicator_series(const TypicalParams& params) {
  return {"typical", [params](uint64_t lo, uint64_t hi, std::span<double> out) {
            std::vector<uint8_t> bits(hi - lo);
            typical_factorization_block(params, lo, hi, bits);
            for (size_t i = 0; i < out.size(); ++i) out[i] = bits[i];
          },
          true};
}

Series product_series(Series a, Series b) {
  Series s;
  s.label = a.label + "*" + b.label;
  s.integer_valued = a.integer_valued && b.integer_valued;
  s.fill = [a = std::move(a), b = std::move(b)](uint64_t lo, uint64_t hi, std::span<double> out) {
    std::vector<double> tmp(hi - lo);
    a.fill(lo, hi, out);
    b.fill(lo, hi, tmp);
    for (size_t i = 0; i < out.size(); ++i) out[i] *= tmp[i];
  };
  return s;
}

Series masked_complement_series(Series a, Series indicator) {
  Series s;
  s.label = a.label + "*(1-" + indicator.label + ")";
  s.integer_valued = a.integer_valued && indicator.integer_valued;
  s.fill = [a = std::move(a), ind = std::move(indicator)](uint64_t lo, uint64_t hi, std::span<double> out) {
    std::vector<double> tmp(hi - lo);
    a.fill(lo, hi, out);
    ind.fill(lo, hi, tmp);
    for (size_t i = 0; i < out.size(); ++i) out[i] *= 1.0 - tmp[i];
  };
  return s;
}

Series random_sign_series(uint64_t seed) {
  return {"random_sign(" + std::to_string(seed) + ")", [seed](uint64_t lo, uint64_t hi, std::span<double> out) {
            const CounterRng rng(seed, "random-sign");
            for (uint64_t n = lo; n < hi; ++n) out[n - lo] = (rng.at(n) >> 63) ? 1.0 : -1.0;
          },
          true};
}

RealTable::RealTable(const Series& s, uint64_t lo, uint64_t hi) : lo_(lo), values_(hi > lo ? hi - lo : 0) {
  require(lo >= 1, "series tables start at n >= 1");
  if (hi > lo) s.fill(lo, hi, values_);
}

}  // namespace msl
