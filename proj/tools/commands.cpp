#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "harness.hpp"
#include "msl/block_cache.hpp"
#include "msl/characters.hpp"
#include "msl/correlations.hpp"
#include "msl/error.hpp"
#include "msl/fourier.hpp"
#include "msl/pretentious.hpp"
#include "msl/rng.hpp"
#include "msl/series.hpp"
#include "msl/sieve.hpp"
#include "msl/typical.hpp"

namespace msl::harness {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_hash(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail_io("cannot read " + p.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return hex64(fnv1a64({reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()}));
}

double parse_real(const std::string& key, const std::string& text) {
  double v = 0;
  const char* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (text.empty() || r.ec != std::errc() || r.ptr != end) fail_validation("--" + key + ": not a number: '" + text + "'");
  return v;
}

uint64_t parse_count(const std::string& key, const std::string& text) {
  uint64_t u = 0;
  const char* end = text.data() + text.size();
  if (auto r = std::from_chars(text.data(), end, u); r.ec == std::errc() && r.ptr == end && !text.empty()) return u;
  const double v = parse_real(key, text);
  if (!(v >= 0 && v <= 0x1p63 && v == std::floor(v)))
    fail_validation("--" + key + ": expected a nonnegative integer, got '" + text + "'");
  return static_cast<uint64_t>(v);
}

double parse_alpha(const std::string& text) {
  double a = 0;
  if (text == "golden")
    a = (std::sqrt(5.0) - 1) / 2;
  else if (text == "sqrt2")
    a = std::numbers::sqrt2 - 1;
  else if (text == "pi")
    a = std::numbers::pi - 3;
  else if (text == "e")
    a = std::numbers::e - 2;
  else if (const auto slash = text.find('/'); slash != std::string::npos)
    a = static_cast<double>(parse_count("alpha", text.substr(0, slash))) /
        static_cast<double>(parse_count("alpha", text.substr(slash + 1)));
  else
    a = parse_real("alpha", text);
  require(std::isfinite(a), "alpha must be finite");
  return a - std::floor(a);
}

namespace {

struct Args {
  const Params& p;

  bool has(const std::string& k) const { return !p.at(k).empty(); }
  const std::string& str(const std::string& k) const {
    if (!has(k)) fail_validation("missing --" + k);
    return p.at(k);
  }
  uint64_t count(const std::string& k) const { return parse_count(k, str(k)); }
  double real(const std::string& k) const { return parse_real(k, str(k)); }
  bool flag(const std::string& k) const {
    const auto& v = p.at(k);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v.empty() || v == "false" || v == "0" || v == "no") return false;
    fail_validation("--" + k + ": expected true/false");
  }
  std::vector<std::string> list(const std::string& k) const {
    std::vector<std::string> out;
    if (!has(k)) return out;
    std::stringstream ss(p.at(k));
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
  }
  std::vector<uint64_t> counts(const std::string& k) const {
    std::vector<uint64_t> out;
    for (const auto& s : list(k)) out.push_back(parse_count(k, s));
    return out;
  }
  std::vector<int64_t> ints(const std::string& k) const {
    std::vector<int64_t> out;
    for (const auto& s : list(k)) {
      const bool neg = !s.empty() && s[0] == '-';
      const auto v = static_cast<int64_t>(parse_count(k, neg ? s.substr(1) : s));
      out.push_back(neg ? -v : v);
    }
    return out;
  }
  std::vector<double> reals(const std::string& k) const {
    std::vector<double> out;
    for (const auto& s : list(k)) out.push_back(parse_real(k, s));
    return out;
  }
  Interval interval(const std::string& k) const {
    const auto& s = str(k);
    const auto colon = s.find(':');
    if (colon == std::string::npos) fail_validation("--" + k + ": expected lo:hi");
    return {parse_real(k, s.substr(0, colon)), parse_real(k, s.substr(colon + 1))};
  }
  Exec exec() const { return flag("serial") ? Exec::serial : Exec::parallel; }
};

fs::path out_path(const RunContext& ctx, const std::string& name) {
  fs::path p(name);
  if (p.is_relative()) p = ctx.output_dir / p;
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  if (ec) fail_io("cannot create " + p.parent_path().string() + ": " + ec.message());
  return p;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) fail_io("cannot write " + p.string());
  out << text;
  if (!out) fail_io("write failed: " + p.string());
}

std::string csv_preamble(const RunContext& ctx) {
  return ctx.manifest_hash.empty() ? std::string() : "# manifest " + ctx.manifest_hash + "\n";
}

void write_json(StepOutput& so, const RunContext& ctx, const std::string& name, Json body) {
  Json doc = Json::object();
  if (!ctx.manifest_hash.empty()) doc["manifest"] = ctx.manifest_hash;
  for (auto& [k, v] : body.items()) doc[k] = v;
  const auto p = out_path(ctx, name);
  write_text(p, doc.dump(2) + "\n");
  so.files.push_back(p);
}

void write_csv(StepOutput& so, const RunContext& ctx, const std::string& name, const std::string& body) {
  const auto p = out_path(ctx, name);
  write_text(p, csv_preamble(ctx) + body);
  so.files.push_back(p);
}

Json params_json(const TypicalParams& p) {
  return Json{{"X", p.X},           {"H", p.H},
              {"A", p.A},           {"delta", p.delta},
              {"psi", p.psi},       {"psi_delta", p.psi_delta()},
              {"W", p.W},           {"P1", p.I1.lo},
              {"Q1", p.I1.hi},      {"P2", p.I2.lo},
              {"Q2", p.I2.hi},      {"mode", p.mode == ProfileMode::paper ? "paper" : "explicit"}};
}

TypicalParams profile_from(const Args& a, double X, double H, const std::string& mode_key = "mode") {
  const auto mode = a.str(mode_key);
  if (mode == "paper") return derive_profile(X, H, a.real("A"), a.real("delta"), ProfileMode::paper);
  if (mode != "explicit") fail_validation("--mode: expected paper or explicit");
  return derive_profile(X, H, a.real("A"), a.real("delta"), ProfileMode::explicit_endpoints,
                        std::make_pair(a.interval("i1"), a.interval("i2")));
}

Json diag_json(const CorrelationDiagnostics& d) {
  return Json{{"requested", to_string(d.requested)},
              {"used", to_string(d.used)},
              {"fell_back", d.fell_back},
              {"rounded", d.rounded},
              {"error_bound", d.error_bound},
              {"max_rounding_deviation", d.max_rounding_deviation},
              {"blocks", d.blocks}};
}

// -----------------------------------------------------------------------------

StepOutput cmd_sieve(const Params& p, RunContext& ctx) {
  const Args a{p};
  const auto id = parse_function_id(a.str("fn"));
  const uint64_t lo = a.count("lo"), hi = a.count("hi");
  require(lo >= 1 && lo < hi, "sieve requires 1 <= lo < hi");
  SieveConfig cfg;
  cfg.block_size = a.count("block");
  cfg.exec = a.exec();
  const fs::path dir = a.has("cache-dir") ? fs::path(a.str("cache-dir")) : ctx.cache_dir;
  BlockCache cache(dir);
  if (ctx.log) cache.set_logger(ctx.log);
  const uint64_t bs = std::max<uint64_t>(cfg.block_size, 2);
  for (uint64_t s = (lo / bs) * bs; s < hi; s += bs)
    ctx.touched_blocks.insert(cache.path_for(id, std::max<uint64_t>(s, 1), s + bs).filename().string());
  const auto table = cache.fetch(id, lo, hi, cfg);

  StepOutput so;
  CompensatedSum total;
  uint64_t nonzero = 0;
  for (uint64_t n = lo; n < hi; ++n) {
    const double v = table.value(n);
    total.add(v);
    nonzero += v != 0;
  }
  so.summary = Json{{"fn", to_string(id)},
                    {"lo", lo},
                    {"hi", hi},
                    {"sum", total.value()},
                    {"nonzero", nonzero},
                    {"cache", Json{{"dir", dir.string()},
                                   {"hits", cache.stats().hits},
                                   {"misses", cache.stats().misses},
                                   {"corrupt", cache.stats().corrupt}}}};
  if (a.has("out")) {
    std::string body = "n,value\n";
    for (uint64_t n = lo; n < hi; ++n) body += std::to_string(n) + "," + fmt(table.value(n)) + "\n";
    write_csv(so, ctx, a.str("out"), body);
  }
  return so;
}

StepOutput cmd_typical(const Params& p, RunContext& ctx) {
  const Args a{p};
  const double X = a.real("X");
  const auto params = profile_from(a, X, a.real("H"));
  const auto dens = complement_density(params);
  const uint64_t upto = a.has("measure") ? a.count("measure") : static_cast<uint64_t>(std::min(X, 1e7));
  StepOutput so;
  so.summary = Json{{"params", params_json(params)},
                    {"rho1", dens.rho1},
                    {"rho2", dens.rho2},
                    {"predicted_outside", dens.predicted_outside},
                    {"measured_fraction", measured_outside_fraction(params, upto, a.exec())},
                    {"measured_up_to", upto}};
  if (a.has("report")) write_json(so, ctx, a.str("report"), so.summary);
  return so;
}

StepOutput cmd_chars(const Params& p, RunContext& ctx) {
  const Args a{p};
  const uint64_t q = a.count("q");
  require(q >= 1 && q <= kMaxCharacterModulus, "--q must lie in [1, 10^6]");
  const auto group = character_group(q);
  StepOutput so;
  so.summary = Json{{"q", q}, {"phi", euler_phi(q)}, {"exponent", group.front().group_exponent()}};
  if (q <= 10000) {
    const auto orth = orthogonality_check(q);
    so.summary["orthogonality_max_deviation"] = orth.max_deviation;
  }
  if (a.has("dump")) {
    require(q <= 2000, "--dump is limited to q <= 2000");
    Json chars = Json::array();
    for (const auto& chi : group) {
      Json values = Json::array();
      for (uint64_t n = 0; n < q; ++n) {
        const auto r = chi.root(n);
        values.push_back(Json::array({r.order, r.index}));
      }
      chars.push_back(Json{{"index", chi.index()},
                           {"order", chi.order()},
                           {"principal", chi.is_principal()},
                           {"exponents", chi.exponents()},
                           {"values", values}});
    }
    write_json(so, ctx, a.str("dump"),
               Json{{"q", q}, {"phi", euler_phi(q)}, {"value_encoding", "[order, index] = e(index/order), [0, 0] = 0"},
                    {"characters", chars}});
  }
  return so;
}

StepOutput cmd_correlate(const Params& p, RunContext& ctx) {
  const Args a{p};
  const auto f = parse_function_id(a.str("f"));
  const uint64_t X = a.count("X"), H = a.count("H");
  CorrelationOptions opts;
  opts.method = parse_method(a.str("method"));
  opts.exec = a.exec();
  if (a.has("block")) opts.fft_block = a.count("block");
  const auto& base_name = a.str("base");
  if (base_name != "primes" && base_name != "integers") fail_validation("--base: expected primes or integers");
  const auto base = base_name == "primes" ? CorrelationBase::primes : CorrelationBase::integers;
  const auto r = shifted_correlation(f, X, H, base, opts);

  StepOutput so;
  so.summary = Json{{"f", r.f_id},        {"base", base_name},
                    {"X", X},             {"H", H},
                    {"normalizer", r.normalizer}, {"aggregate", r.aggregate},
                    {"C0", r.C0},         {"diag", diag_json(r.diag)}};
  if (a.has("eps")) {
    Json scans = Json::array();
    for (const double eps : a.reals("eps")) {
      const auto e = exceptional_scan(r, eps);
      scans.push_back(Json{{"epsilon", eps}, {"count", e.count}, {"fraction", e.fraction}});
    }
    so.summary["exceptional"] = scans;
  }
  if (a.has("out")) {
    std::string body = "h,C_h,C_h_over_piX\n";
    for (uint64_t h = 1; h <= H; ++h)
      body += std::to_string(h) + "," + fmt(r.at(h)) + "," + fmt(r.at(h) / r.normalizer) + "\n";
    write_csv(so, ctx, a.str("out"), body);
  }
  return so;
}

StepOutput cmd_chowla(const Params& p, RunContext& ctx) {
  const Args a{p};
  const uint64_t X = a.count("X");
  StepOutput so;
  if (a.has("shifts")) {
    const auto shifts = a.counts("shifts");
    SieveConfig cfg;
    cfg.exec = a.exec();
    const int64_t s = chowla_sum(X, shifts, cfg);
    so.summary = Json{{"X", X}, {"shifts", shifts}, {"sum", s}, {"normalized", static_cast<double>(s) / static_cast<double>(X)}};
  } else {
    AveragedChowlaOptions opts;
    const auto& w = a.str("weight");
    if (w == "prime")
      opts.weight = ChowlaWeight::prime_indicator;
    else if (w != "lambda")
      fail_validation("--weight: expected lambda or prime");
    opts.sampled = a.flag("sampled");
    opts.samples = a.count("samples");
    opts.seed = ctx.seed;
    opts.corr.exec = a.exec();
    std::optional<double> psi;
    if (a.has("psi-delta")) psi = a.real("psi-delta");
    const auto m = a.count("m");
    require(m >= 1 && m <= 16, "--m must lie in [1, 16]");
    const auto r = averaged_chowla(X, a.count("H"), static_cast<uint32_t>(m), a.counts("tuple"), opts, psi);
    so.summary = Json{{"X", r.X},
                      {"H", r.H},
                      {"m", r.m},
                      {"tuple", r.tuple},
                      {"weight", w},
                      {"sampled", r.sampled},
                      {"terms", r.terms},
                      {"sum_abs", r.sum_abs},
                      {"normalized", r.normalized},
                      {"standard_error", r.standard_error},
                      {"reference", r.reference ? Json(*r.reference) : Json(nullptr)}};
  }
  return so;
}

StepOutput cmd_hl(const Params& p, RunContext&) {
  const Args a{p};
  const auto tuple = a.ints("tuple");
  SieveConfig cfg;
  cfg.exec = a.exec();
  const auto r = hl_ktuple(a.count("X"), tuple, a.count("pmax"), cfg);
  StepOutput so;
  so.summary = Json{{"X", a.count("X")},
                    {"tuple", tuple},
                    {"lambda_sum", r.lambda_sum},
                    {"prediction", r.prediction},
                    {"ratio", r.ratio ? Json(*r.ratio) : Json(nullptr)},
                    {"singular_series", r.series.value},
                    {"tail_bound", r.series.tail_bound},
                    {"p_max", r.series.p_max}};
  return so;
}

StepOutput cmd_divcorr(const Params& p, RunContext& ctx) {
  const Args a{p};
  const uint64_t X = a.count("X"), H = a.count("H");
  std::vector<uint32_t> ks;
  for (const auto k : a.counts("ks")) ks.push_back(static_cast<uint32_t>(k));
  DivisorCorrelationOptions opts;
  opts.replace_mobius_by_one = a.flag("mobius-by-one");
  opts.corr.exec = a.exec();
  const auto r = divisor_mobius_correlation(X, H, ks, a.counts("tuple"), opts);
  StepOutput so;
  so.summary = Json{{"f", r.f_id},        {"X", X}, {"H", H}, {"normalizer", r.normalizer},
                    {"aggregate", r.aggregate}, {"diag", diag_json(r.diag)}};
  if (a.has("out")) {
    std::string body = "h,C_h,C_h_normalized\n";
    for (uint64_t h = 1; h <= H; ++h)
      body += std::to_string(h) + "," + fmt(r.at(h)) + "," + fmt(r.at(h) / r.normalizer) + "\n";
    write_csv(so, ctx, a.str("out"), body);
  }
  return so;
}

Json arc_json(const ArcLabel& l) {
  return Json{{"alpha", l.alpha}, {"a", l.a},         {"q", l.q},  {"err", l.err},
              {"major", l.major}, {"W", l.W},         {"Q1", l.Q1}};
}

StepOutput cmd_arcs(const Params& p, RunContext&) {
  const Args a{p};
  const double W = a.real("W"), Q1 = a.real("Q1");
  const auto l = classify_arc(parse_alpha(a.str("alpha")), W, Q1);
  StepOutput so;
  so.summary = arc_json(l);
  so.summary["major_arc_measure"] = major_arc_measure(W, Q1);
  return so;
}

StepOutput cmd_vino(const Params& p, RunContext& ctx) {
  const Args a{p};
  const auto v = vinogradov_sum(parse_alpha(a.str("alpha")), a.real("H"), a.real("P"));
  StepOutput so;
  so.summary = Json{{"value", v.value}, {"bound", v.bound}, {"ratio", v.ratio}, {"a", v.a}, {"q", v.q}};
  if (const uint64_t n = a.count("matrix"); n > 0) {
    std::string body = "alpha,H,P,a,q,value,bound,ratio\n";
    double worst = 0;
    for (const auto& c : vinogradov_regression_matrix(ctx.seed, n)) {
      const auto r = vinogradov_sum(c.alpha, c.H, c.P, c.a, c.q);
      worst = std::max(worst, r.ratio);
      body += fmt(c.alpha) + "," + fmt(c.H) + "," + fmt(c.P) + "," + std::to_string(c.a) + "," + std::to_string(c.q) +
              "," + fmt(r.value) + "," + fmt(r.bound) + "," + fmt(r.ratio) + "\n";
    }
    so.summary["matrix"] = Json{{"cases", n}, {"worst_ratio", worst}};
    if (a.has("out")) write_csv(so, ctx, a.str("out"), body);
  }
  return so;
}

Series fint_series(const Args& a, double X, double H, uint64_t seed) {
  std::string name = a.str("f");
  if (name == "random-sign") return random_sign_series(seed);
  const std::string suffix = "-typical";
  const bool typical = name.size() > suffix.size() && name.ends_with(suffix);
  if (typical) name.resize(name.size() - suffix.size());
  Series s = arithmetic_series(parse_function_id(name));
  if (!typical) return s;
  return product_series(std::move(s), typical_indicator_series(profile_from(a, X, H)));
}

StepOutput cmd_fint(const Params& p, RunContext& ctx) {
  const Args a{p};
  const uint64_t X = a.count("X");
  const double H = a.real("H");
  require(X >= 1 && H > 0, "fint requires X >= 1, H > 0");
  const auto series = fint_series(a, static_cast<double>(X), H, ctx.seed);
  const RealTable table(series, 1, X + static_cast<uint64_t>(std::ceil(H)) + 2);
  StepOutput so;
  so.summary = Json{{"f", a.str("f")}, {"X", X}, {"H", H}};
  if (a.has("alpha")) {
    const double alpha = parse_alpha(a.str("alpha"));
    so.summary["alpha"] = alpha;
    so.summary["integral"] = fourier_integral(table, static_cast<double>(X), H, alpha);
    return so;
  }
  SupScanOptions opts;
  opts.q_max = a.count("scan-q");
  opts.grid = a.count("grid");
  if (a.has("W")) opts.W = a.real("W");
  if (a.has("Q1")) opts.Q1 = a.real("Q1");
  opts.exec = a.exec();
  const auto r = sup_scan(table, static_cast<double>(X), H, opts);
  so.summary["best_alpha"] = r.best_alpha;
  so.summary["sup_value"] = r.value;
  so.summary["normalized"] = r.value / (static_cast<double>(X) * H);
  so.summary["arc"] = arc_json(r.arc);
  so.summary["scanned"] = r.scanned.size();
  if (a.has("out")) {
    std::string body = "alpha,integral\n";
    for (auto [al, v] : r.scanned) body += fmt(al) + "," + fmt(v) + "\n";
    write_csv(so, ctx, a.str("out"), body);
  }
  return so;
}

StepOutput cmd_mvp(const Params& p, RunContext& ctx) {
  const Args a{p};
  const auto params = profile_from(a, a.real("X"), a.real("H"), "profile");
  const auto chi = character(a.count("q"), a.count("chi"));
  MeanValueProfileOptions opts;
  if (a.has("B")) opts.B = a.real("B");
  if (a.has("T0")) opts.T0 = a.real("T0");
  opts.full_range = a.flag("full-range");
  opts.exec = a.exec();
  const auto steps = a.count("steps");
  require(steps >= 1 && steps <= 100000, "--steps must lie in [1, 10^5]");
  const auto r = twisted_mean_value_profile(params, a.count("d"), chi, a.count("Y"), a.real("T"),
                                            static_cast<uint32_t>(steps), opts);
  StepOutput so;
  so.summary = Json{{"params", params_json(params)},
                    {"q", chi.modulus()},
                    {"chi", chi.index()},
                    {"Y", r.Y},
                    {"T0", r.T0},
                    {"T", r.T},
                    {"B", r.B},
                    {"terms", r.terms},
                    {"sum_sq", r.sum_sq},
                    {"quadrature_total", r.quadrature_total},
                    {"exact_total", r.exact_total ? Json(*r.exact_total) : Json(nullptr)},
                    {"relative_gap", r.relative_gap},
                    {"trivial_bound", r.trivial_bound},
                    {"target", r.target}};
  if (a.has("out")) {
    std::string body = "t,integral_T0_to_t\n";
    for (auto [t, v] : r.checkpoints) body += fmt(t) + "," + fmt(v) + "\n";
    write_csv(so, ctx, a.str("out"), body);
  }
  return so;
}

StepOutput cmd_pretend(const Params& p, RunContext& ctx) {
  const Args a{p};
  uint64_t X = a.count("X");
  Json cutoff = nullptr;
  if (a.has("H") || a.has("rho")) {
    const double c = nonpretentious_cutoff(static_cast<double>(X), a.real("H"), a.real("rho"));
    require(c >= 2 && c < 0x1p31, "cutoff X^2/H^(2-rho) out of range");
    cutoff = Json{{"H", a.real("H")}, {"rho", a.real("rho")}, {"length", c}};
    X = static_cast<uint64_t>(c);
  }
  const auto f = MultFunctionSpec::from_id(parse_function_id(a.str("f")), X);
  PretendOptions opts;
  if (a.has("tres")) opts.t_resolution = a.real("tres");
  opts.exec = a.exec();
  const auto r = pretend_measure(f, X, a.count("Q"), opts);
  Json body{{"f", f.label()},
            {"X", X},
            {"Q", a.count("Q")},
            {"value", r.value},
            {"bracket", Json::array({r.lower, r.upper})},
            {"witness", Json{{"t", r.witness_t}, {"q", r.witness_q}, {"index", r.witness_index}}},
            {"grid", Json{{"points", r.grid.points},
                          {"spacing", r.grid.spacing},
                          {"lipschitz", r.grid.lipschitz},
                          {"characters", r.grid.characters},
                          {"primes", r.grid.primes},
                          {"grid_min", r.grid_min}}},
            {"cutoff", cutoff}};
  if (a.has("vk-eps")) {
    const auto vk = vk_diagnostic(X, a.real("vk-eps"), r.witness_chi(), r.witness_t);
    body["vk"] = Json{{"lower_limit", vk.lower_limit}, {"sum", vk.sum}, {"reference", vk.reference}, {"primes", vk.primes}};
  }
  StepOutput so;
  so.summary = body;
  if (a.has("out")) write_json(so, ctx, a.str("out"), body);
  return so;
}

StepOutput cmd_cache_gc(const Params& p, RunContext& ctx) {
  const Args a{p};
  const fs::path dir = a.has("cache-dir") ? fs::path(a.str("cache-dir")) : ctx.cache_dir;
  const auto r = cache_gc(dir, a.count("max-bytes"), ctx.touched_blocks);
  StepOutput so;
  so.summary = Json{{"cache_dir", dir.string()}, {"scanned", r.scanned},     {"bytes_before", r.bytes_before},
                    {"bytes_after", r.bytes_after}, {"evicted", r.evicted}, {"pinned", r.pinned}};
  return so;
}

StepOutput cmd_plotdata(const Params& p, RunContext& ctx) {
  const Args a{p};
  fs::path report(a.str("report"));
  if (report.is_relative() && !fs::exists(report)) report = ctx.output_dir / report;
  const auto out = out_path(ctx, a.str("out"));
  emit_plotdata(report, a.str("kind"), out);
  StepOutput so;
  so.files.push_back(out);
  so.summary = Json{{"kind", a.str("kind")}, {"report", a.str("report")}};
  return so;
}

const ParamSpec kSerial{"serial", "false", "single-threaded reference path"};

std::vector<CommandSpec> build_commands() {
  const ParamSpec A{"A", "0.1", "profile exponent A"}, delta{"delta", "0.1", "profile delta"},
      mode{"mode", "explicit", "paper or explicit"}, i1{"i1", "5:50", "explicit [P1, Q1]"},
      i2{"i2", "100:1000", "explicit [P2, Q2]"};
  std::vector<CommandSpec> c;
  c.push_back({"sieve",
               "sieve an arithmetic function through the block cache",
               {{"fn", std::nullopt, "mobius, liouville, von_mangoldt, dK, spf, prime, one"},
                {"lo", "1", "range start"},
                {"hi", std::nullopt, "range end (exclusive)"},
                {"block", "1048576", "cache block size"},
                {"cache-dir", "", "cache directory (default: MSL_CACHE_DIR or the manifest's)"},
                {"out", "", "CSV of n,value"},
                kSerial},
               cmd_sieve});
  c.push_back({"typical",
               "typical-factorization profile and complement density",
               {{"X", std::nullopt, "X"}, {"H", "1000", "H"}, A, delta, {"mode", "paper", "paper or explicit"}, i1, i2,
                {"measure", "", "measure the complement on [1, n] (default min(X, 1e7))"},
                {"report", "", "JSON report"},
                kSerial},
               cmd_typical});
  c.push_back({"chars",
               "Dirichlet characters mod q",
               {{"q", std::nullopt, "modulus"}, {"dump", "", "JSON value table"}},
               cmd_chars});
  c.push_back({"correlate",
               "shifted correlations C(h) = sum f(p + h)",
               {{"f", std::nullopt, "arithmetic function"},
                {"X", std::nullopt, "X"},
                {"H", std::nullopt, "H"},
                {"method", "fft", "fft or direct"},
                {"base", "primes", "primes or integers"},
                {"block", "", "FFT block length"},
                {"eps", "", "comma list of exceptional-scan thresholds"},
                {"out", "", "CSV h,C_h,C_h_over_piX"},
                kSerial},
               cmd_correlate});
  c.push_back({"chowla",
               "Chowla sums (fixed shifts) or averaged correlations",
               {{"X", std::nullopt, "X"},
                {"shifts", "", "comma list h_1..h_k for a single sum"},
                {"H", "", "shift range for the averaged form"},
                {"m", "", "number of Moebius factors"},
                {"tuple", "", "von Mangoldt shifts a_i"},
                {"weight", "lambda", "lambda or prime"},
                {"sampled", "false", "Monte Carlo over shift tuples"},
                {"samples", "4096", "sample count"},
                {"psi-delta", "", "reference 1/psi^m"},
                kSerial},
               cmd_chowla});
  c.push_back({"hl",
               "Hardy-Littlewood k-tuple count against the singular series",
               {{"tuple", std::nullopt, "shifts"}, {"X", std::nullopt, "X"}, {"pmax", "1e6", "Euler product cutoff"},
                kSerial},
               cmd_hl});
  c.push_back({"divcorr",
               "Moebius against products of divisor functions",
               {{"X", std::nullopt, "X"},
                {"H", std::nullopt, "H"},
                {"ks", std::nullopt, "divisor orders"},
                {"tuple", std::nullopt, "shifts a_i"},
                {"mobius-by-one", "false", "replace mu by 1 (control)"},
                {"out", "", "CSV"},
                kSerial},
               cmd_divcorr});
  c.push_back({"arcs",
               "rational approximation and arc label",
               {{"alpha", std::nullopt, "alpha (number, a/b, golden, sqrt2, pi, e)"},
                {"W", std::nullopt, "major arc denominator limit"},
                {"Q1", std::nullopt, "approximation limit"}},
               cmd_arcs});
  c.push_back({"vino",
               "Vinogradov sum against its bound",
               {{"alpha", "golden", "alpha"},
                {"H", std::nullopt, "H"},
                {"P", std::nullopt, "P"},
                {"matrix", "0", "also run this many seeded regression cases"},
                {"out", "", "CSV of the regression cases"}},
               cmd_vino});
  c.push_back({"fint",
               "window integral of |F_x(alpha)| and its sup over a Farey/grid scan",
               {{"f", std::nullopt, "function, optionally with -typical, or random-sign"},
                {"X", std::nullopt, "X"},
                {"H", std::nullopt, "H"},
                {"alpha", "", "evaluate at one alpha instead of scanning"},
                {"scan-q", "16", "Farey denominators"},
                {"grid", "256", "uniform grid size"},
                {"W", "", "major arc limit for the maximizer label"},
                {"Q1", "", "approximation limit for the label"},
                A, delta, mode, i1, i2,
                {"out", "", "CSV alpha,integral"},
                kSerial},
               cmd_fint});
  c.push_back({"mvp",
               "mean value of the twisted typical-factorization Liouville polynomial",
               {{"profile", "explicit", "interval profile (only explicit is supported)"},
                {"q", "1", "character modulus"},
                {"chi", "0", "character index"},
                {"d", "1", "refinement d"},
                {"Y", std::nullopt, "support [Y, 2Y]"},
                {"T0", "", "lower limit (default (log X)^(2B) capped at T/2)"},
                {"T", std::nullopt, "upper limit"},
                {"steps", "16", "checkpoints"},
                {"B", "", "B (default 11A)"},
                {"X", "1e6", "X"},
                {"H", "1e3", "H"},
                A, delta, i1, i2,
                {"full-range", "false", "drop the membership factor"},
                {"out", "", "CSV of checkpoints"},
                kSerial},
               cmd_mvp});
  c.push_back({"pretend",
               "pretentious infimum M(f; X, Q) with a certified bracket",
               {{"f", std::nullopt, "mobius, liouville, one"},
                {"X", std::nullopt, "X"},
                {"Q", "1", "moduli q <= Q"},
                {"tres", "", "t grid spacing (default 2^14 points)"},
                {"H", "", "evaluate at X^2/H^(2-rho) instead of X"},
                {"rho", "", "rho in (0, 1/8)"},
                {"vk-eps", "", "also report the zero-free-region prime sum"},
                {"out", "", "JSON"},
                kSerial},
               cmd_pretend});
  c.push_back({"cache-gc",
               "evict least recently used cache blocks",
               {{"cache-dir", "", "cache directory"}, {"max-bytes", std::nullopt, "budget"}},
               cmd_cache_gc});
  c.push_back({"plotdata",
               "plot data from a run summary",
               {{"report", std::nullopt, "summary.json"},
                {"kind", std::nullopt, "corr-decay or exceptional-fraction"},
                {"out", std::nullopt, "output file"}},
               cmd_plotdata});
  return c;
}

}  // namespace

const std::vector<CommandSpec>& commands() {
  static const std::vector<CommandSpec> all = build_commands();
  return all;
}

const CommandSpec& find_command(const std::string& name) {
  for (const auto& c : commands())
    if (c.name == name) return c;
  fail_validation("unknown command '" + name + "'");
}

StepOutput run_command(const std::string& name, const Params& params, RunContext& ctx) {
  const auto& spec = find_command(name);
  Params full;
  for (const auto& [k, v] : params) {
    const bool known = std::any_of(spec.params.begin(), spec.params.end(), [&](const ParamSpec& s) { return s.name == k; });
    if (!known) fail_validation(name + ": unknown parameter '" + k + "'");
    full[k] = v;
  }
  for (const auto& s : spec.params) {
    if (full.count(s.name)) continue;
    if (!s.fallback) fail_validation(name + ": missing required parameter --" + s.name);
    full[s.name] = *s.fallback;
  }
  return spec.run(full, ctx);
}

}  // namespace msl::harness
