#include "harness.hpp"

#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <fstream>
#include <sstream>

#include "msl/block_cache.hpp"
#include "msl/error.hpp"
#include "msl/rng.hpp"

namespace msl::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail_io("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) fail_io("cannot write " + p.string());
}

void validate_step(const ManifestStep& s, size_t index) {
  const std::string where = "step " + std::to_string(index + 1) + " (" + s.command + "): ";
  if (s.command == "run") fail_validation(where + "manifests cannot nest runs");
  const CommandSpec* spec = nullptr;
  for (const auto& c : commands())
    if (c.name == s.command) spec = &c;
  if (!spec) fail_validation(where + "unknown command");
  for (const auto& [k, v] : s.params)
    if (std::none_of(spec->params.begin(), spec->params.end(), [&](const ParamSpec& p) { return p.name == k; }))
      fail_validation(where + "unknown parameter '" + k + "'");
  for (const auto& p : spec->params)
    if (!p.fallback && !s.params.count(p.name)) fail_validation(where + "missing parameter '" + p.name + "'");
}

}  // namespace

ExperimentManifest parse_manifest(const std::string& text) {
  ExperimentManifest m;
  std::istringstream in(text);
  std::string raw;
  size_t line_no = 0;
  ManifestStep* step = nullptr;
  std::set<std::string> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const std::string at = "manifest line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') fail_validation(at + "unterminated section header");
      const std::string head = trim(line.substr(1, line.size() - 2));
      if (head == "manifest") {
        if (step) fail_validation(at + "[manifest] must precede the steps");
        continue;
      }
      if (head.rfind("step", 0) != 0 || head.size() < 6 || (head[4] != ' ' && head[4] != '\t'))
        fail_validation(at + "expected [manifest] or [step <command>]");
      m.steps.push_back({trim(head.substr(5)), {}});
      step = &m.steps.back();
      seen.clear();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail_validation(at + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail_validation(at + "empty key");
    if (!seen.insert(key).second) fail_validation(at + "duplicate key '" + key + "'");
    if (step) {
      step->params[key] = value;
    } else if (key == "name") {
      m.name = value;
    } else if (key == "seed") {
      m.seed = parse_count("seed", value);
    } else if (key == "cache_dir") {
      m.cache_dir = value;
    } else if (key == "output_dir") {
      m.output_dir = value;
    } else {
      fail_validation(at + "unknown manifest key '" + key + "'");
    }
  }
  for (size_t i = 0; i < m.steps.size(); ++i) validate_step(m.steps[i], i);
  return m;
}

ExperimentManifest load_manifest(const fs::path& path) {
  auto m = parse_manifest(read_file(path));
  const fs::path base = path.parent_path();
  if (m.cache_dir.is_relative()) m.cache_dir = base / m.cache_dir;
  if (m.output_dir.is_relative()) m.output_dir = base / m.output_dir;
  return m;
}

std::string manifest_hash(const ExperimentManifest& m) {
  std::string canon = "name=" + m.name + "\nseed=" + std::to_string(m.seed) + "\n";
  for (const auto& s : m.steps) {
    canon += "[" + s.command + "]\n";
    for (const auto& [k, v] : s.params) canon += k + "=" + v + "\n";  // std::map: sorted
  }
  return hex64(fnv1a64({reinterpret_cast<const unsigned char*>(canon.data()), canon.size()}));
}

RunReport run_manifest(const ExperimentManifest& m, std::function<void(const std::string&)> log) {
  for (size_t i = 0; i < m.steps.size(); ++i) validate_step(m.steps[i], i);
  RunReport report;
  report.manifest_hash = manifest_hash(m);
  report.output_dir = m.output_dir;
  std::error_code ec;
  fs::create_directories(m.output_dir, ec);
  if (ec) fail_io("cannot create output dir " + m.output_dir.string() + ": " + ec.message());
  const fs::path cache_dir = resolve_cache_dir(m.cache_dir);
  fs::create_directories(cache_dir, ec);
  if (ec) fail_io("cannot create cache dir " + cache_dir.string() + ": " + ec.message());
  CachePin pin(cache_dir);

  Json steps = Json::array();
  Json records = Json::array();
  report.summary_path = m.output_dir / "summary.json";
  auto write_summary = [&](const Json& done) {
    const Json summary{{"manifest", report.manifest_hash}, {"name", m.name}, {"seed", m.seed}, {"steps", done}};
    write_file(report.summary_path, summary.dump(2) + "\n");
  };
  write_summary(steps);
  const CounterRng seeds(m.seed, "manifest-step");
  const auto run_start = std::chrono::steady_clock::now();
  for (size_t i = 0; i < m.steps.size(); ++i) {
    const auto& s = m.steps[i];
    if (log) log("step " + std::to_string(i + 1) + "/" + std::to_string(m.steps.size()) + ": " + s.command);
    RunContext ctx;
    ctx.output_dir = m.output_dir;
    ctx.cache_dir = cache_dir;
    ctx.seed = seeds.at(i);
    ctx.manifest_hash = report.manifest_hash;
    ctx.log = log;
    const auto t0 = std::chrono::steady_clock::now();
    StepOutput out = run_command(s.command, s.params, ctx);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    pin.add(ctx.touched_blocks);

    StepRecord rec;
    rec.command = s.command;
    rec.wall_seconds = wall;
    for (const auto& f : out.files) {
      rec.outputs.push_back(fs::relative(f, m.output_dir).generic_string());
      rec.output_hashes.push_back(file_hash(f));
    }
    Json params = Json::object();
    for (const auto& [k, v] : s.params) params[k] = v;
    steps.push_back(Json{{"step", i + 1}, {"command", s.command}, {"params", params}, {"outputs", rec.outputs},
                         {"result", out.summary}});
    records.push_back(Json{{"step", i + 1},
                           {"command", s.command},
                           {"outputs", rec.outputs},
                           {"output_hashes", rec.output_hashes},
                           {"wall_seconds", wall}});
    report.steps.push_back(std::move(rec));
    // rewritten after every step so later steps (plotdata) can read it
    write_summary(steps);
  }
  write_summary(steps);
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - run_start).count();
  const Json run{{"manifest", report.manifest_hash},
                 {"tool_version", report.tool_version},
                 {"name", m.name},
                 {"cache_dir", cache_dir.string()},
                 {"summary", "summary.json"},
                 {"summary_hash", file_hash(report.summary_path)},
                 {"steps", records},
                 {"total_seconds", total}};
  report.report_path = m.output_dir / "run_report.json";
  write_file(report.report_path, run.dump(2) + "\n");
  return report;
}

// -----------------------------------------------------------------------------

CachePin::CachePin(fs::path cache_dir) {
  std::error_code ec;
  fs::create_directories(cache_dir / ".pins", ec);
  if (ec) fail_io("cannot create pin dir in " + cache_dir.string() + ": " + ec.message());
  path_ = cache_dir / ".pins" / (std::to_string(::getpid()) + ".pin");
  write_file(path_, "");
}

CachePin::~CachePin() {
  std::error_code ec;
  fs::remove(path_, ec);
}

void CachePin::add(const std::set<std::string>& blocks) {
  const auto before = blocks_.size();
  blocks_.insert(blocks.begin(), blocks.end());
  if (blocks_.size() == before) return;
  std::string text;
  for (const auto& b : blocks_) text += b + "\n";
  write_file(path_, text);
}

namespace {

std::set<std::string> live_pins(const fs::path& cache_dir) {
  std::set<std::string> pinned;
  const fs::path dir = cache_dir / ".pins";
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return pinned;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    if (e.path().extension() != ".pin") continue;
    long pid = 0;
    try {
      pid = std::stol(e.path().stem().string());
    } catch (...) {
      continue;
    }
    const bool alive = pid > 0 && (::kill(static_cast<pid_t>(pid), 0) == 0 || errno == EPERM);
    if (!alive) continue;  // stale pin from a crashed run
    std::ifstream in(e.path());
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) pinned.insert(line);
  }
  return pinned;
}

}  // namespace

GcReport cache_gc(const fs::path& cache_dir, uint64_t max_bytes, const std::set<std::string>& pinned_extra) {
  std::error_code ec;
  if (!fs::is_directory(cache_dir, ec)) fail_io("cache dir does not exist: " + cache_dir.string());
  struct Entry {
    fs::path path;
    fs::file_time_type mtime;
    uint64_t bytes;
  };
  std::vector<Entry> entries;
  for (const auto& e : fs::directory_iterator(cache_dir, ec)) {
    if (!e.is_regular_file() || e.path().extension() != ".mslb") continue;
    Entry en{e.path(), e.last_write_time(ec), 0};
    if (ec) fail_io("cannot stat " + e.path().string() + ": " + ec.message());
    en.bytes = e.file_size(ec);
    if (ec) fail_io("cannot stat " + e.path().string() + ": " + ec.message());
    entries.push_back(std::move(en));
  }
  if (ec) fail_io("cannot list " + cache_dir.string() + ": " + ec.message());
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.mtime != b.mtime ? a.mtime < b.mtime : a.path.filename() < b.path.filename();
  });
  auto pinned = live_pins(cache_dir);
  pinned.insert(pinned_extra.begin(), pinned_extra.end());

  GcReport r;
  r.scanned = entries.size();
  for (const auto& e : entries) r.bytes_before += e.bytes;
  uint64_t total = r.bytes_before;
  for (const auto& e : entries) {
    if (total <= max_bytes) break;
    const std::string name = e.path.filename().string();
    if (pinned.count(name)) {
      r.pinned.push_back(name);
      continue;
    }
    if (!fs::remove(e.path, ec) || ec) fail_io("cannot remove " + e.path.string() + ": " + ec.message());
    total -= e.bytes;
    r.evicted.push_back(name);
  }
  r.bytes_after = total;
  return r;
}

// -----------------------------------------------------------------------------

void emit_plotdata(const Json& summary, const std::string& kind, const fs::path& out) {
  std::string text;
  if (summary.contains("manifest")) text += "# manifest " + summary["manifest"].get<std::string>() + "\n";
  const Json steps = summary.contains("steps") ? summary["steps"] : Json::array();
  if (kind == "corr-decay") {
    text += "# kind: corr-decay\n# x: H (number of shifts)\n# y: aggregate = sum_{h<=H} |C(h)| / (H * normalizer), "
            "normalizer = pi(X) for prime bases, X for integer bases\n# H aggregate\n";
    std::vector<std::pair<double, double>> rows;
    for (const auto& s : steps)
      if (s["command"] == "correlate") rows.emplace_back(s["result"]["H"].get<double>(), s["result"]["aggregate"].get<double>());
    std::stable_sort(rows.begin(), rows.end(), [](auto& a, auto& b) { return a.first < b.first; });
    for (auto [h, v] : rows) text += fmt(h) + " " + fmt(v) + "\n";
  } else if (kind == "exceptional-fraction") {
    text += "# kind: exceptional-fraction\n# x: epsilon\n# y: fraction of h <= H with |C(h)| > epsilon * normalizer\n"
            "# epsilon fraction step\n";
    for (const auto& s : steps) {
      if (s["command"] != "correlate" || !s["result"].contains("exceptional")) continue;
      std::vector<std::pair<double, double>> rows;
      for (const auto& e : s["result"]["exceptional"]) rows.emplace_back(e["epsilon"].get<double>(), e["fraction"].get<double>());
      std::stable_sort(rows.begin(), rows.end(), [](auto& a, auto& b) { return a.first < b.first; });
      for (auto [eps, fr] : rows) text += fmt(eps) + " " + fmt(fr) + " " + std::to_string(s["step"].get<int>()) + "\n";
    }
  } else {
    fail_validation("unknown plot kind '" + kind + "' (corr-decay, exceptional-fraction)");
  }
  write_file(out, text);
}

void emit_plotdata(const fs::path& summary_path, const std::string& kind, const fs::path& out) {
  Json summary;
  try {
    summary = Json::parse(read_file(summary_path));
  } catch (const Json::exception& e) {
    fail_io("cannot parse " + summary_path.string() + ": " + e.what());
  }
  emit_plotdata(summary, kind, out);
}

}  // namespace msl::harness
