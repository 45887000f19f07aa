#pragma once

// Command registry shared by the `msl` CLI and the manifest runner, plus
// cache garbage collection and plot-data emission.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace msl::harness {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using Params = std::map<std::string, std::string>;

inline constexpr const char* kToolVersion = "msl 1.0.0";

struct RunContext {
  fs::path output_dir = ".";
  fs::path cache_dir = "msl-cache";
  uint64_t seed = 0;
  /// Written into every output header when non-empty.
  std::string manifest_hash;
  /// Cache block files the step read or wrote (pinned against cache-gc).
  std::set<std::string> touched_blocks;
  std::function<void(const std::string&)> log;
};

struct StepOutput {
  std::vector<fs::path> files;
  Json summary = Json::object();
};

struct ParamSpec {
  std::string name;
  std::optional<std::string> fallback;  // nullopt: required
  std::string help;
};

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<ParamSpec> params;
  std::function<StepOutput(const Params&, RunContext&)> run;
};

/// sieve, typical, chars, correlate, chowla, hl, divcorr, arcs, vino, fint,
/// mvp, pretend, cache-gc, plotdata. (`run` is handled by the CLI.)
const std::vector<CommandSpec>& commands();
const CommandSpec& find_command(const std::string& name);

/// Validates keys, fills defaults and dispatches.
StepOutput run_command(const std::string& name, const Params& params, RunContext& ctx);

// ---------------------------------------------------------------------------
// Manifests

struct ManifestStep {
  std::string command;
  Params params;
};

struct ExperimentManifest {
  std::string name;
  uint64_t seed = 0;
  fs::path cache_dir = "msl-cache";
  fs::path output_dir = "out";
  std::vector<ManifestStep> steps;
};

/// key = value lines; `[step <command>]` opens a step; keys before the first
/// step belong to the manifest; '#' starts a comment.
ExperimentManifest parse_manifest(const std::string& text);
ExperimentManifest load_manifest(const fs::path& path);
/// FNV-1a 64 (hex) of the canonical form: name, seed and steps with sorted
/// parameters. Directories do not enter the hash.
std::string manifest_hash(const ExperimentManifest& m);

struct StepRecord {
  std::string command;
  std::vector<std::string> outputs;  // relative to the output dir
  std::vector<std::string> output_hashes;
  double wall_seconds = 0;
};

struct RunReport {
  std::string manifest_hash;
  std::string tool_version = kToolVersion;
  fs::path output_dir;
  fs::path summary_path;
  fs::path report_path;
  std::vector<StepRecord> steps;
};

/// Runs the steps in order into output_dir (summary.json, run_report.json
/// and the step outputs). MSL_CACHE_DIR overrides the manifest cache_dir.
RunReport run_manifest(const ExperimentManifest& m, std::function<void(const std::string&)> log = {});

// ---------------------------------------------------------------------------
// Cache maintenance

struct GcReport {
  uint64_t scanned = 0;
  uint64_t bytes_before = 0;
  uint64_t bytes_after = 0;
  std::vector<std::string> evicted;  // file names in eviction order
  std::vector<std::string> pinned;   // skipped because a running manifest holds them
};

/// Evicts least recently used blocks (oldest mtime first, ties by name)
/// until the cache holds at most max_bytes. Blocks listed by live pin files
/// or in `pinned` are never evicted.
GcReport cache_gc(const fs::path& cache_dir, uint64_t max_bytes, const std::set<std::string>& pinned = {});

/// Pin file of the current process: lists the blocks a running manifest uses.
class CachePin {
 public:
  explicit CachePin(fs::path cache_dir);
  ~CachePin();
  CachePin(const CachePin&) = delete;
  CachePin& operator=(const CachePin&) = delete;
  void add(const std::set<std::string>& blocks);

 private:
  fs::path path_;
  std::set<std::string> blocks_;
};

// ---------------------------------------------------------------------------
// Plot data

/// corr-decay: (H, aggregate) over correlate steps, ascending H.
/// exceptional-fraction: (epsilon, fraction) from the exceptional scans.
void emit_plotdata(const Json& summary, const std::string& kind, const fs::path& out);
void emit_plotdata(const fs::path& summary_path, const std::string& kind, const fs::path& out);

// ---------------------------------------------------------------------------
// Helpers shared with tests

/// Accepts integers and exact floating forms such as 1e6.
uint64_t parse_count(const std::string& key, const std::string& text);
double parse_real(const std::string& key, const std::string& text);
/// Number, a/b, or one of golden, sqrt2, pi, e (taken mod 1).
double parse_alpha(const std::string& text);
std::string hex64(uint64_t v);
std::string file_hash(const fs::path& p);
/// Round-trip formatting for doubles.
std::string fmt(double v);

}  // namespace msl::harness
