// msl: command-line front end. Every subcommand except `run` is a thin
// wrapper over the shared command registry, so the CLI and manifests accept
// the same parameters.

#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "harness.hpp"
#include "msl/block_cache.hpp"
#include "msl/error.hpp"

using namespace msl::harness;

int main(int argc, char** argv) {
  CLI::App app{"msl: Moebius correlations over shifted primes, at desk scale"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::map<std::string, CLI::Option*>> opts;
  for (const auto& spec : commands()) {
    auto* sub = app.add_subcommand(spec.name, spec.help);
    for (const auto& p : spec.params) {
      auto& slot = values[spec.name][p.name];
      const std::string help = p.help + (p.fallback ? (p.fallback->empty() ? "" : " [" + *p.fallback + "]") : " (required)");
      CLI::Option* o = nullptr;
      if (p.fallback && *p.fallback == "false")
        o = sub->add_flag_callback("--" + p.name, [&slot] { slot = "true"; }, help);
      else
        o = sub->add_option("--" + p.name, slot, help);
      opts[spec.name][p.name] = o;
    }
  }

  std::string manifest_path, out_dir;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "execute an experiment manifest");
  run->add_option("manifest", manifest_path, "manifest file")->required();
  run->add_option("--out-dir", out_dir, "override the manifest output_dir");
  run->add_flag("--quiet", quiet, "no progress on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      auto m = load_manifest(manifest_path);
      if (!out_dir.empty()) m.output_dir = out_dir;
      auto log = quiet ? std::function<void(const std::string&)>() : [](const std::string& s) { std::cerr << s << "\n"; };
      const auto r = run_manifest(m, log);
      std::cout << "manifest " << r.manifest_hash << "\n"
                << "summary " << r.summary_path.string() << "\n"
                << "report " << r.report_path.string() << "\n";
      return 0;
    }
    for (const auto& spec : commands()) {
      auto* sub = app.get_subcommand(spec.name);
      if (!sub->parsed()) continue;
      Params params;
      for (const auto& [name, o] : opts[spec.name])
        if (o->count() > 0) params[name] = values[spec.name][name];
      RunContext ctx;
      ctx.cache_dir = msl::resolve_cache_dir("msl-cache");
      ctx.log = [](const std::string& s) { std::cerr << s << "\n"; };
      const auto out = run_command(spec.name, params, ctx);
      std::cout << out.summary.dump(2) << "\n";
      return 0;
    }
  } catch (const msl::Error& e) {
    std::cerr << "msl: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "msl: " << e.what() << "\n";
    return 4;
  } catch (const std::bad_alloc&) {
    std::cerr << "msl: out of memory\n";
    return 3;
  }
  return 2;
}
