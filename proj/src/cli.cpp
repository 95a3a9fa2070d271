#include <iostream>

#include <CLI11.hpp>

#include "ossforge/pipeline.hpp"

namespace ossforge {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"oss-forge: build instruction-tuning data from open-source code seeds"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::string stage_dir;
  std::size_t concurrency = 0;
  RunOptions options;
  bool quiet = false;
  app.add_option("-c,--config", config_path, "pipeline config (JSON)")->required();
  app.add_option("--stage-dir", stage_dir, "stage directory (overrides output_dir)");
  app.add_flag("--force", options.force, "rerun stages whose outputs already exist");
  app.add_flag("--dry-run", options.dry_run, "print the stage plan and exit");
  app.add_option("--concurrency", concurrency, "teacher requests in flight")->check(CLI::Range(std::size_t{1}, std::size_t{4096}));
  app.add_flag("-q,--quiet", quiet, "suppress structured logs on stderr");

  std::vector<std::pair<CLI::App*, std::vector<Stage>>> commands;
  for (Stage s : all_stages()) {
    commands.push_back({app.add_subcommand(std::string(to_string(s)), "run the " + std::string(to_string(s)) + " stage"),
                        {s}});
  }
  commands.push_back({app.add_subcommand("all", "run every stage in order"), all_stages()});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  if (!stage_dir.empty()) options.stage_dir = stage_dir;
  if (concurrency > 0) options.concurrency = concurrency;
  set_log_enabled(!quiet);

  std::vector<Stage> stages;
  for (const auto& [cmd, list] : commands) {
    if (cmd->parsed()) stages = list;
  }

  PipelineConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "invalid config " << config_path << ":\n";
    for (const auto& issue : e.issues()) std::cerr << "  " << issue.field << ": " << issue.message << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "invalid config " << config_path << ": " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    Pipeline pipeline(std::move(config), options);
    if (options.dry_run) {
      for (const auto& line : pipeline.plan(stages)) std::cout << line << "\n";
      return kExitOk;
    }
    DirectoryLock lock(pipeline.dir());
    for (Stage s : stages) pipeline.run(s);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"oss-forge"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace ossforge
