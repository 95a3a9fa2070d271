#include <doctest.h>

#include <cstdio>
#include <iostream>

#include <sys/wait.h>
#include <unistd.h>

#include "ossforge/pipeline.hpp"
#include "pipeline_fixture.hpp"

using namespace ossforge;
using testsupport::PipelineFixture;
namespace fs = std::filesystem;

namespace {

int cli(const PipelineFixture& f, std::vector<std::string> args) {
  std::vector<std::string> full = {"-q", "-c", f.config_path.string()};
  full.insert(full.end(), args.begin(), args.end());
  return run_cli(full);
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != artifacts::kLock) {
      out[fs::relative(e.path(), dir).string()] = read_file(e.path());
    }
  }
  return out;
}

std::vector<std::string> issue_fields(const Json& config, const fs::path& base) {
  try {
    parse_config(config, base);
  } catch (const ConfigError& e) {
    std::vector<std::string> out;
    for (const auto& i : e.issues()) out.push_back(i.field);
    return out;
  }
  return {};
}

}  // namespace

TEST_CASE("config validation names every offending field") {
  PipelineFixture f;
  CHECK(issue_fields(f.config, f.dir.path()).empty());

  auto c = f.config;
  c["sampling"].erase("rng_seed");
  c["bogus"] = 1;
  c["teacher"]["concurrency"] = 0;
  const auto fields = issue_fields(c, f.dir.path());
  CHECK(std::find(fields.begin(), fields.end(), "sampling.rng_seed") != fields.end());
  CHECK(std::find(fields.begin(), fields.end(), "bogus") != fields.end());
  CHECK(std::find(fields.begin(), fields.end(), "teacher.concurrency") != fields.end());

  c = f.config;
  c["teacher"]["api_token"] = "sk-123";
  c["teacher"]["password"] = "hunter2";
  CHECK(issue_fields(c, f.dir.path()) == std::vector<std::string>{"teacher.api_token", "teacher.password"});

  // Known keys that merely mention tokens are not secrets.
  c = f.config;
  c["teacher"]["max_new_tokens"] = 512;
  c["pairs"] = {{"min_comment_tokens", 4}};
  CHECK(issue_fields(c, f.dir.path()).empty());

  c = f.config;
  c["corpus"]["path"] = "does-not-exist.jsonl";
  CHECK(issue_fields(c, f.dir.path()) == std::vector<std::string>{"corpus.path"});

  c = f.config;
  c["analysis"]["categories"].erase(0);
  CHECK(issue_fields(c, f.dir.path()) == std::vector<std::string>{"analysis.categories"});
}

TEST_CASE("config hash ignores output_dir and tracks everything else") {
  PipelineFixture f;
  const auto a = parse_config(f.config, f.dir.path());
  auto c = f.config;
  c["output_dir"] = "elsewhere";
  CHECK(parse_config(c, f.dir.path()).hash() == a.hash());
  c["sampling"]["rng_seed"] = 12;
  CHECK(parse_config(c, f.dir.path()).hash() != a.hash());
}

TEST_CASE("exit codes for usage, config and stage errors") {
  PipelineFixture f;
  CHECK(run_cli(std::vector<std::string>{"all"}) == 2);                                       // no --config
  CHECK(cli(f, {}) == 2);                                                                     // no subcommand
  CHECK(cli(f, {"no-such-stage"}) == 2);
  CHECK(cli(f, {"all", "--concurrency", "0"}) == 2);
  CHECK(run_cli(std::vector<std::string>{"-q", "-c", (f.dir / "missing.json").string(), "all"}) == 2);

  f.config["sampling"].erase("rng_seed");
  f.save();
  CHECK(cli(f, {"sample-seeds"}) == 2);
  CHECK_FALSE(fs::exists(f.run_dir() / artifacts::kSeeds));

  PipelineFixture g;
  CHECK(cli(g, {"generate"}) == 1);  // seeds missing
  CHECK_FALSE(fs::exists(g.run_dir() / artifacts::kGenerateReport));
}

TEST_CASE("dry run writes nothing") {
  PipelineFixture f;
  CHECK(cli(f, {"--dry-run", "all"}) == 0);
  CHECK_FALSE(fs::exists(f.run_dir()));
  Pipeline p(parse_config(f.config, f.dir.path()), RunOptions{});
  const auto plan = p.plan(all_stages());
  REQUIRE(plan.size() == 9);
  CHECK(plan[0] == "sample-seeds: run");
}

TEST_CASE("stages skip when complete and rerun with --force") {
  PipelineFixture f;
  REQUIRE(cli(f, {"sample-seeds"}) == 0);
  const auto marker = f.run_dir() / artifacts::kSamplingReport;
  const auto before = fs::last_write_time(marker);
  Pipeline p(parse_config(f.config, f.dir.path()), RunOptions{});
  CHECK_FALSE(p.run(Stage::kSampleSeeds));
  CHECK(p.plan({Stage::kSampleSeeds, Stage::kGenerate}) ==
        std::vector<std::string>{"sample-seeds: skip (complete)", "generate: run"});
  CHECK(fs::last_write_time(marker) == before);

  // A partial stage (outputs without marker) reruns.
  fs::remove(marker);
  CHECK(p.run(Stage::kSampleSeeds));

  RunOptions force;
  force.force = true;
  Pipeline forced(parse_config(f.config, f.dir.path()), force);
  const std::string seeds = read_file(f.run_dir() / artifacts::kSeeds);
  CHECK(forced.run(Stage::kSampleSeeds));
  CHECK(read_file(f.run_dir() / artifacts::kSeeds) == seeds);
}

TEST_CASE("a second instance on the same directory is refused") {
  PipelineFixture f;
  fs::create_directories(f.run_dir());
  DirectoryLock held(f.run_dir());
  CHECK_THROWS_AS(DirectoryLock(f.run_dir()), FatalError);

  std::cout.flush();
  std::fflush(nullptr);
  const pid_t pid = ::fork();
  REQUIRE(pid >= 0);
  if (pid == 0) _exit(cli(f, {"sample-seeds"}));
  int status = 0;
  ::waitpid(pid, &status, 0);
  CHECK(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 1);
  CHECK_FALSE(fs::exists(f.run_dir() / artifacts::kSeeds));
}

TEST_CASE("all runs end to end and is reproducible") {
  PipelineFixture f;
  REQUIRE(cli(f, {"all"}) == 0);
  const auto first = snapshot(f.run_dir());

  const Json report = Json::parse(first.at("report/report.json"));
  CHECK(report["ledger"]["reconciles"] == true);
  CHECK(report["ledger"]["seeds"] == 100);
  CHECK(report["ledger"]["accepted"] == 100);
  // The benchmark matches exactly the five rust samples.
  CHECK(report["ledger"]["decontam_removed"] == 5);
  CHECK(report["ledger"]["kept"] == report["ledger"]["cleaned"].get<int>() - 5);

  const auto kept = read_samples(f.run_dir() / artifacts::kDecontaminated);
  const auto exported = import_jsonl(f.run_dir() / artifacts::kExportDataset, parse_config(f.config, f.dir.path()).schema);
  CHECK(exported == kept);
  for (const auto& s : kept) CHECK(s.seed->language != "rust");

  const Json split = Json::parse(first.at("split/split_report.json"));
  CHECK(split["python"].get<std::size_t>() + split["other"].get<std::size_t>() == kept.size());

  const Json pairs = Json::parse(first.at("pairs/pairs_report.json"));
  CHECK(pairs["selected"].get<std::size_t>() + pairs["shortfall"].get<std::size_t>() == pairs["target"].get<std::size_t>());
  CHECK(pairs["mining"]["pairs"].get<std::size_t>() >= 3);

  CHECK(first.count("analysis/token_lengths.csv") == 1);
  CHECK(first.count("analysis/similarity.csv") == 1);
  CHECK(first.count("analysis/categories.csv") == 1);
  CHECK(first.count("report/categories.csv") == 1);
  const Json manifest = Json::parse(first.at("export/dataset.manifest.json"));
  CHECK(manifest["dataset_sha256"] == sha256_hex(first.at("export/dataset.jsonl")));
  CHECK(manifest["sample_count"] == kept.size());

  // A fresh directory with the same config reproduces every byte.
  PipelineFixture g;
  REQUIRE(cli(g, {"all"}) == 0);
  CHECK(snapshot(g.run_dir()) == first);

  // Rerunning in place skips everything and changes nothing.
  REQUIRE(cli(f, {"all"}) == 0);
  CHECK(snapshot(f.run_dir()) == first);
}

TEST_CASE("--stage-dir overrides output_dir and concurrency does not change outputs") {
  PipelineFixture f;
  REQUIRE(cli(f, {"--stage-dir", (f.dir / "a").string(), "all"}) == 0);
  REQUIRE(cli(f, {"--stage-dir", (f.dir / "b").string(), "--concurrency", "1", "all"}) == 0);
  CHECK_FALSE(fs::exists(f.run_dir()));
  const auto a = snapshot(f.dir / "a");
  auto b = snapshot(f.dir / "b");
  CHECK(a.at("export/dataset.jsonl") == b.at("export/dataset.jsonl"));
  CHECK(a.at("samples.jsonl") == b.at("samples.jsonl"));
}

TEST_CASE("a failing teacher quarantines instead of aborting") {
  PipelineFixture f;
  f.config["teacher"]["mock"]["fallback"] = "error";
  f.save();
  REQUIRE(cli(f, {"sample-seeds"}) == 0);
  REQUIRE(cli(f, {"generate"}) == 0);
  const Json gen = Json::parse(read_file(f.run_dir() / artifacts::kGenerateReport));
  CHECK(gen["accepted"] == 0);
  CHECK(gen["rejected"] == 100);
  const std::string q = read_file(f.run_dir() / artifacts::kQuarantine);
  CHECK(std::count(q.begin(), q.end(), '\n') == 100);
}
