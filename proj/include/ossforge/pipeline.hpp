#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ossforge/config.hpp"
#include "ossforge/teacher.hpp"

namespace ossforge {

enum class Stage { kSampleSeeds, kGenerate, kClean, kDecontaminate, kAnalyze, kMinePairs, kSplit, kExport, kReport };

std::string_view to_string(Stage s);
std::optional<Stage> stage_from_string(std::string_view s);
/// Every stage, in the order `all` runs them.
const std::vector<Stage>& all_stages();

/// Artifact names inside the stage directory.
namespace artifacts {
inline constexpr const char* kSeeds = "seeds.jsonl";
inline constexpr const char* kSamplingReport = "sampling_report.json";
inline constexpr const char* kResponses = "responses.jsonl";
inline constexpr const char* kSamples = "samples.jsonl";
inline constexpr const char* kQuarantine = "quarantine.jsonl";
inline constexpr const char* kGenerateReport = "generate_report.json";
inline constexpr const char* kCleaned = "cleaned.jsonl";
inline constexpr const char* kCleanRemoved = "clean_removed.jsonl";
inline constexpr const char* kCleanReport = "clean_report.json";
inline constexpr const char* kDecontaminated = "decontaminated.jsonl";
inline constexpr const char* kDecontamRemoved = "decontam_removed.jsonl";
inline constexpr const char* kDecontamMatches = "decontam_matches.jsonl";
inline constexpr const char* kDecontamReport = "decontam_report.json";
inline constexpr const char* kAnalysisReport = "analysis/analysis_report.json";
inline constexpr const char* kPairs = "pairs/pairs.jsonl";
inline constexpr const char* kPairSamples = "pairs/pair_samples.jsonl";
inline constexpr const char* kPairsReport = "pairs/pairs_report.json";
inline constexpr const char* kSplitPython = "split/python.jsonl";
inline constexpr const char* kSplitOther = "split/other.jsonl";
inline constexpr const char* kSplitReport = "split/split_report.json";
inline constexpr const char* kExportDataset = "export/dataset.jsonl";
inline constexpr const char* kExportManifest = "export/dataset.manifest.json";
inline constexpr const char* kExportReport = "export/export_report.json";
inline constexpr const char* kReport = "report/report.json";
inline constexpr const char* kLock = ".oss-forge.lock";
}  // namespace artifacts

/// Raised when a stage's input artifact is absent.
class MissingArtifact : public FatalError {
 public:
  using FatalError::FatalError;
};

struct RunOptions {
  std::optional<std::filesystem::path> stage_dir;  // overrides config output_dir
  bool force = false;
  bool dry_run = false;
  std::optional<std::size_t> concurrency;
};

/// Runs stages against one stage directory. Each stage reads earlier
/// artifacts, writes its own atomically, and writes its completion marker
/// last; a stage whose marker exists is skipped unless forced.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, RunOptions options);

  /// Replaces the configured teacher backend (tests, embedding in other tools).
  void set_backend(std::shared_ptr<TeacherBackend> backend) { backend_ = std::move(backend); }

  /// Runs one stage. Returns false when it was skipped as already complete.
  bool run(Stage stage);
  void run_all();

  /// Names the stages `all` would run or skip, without touching disk.
  std::vector<std::string> plan(const std::vector<Stage>& stages) const;

  const std::filesystem::path& dir() const { return dir_; }
  const PipelineConfig& config() const { return config_; }

 private:
  std::filesystem::path at(std::string_view artifact) const { return dir_ / std::string(artifact); }
  std::filesystem::path require(std::string_view artifact, Stage producer) const;
  std::filesystem::path marker(Stage stage) const;

  void sample_seeds();
  void generate();
  void clean_stage();
  void decontaminate_stage();
  void analyze();
  void mine_pairs_stage();
  void split();
  void export_stage();
  void report();

  std::shared_ptr<TeacherBackend> make_backend();

  PipelineConfig config_;
  RunOptions options_;
  std::filesystem::path dir_;
  std::shared_ptr<TeacherBackend> backend_;
};

/// Exclusive advisory lock on <dir>/.oss-forge.lock, released on destruction.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  int fd_ = -1;
};

/// Command-line entry point; returns the process exit status
/// (0 ok, 1 stage failure, 2 invalid config or usage).
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace ossforge
