#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ossforge/analyze.hpp"
#include "ossforge/corpus.hpp"
#include "ossforge/decontam.hpp"
#include "ossforge/export.hpp"
#include "ossforge/pairminer.hpp"
#include "ossforge/teacher.hpp"
#include "ossforge/util.hpp"

namespace ossforge {

struct ConfigIssue {
  std::string field;  // dotted path, e.g. "teacher.concurrency"
  std::string message;
};

/// Collects every problem found while reading a config.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

struct TeacherSettings {
  std::string backend = "mock";  // "mock" | "http"
  HttpBackendConfig http;
  std::size_t concurrency = 8;
  RetryPolicy retry;
  Decoding decoding;
  int max_new_tokens = kDefaultMaxNewTokens;
  std::optional<std::filesystem::path> mock_fixtures;
  MockBackend::Fallback mock_fallback = MockBackend::Fallback::kError;
};

struct SimilaritySettings {
  std::filesystem::path descriptor;
  std::string benchmark;  // empty = every record in the descriptor
};

struct EmbedderSettings {
  std::string kind = "tfidf";  // "tfidf" | "remote"
  RemoteEmbedderConfig remote;
};

struct AnalysisSettings {
  std::string tokenizer = "whitespace";
  std::size_t bin_width = 32;
  std::optional<SimilaritySettings> similarity;
  std::vector<Category> categories;  // empty = skip categorization
  EmbedderSettings embedder;
};

struct PipelineConfig {
  std::filesystem::path corpus_path;
  std::set<std::string> languages;  // defaults to the quota languages
  SamplingQuota quota;
  std::size_t seeds_per_document = 1;

  std::optional<std::filesystem::path> template_path;
  PromptTemplate prompt = PromptTemplate::standard();

  TeacherSettings teacher;
  SampleBuildOptions sample_options;
  CommentSyntaxTable comments = CommentSyntaxTable::defaults();
  std::map<std::string, std::vector<std::string>> comment_overrides;

  std::vector<std::filesystem::path> benchmarks;
  BenchmarkLoadOptions benchmark_options;
  std::size_t workers = 1;

  AnalysisSettings analysis;

  std::optional<std::size_t> pair_target;  // default: size of the final dataset
  MineOptions mine_options;

  std::string dataset_name = "oss-instruct";
  ExportSchema schema;

  std::filesystem::path output_dir;

  /// Defaults-filled form with paths as written in the config file.
  Json canonical = Json::object();

  /// SHA-256 of `canonical` without output_dir.
  std::string hash() const;
};

/// Parses and validates. Relative paths resolve against `base_dir`. Throws
/// ConfigError listing every offending field.
PipelineConfig parse_config(const Json& j, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace ossforge
