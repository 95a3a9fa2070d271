#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ossforge/sample.hpp"
#include "ossforge/util.hpp"

namespace ossforge {

struct LanguageSplit {
  std::vector<InstructionSample> python;
  std::vector<InstructionSample> other;
};

inline constexpr std::string_view kPythonFenceLiteral = "```python";

/// A sample is python iff the literal "```python" (case-sensitive) occurs in
/// its problem or solution.
bool is_python_sample(const InstructionSample& s);
LanguageSplit split_by_language(const std::vector<InstructionSample>& samples);

struct ExportSchema {
  std::string instruction_key = "instruction";
  std::string response_key = "response";
  bool include_metadata = true;  // required for a loss-free round trip

  Json to_json() const;
};

/// Fine-tuning settings recorded for reference; nothing here is executed.
Json training_hyperparameters();

struct DatasetManifest {
  std::string name;
  std::size_t sample_count = 0;
  std::map<std::string, std::size_t> fenced_language_counts;  // samples containing each tag
  std::string config_hash;
  Json stage_reports = Json::object();
  Json training = training_hyperparameters();
  ExportSchema schema;
  std::string dataset_file;
  std::string dataset_sha256;

  Json to_json() const;
};

/// Writes the dataset (one record per line) and, beside it, <stem>.manifest.json.
/// Both writes are atomic. Throws FatalError when the destination is unwritable.
DatasetManifest export_jsonl(const std::vector<InstructionSample>& samples, const ExportSchema& schema,
                             const std::filesystem::path& dataset_path, const std::string& name,
                             const std::string& config_hash, const Json& stage_reports);

std::string manifest_path_for(const std::filesystem::path& dataset_path);

/// Reads back a dataset written with include_metadata.
std::vector<InstructionSample> import_jsonl(const std::filesystem::path& path, const ExportSchema& schema);

/// seeds = accepted + rejected; accepted = cleaned + clean_removed;
/// cleaned = kept + decontam_removed.
struct StageLedger {
  std::size_t seeds = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t cleaned = 0;
  std::size_t clean_removed = 0;
  std::size_t kept = 0;
  std::size_t decontam_removed = 0;

  bool reconciles() const;
  Json to_json() const;
};

struct ReportInputs {
  std::string config_hash;
  StageLedger ledger;
  Json stages = Json::object();    // stage name -> report object
  Json analysis = Json::object();  // analysis summary
  std::map<std::string, std::string> csv_files;  // file name -> content
};

/// Writes report.json and the CSV files into `dir`; returns the report object.
Json write_report(const std::filesystem::path& dir, const ReportInputs& inputs);

}  // namespace ossforge
