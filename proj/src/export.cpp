#include "ossforge/export.hpp"

namespace ossforge {

bool is_python_sample(const InstructionSample& s) {
  return s.problem.find(kPythonFenceLiteral) != std::string::npos ||
         s.solution.find(kPythonFenceLiteral) != std::string::npos;
}

LanguageSplit split_by_language(const std::vector<InstructionSample>& samples) {
  LanguageSplit out;
  for (const auto& s : samples) (is_python_sample(s) ? out.python : out.other).push_back(s);
  return out;
}

Json ExportSchema::to_json() const {
  return Json{{"format", "jsonl"},
              {"instruction_key", instruction_key},
              {"response_key", response_key},
              {"include_metadata", include_metadata},
              {"chat_template", nullptr}};
}

Json training_hyperparameters() {
  return Json{{"informational_only", true},
              {"base_models", {"CodeLlama-Python-7B", "DeepSeek-Coder-Base-6.7B"}},
              {"epochs", 2},
              {"learning_rate", 5e-5},
              {"warmup_steps", 15},
              {"lr_scheduler", "linear"},
              {"optimizer", "Adafactor"},
              {"batch_size", 512},
              {"max_sequence_length", 1216},
              {"continued_finetuning",
               {{"dataset", "evol-codealpaca (~110K)"}, {"warmup_steps", 15}, {"max_sequence_length", 1024}}}};
}

Json DatasetManifest::to_json() const {
  return Json{{"name", name},
              {"sample_count", sample_count},
              {"fenced_language_counts", fenced_language_counts},
              {"config_hash", config_hash},
              {"stage_reports", stage_reports},
              {"training", training},
              {"schema", schema.to_json()},
              {"dataset_file", dataset_file},
              {"dataset_sha256", dataset_sha256}};
}

std::string manifest_path_for(const std::filesystem::path& dataset_path) {
  return (dataset_path.parent_path() / (dataset_path.stem().string() + ".manifest.json")).string();
}

DatasetManifest export_jsonl(const std::vector<InstructionSample>& samples, const ExportSchema& schema,
                             const std::filesystem::path& dataset_path, const std::string& name,
                             const std::string& config_hash, const Json& stage_reports) {
  std::string body;
  DatasetManifest m;
  for (const auto& s : samples) {
    Json rec;
    if (schema.include_metadata) {
      rec = to_json(s, schema.instruction_key, schema.response_key);
    } else {
      rec = Json{{schema.instruction_key, s.problem}, {schema.response_key, s.solution}};
    }
    body += rec.dump();
    body.push_back('\n');
    for (const auto& lang : s.fenced_languages) ++m.fenced_language_counts[lang];
  }
  write_file_atomic(dataset_path, body);

  m.name = name;
  m.sample_count = samples.size();
  m.config_hash = config_hash;
  m.stage_reports = stage_reports;
  m.schema = schema;
  m.dataset_file = dataset_path.filename().string();
  m.dataset_sha256 = sha256_hex(body);
  write_file_atomic(manifest_path_for(dataset_path), dump_pretty(m.to_json()));
  return m;
}

std::vector<InstructionSample> import_jsonl(const std::filesystem::path& path, const ExportSchema& schema) {
  if (!schema.include_metadata) throw FatalError("import_jsonl: dataset exported without metadata is not loss-free");
  return read_samples(path, schema.instruction_key, schema.response_key);
}

bool StageLedger::reconciles() const {
  return seeds == accepted + rejected && accepted == cleaned + clean_removed && cleaned == kept + decontam_removed;
}

Json StageLedger::to_json() const {
  return Json{{"seeds", seeds},
              {"accepted", accepted},
              {"rejected", rejected},
              {"cleaned", cleaned},
              {"clean_removed", clean_removed},
              {"kept", kept},
              {"decontam_removed", decontam_removed},
              {"reconciles", reconciles()}};
}

Json write_report(const std::filesystem::path& dir, const ReportInputs& inputs) {
  Json csvs = Json::array();
  for (const auto& [file, content] : inputs.csv_files) {
    write_file_atomic(dir / file, content);
    csvs.push_back(file);
  }
  Json report{{"config_hash", inputs.config_hash},
              {"ledger", inputs.ledger.to_json()},
              {"stages", inputs.stages},
              {"analysis", inputs.analysis},
              {"csv_files", csvs}};
  write_file_atomic(dir / "report.json", dump_pretty(report));
  return report;
}

}  // namespace ossforge
