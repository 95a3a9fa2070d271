#include "ossforge/pipeline.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <iostream>
#include <set>

#include "ossforge/clean.hpp"

namespace ossforge {

namespace {

const std::vector<std::pair<Stage, std::string_view>>& stage_names() {
  static const std::vector<std::pair<Stage, std::string_view>> names = {
      {Stage::kSampleSeeds, "sample-seeds"}, {Stage::kGenerate, "generate"},   {Stage::kClean, "clean"},
      {Stage::kDecontaminate, "decontaminate"}, {Stage::kAnalyze, "analyze"}, {Stage::kMinePairs, "mine-pairs"},
      {Stage::kSplit, "split"},               {Stage::kExport, "export"},     {Stage::kReport, "report"}};
  return names;
}

std::string read_json_text(const std::filesystem::path& p) { return read_file(p); }

Json read_json(const std::filesystem::path& p) { return Json::parse(read_json_text(p)); }

std::size_t count_records(const std::filesystem::path& p) {
  std::size_t n = 0;
  for_each_jsonl(p, [&](const Json&, std::size_t) { ++n; });
  return n;
}

}  // namespace

std::string_view to_string(Stage s) {
  for (const auto& [stage, name] : stage_names()) {
    if (stage == s) return name;
  }
  return "?";
}

std::optional<Stage> stage_from_string(std::string_view s) {
  for (const auto& [stage, name] : stage_names()) {
    if (name == s) return stage;
  }
  return std::nullopt;
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages = [] {
    std::vector<Stage> v;
    for (const auto& [stage, name] : stage_names()) v.push_back(stage);
    return v;
  }();
  return stages;
}

// ---------------------------------------------------------------------------

DirectoryLock::DirectoryLock(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto path = dir / artifacts::kLock;
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw FatalError("cannot open lock file " + path.string());
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw FatalError("another pipeline instance holds " + path.string());
  }
}

DirectoryLock::~DirectoryLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

// ---------------------------------------------------------------------------

Pipeline::Pipeline(PipelineConfig config, RunOptions options)
    : config_(std::move(config)), options_(std::move(options)) {
  dir_ = options_.stage_dir ? *options_.stage_dir : config_.output_dir;
  if (dir_.empty()) throw FatalError("no stage directory: set output_dir or --stage-dir");
}

std::filesystem::path Pipeline::require(std::string_view artifact, Stage producer) const {
  auto p = at(artifact);
  if (!std::filesystem::exists(p)) {
    throw MissingArtifact("missing artifact " + p.string() + " (run `" + std::string(to_string(producer)) +
                          "` first)");
  }
  return p;
}

std::filesystem::path Pipeline::marker(Stage stage) const {
  switch (stage) {
    case Stage::kSampleSeeds: return at(artifacts::kSamplingReport);
    case Stage::kGenerate: return at(artifacts::kGenerateReport);
    case Stage::kClean: return at(artifacts::kCleanReport);
    case Stage::kDecontaminate: return at(artifacts::kDecontamReport);
    case Stage::kAnalyze: return at(artifacts::kAnalysisReport);
    case Stage::kMinePairs: return at(artifacts::kPairsReport);
    case Stage::kSplit: return at(artifacts::kSplitReport);
    case Stage::kExport: return at(artifacts::kExportReport);
    case Stage::kReport: return at(artifacts::kReport);
  }
  return {};
}

std::vector<std::string> Pipeline::plan(const std::vector<Stage>& stages) const {
  std::vector<std::string> out;
  for (Stage s : stages) {
    const bool done = std::filesystem::exists(marker(s));
    out.push_back(std::string(to_string(s)) + ": " + (done && !options_.force ? "skip (complete)" : "run"));
  }
  return out;
}

bool Pipeline::run(Stage stage) {
  if (!options_.force && std::filesystem::exists(marker(stage))) {
    log_event(to_string(stage), "skipped", {{"reason", "outputs present; use --force to rerun"}});
    return false;
  }
  log_event(to_string(stage), "start");
  switch (stage) {
    case Stage::kSampleSeeds: sample_seeds(); break;
    case Stage::kGenerate: generate(); break;
    case Stage::kClean: clean_stage(); break;
    case Stage::kDecontaminate: decontaminate_stage(); break;
    case Stage::kAnalyze: analyze(); break;
    case Stage::kMinePairs: mine_pairs_stage(); break;
    case Stage::kSplit: split(); break;
    case Stage::kExport: export_stage(); break;
    case Stage::kReport: report(); break;
  }
  return true;
}

void Pipeline::run_all() {
  for (Stage s : all_stages()) run(s);
}

// ---------------------------------------------------------------------------

void Pipeline::sample_seeds() {
  StratifiedSampler sampler(config_.quota);
  const LoadStats load = load_corpus(config_.corpus_path, config_.languages,
                                     [&](CodeDocument doc) { sampler.offer(std::move(doc)); });
  auto result = std::move(sampler).finish();

  std::string seeds;
  std::size_t index = 0;
  for (const auto& doc : result.documents) {
    Rng rng = seed_rng_for(config_.quota.rng_seed, doc);
    for (std::size_t k = 0; k < config_.seeds_per_document; ++k) {
      Json rec = to_json(extract_seed(doc, rng));
      rec["seed_index"] = index++;
      seeds += rec.dump();
      seeds.push_back('\n');
    }
  }
  write_file_atomic(at(artifacts::kSeeds), seeds);

  Json report{{"load", load.to_json()},
              {"sampling", result.report.to_json()},
              {"seeds", index},
              {"seeds_per_document", config_.seeds_per_document}};
  write_file_atomic(at(artifacts::kSamplingReport), dump_pretty(report));
  log_event("sample-seeds", "done", {{"seeds", index}, {"documents", result.documents.size()}});
}

std::shared_ptr<TeacherBackend> Pipeline::make_backend() {
  if (config_.teacher.backend == "http") return std::make_shared<HttpChatBackend>(config_.teacher.http);
  std::map<std::string, MockBackend::Fixture> fixtures;
  if (config_.teacher.mock_fixtures) fixtures = MockBackend::load_fixtures(*config_.teacher.mock_fixtures);
  return std::make_shared<MockBackend>(std::move(fixtures), config_.teacher.mock_fallback);
}

void Pipeline::generate() {
  const auto seeds_path = require(artifacts::kSeeds, Stage::kSampleSeeds);
  std::vector<GenerationRequest> requests;
  for_each_jsonl(seeds_path, [&](const Json& j, std::size_t) {
    GenerationRequest r;
    r.index = requests.size();
    r.seed = seed_from_json(j);
    r.prompt = build_prompt(r.seed, config_.prompt);
    r.decoding = config_.teacher.decoding;
    r.max_new_tokens = config_.teacher.max_new_tokens;
    requests.push_back(std::move(r));
  });

  auto backend = backend_ ? backend_ : make_backend();
  const std::size_t concurrency = options_.concurrency.value_or(config_.teacher.concurrency);
  const auto responses = generate_batch(requests, *backend, config_.teacher.retry, concurrency);

  std::string responses_log;
  std::string accepted;
  std::string quarantine;
  std::map<std::string, std::size_t> reasons;
  std::size_t n_accepted = 0;
  std::size_t truncated = 0;
  std::size_t retries = 0;
  std::map<std::string, std::size_t> flag_counts{{"truncated", 0}, {"no_fence", 0}, {"short_solution", 0}};
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& req = requests[i];
    const auto& resp = responses[i];
    responses_log += resp.to_json().dump() + "\n";
    retries += static_cast<std::size_t>(resp.retry_count);

    ParsedResponse parsed;
    if (resp.finish_reason == FinishReason::kError) {
      parsed.reason = RejectReason::kBackendError;
    } else {
      parsed = parse_response(*resp.raw_text, config_.prompt.markers);
    }
    if (!parsed.accepted()) {
      ++reasons[std::string(to_string(parsed.reason))];
      Json q{{"index", req.index},
             {"sample_id", sample_id_for(req.index)},
             {"reason", to_string(parsed.reason)},
             {"seed", to_json(req.seed)}};
      q["raw_text"] = resp.raw_text ? Json(*resp.raw_text) : Json(nullptr);
      if (!resp.error.empty()) q["error"] = resp.error;
      quarantine += q.dump() + "\n";
      continue;
    }
    InstructionSample s = make_sample(req, resp, parsed, config_.sample_options);
    if (s.flags.truncated) ++truncated, ++flag_counts["truncated"];
    if (s.flags.no_fence) ++flag_counts["no_fence"];
    if (s.flags.short_solution) ++flag_counts["short_solution"];
    accepted += to_json(s).dump() + "\n";
    ++n_accepted;
  }
  write_file_atomic(at(artifacts::kResponses), responses_log);
  write_file_atomic(at(artifacts::kSamples), accepted);
  write_file_atomic(at(artifacts::kQuarantine), quarantine);

  Json report{{"seeds", requests.size()},
              {"accepted", n_accepted},
              {"rejected", requests.size() - n_accepted},
              {"rejection_reasons", reasons},
              {"flags", flag_counts},
              {"retries", retries},
              {"backend_id", backend->id()},
              {"decoding", config_.teacher.decoding.to_json()},
              {"max_new_tokens", config_.teacher.max_new_tokens},
              {"section_markers",
               {{"problem", config_.prompt.markers.problem}, {"solution", config_.prompt.markers.solution}}}};
  write_file_atomic(at(artifacts::kGenerateReport), dump_pretty(report));
  log_event("generate", "done", {{"seeds", requests.size()}, {"accepted", n_accepted}, {"retries", retries}});
}

void Pipeline::clean_stage() {
  const auto samples = read_samples(require(artifacts::kSamples, Stage::kGenerate));
  const CleanResult r = clean(samples, config_.comments);
  write_file_atomic(at(artifacts::kCleaned), samples_to_jsonl(r.samples));
  write_file_atomic(at(artifacts::kCleanRemoved), samples_to_jsonl(r.removed));
  write_file_atomic(at(artifacts::kCleanReport), dump_pretty(r.report.to_json()));
  log_event("clean", "done", r.report.to_json());
}

void Pipeline::decontaminate_stage() {
  const auto samples = read_samples(require(artifacts::kCleaned, Stage::kClean));
  std::vector<BenchmarkCorpus> corpora;
  Json load = Json::object();
  for (const auto& path : config_.benchmarks) {
    auto loaded = load_benchmarks(path, config_.benchmark_options);
    for (const auto& [name, st] : loaded.stats) load[path.filename().string()][name] = st.to_json();
    for (auto& c : loaded.corpora) corpora.push_back(std::move(c));
  }
  const ContaminationMatcher matcher(std::move(corpora));
  const DecontamResult r = decontaminate(samples, matcher, config_.workers);

  std::string matches;
  for (const auto& m : r.matches) matches += m.to_json().dump() + "\n";
  write_file_atomic(at(artifacts::kDecontaminated), samples_to_jsonl(r.kept));
  write_file_atomic(at(artifacts::kDecontamRemoved), samples_to_jsonl(r.removed));
  write_file_atomic(at(artifacts::kDecontamMatches), matches);

  Json report = r.report.to_json();
  report["benchmark_load"] = load;
  report["min_match_len"] = config_.benchmark_options.min_match_len;
  report["normalization"] = "collapse-whitespace, strip, case-sensitive";
  report["match_count"] = r.matches.size();
  write_file_atomic(at(artifacts::kDecontamReport), dump_pretty(report));
  log_event("decontaminate", "done",
            {{"input", r.report.input_count}, {"kept", r.report.kept_count}, {"removed", r.report.removed_count}});
}

void Pipeline::analyze() {
  const auto samples = read_samples(require(artifacts::kDecontaminated, Stage::kDecontaminate));
  Json report = Json::object();
  report["samples"] = samples.size();

  const WhitespaceTokenCounter counter;
  const Histogram h = token_length_histogram(samples, counter, config_.analysis.bin_width);
  write_file_atomic(at("analysis/token_lengths.csv"), h.to_csv());
  report["token_lengths"] = h.to_json();

  if (config_.analysis.similarity) {
    const auto& sim = *config_.analysis.similarity;
    const auto items = load_similarity_items(sim.descriptor, sim.benchmark);
    std::vector<TextItem> dataset;
    for (const auto& s : samples) dataset.push_back({s.sample_id, sample_text(s)});
    if (items.empty()) {
      report["similarity"] = {{"error", "benchmark has no entries"}};
    } else {
      const SimilarityResult r = nearest_benchmark(dataset, items, config_.workers);
      write_file_atomic(at("analysis/similarity.csv"), similarity_csv(r));
      report["similarity"] = {{"benchmark", sim.benchmark},
                              {"benchmark_entries", items.size()},
                              {"vocabulary_size", r.vocabulary_size},
                              {"tokenizer_id", TfIdfModel::kTokenizerId},
                              {"statistic", "per-sample max cosine"},
                              {"summary", r.summary.to_json()}};
    }
  } else {
    report["similarity"] = nullptr;
  }

  if (!config_.analysis.categories.empty()) {
    try {
      std::unique_ptr<Embedder> embedder;
      if (config_.analysis.embedder.kind == "remote") {
        embedder = std::make_unique<RemoteEmbedder>(config_.analysis.embedder.remote);
      } else {
        embedder = std::make_unique<TfIdfEmbedder>(TfIdfEmbedder::fit_for(samples, config_.analysis.categories));
      }
      const CategoryBreakdown b = categorize(samples, config_.analysis.categories, *embedder);
      write_file_atomic(at("analysis/categories.csv"), b.to_csv());
      report["categories"] = b.to_json();
    } catch (const std::exception& e) {
      // Categorization failure is confined to this analysis.
      log_event("analyze", "categories_failed", {{"error", e.what()}});
      report["categories"] = {{"error", e.what()}};
    }
  } else {
    report["categories"] = nullptr;
  }
  write_file_atomic(at(artifacts::kAnalysisReport), dump_pretty(report));
  log_event("analyze", "done", {{"samples", samples.size()}});
}

void Pipeline::mine_pairs_stage() {
  const auto seeds_path = require(artifacts::kSeeds, Stage::kSampleSeeds);
  std::vector<SeedSnippet> seeds;
  for_each_jsonl(seeds_path, [&](const Json& j, std::size_t) { seeds.push_back(seed_from_json(j)); });

  // Pairs come from the whole seed corpus; seed-overlapping ones are ranked first.
  PairMiner miner(config_.languages, config_.mine_options);
  load_corpus(config_.corpus_path, config_.languages, [&](CodeDocument d) { miner.add(d); });
  const MineStats stats = miner.stats();
  auto pairs = std::move(miner).finish();
  std::size_t target = pairs.size();
  std::string target_source = "all_pairs";
  if (config_.pair_target) {
    target = *config_.pair_target;
    target_source = "config";
  } else if (std::filesystem::exists(at(artifacts::kDecontaminated))) {
    target = count_records(at(artifacts::kDecontaminated));
    target_source = "dataset_size";
  }
  const PrioritizedPairs chosen = prioritize_pairs(std::move(pairs), seeds, target);
  const auto samples = pairs_to_samples(chosen.pairs);

  std::string pair_lines;
  for (const auto& p : chosen.pairs) pair_lines += p.to_json().dump() + "\n";
  write_file_atomic(at(artifacts::kPairs), pair_lines);
  write_file_atomic(at(artifacts::kPairSamples), samples_to_jsonl(samples));

  Json report{{"mining", stats.to_json()},
              {"target", target},
              {"target_source", target_source},
              {"selected", chosen.pairs.size()},
              {"overlapping_seed", chosen.overlapping},
              {"shortfall", chosen.shortfall},
              {"filters",
               {{"min_comment_tokens", config_.mine_options.min_comment_tokens},
                {"min_body_lines", config_.mine_options.min_body_lines},
                {"allow_leading_comments", config_.mine_options.allow_leading_comments}}}};
  write_file_atomic(at(artifacts::kPairsReport), dump_pretty(report));
  log_event("mine-pairs", "done", {{"selected", chosen.pairs.size()}, {"overlapping", chosen.overlapping}});
}

void Pipeline::split() {
  const auto samples = read_samples(require(artifacts::kDecontaminated, Stage::kDecontaminate));
  const LanguageSplit s = split_by_language(samples);
  write_file_atomic(at(artifacts::kSplitPython), samples_to_jsonl(s.python));
  write_file_atomic(at(artifacts::kSplitOther), samples_to_jsonl(s.other));
  Json report{{"rule", std::string("substring \"") + std::string(kPythonFenceLiteral) + "\" in problem or solution"},
              {"total", samples.size()},
              {"python", s.python.size()},
              {"other", s.other.size()}};
  write_file_atomic(at(artifacts::kSplitReport), dump_pretty(report));
  log_event("split", "done", {{"python", s.python.size()}, {"other", s.other.size()}});
}

void Pipeline::export_stage() {
  const auto samples = read_samples(require(artifacts::kDecontaminated, Stage::kDecontaminate));
  Json stage_reports = Json::object();
  for (auto [name, file] : {std::pair{"clean", artifacts::kCleanReport}, {"decontaminate", artifacts::kDecontamReport},
                            {"generate", artifacts::kGenerateReport}}) {
    if (std::filesystem::exists(at(file))) stage_reports[name] = read_json(at(file));
  }
  const std::string hash = config_.hash();
  Json exported = Json::object();
  const auto main = export_jsonl(samples, config_.schema, at(artifacts::kExportDataset), config_.dataset_name, hash,
                                 stage_reports);
  exported["dataset.jsonl"] = main.sample_count;

  // Ablation datasets, when their stages have run.
  const std::vector<std::tuple<const char*, const char*, std::string>> extras = {
      {artifacts::kSplitPython, "python.jsonl", config_.dataset_name + "-python"},
      {artifacts::kSplitOther, "other.jsonl", config_.dataset_name + "-other"},
      {artifacts::kPairSamples, "comment_function_pairs.jsonl", "comment-function-pairs"}};
  for (const auto& [src, dst, name] : extras) {
    if (!std::filesystem::exists(at(src))) continue;
    const auto m = export_jsonl(read_samples(at(src)), config_.schema, at(std::string("export/") + dst), name, hash,
                                Json::object());
    exported[dst] = m.sample_count;
  }
  Json report{{"config_hash", hash}, {"files", exported}, {"schema", config_.schema.to_json()}};
  write_file_atomic(at(artifacts::kExportReport), dump_pretty(report));
  log_event("export", "done", {{"samples", main.sample_count}});
}

void Pipeline::report() {
  const Json gen = read_json(require(artifacts::kGenerateReport, Stage::kGenerate));
  const Json cln = read_json(require(artifacts::kCleanReport, Stage::kClean));
  const Json dec = read_json(require(artifacts::kDecontamReport, Stage::kDecontaminate));

  ReportInputs in;
  in.config_hash = config_.hash();
  in.ledger.seeds = gen.at("seeds").get<std::size_t>();
  in.ledger.accepted = gen.at("accepted").get<std::size_t>();
  in.ledger.rejected = gen.at("rejected").get<std::size_t>();
  in.ledger.cleaned = cln.at("output_count").get<std::size_t>();
  in.ledger.clean_removed = cln.at("removed_exact_dup").get<std::size_t>() +
                            cln.at("removed_seed_dup").get<std::size_t>() +
                            cln.at("removed_trivial_seed").get<std::size_t>();
  in.ledger.kept = dec.at("kept_count").get<std::size_t>();
  in.ledger.decontam_removed = dec.at("removed_count").get<std::size_t>();

  in.stages["generate"] = gen;
  in.stages["clean"] = cln;
  in.stages["decontaminate"] = dec;
  for (auto [name, file] : {std::pair{"sample-seeds", artifacts::kSamplingReport}, {"mine-pairs", artifacts::kPairsReport},
                            {"split", artifacts::kSplitReport}, {"export", artifacts::kExportReport}}) {
    if (std::filesystem::exists(at(file))) in.stages[name] = read_json(at(file));
  }
  if (std::filesystem::exists(at(artifacts::kAnalysisReport))) in.analysis = read_json(at(artifacts::kAnalysisReport));
  for (const char* csv : {"token_lengths.csv", "similarity.csv", "categories.csv"}) {
    const auto p = at(std::string("analysis/") + csv);
    if (std::filesystem::exists(p)) in.csv_files[csv] = read_file(p);
  }
  write_report(at("report"), in);
  log_event("report", "done", in.ledger.to_json());
  if (!in.ledger.reconciles()) throw FatalError("stage ledger does not reconcile: " + in.ledger.to_json().dump());
}

}  // namespace ossforge
