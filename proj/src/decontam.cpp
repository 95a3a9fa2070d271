#include "ossforge/decontam.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace ossforge {

std::string_view to_string(EntryKind k) {
  switch (k) {
    case EntryKind::kDocstring: return "docstring";
    case EntryKind::kSolution: return "solution";
    case EntryKind::kPrompt: return "prompt";
    case EntryKind::kQuestion: return "question";
  }
  return "docstring";
}

EntryKind entry_kind_from_string(std::string_view s) {
  if (s == "docstring") return EntryKind::kDocstring;
  if (s == "solution") return EntryKind::kSolution;
  if (s == "prompt") return EntryKind::kPrompt;
  if (s == "question") return EntryKind::kQuestion;
  throw std::invalid_argument("unknown benchmark entry kind: " + std::string(s));
}

std::string_view to_string(SampleField f) { return f == SampleField::kProblem ? "problem" : "solution"; }

NormalizedText normalize_with_offsets(std::string_view s) {
  NormalizedText out;
  out.text.reserve(s.size());
  out.origin.reserve(s.size());
  bool pending_space = false;
  std::size_t space_at = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (is_ascii_space(s[i])) {
      if (!pending_space) space_at = i;
      pending_space = true;
      continue;
    }
    if (pending_space && !out.text.empty()) {
      out.text.push_back(' ');
      out.origin.push_back(space_at);
    }
    pending_space = false;
    out.text.push_back(s[i]);
    out.origin.push_back(i);
  }
  return out;
}

std::string normalize_whitespace(std::string_view s) { return normalize_with_offsets(s).text; }

std::map<std::string, std::set<EntryKind>> BenchmarkLoadOptions::default_allowed_kinds() {
  return {{"humaneval", {EntryKind::kDocstring, EntryKind::kSolution}},
          {"mbpp", {EntryKind::kDocstring, EntryKind::kSolution}},
          {"apps", {EntryKind::kDocstring}},
          {"ds1000", {EntryKind::kPrompt}},
          {"gsm8k", {EntryKind::kQuestion}}};
}

Json BenchmarkLoadStats::to_json() const {
  return Json{{"records", records},           {"kept", kept},
              {"dropped_short", dropped_short}, {"dropped_duplicate", dropped_duplicate},
              {"dropped_kind", dropped_kind},   {"malformed", malformed}};
}

namespace {

class BenchmarkBuilder {
 public:
  explicit BenchmarkBuilder(const BenchmarkLoadOptions& options) : options_(options) {}

  void add(const Json& rec) {
    if (!rec.is_object() || !rec.contains("benchmark") || !rec["benchmark"].is_string()) {
      ++orphan_malformed_;
      return;
    }
    const std::string name = rec["benchmark"].get<std::string>();
    BenchmarkLoadStats& st = out_.stats[name];
    ++st.records;
    BenchmarkCorpus& corpus = corpus_for(name);

    EntryKind kind;
    std::string text;
    std::string entry_id;
    try {
      kind = entry_kind_from_string(rec.at("kind").get<std::string>());
      text = rec.at("text").get<std::string>();
      entry_id = rec.contains("entry_id") ? rec["entry_id"].get<std::string>()
                                          : name + "/" + std::to_string(st.records - 1);
    } catch (const std::exception&) {
      ++st.malformed;
      return;
    }
    if (auto it = options_.allowed_kinds.find(name);
        it != options_.allowed_kinds.end() && !it->second.contains(kind)) {
      ++st.dropped_kind;
      return;
    }
    std::string normalized = normalize_whitespace(text);
    if (normalized.empty() || utf8_length(normalized) < options_.min_match_len) {
      ++st.dropped_short;
      return;
    }
    if (!seen_[name].insert(normalized).second) {
      ++st.dropped_duplicate;
      return;
    }
    ++st.kept;
    corpus.entries.push_back({std::move(entry_id), kind, std::move(normalized)});
  }

  LoadedBenchmarks finish() && {
    for (const auto& c : out_.corpora) {
      if (c.entries.empty()) log_event("decontam", "empty_benchmark", {{"benchmark", c.name}});
    }
    if (orphan_malformed_ > 0) log_event("decontam", "malformed_records", {{"count", orphan_malformed_}});
    return std::move(out_);
  }

 private:
  BenchmarkCorpus& corpus_for(const std::string& name) {
    auto [it, inserted] = index_.try_emplace(name, out_.corpora.size());
    if (inserted) out_.corpora.push_back({name, {}});
    return out_.corpora[it->second];
  }

  const BenchmarkLoadOptions& options_;
  LoadedBenchmarks out_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::unordered_set<std::string>> seen_;
  std::size_t orphan_malformed_ = 0;
};

}  // namespace

LoadedBenchmarks load_benchmarks(const std::filesystem::path& path, const BenchmarkLoadOptions& options) {
  BenchmarkBuilder builder(options);
  std::size_t bad_lines = 0;
  for_each_jsonl(path, [&](const Json& j, std::size_t) { builder.add(j); },
                 [&](std::size_t, const std::string&) { ++bad_lines; });
  if (bad_lines > 0) log_event("decontam", "unparseable_descriptor_lines", {{"count", bad_lines}});
  return std::move(builder).finish();
}

LoadedBenchmarks load_benchmarks(const std::vector<Json>& records, const BenchmarkLoadOptions& options) {
  BenchmarkBuilder builder(options);
  for (const auto& r : records) builder.add(r);
  return std::move(builder).finish();
}

Json ContaminationMatch::to_json() const {
  return Json{{"sample_id", sample_id}, {"benchmark", benchmark}, {"entry_id", entry_id},
              {"kind", to_string(kind)},  {"field", to_string(field)}, {"begin", begin},
              {"end", end}};
}

void sort_matches(std::vector<ContaminationMatch>& matches, const std::vector<BenchmarkCorpus>& corpora) {
  std::map<std::pair<std::string, std::string>, std::size_t> rank;
  std::size_t r = 0;
  for (const auto& c : corpora) {
    for (const auto& e : c.entries) rank.emplace(std::pair{c.name, e.entry_id}, r++);
  }
  auto key = [&](const ContaminationMatch& m) {
    return std::tuple{m.field, m.begin, rank.at({m.benchmark, m.entry_id})};
  };
  std::stable_sort(matches.begin(), matches.end(),
                   [&](const auto& a, const auto& b) { return key(a) < key(b); });
}

ContaminationMatcher::ContaminationMatcher(std::vector<BenchmarkCorpus> corpora) : corpora_(std::move(corpora)) {
  std::vector<std::string> patterns;
  std::unordered_map<std::string, std::size_t> pattern_index;
  for (std::uint32_t c = 0; c < corpora_.size(); ++c) {
    for (std::uint32_t e = 0; e < corpora_[c].entries.size(); ++e) {
      const std::string& text = corpora_[c].entries[e].text;
      auto [it, inserted] = pattern_index.try_emplace(text, patterns.size());
      if (inserted) {
        patterns.push_back(text);
        owners_.emplace_back();
      }
      owners_[it->second].push_back({c, e});
    }
  }
  automaton_ = AhoCorasick(patterns);
}

std::vector<ContaminationMatch> ContaminationMatcher::find(const InstructionSample& sample) const {
  std::vector<ContaminationMatch> out;
  for (SampleField field : {SampleField::kProblem, SampleField::kSolution}) {
    const std::string& raw = field == SampleField::kProblem ? sample.problem : sample.solution;
    const NormalizedText norm = normalize_with_offsets(raw);
    std::unordered_set<std::uint32_t> seen;
    automaton_.scan(norm.text, [&](std::uint32_t pattern, std::size_t begin, std::size_t end) {
      if (!seen.insert(pattern).second) return;
      for (const Owner& o : owners_[pattern]) {
        const BenchmarkCorpus& corpus = corpora_[o.corpus];
        const BenchmarkEntry& entry = corpus.entries[o.entry];
        out.push_back({sample.sample_id, corpus.name, entry.entry_id, entry.kind, field,
                       norm.origin[begin], norm.origin[end - 1] + 1});
      }
    });
  }
  sort_matches(out, corpora_);
  return out;
}

std::vector<ContaminationMatch> find_contamination(const InstructionSample& sample,
                                                   const std::vector<BenchmarkCorpus>& corpora) {
  return ContaminationMatcher(corpora).find(sample);
}

Json DecontamReport::to_json() const {
  return Json{{"input_count", input_count},
              {"kept_count", kept_count},
              {"removed_count", removed_count},
              {"removed_per_benchmark", removed_per_benchmark},
              {"matches_per_field", matches_per_field},
              {"pattern_count", pattern_count}};
}

DecontamResult decontaminate(const std::vector<InstructionSample>& samples, const ContaminationMatcher& matcher,
                             std::size_t workers) {
  std::vector<std::vector<ContaminationMatch>> per_sample(samples.size());
  parallel_for(samples.size(), workers, [&](std::size_t i) { per_sample[i] = matcher.find(samples[i]); });

  DecontamResult out;
  out.report.input_count = samples.size();
  out.report.pattern_count = matcher.pattern_count();
  for (const auto& c : matcher.corpora()) out.report.removed_per_benchmark[c.name] = 0;
  out.report.matches_per_field = {{"problem", 0}, {"solution", 0}};
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto& matches = per_sample[i];
    if (matches.empty()) {
      out.kept.push_back(samples[i]);
      continue;
    }
    out.removed.push_back(samples[i]);
    std::set<std::string> hit;
    for (auto& m : matches) {
      hit.insert(m.benchmark);
      ++out.report.matches_per_field[std::string(to_string(m.field))];
      out.matches.push_back(std::move(m));
    }
    for (const auto& b : hit) ++out.report.removed_per_benchmark[b];
  }
  out.report.kept_count = out.kept.size();
  out.report.removed_count = out.removed.size();
  return out;
}

}  // namespace ossforge
