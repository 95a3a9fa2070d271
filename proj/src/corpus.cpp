#include "ossforge/corpus.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>
#include <utility>

namespace ossforge {

Json to_json(const SeedSnippet& s) {
  return Json{{"doc_id", s.doc_id},         {"language", s.language}, {"start_line", s.start_line},
              {"line_count", s.line_count}, {"text", s.text}};
}

SeedSnippet seed_from_json(const Json& j) {
  SeedSnippet s;
  s.doc_id = j.at("doc_id").get<std::string>();
  s.language = j.at("language").get<std::string>();
  s.start_line = j.at("start_line").get<int>();
  s.line_count = j.at("line_count").get<int>();
  s.text = j.at("text").get<std::string>();
  return s;
}

void SamplingQuota::validate() const {
  if (total() == 0) throw FatalError("sampling quota: at least one language needs a positive count");
}

std::size_t SamplingQuota::total() const {
  std::size_t n = 0;
  for (const auto& [lang, count] : per_language) n += count;
  return n;
}

Json LoadStats::to_json() const {
  return Json{{"records", records},
              {"yielded", yielded},
              {"skipped_empty", skipped_empty},
              {"skipped_language", skipped_language},
              {"skipped_malformed", skipped_malformed},
              {"skipped_duplicate_id", skipped_duplicate_id}};
}

LoadStats load_corpus(const std::filesystem::path& source, const std::set<std::string>& languages,
                      const std::function<void(CodeDocument)>& sink) {
  LoadStats stats;
  std::unordered_set<std::string> seen_ids;
  for_each_jsonl(
      source,
      [&](const Json& rec, std::size_t) {
        ++stats.records;
        if (!rec.is_object() || !rec.contains("id") || !rec.contains("language") ||
            !rec.contains("content") || !rec["id"].is_string() || !rec["language"].is_string() ||
            !rec["content"].is_string() ||
            (rec.contains("origin") && !rec["origin"].is_string())) {
          ++stats.skipped_malformed;
          return;
        }
        CodeDocument doc;
        doc.language = to_lower_ascii(rec["language"].get<std::string>());
        if (!languages.empty() && !languages.contains(doc.language)) {
          ++stats.skipped_language;
          return;
        }
        doc.content = rec["content"].get<std::string>();
        if (trim(doc.content).empty()) {
          ++stats.skipped_empty;
          return;
        }
        doc.doc_id = rec["id"].get<std::string>();
        if (!seen_ids.insert(doc.doc_id).second) {
          ++stats.skipped_duplicate_id;
          return;
        }
        doc.origin = rec.value("origin", std::string{});
        ++stats.yielded;
        sink(std::move(doc));
      },
      [&](std::size_t, const std::string&) {
        ++stats.records;
        ++stats.skipped_malformed;
      });
  if (stats.skipped_malformed > 0) {
    log_event("corpus", "malformed_records", {{"count", stats.skipped_malformed}});
  }
  return stats;
}

std::vector<CodeDocument> load_corpus(const std::filesystem::path& source,
                                      const std::set<std::string>& languages, LoadStats* stats) {
  std::vector<CodeDocument> docs;
  LoadStats s = load_corpus(source, languages, [&](CodeDocument d) { docs.push_back(std::move(d)); });
  if (stats) *stats = s;
  return docs;
}

std::size_t SamplingReport::total_selected() const {
  std::size_t n = 0;
  for (const auto& [lang, s] : per_language) n += s.selected;
  return n;
}

Json SamplingReport::to_json() const {
  Json langs = Json::object();
  std::size_t requested = 0;
  std::size_t shortfall = 0;
  for (const auto& [lang, s] : per_language) {
    langs[lang] = {{"requested", s.requested},
                   {"available", s.available},
                   {"selected", s.selected},
                   {"shortfall", s.shortfall}};
    requested += s.requested;
    shortfall += s.shortfall;
  }
  return Json{{"rng_seed", rng_seed},
              {"languages", langs},
              {"requested", requested},
              {"selected", total_selected()},
              {"shortfall", shortfall}};
}

StratifiedSampler::StratifiedSampler(SamplingQuota quota)
    : quota_(std::move(quota)), rng_(quota_.rng_seed) {
  for (const auto& [lang, count] : quota_.per_language) {
    reservoirs_[lang].capacity = count;
  }
}

void StratifiedSampler::offer(CodeDocument doc) {
  const std::size_t position = position_++;
  auto it = reservoirs_.find(doc.language);
  if (it == reservoirs_.end()) return;
  Reservoir& r = it->second;
  ++r.seen;
  if (r.capacity == 0) return;
  if (r.slots.size() < r.capacity) {
    r.slots.emplace_back(position, std::move(doc));
    return;
  }
  const std::uint64_t j = rng_.below(r.seen);
  if (j < r.capacity) r.slots[j] = {position, std::move(doc)};
}

StratifiedSampler::Result StratifiedSampler::finish() && {
  Result result;
  result.report.rng_seed = quota_.rng_seed;
  std::vector<std::pair<std::size_t, CodeDocument>> all;
  for (auto& [lang, r] : reservoirs_) {
    LanguageSampling s;
    s.requested = r.capacity;
    s.available = r.seen;
    s.selected = r.slots.size();
    s.shortfall = s.requested - s.selected;
    result.report.per_language[lang] = s;
    if (s.shortfall > 0) {
      log_event("corpus", "quota_shortfall",
                {{"language", lang}, {"requested", s.requested}, {"selected", s.selected}});
    }
    for (auto& slot : r.slots) all.push_back(std::move(slot));
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  result.documents.reserve(all.size());
  for (auto& [pos, doc] : all) result.documents.push_back(std::move(doc));
  return result;
}

StratifiedSampler::Result sample_documents(const std::vector<CodeDocument>& corpus,
                                           const SamplingQuota& quota) {
  StratifiedSampler sampler(quota);
  for (const auto& doc : corpus) sampler.offer(doc);
  return std::move(sampler).finish();
}

std::vector<std::string_view> document_lines(std::string_view content) {
  if (content.empty()) return {};
  auto lines = split_lines(content);
  if (content.back() == '\n') lines.pop_back();
  return lines;
}

SeedSnippet extract_seed(const CodeDocument& doc, Rng& rng) {
  const auto lines = document_lines(doc.content);
  if (lines.empty()) throw std::invalid_argument("extract_seed: document " + doc.doc_id + " has no lines");
  const std::uint64_t total = lines.size();
  const std::uint64_t max_len = std::min<std::uint64_t>(kMaxSeedLines, total);
  const std::uint64_t count = rng.between(1, max_len);
  const std::uint64_t start = rng.between(1, total - count + 1);

  SeedSnippet s;
  s.doc_id = doc.doc_id;
  s.language = doc.language;
  s.start_line = static_cast<int>(start);
  s.line_count = static_cast<int>(count);
  s.text = join_lines(lines, start - 1, count);
  return s;
}

Rng seed_rng_for(std::uint64_t rng_seed, const CodeDocument& doc) {
  return Rng(derive_seed(rng_seed, doc.doc_id));
}

CommentSyntaxTable CommentSyntaxTable::defaults() {
  CommentSyntaxTable t;
  t.set("python", {"#"});
  t.set("shell", {"#"});
  for (const char* lang : {"c", "c++", "java", "typescript", "javascript", "c#", "rust", "swift", "go",
                           "kotlin"}) {
    t.set(lang, {"//"});
  }
  t.set("php", {"//", "#"});
  return t;
}

void CommentSyntaxTable::set(const std::string& language, std::vector<std::string> prefixes) {
  table_[language] = std::move(prefixes);
}

bool CommentSyntaxTable::knows(const std::string& language) const { return table_.contains(language); }

const std::vector<std::string>& CommentSyntaxTable::prefixes(const std::string& language) const {
  return table_.at(language);
}

SeedClass classify_seed(const SeedSnippet& snippet, const CommentSyntaxTable& table) {
  if (!table.knows(snippet.language)) return SeedClass::kUnknownLanguage;
  const auto& prefixes = table.prefixes(snippet.language);
  for (std::string_view line : split_lines(snippet.text)) {
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    const bool comment = std::any_of(prefixes.begin(), prefixes.end(),
                                     [&](const std::string& p) { return body.starts_with(p); });
    if (!comment) return SeedClass::kNonTrivial;
  }
  return SeedClass::kTrivial;
}

bool is_trivial_seed(const SeedSnippet& snippet, const CommentSyntaxTable& table) {
  return classify_seed(snippet, table) == SeedClass::kTrivial;
}

}  // namespace ossforge
