#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ossforge/util.hpp"

namespace ossforge {

inline constexpr int kMaxSeedLines = 15;

struct CodeDocument {
  std::string doc_id;
  std::string language;  // lowercase canonical tag, e.g. "python", "c++"
  std::string content;
  std::string origin;
};

struct SeedSnippet {
  std::string doc_id;
  std::string language;
  int start_line = 1;  // 1-based
  int line_count = 1;  // [1, 15]
  std::string text;

  int end_line() const { return start_line + line_count - 1; }
  bool operator==(const SeedSnippet&) const = default;
};

Json to_json(const SeedSnippet& s);
SeedSnippet seed_from_json(const Json& j);

struct SamplingQuota {
  std::map<std::string, std::size_t> per_language;
  std::uint64_t rng_seed = 0;

  /// Throws FatalError when no language has a positive count.
  void validate() const;
  std::size_t total() const;
};

/// Counters from one ingestion pass.
struct LoadStats {
  std::size_t records = 0;
  std::size_t yielded = 0;
  std::size_t skipped_empty = 0;
  std::size_t skipped_language = 0;
  std::size_t skipped_malformed = 0;
  std::size_t skipped_duplicate_id = 0;

  Json to_json() const;
};

/// Streams documents from a newline-delimited record file with fields
/// {id, language, content, origin}. Only documents whose language is in
/// `languages` reach `sink` (an empty set admits every language).
/// Throws FatalError if the file cannot be opened.
LoadStats load_corpus(const std::filesystem::path& source, const std::set<std::string>& languages,
                      const std::function<void(CodeDocument)>& sink);

std::vector<CodeDocument> load_corpus(const std::filesystem::path& source,
                                      const std::set<std::string>& languages,
                                      LoadStats* stats = nullptr);

struct LanguageSampling {
  std::size_t requested = 0;
  std::size_t available = 0;
  std::size_t selected = 0;
  std::size_t shortfall = 0;
};

struct SamplingReport {
  std::map<std::string, LanguageSampling> per_language;
  std::uint64_t rng_seed = 0;

  std::size_t total_selected() const;
  Json to_json() const;
};

/// Per-language reservoir sampler over a document stream.
///
/// Every document of a quota language is offered in corpus order; each
/// language keeps a uniform without-replacement sample of size
/// min(quota, available). The result lists selected documents in corpus order.
class StratifiedSampler {
 public:
  explicit StratifiedSampler(SamplingQuota quota);

  void offer(CodeDocument doc);

  struct Result {
    std::vector<CodeDocument> documents;
    SamplingReport report;
  };
  Result finish() &&;

 private:
  struct Reservoir {
    std::size_t capacity = 0;
    std::size_t seen = 0;
    std::vector<std::pair<std::size_t, CodeDocument>> slots;  // (corpus position, doc)
  };

  SamplingQuota quota_;
  Rng rng_;
  std::map<std::string, Reservoir> reservoirs_;
  std::size_t position_ = 0;
};

StratifiedSampler::Result sample_documents(const std::vector<CodeDocument>& corpus,
                                           const SamplingQuota& quota);

/// Lines of a document as seen by seed extraction: split on '\n', with a
/// single trailing newline not opening an extra empty line.
std::vector<std::string_view> document_lines(std::string_view content);

/// Draws line_count uniformly from [1, min(15, lines)], then a uniform valid
/// start. Throws std::invalid_argument on a document without lines.
SeedSnippet extract_seed(const CodeDocument& doc, Rng& rng);

/// Extraction stream for one document, derived from the run seed and doc id.
Rng seed_rng_for(std::uint64_t rng_seed, const CodeDocument& doc);

/// Line-comment prefixes per language.
class CommentSyntaxTable {
 public:
  static CommentSyntaxTable defaults();

  void set(const std::string& language, std::vector<std::string> prefixes);
  bool knows(const std::string& language) const;
  const std::vector<std::string>& prefixes(const std::string& language) const;

 private:
  std::map<std::string, std::vector<std::string>> table_;
};

enum class SeedClass { kTrivial, kNonTrivial, kUnknownLanguage };

SeedClass classify_seed(const SeedSnippet& snippet, const CommentSyntaxTable& table);

/// True iff every line is blank or a line comment. Unknown languages count
/// as non-trivial.
bool is_trivial_seed(const SeedSnippet& snippet,
                     const CommentSyntaxTable& table = CommentSyntaxTable::defaults());

}  // namespace ossforge
