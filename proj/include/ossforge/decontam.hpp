#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ossforge/aho_corasick.hpp"
#include "ossforge/sample.hpp"

namespace ossforge {

enum class EntryKind { kDocstring, kSolution, kPrompt, kQuestion };
std::string_view to_string(EntryKind k);
EntryKind entry_kind_from_string(std::string_view s);

struct BenchmarkEntry {
  std::string entry_id;
  EntryKind kind = EntryKind::kDocstring;
  std::string text;  // whitespace-normalized
};

struct BenchmarkCorpus {
  std::string name;
  std::vector<BenchmarkEntry> entries;
};

/// Whitespace runs collapsed to one space, ends stripped. `origin[i]` is the
/// byte offset in the source of normalized byte i.
struct NormalizedText {
  std::string text;
  std::vector<std::size_t> origin;
};

NormalizedText normalize_with_offsets(std::string_view s);
std::string normalize_whitespace(std::string_view s);

struct BenchmarkLoadOptions {
  std::size_t min_match_len = 20;  // code points, after normalization
  /// Allowed kinds per benchmark name. Names absent from the map accept any kind.
  std::map<std::string, std::set<EntryKind>> allowed_kinds = default_allowed_kinds();

  static std::map<std::string, std::set<EntryKind>> default_allowed_kinds();
};

struct BenchmarkLoadStats {
  std::size_t records = 0;
  std::size_t kept = 0;
  std::size_t dropped_short = 0;
  std::size_t dropped_duplicate = 0;
  std::size_t dropped_kind = 0;
  std::size_t malformed = 0;

  Json to_json() const;
};

struct LoadedBenchmarks {
  std::vector<BenchmarkCorpus> corpora;  // ordered by first appearance in the file
  std::map<std::string, BenchmarkLoadStats> stats;
};

/// Reads a descriptor stream of {benchmark, kind, entry_id, text} records.
/// Throws FatalError when the file cannot be read.
LoadedBenchmarks load_benchmarks(const std::filesystem::path& path, const BenchmarkLoadOptions& options = {});

/// Same filtering as load_benchmarks, applied to in-memory records.
LoadedBenchmarks load_benchmarks(const std::vector<Json>& records, const BenchmarkLoadOptions& options = {});

enum class SampleField { kProblem, kSolution };
std::string_view to_string(SampleField f);

struct ContaminationMatch {
  std::string sample_id;
  std::string benchmark;
  std::string entry_id;
  EntryKind kind = EntryKind::kDocstring;
  SampleField field = SampleField::kProblem;
  std::size_t begin = 0;  // byte offsets into the raw field text
  std::size_t end = 0;

  bool operator==(const ContaminationMatch&) const = default;
  Json to_json() const;
};

/// Canonical match order: field, begin, then benchmark/entry position.
void sort_matches(std::vector<ContaminationMatch>& matches,
                  const std::vector<BenchmarkCorpus>& corpora);

/// Multi-pattern matcher over every entry of the given corpora. One match
/// is reported per (entry, field), at its first occurrence.
class ContaminationMatcher {
 public:
  explicit ContaminationMatcher(std::vector<BenchmarkCorpus> corpora);

  std::vector<ContaminationMatch> find(const InstructionSample& sample) const;

  const std::vector<BenchmarkCorpus>& corpora() const { return corpora_; }
  std::size_t pattern_count() const { return automaton_.pattern_count(); }

 private:
  struct Owner {
    std::uint32_t corpus;
    std::uint32_t entry;
  };

  std::vector<BenchmarkCorpus> corpora_;
  std::vector<std::vector<Owner>> owners_;  // per pattern
  AhoCorasick automaton_;
};

std::vector<ContaminationMatch> find_contamination(const InstructionSample& sample,
                                                   const std::vector<BenchmarkCorpus>& corpora);

struct DecontamReport {
  std::size_t input_count = 0;
  std::size_t kept_count = 0;
  std::size_t removed_count = 0;
  std::map<std::string, std::size_t> removed_per_benchmark;  // a sample counts once per benchmark it hits
  std::map<std::string, std::size_t> matches_per_field;
  std::size_t pattern_count = 0;

  Json to_json() const;
};

struct DecontamResult {
  std::vector<InstructionSample> kept;
  std::vector<InstructionSample> removed;
  std::vector<ContaminationMatch> matches;  // in sample order
  DecontamReport report;
};

DecontamResult decontaminate(const std::vector<InstructionSample>& samples, const ContaminationMatcher& matcher,
                             std::size_t workers = 1);

}  // namespace ossforge
