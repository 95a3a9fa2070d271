#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ossforge/corpus.hpp"
#include "ossforge/sample.hpp"

namespace ossforge {

enum class CommentPosition { kDocstring, kLeading };

struct CommentFunctionPair {
  std::string doc_id;
  std::string language;
  std::string name;
  std::string signature;  // def header lines (plus decorators for leading comments)
  std::string comment;    // docstring literal lines or '#' block, verbatim
  std::string body;
  int start_line = 0;  // 1-based, inclusive
  int end_line = 0;
  CommentPosition position = CommentPosition::kDocstring;
  bool overlaps_seed = false;

  /// The source region in document order.
  std::string reconstruct() const;
  Json to_json() const;
};

struct MineOptions {
  std::size_t min_comment_tokens = 3;
  std::size_t min_body_lines = 2;  // non-blank
  bool allow_leading_comments = false;
};

struct MineStats {
  std::size_t documents = 0;
  std::size_t unsupported_language = 0;
  std::size_t unparseable = 0;
  std::size_t functions = 0;
  std::size_t pairs = 0;
  std::size_t skipped_no_comment = 0;
  std::size_t skipped_short_comment = 0;
  std::size_t skipped_short_body = 0;
  std::size_t skipped_inline_body = 0;

  Json to_json() const;
};

/// Extracts documented function definitions (top-level and nested) from
/// indentation-delimited source. Pairs come back in document-line order.
/// Returns false, leaving `out` untouched, for an unparseable document.
bool mine_document(const CodeDocument& doc, const MineOptions& options, std::vector<CommentFunctionPair>& out,
                   MineStats& stats);

/// Streaming form of mine_pairs: documents are added one at a time.
class PairMiner {
 public:
  PairMiner(std::set<std::string> languages, MineOptions options);

  void add(const CodeDocument& doc);
  /// Pairs ordered by (doc_id, start_line).
  std::vector<CommentFunctionPair> finish() &&;
  const MineStats& stats() const { return stats_; }

 private:
  std::set<std::string> languages_;
  MineOptions options_;
  MineStats stats_;
  std::vector<std::pair<std::string, std::vector<CommentFunctionPair>>> per_doc_;
};

/// Mines every supported document; results are ordered by (doc_id, start_line).
std::vector<CommentFunctionPair> mine_pairs(const std::vector<CodeDocument>& corpus,
                                            const std::set<std::string>& languages,
                                            const MineOptions& options = {}, MineStats* stats = nullptr);

struct PrioritizedPairs {
  std::vector<CommentFunctionPair> pairs;
  std::size_t overlapping = 0;  // in the output
  std::size_t shortfall = 0;
};

/// Seed-overlapping pairs first, then the rest, each group in
/// (doc_id, start_line) order; truncated to `target`.
PrioritizedPairs prioritize_pairs(std::vector<CommentFunctionPair> pairs, const std::vector<SeedSnippet>& seeds,
                                  std::size_t target);

/// Completion-task framing: the problem holds the signature and comment in a
/// fenced block, the solution is the body.
std::vector<InstructionSample> pairs_to_samples(const std::vector<CommentFunctionPair>& pairs);

}  // namespace ossforge
