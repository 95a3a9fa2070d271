#include "ossforge/pairminer.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <tuple>

namespace ossforge {

std::string CommentFunctionPair::reconstruct() const {
  if (position == CommentPosition::kLeading) return comment + "\n" + signature + "\n" + body;
  return signature + "\n" + comment + "\n" + body;
}

Json CommentFunctionPair::to_json() const {
  return Json{{"doc_id", doc_id},
              {"language", language},
              {"name", name},
              {"signature", signature},
              {"comment", comment},
              {"body", body},
              {"start_line", start_line},
              {"end_line", end_line},
              {"comment_position", position == CommentPosition::kLeading ? "leading" : "docstring"},
              {"overlaps_seed", overlaps_seed}};
}

Json MineStats::to_json() const {
  return Json{{"documents", documents},
              {"unsupported_language", unsupported_language},
              {"unparseable", unparseable},
              {"functions", functions},
              {"pairs", pairs},
              {"skipped_no_comment", skipped_no_comment},
              {"skipped_short_comment", skipped_short_comment},
              {"skipped_short_body", skipped_short_body},
              {"skipped_inline_body", skipped_inline_body}};
}

namespace {

// Lexical state carried from one line to the next.
struct LexState {
  std::string triple;  // open triple-quote delimiter, or empty
  int depth = 0;       // open brackets
  bool backslash = false;

  bool continuation() const { return !triple.empty() || depth > 0 || backslash; }
};

// Advances the state over one line. Returns false if a single-quoted string
// runs off the end of the line without a backslash continuation.
void lex_line(std::string_view line, LexState& st) {
  st.backslash = false;
  std::size_t i = 0;
  while (i < line.size()) {
    if (!st.triple.empty()) {
      if (line[i] == '\\') {
        i += 2;
      } else if (line.substr(i).starts_with(st.triple)) {
        i += 3;
        st.triple.clear();
      } else {
        ++i;
      }
      continue;
    }
    const char c = line[i];
    if (c == '#') return;
    if (c == '"' || c == '\'') {
      const std::string_view rest = line.substr(i);
      if (rest.starts_with(R"(""")") || rest.starts_with("'''")) {
        st.triple = std::string(rest.substr(0, 3));
        i += 3;
        continue;
      }
      ++i;
      while (i < line.size() && line[i] != c) i += line[i] == '\\' ? 2 : 1;
      ++i;
      continue;
    }
    if (c == '(' || c == '[' || c == '{') ++st.depth;
    if ((c == ')' || c == ']' || c == '}') && st.depth > 0) --st.depth;
    if (c == '\\' && i + 1 == line.size()) st.backslash = true;
    ++i;
  }
}

std::size_t indent_of(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  return i;
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

bool is_comment_line(std::string_view line) { return trim(line).starts_with('#'); }

std::optional<std::string> def_name(std::string_view line) {
  std::string_view s = line.substr(indent_of(line));
  if (s.starts_with("async ")) s = trim(s.substr(6));
  if (!s.starts_with("def ")) return std::nullopt;
  s = trim(s.substr(4));
  std::size_t n = 0;
  while (n < s.size() && (std::isalnum(static_cast<unsigned char>(s[n])) || s[n] == '_' ||
                          static_cast<unsigned char>(s[n]) >= 0x80)) {
    ++n;
  }
  if (n == 0) return std::nullopt;
  return std::string(s.substr(0, n));
}

// Position of the header-terminating ':' (bracket depth 0, outside strings
// and comments), scanning from line `first`. nullopt at end of input.
std::optional<std::pair<std::size_t, std::size_t>> find_header_colon(const std::vector<std::string_view>& lines,
                                                                     std::size_t first) {
  int depth = 0;
  for (std::size_t ln = first; ln < lines.size(); ++ln) {
    const std::string_view line = lines[ln];
    std::size_t i = 0;
    while (i < line.size()) {
      const char c = line[i];
      if (c == '#') break;
      if (c == '"' || c == '\'') {
        ++i;
        while (i < line.size() && line[i] != c) i += line[i] == '\\' ? 2 : 1;
        ++i;
        continue;
      }
      if (c == '(' || c == '[' || c == '{') ++depth;
      if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
      if (c == ':' && depth == 0) return std::pair{ln, i};
      ++i;
    }
  }
  return std::nullopt;
}

// If `line` opens a docstring literal, returns its delimiter (""" ''' " ').
std::optional<std::string> docstring_opener(std::string_view line, std::size_t* literal_at) {
  std::string_view s = line.substr(indent_of(line));
  std::size_t skip = 0;
  while (skip < 2 && skip < s.size() && std::string_view("rRuUbB").find(s[skip]) != std::string_view::npos) ++skip;
  const std::string_view rest = s.substr(skip);
  if (literal_at) *literal_at = indent_of(line) + skip;
  if (rest.starts_with(R"(""")")) return std::string(R"(""")");
  if (rest.starts_with("'''")) return std::string("'''");
  if (rest.starts_with('"')) return std::string("\"");
  if (rest.starts_with('\'')) return std::string("'");
  return std::nullopt;
}

// Line index where a docstring opened at (line, col) closes, or nullopt.
std::optional<std::size_t> docstring_end(const std::vector<std::string_view>& lines, std::size_t line,
                                         std::size_t col, const std::string& delim) {
  std::size_t i = col + delim.size();
  for (std::size_t ln = line; ln < lines.size(); ++ln, i = 0) {
    const std::string_view text = lines[ln];
    while (i < text.size()) {
      if (text[i] == '\\') {
        i += 2;
      } else if (text.substr(i).starts_with(delim)) {
        return ln;
      } else {
        ++i;
      }
    }
    if (delim.size() == 1) return std::nullopt;  // plain string literal must close on its line
  }
  return std::nullopt;
}

std::size_t comment_tokens(std::string_view comment) {
  std::size_t n = 0;
  bool in_tok = false;
  for (char c : comment) {
    const bool word = !is_ascii_space(c) && c != '"' && c != '\'' && c != '#';
    if (word && !in_tok) ++n;
    in_tok = word;
  }
  return n;
}

}  // namespace

bool mine_document(const CodeDocument& doc, const MineOptions& options, std::vector<CommentFunctionPair>& out,
                   MineStats& stats) {
  const auto lines = document_lines(doc.content);
  std::vector<bool> continuation(lines.size());
  LexState st;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    continuation[i] = st.continuation();
    lex_line(lines[i], st);
  }
  if (!st.triple.empty()) return false;

  std::vector<CommentFunctionPair> found;
  for (std::size_t d = 0; d < lines.size(); ++d) {
    if (continuation[d]) continue;
    const auto name = def_name(lines[d]);
    if (!name) continue;
    ++stats.functions;
    const std::size_t def_indent = indent_of(lines[d]);

    const auto colon = find_header_colon(lines, d);
    if (!colon) return false;
    const auto [header_end, colon_col] = *colon;
    const std::string_view after = trim(lines[header_end].substr(colon_col + 1));
    if (!after.empty() && !after.starts_with('#')) {
      ++stats.skipped_inline_body;
      continue;
    }

    std::size_t first_stmt = header_end + 1;
    while (first_stmt < lines.size() && is_blank(lines[first_stmt])) ++first_stmt;
    if (first_stmt >= lines.size() || indent_of(lines[first_stmt]) <= def_indent) {
      ++stats.skipped_inline_body;
      continue;
    }

    CommentFunctionPair pair;
    pair.doc_id = doc.doc_id;
    pair.language = doc.language;
    pair.name = *name;
    std::size_t region_start = d;
    std::size_t body_start = 0;

    std::size_t literal_col = 0;
    if (auto delim = docstring_opener(lines[first_stmt], &literal_col)) {
      const auto close = docstring_end(lines, first_stmt, literal_col, *delim);
      if (!close) return false;
      pair.position = CommentPosition::kDocstring;
      pair.signature = join_lines(lines, d, header_end - d + 1);
      pair.comment = join_lines(lines, header_end + 1, *close - header_end);
      body_start = *close + 1;
    } else if (options.allow_leading_comments) {
      std::size_t top = d;
      while (top > 0 && trim(lines[top - 1]).starts_with('@') && indent_of(lines[top - 1]) == def_indent) --top;
      std::size_t c = top;
      while (c > 0 && is_comment_line(lines[c - 1]) && indent_of(lines[c - 1]) == def_indent &&
             !continuation[c - 1]) {
        --c;
      }
      if (c == top) {
        ++stats.skipped_no_comment;
        continue;
      }
      pair.position = CommentPosition::kLeading;
      pair.comment = join_lines(lines, c, top - c);
      pair.signature = join_lines(lines, top, header_end - top + 1);
      region_start = c;
      body_start = header_end + 1;
    } else {
      ++stats.skipped_no_comment;
      continue;
    }

    // Body runs until a non-continuation code line at or left of the def.
    std::size_t end = body_start;  // one past the last body line
    std::size_t last_code = body_start;
    for (std::size_t ln = body_start; ln < lines.size(); ++ln) {
      const std::string_view line = lines[ln];
      if (is_blank(line)) continue;
      const bool shallow = indent_of(line) <= def_indent;
      if (!continuation[ln] && shallow && !is_comment_line(line)) break;
      if (!(shallow && is_comment_line(line))) last_code = ln + 1;
      end = ln + 1;
    }
    end = std::min(end, last_code);
    std::size_t body_lines = 0;
    for (std::size_t ln = body_start; ln < end; ++ln) {
      if (!is_blank(lines[ln])) ++body_lines;
    }
    if (body_lines < options.min_body_lines) {
      ++stats.skipped_short_body;
      continue;
    }
    if (comment_tokens(pair.comment) < options.min_comment_tokens) {
      ++stats.skipped_short_comment;
      continue;
    }
    pair.body = join_lines(lines, body_start, end - body_start);
    pair.start_line = static_cast<int>(region_start + 1);
    pair.end_line = static_cast<int>(end);
    found.push_back(std::move(pair));
  }
  stats.pairs += found.size();
  for (auto& p : found) out.push_back(std::move(p));
  return true;
}

PairMiner::PairMiner(std::set<std::string> languages, MineOptions options)
    : languages_(std::move(languages)), options_(options) {}

void PairMiner::add(const CodeDocument& doc) {
  if (!languages_.empty() && !languages_.contains(doc.language)) return;
  ++stats_.documents;
  if (doc.language != "python") {
    ++stats_.unsupported_language;
    return;
  }
  std::vector<CommentFunctionPair> pairs;
  if (!mine_document(doc, options_, pairs, stats_)) {
    ++stats_.unparseable;
    return;
  }
  if (!pairs.empty()) per_doc_.emplace_back(doc.doc_id, std::move(pairs));
}

std::vector<CommentFunctionPair> PairMiner::finish() && {
  std::stable_sort(per_doc_.begin(), per_doc_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<CommentFunctionPair> out;
  for (auto& [id, pairs] : per_doc_) {
    for (auto& p : pairs) out.push_back(std::move(p));
  }
  return out;
}

std::vector<CommentFunctionPair> mine_pairs(const std::vector<CodeDocument>& corpus,
                                            const std::set<std::string>& languages, const MineOptions& options,
                                            MineStats* stats) {
  PairMiner miner(languages, options);
  for (const auto& doc : corpus) miner.add(doc);
  if (stats) *stats = miner.stats();
  return std::move(miner).finish();
}

PrioritizedPairs prioritize_pairs(std::vector<CommentFunctionPair> pairs, const std::vector<SeedSnippet>& seeds,
                                  std::size_t target) {
  std::map<std::string, std::vector<std::pair<int, int>>> seed_spans;
  for (const auto& s : seeds) seed_spans[s.doc_id].emplace_back(s.start_line, s.end_line());
  for (auto& p : pairs) {
    p.overlaps_seed = false;
    auto it = seed_spans.find(p.doc_id);
    if (it == seed_spans.end()) continue;
    for (auto [lo, hi] : it->second) {
      if (p.start_line <= hi && lo <= p.end_line) {
        p.overlaps_seed = true;
        break;
      }
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    return std::forward_as_tuple(!a.overlaps_seed, a.doc_id, a.start_line) <
           std::forward_as_tuple(!b.overlaps_seed, b.doc_id, b.start_line);
  });
  PrioritizedPairs out;
  if (pairs.size() < target) {
    out.shortfall = target - pairs.size();
  } else {
    pairs.resize(target);
  }
  out.overlapping = static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(),
                                                           [](const auto& p) { return p.overlaps_seed; }));
  out.pairs = std::move(pairs);
  return out;
}

std::vector<InstructionSample> pairs_to_samples(const std::vector<CommentFunctionPair>& pairs) {
  std::vector<InstructionSample> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    const std::string code = p.position == CommentPosition::kLeading ? p.comment + "\n" + p.signature
                                                                       : p.signature + "\n" + p.comment;
    InstructionSample s;
    std::string digits = std::to_string(i);
    if (digits.size() < 7) digits.insert(0, 7 - digits.size(), '0');
    s.sample_id = "pair-" + digits;
    s.problem = "Complete the body of the following " + p.language +
                " function based on its signature and documentation.\n\n```" + p.language + "\n" + code +
                "\n```";
    s.solution = p.body;
    s.fenced_languages = fenced_languages(s.problem, s.solution);
    s.origin = SampleOrigin::kPairMined;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ossforge
