#include <doctest.h>

#include <set>

#include "ossforge/corpus.hpp"
#include "support.hpp"

using namespace ossforge;
using testsupport::TempDir;

namespace {

/// Lines start..start+count-1 (1-based) of `content`, found by counting newlines.
std::string reslice(const std::string& content, int start, int count) {
  std::size_t pos = 0;
  for (int line = 1; line < start; ++line) pos = content.find('\n', pos) + 1;
  std::size_t end = pos;
  for (int i = 0; i < count; ++i) {
    const std::size_t nl = content.find('\n', end);
    if (nl == std::string::npos) {
      end = content.size();
      break;
    }
    end = i + 1 < count ? nl + 1 : nl;
  }
  return content.substr(pos, end - pos);
}

CodeDocument doc_with_lines(int n, const std::string& id = "d") {
  CodeDocument d{id, "python", "", "t"};
  for (int i = 1; i <= n; ++i) d.content += "line " + std::to_string(i) + "\n";
  return d;
}

}  // namespace

TEST_CASE("load_corpus skips empty documents and foreign languages") {
  TempDir dir;
  write_file_atomic(dir / "c.jsonl",
                    R"({"id":"a","language":"python","content":"x = 1\n","origin":"s"}
{"id":"b","language":"python","content":"   \n"}
{"id":"c","language":"Python","content":"y = 2"}
{"id":"d","language":"fortran","content":"PROGRAM X"}
not json
{"id":5,"language":"python","content":"z"}
{"id":"a","language":"python","content":"dup"}
)");
  LoadStats stats;
  const auto docs = load_corpus(dir / "c.jsonl", {"python"}, &stats);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].doc_id == "a");
  CHECK(docs[0].origin == "s");
  CHECK(docs[1].language == "python");
  CHECK(stats.records == 7);
  CHECK(stats.yielded == 2);
  CHECK(stats.skipped_empty == 1);
  CHECK(stats.skipped_language == 1);
  CHECK(stats.skipped_malformed == 2);
  CHECK(stats.skipped_duplicate_id == 1);
  CHECK_THROWS_AS(load_corpus(dir / "nope.jsonl", {"python"}), FatalError);
}

TEST_CASE("three python records with one empty yield two") {
  TempDir dir;
  write_file_atomic(dir / "c.jsonl",
                    "{\"id\":\"1\",\"language\":\"python\",\"content\":\"a\"}\n"
                    "{\"id\":\"2\",\"language\":\"python\",\"content\":\"\"}\n"
                    "{\"id\":\"3\",\"language\":\"python\",\"content\":\"b\"}\n");
  LoadStats stats;
  CHECK(load_corpus(dir / "c.jsonl", {"python"}, &stats).size() == 2);
  CHECK(stats.skipped_empty == 1);
}

TEST_CASE("stratified sampling selects min(quota, available) per language") {
  const auto corpus = testsupport::make_corpus({{"python", 50}, {"rust", 3}, {"php", 20}});
  SamplingQuota q{{{"python", 10}, {"rust", 5}, {"php", 0}, {"go", 2}}, 9};
  const auto r = sample_documents(corpus, q);
  std::map<std::string, std::size_t> got;
  for (const auto& d : r.documents) ++got[d.language];
  CHECK(got["python"] == 10);
  CHECK(got["rust"] == 3);
  CHECK(got.count("php") == 0);
  CHECK(r.report.per_language.at("rust").shortfall == 2);
  CHECK(r.report.per_language.at("go").available == 0);
  CHECK(r.report.per_language.at("go").shortfall == 2);
  CHECK(r.report.total_selected() == 13);

  // Output follows corpus order and has no repeats.
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < corpus.size(); ++i) position[corpus[i].doc_id] = i;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < r.documents.size(); ++i) {
    CHECK(ids.insert(r.documents[i].doc_id).second);
    if (i > 0) CHECK(position[r.documents[i - 1].doc_id] < position[r.documents[i].doc_id]);
  }

  const auto again = sample_documents(corpus, q);
  REQUIRE(again.documents.size() == r.documents.size());
  for (std::size_t i = 0; i < r.documents.size(); ++i) CHECK(again.documents[i].doc_id == r.documents[i].doc_id);

  SamplingQuota other = q;
  other.rng_seed = 10;
  const auto diff = sample_documents(corpus, other);
  bool differs = false;
  for (std::size_t i = 0; i < diff.documents.size(); ++i) differs |= diff.documents[i].doc_id != r.documents[i].doc_id;
  CHECK(differs);
}

TEST_CASE("quota of five over three documents selects all three") {
  const auto corpus = testsupport::make_corpus({{"python", 3}});
  const auto r = sample_documents(corpus, SamplingQuota{{{"python", 5}}, 1});
  CHECK(r.documents.size() == 3);
  CHECK(r.report.per_language.at("python").shortfall == 2);
}

TEST_CASE("reservoir inclusion is uniform across positions") {
  // 20 documents, quota 5: each document should be chosen with probability 1/4.
  const auto corpus = testsupport::make_corpus({{"python", 20}});
  std::vector<int> hits(20, 0);
  constexpr int kTrials = 4000;
  for (int t = 0; t < kTrials; ++t) {
    const auto r = sample_documents(corpus, SamplingQuota{{{"python", 5}}, static_cast<std::uint64_t>(t)});
    for (const auto& d : r.documents) ++hits[std::stoi(d.doc_id.substr(7))];
  }
  const double expected = kTrials * 5.0 / 20.0;
  double chi2 = 0;
  for (int h : hits) chi2 += (h - expected) * (h - expected) / expected;
  // Inclusion indicators are dependent (fixed total), so the statistic is
  // conservative; 36.191 is the 1% point for 19 degrees of freedom.
  CHECK(chi2 < 36.191);
}

TEST_CASE("document_lines ignores one trailing newline") {
  CHECK(document_lines("a\nb\n").size() == 2);
  CHECK(document_lines("a\nb").size() == 2);
  CHECK(document_lines("a\n\n").size() == 2);
  CHECK(document_lines("").empty());
}

TEST_CASE("one-line document yields that line") {
  CodeDocument d{"one", "python", "print(1)\n", ""};
  Rng rng(3);
  const auto s = extract_seed(d, rng);
  CHECK(s.start_line == 1);
  CHECK(s.line_count == 1);
  CHECK(s.text == "print(1)");
}

TEST_CASE("ten-line document: the sampled window is valid and reproducible") {
  const auto d = doc_with_lines(10);
  std::set<std::pair<int, int>> windows;
  for (int count = 1; count <= 10; ++count)
    for (int start = 1; start + count - 1 <= 10; ++start) windows.insert({start, count});
  REQUIRE(windows.size() == 55);

  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng a(seed);
    Rng b(seed);
    const auto s1 = extract_seed(d, a);
    const auto s2 = extract_seed(d, b);
    CHECK(s1 == s2);
    CHECK(windows.contains({s1.start_line, s1.line_count}));
    CHECK(s1.text == reslice(d.content, s1.start_line, s1.line_count));
  }
}

TEST_CASE("line_count is capped at 15 and uniform on [1, 15]") {
  const auto big = doc_with_lines(1000);
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto s = extract_seed(big, rng);
    CHECK(s.line_count >= 1);
    CHECK(s.line_count <= 15);
    CHECK(s.end_line() <= 1000);
  }

  const auto d = doc_with_lines(100);
  std::vector<int> counts(16, 0);
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    Rng r = seed_rng_for(77, CodeDocument{"doc" + std::to_string(i), "python", "", ""});
    ++counts[extract_seed(d, r).line_count];
  }
  const double expected = kDraws / 15.0;
  double chi2 = 0;
  for (int k = 1; k <= 15; ++k) chi2 += (counts[k] - expected) * (counts[k] - expected) / expected;
  CHECK(chi2 < 29.141);
}

TEST_CASE("extraction keeps carriage returns and slices verbatim") {
  CodeDocument d{"crlf", "c++", "int a;\r\nint b;\r\n\r\nint c;", ""};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto s = extract_seed(d, rng);
    CHECK(s.text == reslice(d.content, s.start_line, s.line_count));
  }
  CodeDocument empty{"e", "c++", "", ""};
  Rng rng(1);
  CHECK_THROWS_AS(extract_seed(empty, rng), std::invalid_argument);
}

TEST_CASE("seed json round trip") {
  SeedSnippet s{"d", "rust", 3, 2, "let a = 1;\nlet b = 2;"};
  CHECK(seed_from_json(to_json(s)) == s);
}

TEST_CASE("trivial seeds") {
  auto seed = [](std::string lang, std::string text) { return SeedSnippet{"d", lang, 1, 1, text}; };
  CHECK(is_trivial_seed(seed("python", "# a comment\n\n# another")));
  CHECK_FALSE(is_trivial_seed(seed("python", "x = 1")));
  CHECK(is_trivial_seed(seed("c++", "// licence header\n//")));
  CHECK(is_trivial_seed(seed("shell", "\n\n")));
  CHECK(is_trivial_seed(seed("php", "# a\n  // b")));
  CHECK_FALSE(is_trivial_seed(seed("c++", "/* block only")));
  CHECK_FALSE(is_trivial_seed(seed("rust", "// doc\nfn main() {}")));
  CHECK(classify_seed(seed("cobol", "* comment"), CommentSyntaxTable::defaults()) == SeedClass::kUnknownLanguage);
  CHECK_FALSE(is_trivial_seed(seed("cobol", "")));

  auto table = CommentSyntaxTable::defaults();
  table.set("cobol", {"*"});
  CHECK(is_trivial_seed(seed("cobol", "* comment"), table));
}
