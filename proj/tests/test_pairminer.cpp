#include <doctest.h>

#include "ossforge/pairminer.hpp"
#include "pair_fixture.hpp"
#include "support.hpp"

using namespace ossforge;

namespace {

CodeDocument python_doc(std::string id, std::string content) { return {std::move(id), "python", std::move(content), ""}; }

std::string lines_of(const std::string& content, int start, int end) {
  const auto lines = document_lines(content);
  return join_lines(lines, static_cast<std::size_t>(start - 1), static_cast<std::size_t>(end - start + 1));
}

std::vector<CommentFunctionPair> mine(const CodeDocument& doc, const MineOptions& opt = {}) {
  std::vector<CommentFunctionPair> out;
  MineStats st;
  REQUIRE(mine_document(doc, opt, out, st));
  return out;
}

CommentFunctionPair pair_at(std::string doc, int start, int end) {
  CommentFunctionPair p;
  p.doc_id = std::move(doc);
  p.language = "python";
  p.start_line = start;
  p.end_line = end;
  return p;
}

}  // namespace

TEST_CASE("one documented function gives one pair with its exact span") {
  const std::string src = "def f(x):\n    \"\"\"Double the input value.\"\"\"\n    y = x * 2\n    return y\n";
  const auto pairs = mine(python_doc("d", src));
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].name == "f");
  CHECK(pairs[0].signature == "def f(x):");
  CHECK(pairs[0].comment == "    \"\"\"Double the input value.\"\"\"");
  CHECK(pairs[0].body == "    y = x * 2\n    return y");
  CHECK(pairs[0].start_line == 1);
  CHECK(pairs[0].end_line == 4);
}

TEST_CASE("a function without a docstring gives no pair") {
  CHECK(mine(python_doc("d", "def f(x):\n    y = x\n    return y\n")).empty());
}

TEST_CASE("three documented and two undocumented functions give three exact pairs") {
  const std::string src = testsupport::kPairFixture;
  MineStats st;
  std::vector<CommentFunctionPair> pairs;
  REQUIRE(mine_document(python_doc("m", src), {}, pairs, st));
  REQUIRE(pairs.size() == 3);
  CHECK(st.functions == 5);
  CHECK(st.skipped_no_comment == 2);

  CHECK(pairs[0].name == "area");
  CHECK(pairs[0].signature == "def area(width,\n         height):");
  CHECK(pairs[0].start_line == 9);
  CHECK(pairs[0].end_line == 17);
  CHECK(pairs[1].name == "load");
  CHECK(pairs[1].start_line == 21);
  CHECK(pairs[1].end_line == 24);
  CHECK(pairs[2].name == "fetch");
  CHECK(pairs[2].start_line == 30);
  CHECK(pairs[2].end_line == 37);
  CHECK(pairs[2].body.find("# comment inside the body") != std::string::npos);

  // Re-slicing the document at each span reproduces the pair.
  for (const auto& p : pairs) {
    CHECK(p.reconstruct() == lines_of(src, p.start_line, p.end_line));
    CHECK(!p.comment.empty());
    CHECK(!p.body.empty());
  }
}

TEST_CASE("leading comment blocks are opt-in") {
  const std::string src = "# Sum two numbers and return\n# the result.\n@decorate\ndef add(a, b):\n    c = a + b\n    return c\n";
  CHECK(mine(python_doc("d", src)).empty());
  MineOptions opt;
  opt.allow_leading_comments = true;
  const auto pairs = mine(python_doc("d", src), opt);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].position == CommentPosition::kLeading);
  CHECK(pairs[0].comment == "# Sum two numbers and return\n# the result.");
  CHECK(pairs[0].signature == "@decorate\ndef add(a, b):");
  CHECK(pairs[0].start_line == 1);
  CHECK(pairs[0].reconstruct() == lines_of(src, 1, 6));
}

TEST_CASE("filters and edge cases") {
  MineStats st;
  std::vector<CommentFunctionPair> out;
  // Inline body.
  REQUIRE(mine_document(python_doc("a", "def f(): return 1\n"), {}, out, st));
  CHECK(st.skipped_inline_body == 1);
  // Short docstring.
  REQUIRE(mine_document(python_doc("b", "def f():\n    \"\"\"Hi.\"\"\"\n    a = 1\n    return a\n"), {}, out, st));
  CHECK(st.skipped_short_comment == 1);
  // Body of one line.
  REQUIRE(mine_document(python_doc("c", "def f():\n    \"\"\"Return the constant one.\"\"\"\n    return 1\n"), {}, out,
                        st));
  CHECK(st.skipped_short_body == 1);
  CHECK(out.empty());
  // A def inside a string is not a function.
  REQUIRE(mine_document(python_doc("d", "s = '''\ndef g():\n    \"\"\"not real code here\"\"\"\n    pass\n    pass\n'''\n"),
                        {}, out, st));
  CHECK(out.empty());
  // Unterminated docstring.
  CHECK_FALSE(mine_document(python_doc("e", "def f():\n    \"\"\"never closed\n    x = 1\n"), {}, out, st));
}

TEST_CASE("mine_pairs orders by document and counts unsupported languages") {
  std::vector<CodeDocument> docs = {
      python_doc("z", testsupport::kPairFixture), python_doc("a", testsupport::kPairFixture),
      {"r", "rust", "/// doc\nfn main() {}\n", ""}, python_doc("bad", "def f():\n    \"\"\"open\n")};
  MineStats st;
  const auto pairs = mine_pairs(docs, {"python", "rust"}, {}, &st);
  REQUIRE(pairs.size() == 6);
  CHECK(pairs[0].doc_id == "a");
  CHECK(pairs[3].doc_id == "z");
  CHECK(st.unsupported_language == 1);
  CHECK(st.unparseable == 1);
  CHECK(st.documents == 4);
  CHECK(mine_pairs(docs, {"python"}).size() == 6);
}

TEST_CASE("prioritization puts seed-overlapping pairs first") {
  std::vector<CommentFunctionPair> pairs = {pair_at("a", 1, 5), pair_at("a", 10, 20), pair_at("b", 1, 4),
                                            pair_at("c", 3, 8), pair_at("c", 30, 40)};
  const std::vector<SeedSnippet> seeds = {{"a", "python", 18, 5, ""}, {"c", "python", 40, 1, ""}};
  const auto r = prioritize_pairs(pairs, seeds, 3);
  REQUIRE(r.pairs.size() == 3);
  CHECK(r.pairs[0].doc_id == "a");
  CHECK(r.pairs[0].start_line == 10);
  CHECK(r.pairs[1].doc_id == "c");
  CHECK(r.pairs[1].start_line == 30);
  CHECK(r.pairs[2].doc_id == "a");
  CHECK(r.pairs[2].start_line == 1);
  CHECK(r.overlapping == 2);
  CHECK(r.shortfall == 0);

  const auto all = prioritize_pairs(std::vector<CommentFunctionPair>(pairs.begin(), pairs.begin() + 5), seeds, 10);
  CHECK(all.pairs.size() == 5);
  CHECK(all.shortfall == 5);
}

TEST_CASE("property: overlapping pairs always precede the rest") {
  Rng rng(31);
  for (int t = 0; t < 200; ++t) {
    std::vector<CommentFunctionPair> pairs;
    std::vector<SeedSnippet> seeds;
    const auto n = rng.between(0, 30);
    for (std::uint64_t i = 0; i < n; ++i) {
      const int start = static_cast<int>(rng.between(1, 100));
      pairs.push_back(pair_at("d" + std::to_string(rng.below(4)), start, start + static_cast<int>(rng.below(10))));
    }
    for (int i = 0; i < 5; ++i) {
      seeds.push_back({"d" + std::to_string(rng.below(4)), "python", static_cast<int>(rng.between(1, 100)),
                       static_cast<int>(rng.between(1, 15)), ""});
    }
    const auto target = rng.between(0, 35);
    const auto r = prioritize_pairs(pairs, seeds, target);
    CHECK(r.pairs.size() == std::min<std::size_t>(target, pairs.size()));
    CHECK(r.pairs.size() + r.shortfall == target);
    bool seen_plain = false;
    for (std::size_t i = 0; i < r.pairs.size(); ++i) {
      const auto& p = r.pairs[i];
      bool overlaps = false;
      for (const auto& s : seeds) overlaps |= s.doc_id == p.doc_id && p.start_line <= s.end_line() && s.start_line <= p.end_line;
      CHECK(p.overlaps_seed == overlaps);
      if (!overlaps) seen_plain = true;
      CHECK(!(overlaps && seen_plain));
      if (i > 0 && r.pairs[i - 1].overlaps_seed == p.overlaps_seed) {
        CHECK(std::tie(r.pairs[i - 1].doc_id, r.pairs[i - 1].start_line) <= std::tie(p.doc_id, p.start_line));
      }
    }
  }
}

TEST_CASE("pairs become completion samples one for one") {
  const auto pairs = mine(python_doc("m", testsupport::kPairFixture));
  const auto samples = pairs_to_samples(pairs);
  REQUIRE(samples.size() == pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& s = samples[i];
    CHECK(s.origin == SampleOrigin::kPairMined);
    CHECK_FALSE(s.seed.has_value());
    CHECK(s.solution == pairs[i].body);
    CHECK(s.problem.find(pairs[i].signature) != std::string::npos);
    CHECK(s.problem.find(pairs[i].comment) != std::string::npos);
    CHECK(s.fenced_languages == std::vector<std::string>{"python"});
    // Strip the wrapper: the fenced code plus the solution is the mined region.
    const auto open = s.problem.find("```python\n") + 10;
    const auto close = s.problem.rfind("\n```");
    CHECK(s.problem.substr(open, close - open) + "\n" + s.solution == pairs[i].reconstruct());
  }
  CHECK(samples[0].sample_id == "pair-0000000");
  CHECK(pairs_to_samples({}).empty());
}

TEST_CASE("trailing shallow comments are not part of a function") {
  const std::string src = "def f(x):\n    \"\"\"Return x plus two.\"\"\"\n    y = x + 1\n    return y + 1\n\n# module note\nz = 1\n";
  const auto pairs = mine(python_doc("d", src));
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].end_line == 4);
  CHECK(pairs[0].body == "    y = x + 1\n    return y + 1");
}

TEST_CASE("streaming miner matches the batch form") {
  const auto docs = std::vector<CodeDocument>{python_doc("b", testsupport::kPairFixture),
                                              python_doc("a", "def g():\n    \"\"\"Return a small constant value.\"\"\"\n    a = 1\n    return a\n")};
  PairMiner miner({"python"}, {});
  for (const auto& d : docs) miner.add(d);
  const auto stats = miner.stats();
  const auto streamed = std::move(miner).finish();
  MineStats batch_stats;
  const auto batch = mine_pairs(docs, {"python"}, {}, &batch_stats);
  REQUIRE(streamed.size() == batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) CHECK(streamed[i].to_json() == batch[i].to_json());
  CHECK(stats.to_json() == batch_stats.to_json());
  CHECK(streamed[0].doc_id == "a");
}
