#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "ossforge/corpus.hpp"
#include "ossforge/decontam.hpp"
#include "ossforge/sample.hpp"

namespace testsupport {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "ossforge") {
    static int counter = 0;
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline const std::vector<std::string>& fixture_languages() {
  static const std::vector<std::string> langs = {"python", "c++", "java", "typescript", "shell",
                                                 "c#",     "rust", "php", "swift"};
  return langs;
}

/// A line of plausible code for the language; `k` makes it unique.
inline std::string code_line(const std::string& lang, int doc, int k) {
  const std::string id = "v" + std::to_string(doc) + "_" + std::to_string(k);
  if (lang == "python") return "    " + id + " = compute(" + std::to_string(k) + ")";
  if (lang == "shell") return "echo \"" + id + "\"";
  if (lang == "php") return "$" + id + " = " + std::to_string(k) + ";";
  if (lang == "rust") return "let " + id + " = " + std::to_string(k) + ";";
  if (lang == "swift") return "let " + id + " = " + std::to_string(k);
  return "int " + id + " = " + std::to_string(k) + ";";
}

/// Deterministic document whose line count cycles through 1..40.
inline ossforge::CodeDocument make_document(const std::string& lang, int n) {
  ossforge::CodeDocument d;
  d.language = lang;
  d.doc_id = lang + "-" + std::to_string(n);
  d.origin = "fixture";
  const int lines = 1 + (n * 7) % 40;
  if (lang == "python") {
    d.content = "def f" + std::to_string(n) + "(x):\n    \"\"\"Compute a fixture value for document " +
                std::to_string(n) + ".\"\"\"\n";
    for (int k = 0; k < lines; ++k) d.content += code_line(lang, n, k) + "\n";
    d.content += "    return x\n";
  } else {
    for (int k = 0; k < lines; ++k) d.content += code_line(lang, n, k) + "\n";
  }
  return d;
}

inline std::vector<ossforge::CodeDocument> make_corpus(const std::map<std::string, int>& per_language) {
  std::vector<ossforge::CodeDocument> docs;
  int max_n = 0;
  for (const auto& [lang, n] : per_language) max_n = std::max(max_n, n);
  // Interleave languages so the stream is not grouped.
  for (int i = 0; i < max_n; ++i) {
    for (const auto& [lang, n] : per_language) {
      if (i < n) docs.push_back(make_document(lang, i));
    }
  }
  return docs;
}

inline void write_corpus(const fs::path& path, const std::vector<ossforge::CodeDocument>& docs) {
  std::string out;
  for (const auto& d : docs) {
    out += ossforge::Json{{"id", d.doc_id}, {"language", d.language}, {"content", d.content}, {"origin", d.origin}}
               .dump() +
           "\n";
  }
  ossforge::write_file_atomic(path, out);
}

inline ossforge::InstructionSample make_sample(const std::string& id, const std::string& problem,
                                               const std::string& solution) {
  ossforge::InstructionSample s;
  s.sample_id = id;
  s.problem = problem;
  s.solution = solution;
  s.fenced_languages = ossforge::fenced_languages(problem, solution);
  return s;
}

/// 50 samples: 38 distinct, 5 exact copies of earlier ones, 4 new pairs
/// reusing an earlier seed, 3 with comment-only seeds. Shuffled with a fixed seed.
inline std::vector<ossforge::InstructionSample> clean_scenario() {
  using ossforge::SeedSnippet;
  std::vector<ossforge::InstructionSample> base;
  for (int i = 0; i < 38; ++i) {
    auto s = make_sample("u" + std::to_string(i), "Problem " + std::to_string(i),
                         "```python\nx = " + std::to_string(i) + "\nprint(x)\n```");
    s.seed = SeedSnippet{"doc" + std::to_string(i), "python", 1, 1, "value_" + std::to_string(i) + " = 1"};
    base.push_back(s);
  }
  std::vector<ossforge::InstructionSample> extra;
  for (int i = 0; i < 5; ++i) {
    auto s = base[static_cast<std::size_t>(i * 7)];
    s.sample_id = "exact" + std::to_string(i);
    s.raw_response = "reformatted " + std::to_string(i);
    extra.push_back(s);
  }
  for (int i = 0; i < 4; ++i) {
    auto s = make_sample("sameseed" + std::to_string(i), "Another problem " + std::to_string(i), "y = 2\nz = 3");
    s.seed = base[static_cast<std::size_t>(3 + i * 5)].seed;
    extra.push_back(s);
  }
  for (int i = 0; i < 3; ++i) {
    auto s = make_sample("trivial" + std::to_string(i), "Trivial problem " + std::to_string(i), "a = 1\nb = 2");
    s.seed = SeedSnippet{"tdoc" + std::to_string(i), i == 1 ? "c++" : "python", 1, 2,
                         i == 1 ? "// header\n" : "# comment " + std::to_string(i) + "\n\n# more"};
    extra.push_back(s);
  }
  // Each extra goes after the sample it duplicates, so first-kept picks the original.
  std::vector<ossforge::InstructionSample> out = base;
  std::mt19937_64 gen(2024);
  for (auto& e : extra) {
    std::size_t min_pos = 0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      if ((out[k].problem == e.problem && out[k].solution == e.solution) ||
          (out[k].seed && e.seed && out[k].seed->text == e.seed->text)) {
        min_pos = k + 1;
      }
    }
    const std::size_t pos = min_pos + gen() % (out.size() - min_pos + 1);
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decontamination oracle: normalize both sides, then plain substring search.
// ---------------------------------------------------------------------------

inline std::string oracle_normalize(const std::string& s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    const bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (ws) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

/// Ids of samples whose normalized problem or solution contains any entry text.
inline std::vector<std::string> oracle_contaminated(const std::vector<ossforge::InstructionSample>& samples,
                                                    const std::vector<ossforge::BenchmarkCorpus>& corpora) {
  std::vector<std::string> out;
  for (const auto& s : samples) {
    const std::string p = oracle_normalize(s.problem);
    const std::string q = oracle_normalize(s.solution);
    bool hit = false;
    for (const auto& c : corpora) {
      for (const auto& e : c.entries) {
        if (p.find(e.text) != std::string::npos || q.find(e.text) != std::string::npos) hit = true;
      }
    }
    if (hit) out.push_back(s.sample_id);
  }
  return out;
}

struct DecontamScenario {
  std::vector<ossforge::InstructionSample> samples;
  std::vector<ossforge::Json> benchmark_records;
  std::vector<std::string> planted_ids;
};

/// Benchmark text with each space replaced by a whitespace variant.
inline std::string reindent(const std::string& text, std::mt19937_64& gen) {
  static const char* variants[] = {" ", "  ", "\n    ", "\t", "\n\t\t", " \n "};
  std::string out;
  for (char c : text) {
    if (c == ' ') {
      out += variants[gen() % 6];
    } else {
      out.push_back(c);
    }
  }
  return out;
}

/// `n` synthetic samples, `planted` of which embed a benchmark entry with
/// altered whitespace. Benchmarks: humaneval and mbpp docstrings/solutions,
/// plus gsm8k questions; some entries are too short to load.
inline DecontamScenario decontam_scenario(int n = 1000, int planted = 25, std::uint64_t seed = 7) {
  DecontamScenario sc;
  std::mt19937_64 gen(seed);
  std::vector<std::string> entry_texts;
  for (int i = 0; i < 164; ++i) {
    const std::string id = "HumanEval/" + std::to_string(i);
    const std::string doc = "Return the number of zebra tokens in list q" + std::to_string(i) + " sorted by key";
    const std::string sol = "for k" + std::to_string(i) + " in range(len(q)): total += q[k" + std::to_string(i) + "]";
    sc.benchmark_records.push_back({{"benchmark", "humaneval"}, {"kind", "docstring"}, {"entry_id", id}, {"text", doc}});
    sc.benchmark_records.push_back({{"benchmark", "humaneval"}, {"kind", "solution"}, {"entry_id", id}, {"text", sol}});
    entry_texts.push_back(doc);
    entry_texts.push_back(sol);
  }
  for (int i = 0; i < 50; ++i) {
    const std::string q = "Janet has " + std::to_string(i) + " quokkas and gives away half of them each morning";
    sc.benchmark_records.push_back(
        {{"benchmark", "gsm8k"}, {"kind", "question"}, {"entry_id", "gsm8k/" + std::to_string(i)}, {"text", q}});
    entry_texts.push_back(q);
  }
  sc.benchmark_records.push_back({{"benchmark", "mbpp"}, {"kind", "solution"}, {"entry_id", "mbpp/1"}, {"text", "return x"}});
  sc.benchmark_records.push_back(
      {{"benchmark", "mbpp"}, {"kind", "prompt"}, {"entry_id", "mbpp/2"}, {"text", "not an allowed kind for mbpp here"}});

  std::vector<int> planted_at;
  for (int i = 0; i < n; ++i) planted_at.push_back(i);
  std::shuffle(planted_at.begin(), planted_at.end(), gen);
  planted_at.resize(static_cast<std::size_t>(planted));
  std::sort(planted_at.begin(), planted_at.end());

  std::size_t p = 0;
  for (int i = 0; i < n; ++i) {
    std::string problem = "Write a function f" + std::to_string(i) + " that merges intervals for case " +
                          std::to_string(i * 31 % 97) + ".\n\nInputs are lists of pairs.";
    std::string solution = "```python\ndef f" + std::to_string(i) + "(xs):\n    xs.sort()\n    return xs\n```";
    if (p < planted_at.size() && planted_at[p] == i) {
      const std::string& text = entry_texts[gen() % entry_texts.size()];
      const std::string variant = reindent(text, gen);
      if (gen() % 2 == 0) {
        problem += "\n\n    " + variant + "\n";
      } else {
        solution = "```python\n" + variant + "\n```";
      }
      sc.planted_ids.push_back("s" + std::to_string(i));
      ++p;
    }
    sc.samples.push_back(make_sample("s" + std::to_string(i), problem, solution));
  }
  return sc;
}

}  // namespace testsupport
