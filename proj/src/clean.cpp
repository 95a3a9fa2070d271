#include "ossforge/clean.hpp"

#include <string>
#include <unordered_set>

namespace ossforge {

Json CleanReport::to_json() const {
  return Json{{"input_count", input_count},
              {"removed_exact_dup", removed_exact_dup},
              {"removed_seed_dup", removed_seed_dup},
              {"removed_trivial_seed", removed_trivial_seed},
              {"output_count", output_count},
              {"unknown_language_seeds", unknown_language_seeds}};
}

namespace {

// Length-prefixed so ("ab","c") and ("a","bc") differ.
std::string pair_key(const InstructionSample& s) {
  return std::to_string(s.problem.size()) + ":" + s.problem + s.solution;
}

}  // namespace

CleanResult clean(const std::vector<InstructionSample>& samples, const CommentSyntaxTable& comments) {
  CleanResult out;
  out.report.input_count = samples.size();
  std::unordered_set<std::string> seen_pairs;
  std::unordered_set<std::string> seen_seeds;

  for (const auto& s : samples) {
    std::string key = pair_key(s);
    if (seen_pairs.contains(key)) {
      ++out.report.removed_exact_dup;
      out.removed.push_back(s);
      continue;
    }
    if (s.seed) {
      if (seen_seeds.contains(s.seed->text)) {
        ++out.report.removed_seed_dup;
        out.removed.push_back(s);
        continue;
      }
      const SeedClass cls = classify_seed(*s.seed, comments);
      if (cls == SeedClass::kTrivial) {
        ++out.report.removed_trivial_seed;
        out.removed.push_back(s);
        continue;
      }
      if (cls == SeedClass::kUnknownLanguage) ++out.report.unknown_language_seeds;
      seen_seeds.insert(s.seed->text);
    }
    seen_pairs.insert(std::move(key));
    out.samples.push_back(s);
  }
  out.report.output_count = out.samples.size();
  if (out.report.unknown_language_seeds > 0) {
    log_event("clean", "unknown_comment_syntax", {{"count", out.report.unknown_language_seeds}});
  }
  return out;
}

}  // namespace ossforge
