#pragma once

#include <cstddef>
#include <vector>

#include "ossforge/corpus.hpp"
#include "ossforge/sample.hpp"

namespace ossforge {

struct CleanReport {
  std::size_t input_count = 0;
  std::size_t removed_exact_dup = 0;
  std::size_t removed_seed_dup = 0;
  std::size_t removed_trivial_seed = 0;
  std::size_t output_count = 0;
  std::size_t unknown_language_seeds = 0;  // kept, but warned about

  std::size_t removed() const { return removed_exact_dup + removed_seed_dup + removed_trivial_seed; }
  Json to_json() const;
};

struct CleanResult {
  std::vector<InstructionSample> samples;
  std::vector<InstructionSample> removed;
  CleanReport report;
};

/// Drops, in this precedence: samples whose (problem, solution) equals an
/// earlier survivor's; samples whose seed text equals an earlier survivor's;
/// samples with a trivial seed. Input order is preserved.
CleanResult clean(const std::vector<InstructionSample>& samples,
                  const CommentSyntaxTable& comments = CommentSyntaxTable::defaults());

}  // namespace ossforge
