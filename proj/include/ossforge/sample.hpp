#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ossforge/corpus.hpp"
#include "ossforge/util.hpp"

namespace ossforge {

enum class SampleOrigin { kOssInstruct, kPairMined };

std::string_view to_string(SampleOrigin o);
SampleOrigin origin_from_string(std::string_view s);

struct SampleFlags {
  bool truncated = false;
  bool no_fence = false;
  bool short_solution = false;

  bool operator==(const SampleFlags&) const = default;
};

/// One (problem, solution) training record with its provenance.
struct InstructionSample {
  std::string sample_id;
  std::optional<SeedSnippet> seed;  // absent for pair-mined records
  std::string problem;
  std::string solution;
  std::vector<std::string> fenced_languages;
  std::string raw_response;
  SampleFlags flags;
  SampleOrigin origin = SampleOrigin::kOssInstruct;

  bool operator==(const InstructionSample&) const = default;
};

/// Full-fidelity record form. `instruction_key`/`response_key` rename the
/// problem/solution fields.
Json to_json(const InstructionSample& s, std::string_view instruction_key = "problem",
             std::string_view response_key = "solution");
InstructionSample sample_from_json(const Json& j, std::string_view instruction_key = "problem",
                                   std::string_view response_key = "solution");

std::vector<InstructionSample> read_samples(const std::filesystem::path& path,
                                            std::string_view instruction_key = "problem",
                                            std::string_view response_key = "solution");
std::string samples_to_jsonl(const std::vector<InstructionSample>& samples);

/// Info strings of opening ``` fences, lowercased first word, first-seen order.
std::vector<std::string> fenced_languages(std::string_view problem, std::string_view solution);

/// Number of lines that open or close a ``` fence.
std::size_t fence_line_count(std::string_view text);

}  // namespace ossforge
