#include "ossforge/sample.hpp"

#include <algorithm>
#include <stdexcept>

namespace ossforge {

std::string_view to_string(SampleOrigin o) {
  return o == SampleOrigin::kPairMined ? "pair_mined" : "oss_instruct";
}

SampleOrigin origin_from_string(std::string_view s) {
  if (s == "pair_mined") return SampleOrigin::kPairMined;
  if (s == "oss_instruct") return SampleOrigin::kOssInstruct;
  throw std::invalid_argument("unknown sample origin: " + std::string(s));
}

Json to_json(const InstructionSample& s, std::string_view instruction_key,
             std::string_view response_key) {
  Json flags = Json::array();
  if (s.flags.truncated) flags.push_back("truncated");
  if (s.flags.no_fence) flags.push_back("no_fence");
  if (s.flags.short_solution) flags.push_back("short_solution");
  Json j{{"sample_id", s.sample_id},
         {std::string(instruction_key), s.problem},
         {std::string(response_key), s.solution},
         {"fenced_languages", s.fenced_languages},
         {"raw_response", s.raw_response},
         {"flags", flags},
         {"origin", to_string(s.origin)}};
  j["seed"] = s.seed ? to_json(*s.seed) : Json(nullptr);
  return j;
}

InstructionSample sample_from_json(const Json& j, std::string_view instruction_key,
                                   std::string_view response_key) {
  InstructionSample s;
  s.sample_id = j.at("sample_id").get<std::string>();
  s.problem = j.at(std::string(instruction_key)).get<std::string>();
  s.solution = j.at(std::string(response_key)).get<std::string>();
  s.fenced_languages = j.value("fenced_languages", std::vector<std::string>{});
  s.raw_response = j.value("raw_response", std::string{});
  for (const auto& f : j.value("flags", Json::array())) {
    const auto name = f.get<std::string>();
    if (name == "truncated") s.flags.truncated = true;
    else if (name == "no_fence") s.flags.no_fence = true;
    else if (name == "short_solution") s.flags.short_solution = true;
  }
  s.origin = origin_from_string(j.value("origin", std::string("oss_instruct")));
  if (j.contains("seed") && !j["seed"].is_null()) s.seed = seed_from_json(j["seed"]);
  return s;
}

std::vector<InstructionSample> read_samples(const std::filesystem::path& path,
                                            std::string_view instruction_key,
                                            std::string_view response_key) {
  std::vector<InstructionSample> out;
  for_each_jsonl(
      path,
      [&](const Json& j, std::size_t line) {
        try {
          out.push_back(sample_from_json(j, instruction_key, response_key));
        } catch (const std::exception& e) {
          throw FatalError(path.string() + ":" + std::to_string(line) + ": bad sample record: " + e.what());
        }
      },
      [&](std::size_t line, const std::string& msg) {
        throw FatalError(path.string() + ":" + std::to_string(line) + ": " + msg);
      });
  return out;
}

std::string samples_to_jsonl(const std::vector<InstructionSample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    out += to_json(s).dump();
    out.push_back('\n');
  }
  return out;
}

namespace {

template <typename Fn>
void for_each_fence(std::string_view text, Fn&& fn) {
  for (std::string_view line : split_lines(text)) {
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (line.substr(i).starts_with("```")) fn(trim(line.substr(i + 3)));
  }
}

}  // namespace

std::vector<std::string> fenced_languages(std::string_view problem, std::string_view solution) {
  std::vector<std::string> langs;
  for (std::string_view text : {problem, solution}) {
    bool inside = false;
    for_each_fence(text, [&](std::string_view info) {
      if (!inside) {
        const std::string_view word = info.substr(0, info.find_first_of(" \t{"));
        if (!word.empty()) {
          std::string tag = to_lower_ascii(word);
          if (std::find(langs.begin(), langs.end(), tag) == langs.end()) langs.push_back(std::move(tag));
        }
      }
      inside = !inside;
    });
  }
  return langs;
}

std::size_t fence_line_count(std::string_view text) {
  std::size_t n = 0;
  for_each_fence(text, [&](std::string_view) { ++n; });
  return n;
}

}  // namespace ossforge
