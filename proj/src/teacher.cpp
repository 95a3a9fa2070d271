#include "ossforge/teacher.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace ossforge {

PromptTemplate PromptTemplate::standard() {
  PromptTemplate t;
  t.text =
      "You are exceptionally skilled at crafting high-quality programming problems and offering "
      "precise solutions.\n"
      "\n"
      "Please gain inspiration from the following random code snippet to create a high-quality "
      "programming problem. Present your output in two distinct sections: [Problem Description] and "
      "[Solution].\n"
      "\n"
      "Code snippet for inspiration:\n"
      "```\n"
      "{seed}\n"
      "```\n"
      "\n"
      "Guidelines for each section:\n"
      "\n"
      "1. [Problem Description]: This should be **completely self-contained**, providing all the "
      "contextual information one needs to understand and solve the problem. Assume common "
      "programming knowledge, but ensure that any specific context, variables, or code snippets "
      "pertinent to this problem are explicitly included.\n"
      "2. [Solution]: Offer a comprehensive, **correct** solution that accurately addresses the "
      "[Problem Description] you provided.\n";
  return t;
}

void PromptTemplate::validate() const {
  if (placeholder.empty()) throw FatalError("prompt template: placeholder must be non-empty");
  if (text.find(placeholder) == std::string::npos)
    throw FatalError("prompt template: missing seed placeholder " + placeholder);
  if (markers.problem.empty() || text.find(markers.problem) == std::string::npos)
    throw FatalError("prompt template: missing problem marker " + markers.problem);
  if (markers.solution.empty() || text.find(markers.solution) == std::string::npos)
    throw FatalError("prompt template: missing solution marker " + markers.solution);
}

std::string build_prompt(const SeedSnippet& seed, const PromptTemplate& tmpl) {
  tmpl.validate();
  std::string out;
  out.reserve(tmpl.text.size() + seed.text.size());
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = tmpl.text.find(tmpl.placeholder, pos);
    if (hit == std::string::npos) break;
    out.append(tmpl.text, pos, hit - pos);
    out.append(seed.text);
    pos = hit + tmpl.placeholder.size();
  }
  out.append(tmpl.text, pos, std::string::npos);
  return out;
}

Json Decoding::to_json() const {
  if (greedy) return Json{{"mode", "greedy"}};
  return Json{{"mode", "sampled"}, {"temperature", temperature}, {"top_p", top_p}};
}

std::string_view to_string(FinishReason r) {
  switch (r) {
    case FinishReason::kComplete: return "complete";
    case FinishReason::kTruncated: return "truncated";
    case FinishReason::kError: return "error";
  }
  return "error";
}

Json TeacherResponse::to_json() const {
  Json j{{"index", request_index},
         {"prompt_hash", prompt_hash},
         {"finish_reason", to_string(finish_reason)},
         {"backend_id", backend_id},
         {"retry_count", retry_count}};
  j["raw_text"] = raw_text ? Json(*raw_text) : Json(nullptr);
  if (!error.empty()) j["error"] = error;
  return j;
}

// ---------------------------------------------------------------------------

MockBackend::MockBackend(std::map<std::string, Fixture> fixtures, Fallback fallback)
    : fixtures_(std::move(fixtures)), fallback_(fallback) {}

std::map<std::string, MockBackend::Fixture> MockBackend::load_fixtures(const std::filesystem::path& path) {
  std::map<std::string, Fixture> out;
  for_each_jsonl(
      path,
      [&](const Json& j, std::size_t line) {
        if (!j.contains("prompt_hash") || !j.contains("raw_text"))
          throw FatalError(path.string() + ":" + std::to_string(line) + ": fixture needs prompt_hash and raw_text");
        Fixture f;
        f.raw_text = j["raw_text"].get<std::string>();
        f.truncated = j.value("finish_reason", std::string("complete")) == "truncated";
        out[j["prompt_hash"].get<std::string>()] = std::move(f);
      },
      [&](std::size_t line, const std::string& msg) {
        throw FatalError(path.string() + ":" + std::to_string(line) + ": " + msg);
      });
  return out;
}

std::string MockBackend::synthesize(std::string_view prompt_hash, const SeedSnippet& seed) {
  const std::string tag(prompt_hash.substr(0, 12));
  const bool python = seed.language == "python";
  const std::string fence = python ? "```python" : "```" + seed.language;
  std::string out;
  out += "[Problem Description]\n";
  out += "Implement a function `task_" + tag + "` that processes the records described by a " +
         seed.language + " module and returns a summary count.\n\n";
  out += "[Solution]\n";
  out += fence + "\n";
  if (python) {
    out += "def task_" + tag + "(records):\n    return len(list(records))\n";
  } else {
    out += "int task_" + tag + "(const Records& records) {\n    return records.size();\n}\n";
  }
  out += "```\n";
  return out;
}

BackendReply MockBackend::complete(const GenerationRequest& request) {
  ++calls_;
  const std::size_t now = ++in_flight_;
  std::size_t prev = high_water_.load();
  while (now > prev && !high_water_.compare_exchange_weak(prev, now)) {
  }
  if (latency_.count() > 0) std::this_thread::sleep_for(latency_);

  BackendReply reply;
  const std::string hash = sha256_hex(request.prompt);
  if (auto it = fixtures_.find(hash); it != fixtures_.end()) {
    reply.status = BackendReply::Status::kOk;
    reply.http_status = 200;
    reply.text = it->second.raw_text;
    reply.truncated = it->second.truncated;
  } else if (fallback_ == Fallback::kSynthesize) {
    reply.status = BackendReply::Status::kOk;
    reply.http_status = 200;
    reply.text = synthesize(hash, request.seed);
  } else {
    reply.status = BackendReply::Status::kPermanent;
    reply.http_status = 404;
    reply.message = "no fixture for prompt " + hash;
  }
  --in_flight_;
  return reply;
}

// ---------------------------------------------------------------------------

std::chrono::milliseconds RetryPolicy::delay_for(int retry) const {
  const double raw = static_cast<double>(initial_delay.count()) * std::pow(multiplier, retry);
  const double capped = std::min(raw, static_cast<double>(max_delay.count()));
  return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
}

void RetryPolicy::sleep(std::chrono::milliseconds d) const {
  if (sleeper) {
    sleeper(d);
  } else if (d.count() > 0) {
    std::this_thread::sleep_for(d);
  }
}

TeacherResponse generate(const GenerationRequest& request, TeacherBackend& backend,
                         const RetryPolicy& policy) {
  TeacherResponse resp;
  resp.request_index = request.index;
  resp.prompt_hash = sha256_hex(request.prompt);
  resp.backend_id = backend.id();

  for (int attempt = 0;; ++attempt) {
    BackendReply reply = backend.complete(request);
    switch (reply.status) {
      case BackendReply::Status::kOk:
        resp.retry_count = attempt;
        resp.raw_text = std::move(reply.text);
        resp.finish_reason = reply.truncated ? FinishReason::kTruncated : FinishReason::kComplete;
        if (attempt > 0) {
          log_event("generate", "retried", {{"index", request.index}, {"retry_count", attempt}});
        }
        return resp;
      case BackendReply::Status::kAuth:
        throw AuthError("teacher backend rejected credentials (HTTP " + std::to_string(reply.http_status) +
                        "): " + reply.message);
      case BackendReply::Status::kPermanent:
        resp.retry_count = attempt;
        resp.error = reply.message.empty() ? "HTTP " + std::to_string(reply.http_status) : reply.message;
        return resp;
      case BackendReply::Status::kRetryable:
        if (attempt >= policy.max_retries) {
          resp.retry_count = attempt;
          resp.error = "retries exhausted: " + reply.message;
          log_event("generate", "retries_exhausted", {{"index", request.index}, {"message", reply.message}});
          return resp;
        }
        policy.sleep(policy.delay_for(attempt));
        break;
    }
  }
}

std::vector<TeacherResponse> generate_batch(const std::vector<GenerationRequest>& requests,
                                            TeacherBackend& backend, const RetryPolicy& policy,
                                            std::size_t concurrency) {
  std::vector<TeacherResponse> out(requests.size());
  // Each worker holds at most one request, so the pool size is the in-flight bound.
  parallel_for(requests.size(), std::max<std::size_t>(1, concurrency),
               [&](std::size_t i) { out[i] = generate(requests[i], backend, policy); });
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::kNone: return "none";
    case RejectReason::kBackendError: return "backend_error";
    case RejectReason::kNoProblemSection: return "no_problem_section";
    case RejectReason::kNoSolutionSection: return "no_solution_section";
    case RejectReason::kEmptyProblem: return "empty_problem";
    case RejectReason::kEmptySolution: return "empty_solution";
  }
  return "none";
}

namespace {

// Trimmed [begin, end) of raw as (offset, text).
std::pair<std::size_t, std::string> trimmed_section(std::string_view raw, std::size_t begin, std::size_t end) {
  while (begin < end && is_ascii_space(raw[begin])) ++begin;
  while (end > begin && is_ascii_space(raw[end - 1])) --end;
  return {begin, std::string(raw.substr(begin, end - begin))};
}

std::size_t nonblank_lines(std::string_view text) {
  std::size_t n = 0;
  for (auto line : split_lines(text)) {
    if (!trim(line).empty()) ++n;
  }
  return n;
}

}  // namespace

ParsedResponse parse_response(std::string_view raw, const SectionMarkers& markers) {
  ParsedResponse out;
  const std::size_t p = raw.find(markers.problem);
  if (p == std::string_view::npos) {
    out.reason = RejectReason::kNoProblemSection;
    return out;
  }
  const std::size_t problem_begin = p + markers.problem.size();
  const std::size_t s = raw.find(markers.solution, problem_begin);
  if (s == std::string_view::npos) {
    out.reason = RejectReason::kNoSolutionSection;
    return out;
  }
  std::tie(out.problem_offset, out.problem) = trimmed_section(raw, problem_begin, s);
  std::tie(out.solution_offset, out.solution) = trimmed_section(raw, s + markers.solution.size(), raw.size());
  if (out.problem.empty()) {
    out.reason = RejectReason::kEmptyProblem;
  } else if (out.solution.empty()) {
    out.reason = RejectReason::kEmptySolution;
  }
  return out;
}

std::string sample_id_for(std::size_t seed_index) {
  std::string digits = std::to_string(seed_index);
  if (digits.size() < 7) digits.insert(0, 7 - digits.size(), '0');
  return "oss-" + digits;
}

InstructionSample make_sample(const GenerationRequest& request, const TeacherResponse& response,
                              const ParsedResponse& parsed, const SampleBuildOptions& options) {
  InstructionSample s;
  s.sample_id = sample_id_for(request.index);
  s.seed = request.seed;
  s.problem = parsed.problem;
  s.solution = parsed.solution;
  s.raw_response = response.raw_text.value_or("");
  s.fenced_languages = fenced_languages(s.problem, s.solution);
  s.flags.truncated = response.finish_reason == FinishReason::kTruncated;
  const std::size_t fences = fence_line_count(s.solution);
  s.flags.no_fence = fences == 0 || fences % 2 == 1;
  s.flags.short_solution = nonblank_lines(s.solution) < options.short_solution_lines;
  s.origin = SampleOrigin::kOssInstruct;
  return s;
}

}  // namespace ossforge
