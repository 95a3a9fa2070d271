#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ossforge/corpus.hpp"
#include "ossforge/sample.hpp"
#include "ossforge/util.hpp"

namespace ossforge {

// ---------------------------------------------------------------------------
// Prompting
// ---------------------------------------------------------------------------

struct SectionMarkers {
  std::string problem = "[Problem Description]";
  std::string solution = "[Solution]";
};

struct PromptTemplate {
  std::string text;
  std::string placeholder = "{seed}";
  SectionMarkers markers;

  /// Seed-inspired problem/solution prompt with a fenced {seed} slot.
  static PromptTemplate standard();

  /// Throws FatalError unless the text carries the placeholder and both markers.
  void validate() const;
};

/// Substitutes seed.text for every placeholder in the template. The seed text
/// itself is never rescanned.
std::string build_prompt(const SeedSnippet& seed, const PromptTemplate& tmpl);

// ---------------------------------------------------------------------------
// Requests and responses
// ---------------------------------------------------------------------------

struct Decoding {
  bool greedy = true;
  double temperature = 0.0;
  double top_p = 1.0;

  static Decoding sampled(double temperature, double top_p) { return {false, temperature, top_p}; }
  Json to_json() const;
};

inline constexpr int kDefaultMaxNewTokens = 2048;

struct GenerationRequest {
  std::size_t index = 0;  // position in the seed set
  SeedSnippet seed;
  std::string prompt;
  Decoding decoding;
  int max_new_tokens = kDefaultMaxNewTokens;
};

enum class FinishReason { kComplete, kTruncated, kError };
std::string_view to_string(FinishReason r);

struct TeacherResponse {
  std::size_t request_index = 0;
  std::string prompt_hash;
  std::optional<std::string> raw_text;  // present iff finish_reason != kError
  FinishReason finish_reason = FinishReason::kError;
  std::string backend_id;
  int retry_count = 0;
  std::string error;

  Json to_json() const;
};

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

/// Outcome of one backend attempt, before retry handling.
struct BackendReply {
  enum class Status { kOk, kRetryable, kPermanent, kAuth };
  Status status = Status::kOk;
  int http_status = 0;
  std::string text;
  bool truncated = false;
  std::string message;
};

class TeacherBackend {
 public:
  virtual ~TeacherBackend() = default;
  virtual std::string id() const = 0;
  /// Must be safe to call from several threads at once.
  virtual BackendReply complete(const GenerationRequest& request) = 0;
};

class AuthError : public FatalError {
 public:
  using FatalError::FatalError;
};

/// Deterministic stand-in keyed by SHA-256 of the prompt.
///
/// Records the number of concurrent complete() calls so callers can check
/// the in-flight bound.
class MockBackend : public TeacherBackend {
 public:
  enum class Fallback { kError, kSynthesize };

  struct Fixture {
    std::string raw_text;
    bool truncated = false;
  };

  MockBackend() = default;
  explicit MockBackend(std::map<std::string, Fixture> fixtures, Fallback fallback = Fallback::kError);

  /// Fixture file: one record per line, {"prompt_hash", "raw_text", "finish_reason"?}.
  static std::map<std::string, Fixture> load_fixtures(const std::filesystem::path& path);

  /// Canned response used by the synthesize fallback.
  static std::string synthesize(std::string_view prompt_hash, const SeedSnippet& seed);

  void set_latency(std::chrono::microseconds latency) { latency_ = latency; }
  void add_fixture(const std::string& prompt_hash, Fixture f) { fixtures_[prompt_hash] = std::move(f); }

  std::string id() const override { return "mock"; }
  BackendReply complete(const GenerationRequest& request) override;

  std::size_t high_water_mark() const { return high_water_.load(); }
  std::size_t calls() const { return calls_.load(); }

 private:
  std::map<std::string, Fixture> fixtures_;
  Fallback fallback_ = Fallback::kError;
  std::chrono::microseconds latency_{0};
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> high_water_{0};
  std::atomic<std::size_t> calls_{0};
};

struct HttpBackendConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-3.5-turbo-1106";
  std::string token_env = "TEACHER_API_TOKEN";
  int timeout_seconds = 120;
};

/// Chat-completion client speaking the common JSON wire format:
/// POST {model, messages:[{role:"user", content}], max_tokens, temperature[, top_p]}
/// and reading choices[0].message.content / finish_reason.
class HttpChatBackend : public TeacherBackend {
 public:
  /// Throws AuthError when the token variable is unset.
  explicit HttpChatBackend(HttpBackendConfig config);

  std::string id() const override { return "http:" + config_.model; }
  BackendReply complete(const GenerationRequest& request) override;

  static Json request_body(const GenerationRequest& request, const std::string& model);
  static BackendReply interpret(int http_status, const std::string& body);

 private:
  HttpBackendConfig config_;
  std::string token_;
};

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

struct RetryPolicy {
  int max_retries = 5;
  std::chrono::milliseconds initial_delay{1000};
  double multiplier = 2.0;
  std::chrono::milliseconds max_delay{30000};
  std::function<void(std::chrono::milliseconds)> sleeper;  // defaults to this_thread::sleep_for

  std::chrono::milliseconds delay_for(int retry) const;
  void sleep(std::chrono::milliseconds d) const;
};

/// One request with retries. Auth failures throw AuthError; exhausted or
/// permanent failures come back as finish_reason=error.
TeacherResponse generate(const GenerationRequest& request, TeacherBackend& backend,
                         const RetryPolicy& policy);

/// At most `concurrency` requests in flight; results are in request order.
std::vector<TeacherResponse> generate_batch(const std::vector<GenerationRequest>& requests,
                                            TeacherBackend& backend, const RetryPolicy& policy,
                                            std::size_t concurrency);

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

enum class RejectReason { kNone, kBackendError, kNoProblemSection, kNoSolutionSection, kEmptyProblem, kEmptySolution };
std::string_view to_string(RejectReason r);

struct ParsedResponse {
  RejectReason reason = RejectReason::kNone;
  std::string problem;
  std::string solution;
  std::size_t problem_offset = 0;   // byte offset of problem within raw
  std::size_t solution_offset = 0;  // byte offset of solution within raw

  bool accepted() const { return reason == RejectReason::kNone; }
};

/// Problem = text between the first problem marker and the first solution
/// marker after it; solution = the rest. Both trimmed.
ParsedResponse parse_response(std::string_view raw, const SectionMarkers& markers);

struct SampleBuildOptions {
  std::size_t short_solution_lines = 2;  // fewer non-blank lines than this sets short_solution
};

InstructionSample make_sample(const GenerationRequest& request, const TeacherResponse& response,
                              const ParsedResponse& parsed, const SampleBuildOptions& options = {});

std::string sample_id_for(std::size_t seed_index);

}  // namespace ossforge
