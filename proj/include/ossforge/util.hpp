#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ossforge {

using Json = nlohmann::json;

/// Raised for unrecoverable input/config problems. Stage runners turn this
/// into a nonzero exit.
class FatalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic randomness
// ---------------------------------------------------------------------------

/// Seeded generator with a portable output sequence.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the standard.
/// Bounded draws use rejection sampling on top of it instead of
/// std::uniform_int_distribution, whose algorithm is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform integer in [lo, hi], inclusive.
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
    return lo + below(hi - lo + 1);
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view data);

/// Independent stream for a keyed sub-task, e.g. one document.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view key) {
  return splitmix64(root ^ fnv1a64(key));
}

// ---------------------------------------------------------------------------
// Hashing
// ---------------------------------------------------------------------------

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

// ---------------------------------------------------------------------------
// Strings
// ---------------------------------------------------------------------------

bool is_ascii_space(char c);
std::string_view trim(std::string_view s);

/// Split on '\n' only. "a\n" yields {"a", ""}; a '\r' stays in its line.
std::vector<std::string_view> split_lines(std::string_view text);

std::string join_lines(const std::vector<std::string_view>& lines, std::size_t first,
                       std::size_t count);

std::size_t utf8_length(std::string_view s);

std::string to_lower_ascii(std::string_view s);

std::string format_double(double v, int precision = 17);

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over the target, so readers
/// never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Calls fn(record, line_number) for each non-blank line. Lines that fail to
/// parse are reported through on_error (if set) and skipped.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t)>& fn,
                    const std::function<void(std::size_t, const std::string&)>& on_error = {});

std::string to_jsonl(const std::vector<Json>& records);

/// Canonical serialization: sorted keys, two-space indent, trailing newline.
std::string dump_pretty(const Json& j);

// ---------------------------------------------------------------------------
// Logging
// ---------------------------------------------------------------------------

/// One JSON object per line on stderr: {"stage":..,"event":..,<fields>}.
void log_event(std::string_view stage, std::string_view event, const Json& fields = Json::object());

void set_log_enabled(bool enabled);

// ---------------------------------------------------------------------------
// Parallelism
// ---------------------------------------------------------------------------

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index is
/// processed exactly once; callers write results into pre-sized slots.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace ossforge
