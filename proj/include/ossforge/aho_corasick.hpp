#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ossforge {

/// Byte-level Aho-Corasick automaton.
///
/// Non-root states keep sorted sparse edge lists, so memory grows with the
/// total pattern length rather than 256x it; the root has a dense table.
/// Immutable after construction and safe to share across threads.
class AhoCorasick {
 public:
  AhoCorasick() = default;
  explicit AhoCorasick(const std::vector<std::string>& patterns);

  std::size_t pattern_count() const { return pattern_lengths_.size(); }
  std::size_t state_count() const { return nodes_.size(); }

  /// Calls fn(pattern_id, begin, end) for every occurrence, [begin, end)
  /// byte offsets, in order of increasing end.
  template <typename Fn>
  void scan(std::string_view text, Fn&& fn) const {
    if (nodes_.empty()) return;
    std::int32_t state = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
      state = step(state, static_cast<unsigned char>(text[i]));
      for (std::int32_t o = nodes_[state].terminal ? state : nodes_[state].dict_link; o >= 0;
           o = nodes_[o].dict_link) {
        for (std::uint32_t p : nodes_[o].patterns) {
          fn(p, i + 1 - pattern_lengths_[p], i + 1);
        }
      }
    }
  }

 private:
  struct Node {
    std::vector<std::pair<unsigned char, std::int32_t>> edges;  // sorted by byte
    std::int32_t fail = 0;
    std::int32_t dict_link = -1;  // nearest proper-suffix state that ends a pattern
    bool terminal = false;
    std::vector<std::uint32_t> patterns;
  };

  std::int32_t child(std::int32_t state, unsigned char c) const;
  std::int32_t step(std::int32_t state, unsigned char c) const;

  std::vector<Node> nodes_;
  std::array<std::int32_t, 256> root_next_{};
  std::vector<std::size_t> pattern_lengths_;
};

}  // namespace ossforge
