#include "ossforge/aho_corasick.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace ossforge {

AhoCorasick::AhoCorasick(const std::vector<std::string>& patterns) {
  // Trie construction with ordered maps, flattened into sorted vectors after.
  std::vector<std::map<unsigned char, std::int32_t>> trie(1);
  nodes_.emplace_back();
  pattern_lengths_.reserve(patterns.size());
  for (std::uint32_t id = 0; id < patterns.size(); ++id) {
    const std::string& p = patterns[id];
    pattern_lengths_.push_back(p.size());
    if (p.empty()) continue;  // empty patterns never match
    std::int32_t v = 0;
    for (unsigned char c : p) {
      auto [it, inserted] = trie[v].try_emplace(c, static_cast<std::int32_t>(nodes_.size()));
      if (inserted) {
        trie.emplace_back();
        nodes_.emplace_back();
      }
      v = it->second;
    }
    nodes_[v].terminal = true;
    nodes_[v].patterns.push_back(id);
  }
  for (std::size_t v = 0; v < trie.size(); ++v) {
    nodes_[v].edges.assign(trie[v].begin(), trie[v].end());
  }

  root_next_.fill(0);
  for (auto [c, child_state] : nodes_[0].edges) root_next_[c] = child_state;

  std::deque<std::int32_t> queue;
  for (auto [c, s] : nodes_[0].edges) {
    nodes_[s].fail = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const std::int32_t v = queue.front();
    queue.pop_front();
    for (auto [c, u] : nodes_[v].edges) {
      nodes_[u].fail = step(nodes_[v].fail, c);
      const Node& f = nodes_[nodes_[u].fail];
      nodes_[u].dict_link = f.terminal ? nodes_[u].fail : f.dict_link;
      queue.push_back(u);
    }
  }
}

std::int32_t AhoCorasick::child(std::int32_t state, unsigned char c) const {
  const auto& edges = nodes_[state].edges;
  auto it = std::lower_bound(edges.begin(), edges.end(), c,
                             [](const auto& e, unsigned char key) { return e.first < key; });
  return (it != edges.end() && it->first == c) ? it->second : -1;
}

std::int32_t AhoCorasick::step(std::int32_t state, unsigned char c) const {
  while (state != 0) {
    const std::int32_t next = child(state, c);
    if (next >= 0) return next;
    state = nodes_[state].fail;
  }
  return root_next_[c];
}

}  // namespace ossforge
