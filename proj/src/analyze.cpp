#include "ossforge/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace ossforge {

double SparseVector::norm() const {
  double s = 0.0;
  for (double x : value) s += x * x;
  return std::sqrt(s);
}

SparseVector l2_normalized(SparseVector v) {
  const double n = v.norm();
  if (n == 0.0) return {};
  for (double& x : v.value) x /= n;
  return v;
}

double cosine(const SparseVector& u, const SparseVector& v) {
  double dot = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < u.index.size() && j < v.index.size()) {
    if (u.index[i] < v.index[j]) {
      ++i;
    } else if (u.index[i] > v.index[j]) {
      ++j;
    } else {
      dot += u.value[i] * v.value[j];
      ++i;
      ++j;
    }
  }
  return dot;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    const bool alnum = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    if (alnum) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

TfIdfModel TfIdfModel::fit(const std::vector<std::string>& docs) {
  if (docs.empty()) throw FatalError("tf-idf: no documents to fit");
  std::map<std::string, std::size_t, std::less<>> df;
  for (const auto& d : docs) {
    auto tokens = tokenize(d);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (auto& t : tokens) ++df[std::move(t)];
  }
  if (df.empty()) throw FatalError("tf-idf: every document is empty after tokenization");

  TfIdfModel m;
  m.doc_count_ = docs.size();
  const double n = static_cast<double>(docs.size());
  for (auto& [term, count] : df) {
    const auto idx = static_cast<std::uint32_t>(m.terms_.size());
    m.vocabulary_.emplace(term, idx);
    m.terms_.push_back(term);
    m.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return m;
}

std::int64_t TfIdfModel::index_of(std::string_view term) const {
  auto it = vocabulary_.find(term);
  return it == vocabulary_.end() ? std::int64_t{-1} : static_cast<std::int64_t>(it->second);
}

double TfIdfModel::idf(std::string_view term) const {
  const auto i = index_of(term);
  return i < 0 ? 0.0 : idf_[static_cast<std::size_t>(i)];
}

SparseVector TfIdfModel::raw_vector(std::string_view doc) const {
  std::map<std::uint32_t, std::size_t> counts;
  for (const auto& t : tokenize(doc)) {
    if (auto it = vocabulary_.find(t); it != vocabulary_.end()) ++counts[it->second];
  }
  SparseVector v;
  v.index.reserve(counts.size());
  v.value.reserve(counts.size());
  for (auto [idx, tf] : counts) {
    v.index.push_back(idx);
    v.value.push_back(static_cast<double>(tf) * idf_[idx]);
  }
  return v;
}

SparseVector TfIdfModel::embed(std::string_view doc) const { return l2_normalized(raw_vector(doc)); }

// ---------------------------------------------------------------------------

std::string sample_text(const InstructionSample& s) { return s.problem + "\n\n" + s.solution; }

std::vector<TextItem> load_similarity_items(const std::filesystem::path& descriptor, const std::string& benchmark) {
  std::vector<TextItem> items;
  std::unordered_map<std::string, std::size_t> index;
  for_each_jsonl(descriptor, [&](const Json& j, std::size_t line) {
    if (!benchmark.empty() && j.value("benchmark", std::string{}) != benchmark) return;
    if (!j.contains("text") || !j["text"].is_string())
      throw FatalError(descriptor.string() + ":" + std::to_string(line) + ": record without text");
    const std::string id = j.value("entry_id", "line-" + std::to_string(line));
    auto [it, inserted] = index.try_emplace(id, items.size());
    if (inserted) {
      items.push_back({id, j["text"].get<std::string>()});
    } else {
      items[it->second].text += "\n" + j["text"].get<std::string>();
    }
  });
  return items;
}

Json SummaryStats::to_json() const {
  return Json{{"count", count}, {"mean", mean}, {"min", min}, {"max", max}, {"p10", p10},
              {"p25", p25},     {"p50", p50},   {"p75", p75}, {"p90", p90}};
}

SummaryStats summarize(std::vector<double> values) {
  SummaryStats s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.min = values.front();
  s.max = values.back();
  auto pct = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
  };
  s.p10 = pct(0.10);
  s.p25 = pct(0.25);
  s.p50 = pct(0.50);
  s.p75 = pct(0.75);
  s.p90 = pct(0.90);
  return s;
}

SimilarityResult nearest_benchmark(const std::vector<TextItem>& dataset, const std::vector<TextItem>& benchmark,
                                   std::size_t workers) {
  if (benchmark.empty()) throw FatalError("nearest_benchmark: benchmark is empty");
  std::vector<std::string> fit_docs;
  fit_docs.reserve(dataset.size() + benchmark.size());
  for (const auto& d : dataset) fit_docs.push_back(d.text);
  for (const auto& b : benchmark) fit_docs.push_back(b.text);
  const TfIdfModel model = TfIdfModel::fit(fit_docs);

  // Postings per term, in ascending entry order.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> postings(model.vocabulary_size());
  for (std::uint32_t e = 0; e < benchmark.size(); ++e) {
    const SparseVector v = model.embed(benchmark[e].text);
    for (std::size_t k = 0; k < v.index.size(); ++k) postings[v.index[k]].emplace_back(e, v.value[k]);
  }

  SimilarityResult result;
  result.vocabulary_size = model.vocabulary_size();
  result.records.resize(dataset.size());
  parallel_for(dataset.size(), workers, [&](std::size_t i) {
    const SparseVector u = model.embed(dataset[i].text);
    // Products accumulate in ascending term order, the same order a merged
    // sparse dot product uses, so scores are bit-identical to cosine().
    std::vector<double> scores(benchmark.size(), 0.0);
    for (std::size_t k = 0; k < u.index.size(); ++k) {
      for (auto [e, w] : postings[u.index[k]]) scores[e] += u.value[k] * w;
    }
    const std::size_t best = argmax_lowest(scores);
    result.records[i] = {dataset[i].id, benchmark[best].id, scores[best]};
  });

  std::vector<double> values;
  values.reserve(result.records.size());
  for (const auto& r : result.records) values.push_back(r.score);
  result.summary = summarize(std::move(values));
  return result;
}

std::string similarity_csv(const SimilarityResult& result) {
  std::string out = "sample_id,best_entry_id,score\n";
  for (const auto& r : result.records) {
    out += r.sample_id + "," + r.best_entry_id + "," + format_double(r.score) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

std::size_t WhitespaceTokenCounter::count(std::string_view text) const {
  std::size_t n = 0;
  bool in_token = false;
  for (char c : text) {
    const bool space = is_ascii_space(c);
    if (!space && !in_token) ++n;
    in_token = !space;
  }
  return n;
}

std::size_t Histogram::total(const std::vector<std::size_t>& series) const {
  return std::accumulate(series.begin(), series.end(), std::size_t{0});
}

std::string Histogram::to_csv() const {
  std::string out = "bin_start,bin_end,problems,solutions\n";
  for (std::size_t i = 0; i < bin_starts.size(); ++i) {
    out += std::to_string(bin_starts[i]) + "," + std::to_string(bin_starts[i] + bin_width) + "," +
           std::to_string(problems[i]) + "," + std::to_string(solutions[i]) + "\n";
  }
  return out;
}

Json Histogram::to_json() const {
  return Json{{"bin_width", bin_width},
              {"bins", bin_starts.size()},
              {"tokenizer_id", tokenizer_id},
              {"problems_total", total(problems)},
              {"solutions_total", total(solutions)}};
}

Histogram token_length_histogram(const std::vector<InstructionSample>& samples, const TokenCounter& counter,
                                 std::size_t bin_width) {
  if (bin_width == 0) throw FatalError("histogram: bin width must be positive");
  Histogram h;
  h.bin_width = bin_width;
  h.tokenizer_id = counter.id();
  std::vector<std::size_t> p;
  std::vector<std::size_t> s;
  std::size_t max_count = 0;
  for (const auto& sample : samples) {
    p.push_back(counter.count(sample.problem));
    s.push_back(counter.count(sample.solution));
    max_count = std::max({max_count, p.back(), s.back()});
  }
  const std::size_t bins = samples.empty() ? 1 : max_count / bin_width + 1;
  h.problems.assign(bins, 0);
  h.solutions.assign(bins, 0);
  for (std::size_t i = 0; i < bins; ++i) h.bin_starts.push_back(i * bin_width);
  for (auto n : p) ++h.problems[n / bin_width];
  for (auto n : s) ++h.solutions[n / bin_width];
  return h;
}

// ---------------------------------------------------------------------------

TfIdfEmbedder TfIdfEmbedder::fit_for(const std::vector<InstructionSample>& samples,
                                     const std::vector<Category>& categories) {
  std::vector<std::string> docs;
  for (const auto& c : categories) docs.push_back(c.description);
  for (const auto& s : samples) docs.push_back(sample_text(s));
  return TfIdfEmbedder(TfIdfModel::fit(docs));
}

std::vector<SparseVector> TfIdfEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<SparseVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(model_.embed(t));
  return out;
}

std::size_t argmax_lowest(const std::vector<double>& scores, bool* tied) {
  std::size_t best = 0;
  std::size_t at_max = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) {
      best = i;
      at_max = 1;
    } else if (scores[i] == scores[best]) {
      ++at_max;
    }
  }
  if (tied) *tied = at_max > 1;
  return best;
}

Json CategoryBreakdown::to_json() const {
  Json cats = Json::array();
  for (std::size_t i = 0; i < categories.size(); ++i) {
    cats.push_back({{"index", i}, {"name", categories[i].name}, {"count", counts[i]}});
  }
  return Json{{"embedder_id", embedder_id}, {"categories", cats}, {"ties", ties}, {"samples", sample_ids.size()}};
}

std::string CategoryBreakdown::to_csv() const {
  std::string out = "index,name,count\n";
  for (std::size_t i = 0; i < categories.size(); ++i) {
    std::string name = categories[i].name;
    if (name.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : name) {
        if (c == '"') quoted += "\"\"";
        else quoted.push_back(c);
      }
      name = quoted + "\"";
    }
    out += std::to_string(i) + "," + name + "," + std::to_string(counts[i]) + "\n";
  }
  return out;
}

CategoryBreakdown categorize(const std::vector<InstructionSample>& samples, const std::vector<Category>& categories,
                             Embedder& embedder) {
  if (categories.size() != kCategoryCount) {
    throw FatalError("categorize: expected exactly 10 categories, got " + std::to_string(categories.size()));
  }
  CategoryBreakdown out;
  out.categories = categories;
  out.embedder_id = embedder.id();
  out.counts.assign(categories.size(), 0);

  std::vector<std::string> cat_texts;
  for (const auto& c : categories) cat_texts.push_back(c.description);
  const auto cat_vecs = embedder.embed(cat_texts);

  std::vector<std::string> texts;
  for (const auto& s : samples) {
    texts.push_back(sample_text(s));
    out.sample_ids.push_back(s.sample_id);
  }
  const auto vecs = embedder.embed(texts);
  if (cat_vecs.size() != categories.size() || vecs.size() != samples.size()) {
    throw FatalError("categorize: embedder returned the wrong number of vectors");
  }

  std::vector<double> scores(categories.size());
  for (const auto& v : vecs) {
    for (std::size_t c = 0; c < cat_vecs.size(); ++c) scores[c] = cosine(v, cat_vecs[c]);
    bool tied = false;
    const std::size_t best = argmax_lowest(scores, &tied);
    if (tied) ++out.ties;
    out.assignment.push_back(best);
    ++out.counts[best];
  }
  return out;
}

}  // namespace ossforge
