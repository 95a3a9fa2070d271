#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ossforge/sample.hpp"
#include "ossforge/util.hpp"

namespace ossforge {

/// Sparse vector with strictly increasing indices.
struct SparseVector {
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  bool empty() const { return index.empty(); }
  double norm() const;
};

SparseVector l2_normalized(SparseVector v);

/// Dot product of unit vectors; 0 when either side is zero.
double cosine(const SparseVector& u, const SparseVector& v);

/// Lowercased runs of ASCII letters and digits.
std::vector<std::string> tokenize(std::string_view text);

/// Smoothed TF-IDF: tf = raw count, idf = ln((1 + N) / (1 + df)) + 1,
/// L2-normalized document vectors. Term indices follow lexicographic order.
class TfIdfModel {
 public:
  static constexpr std::string_view kTokenizerId = "lower-alnum";

  /// Throws FatalError when docs is empty or no document has a token.
  static TfIdfModel fit(const std::vector<std::string>& docs);

  /// Unit vector, or the zero vector when no term is in the vocabulary.
  SparseVector embed(std::string_view doc) const;
  /// tf * idf before normalization.
  SparseVector raw_vector(std::string_view doc) const;

  std::size_t vocabulary_size() const { return terms_.size(); }
  std::size_t doc_count() const { return doc_count_; }
  /// idf of a term, or 0 for out-of-vocabulary terms.
  double idf(std::string_view term) const;
  std::int64_t index_of(std::string_view term) const;
  const std::vector<std::string>& terms() const { return terms_; }

 private:
  std::map<std::string, std::uint32_t, std::less<>> vocabulary_;
  std::vector<std::string> terms_;
  std::vector<double> idf_;
  std::size_t doc_count_ = 0;
};

// ---------------------------------------------------------------------------
// Benchmark similarity
// ---------------------------------------------------------------------------

struct TextItem {
  std::string id;
  std::string text;
};

/// Text compared against benchmarks: problem, blank line, solution.
std::string sample_text(const InstructionSample& s);

/// Benchmark items for similarity: descriptor records grouped by entry_id
/// (texts joined with '\n'), optionally restricted to one benchmark name.
std::vector<TextItem> load_similarity_items(const std::filesystem::path& descriptor,
                                            const std::string& benchmark = "");

struct SimilarityRecord {
  std::string sample_id;
  std::string best_entry_id;
  double score = 0.0;
};

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double p10 = 0.0, p25 = 0.0, p50 = 0.0, p75 = 0.0, p90 = 0.0;

  Json to_json() const;
};

/// Linear-interpolated percentiles over the values.
SummaryStats summarize(std::vector<double> values);

struct SimilarityResult {
  std::vector<SimilarityRecord> records;
  SummaryStats summary;
  std::size_t vocabulary_size = 0;
};

/// Fits TF-IDF on dataset and benchmark texts together, then picks each
/// sample's most similar benchmark entry (ties go to the lower index).
SimilarityResult nearest_benchmark(const std::vector<TextItem>& dataset, const std::vector<TextItem>& benchmark,
                                   std::size_t workers = 1);

std::string similarity_csv(const SimilarityResult& result);

// ---------------------------------------------------------------------------
// Token length histogram
// ---------------------------------------------------------------------------

class TokenCounter {
 public:
  virtual ~TokenCounter() = default;
  virtual std::string id() const = 0;
  virtual std::size_t count(std::string_view text) const = 0;
};

class WhitespaceTokenCounter : public TokenCounter {
 public:
  std::string id() const override { return "whitespace"; }
  std::size_t count(std::string_view text) const override;
};

struct Histogram {
  std::size_t bin_width = 32;
  std::vector<std::size_t> bin_starts;  // bin i covers [start, start + width)
  std::vector<std::size_t> problems;
  std::vector<std::size_t> solutions;
  std::string tokenizer_id;

  std::size_t total(const std::vector<std::size_t>& series) const;
  std::string to_csv() const;
  Json to_json() const;
};

Histogram token_length_histogram(const std::vector<InstructionSample>& samples, const TokenCounter& counter,
                                 std::size_t bin_width = 32);

// ---------------------------------------------------------------------------
// Categories
// ---------------------------------------------------------------------------

inline constexpr std::size_t kCategoryCount = 10;

struct Category {
  std::string name;
  std::string description;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string id() const = 0;
  /// Unit vectors (or zero vectors), one per input text.
  virtual std::vector<SparseVector> embed(const std::vector<std::string>& texts) = 0;
};

class TfIdfEmbedder : public Embedder {
 public:
  explicit TfIdfEmbedder(TfIdfModel model) : model_(std::move(model)) {}

  /// Model fitted on the category descriptions and the sample texts.
  static TfIdfEmbedder fit_for(const std::vector<InstructionSample>& samples,
                               const std::vector<Category>& categories);

  std::string id() const override { return "tfidf"; }
  std::vector<SparseVector> embed(const std::vector<std::string>& texts) override;

 private:
  TfIdfModel model_;
};

struct RemoteEmbedderConfig {
  std::string endpoint = "https://api.openai.com/v1/embeddings";
  std::string model = "text-embedding-3-small";
  std::string instruction;  // sent as "instruction" when non-empty (INSTRUCTOR-style servers)
  std::string token_env = "EMBEDDER_API_TOKEN";
  std::size_t batch_size = 64;
  int timeout_seconds = 120;
};

/// Embedding API client: POST {model, input:[...]} -> data[i].embedding.
class RemoteEmbedder : public Embedder {
 public:
  /// Throws FatalError when the token variable is unset.
  explicit RemoteEmbedder(RemoteEmbedderConfig config);

  std::string id() const override { return "remote:" + config_.model; }
  std::vector<SparseVector> embed(const std::vector<std::string>& texts) override;

 private:
  RemoteEmbedderConfig config_;
  std::string token_;
};

struct CategoryBreakdown {
  std::vector<Category> categories;
  std::vector<std::string> sample_ids;
  std::vector<std::size_t> assignment;  // per sample, index into categories
  std::vector<std::size_t> counts;
  std::size_t ties = 0;
  std::string embedder_id;

  Json to_json() const;
  std::string to_csv() const;
};

/// Assigns each sample the category with the highest cosine similarity,
/// lowest index on ties. Throws FatalError unless exactly 10 categories.
CategoryBreakdown categorize(const std::vector<InstructionSample>& samples, const std::vector<Category>& categories,
                             Embedder& embedder);

/// Index of the maximum; ties resolve to the lowest index. `tied` reports
/// whether more than one index reached the maximum.
std::size_t argmax_lowest(const std::vector<double>& scores, bool* tied = nullptr);

}  // namespace ossforge
