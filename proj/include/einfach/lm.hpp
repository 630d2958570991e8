#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "einfach/corpus.hpp"

namespace einfach {

/// Dense token-id ↔ surface map with reserved control tokens. Corpus
/// tokens follow the reserved block, ordered by count (desc) then
/// surface; tokens under the count threshold collapse into UNK.
class Vocabulary {
 public:
  static constexpr int kBos = 0;
  static constexpr int kEos = 1;
  static constexpr int kSep = 2;
  static constexpr int kUnk = 3;

  Vocabulary();  // reserved tokens only

  static Vocabulary build(std::span<const CorpusRecord> corpus, int min_count = 2);

  int id(std::string_view surface) const;  // kUnk when absent
  const std::string& surface(int id) const;
  bool contains(std::string_view surface) const;
  int size() const { return static_cast<int>(surfaces_.size()); }
  static bool is_reserved(int id) { return id >= 0 && id <= kUnk; }

  // Appends a surface with the next id; used by deserialization.
  int add(std::string surface);

 private:
  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, int> ids_;
};

// Lowercased metric-token ids of a text (line breaks as "\n" tokens).
std::vector<int> encode_text(const Vocabulary& vocab, std::string_view text);
// Inverse rendering: surfaces joined by spaces, "\n" as a line break,
// reserved tokens skipped.
std::string decode_text(const Vocabulary& vocab, std::span<const int> ids);

// [BOS] source [SEP] — the position where the simplification starts.
std::vector<int> make_prompt(const Vocabulary& vocab, std::string_view source);
// [BOS] source [SEP] target [EOS] — the modeled sequence layout.
std::vector<int> training_sequence(const Vocabulary& vocab, std::string_view source,
                                   std::string_view target);

class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  virtual const Vocabulary& vocab() const = 0;
  // Probability of every vocabulary token following the context; sums to
  // 1 within 1e-9, all entries ≥ 0.
  virtual std::vector<double> next_distribution(std::span<const int> context) const = 0;
  // One representation vector per context token; consumed by contrastive
  // search only.
  virtual std::vector<std::vector<double>> represent(std::span<const int> context) const = 0;
};

/// Backoff n-gram model over the [BOS] source [SEP] target [EOS] layout.
/// A seen context yields its (absolutely discounted) count distribution;
/// unseen contexts back off to shorter ones, ultimately to the unigram
/// level. With discount 0 the distribution is the pure count ratio.
/// Token representations are hashed co-occurrence vectors (window ±2,
/// L2-normalized).
class NGramLM final : public LanguageModel {
 public:
  static NGramLM train(std::span<const CorpusRecord> corpus, int order, double discount = 0.0,
                       int min_count = 2);

  const Vocabulary& vocab() const override { return vocab_; }
  std::vector<double> next_distribution(std::span<const int> context) const override;
  std::vector<std::vector<double>> represent(std::span<const int> context) const override;

  int order() const { return order_; }
  double discount() const { return discount_; }

  void save(const std::string& path) const;  // versioned text format
  static NGramLM load(const std::string& path);

 private:
  NGramLM(Vocabulary vocab, int order, double discount);

  struct ContextCounts {
    std::int64_t total = 0;
    std::map<int, std::int64_t> tokens;
  };

  void count_sequence(std::span<const int> ids);
  void build_embeddings(std::span<const std::vector<int>> sequences);
  // Discounted probability of token under the contexts ending the given
  // suffix length, recursing toward the unigram level.
  double backoff_probability(std::span<const int> context, int token) const;

  Vocabulary vocab_;
  int order_;
  double discount_;
  int min_count_ = 2;
  // counts_[r]: contexts of length r (ids joined by ',') → follower counts
  std::vector<std::unordered_map<std::string, ContextCounts>> counts_;
  std::vector<std::vector<double>> embeddings_;  // per token id
  int embedding_dim_ = 0;
};

/// Uniform distribution over the vocabulary; zero-vector representations.
class UniformLM final : public LanguageModel {
 public:
  explicit UniformLM(Vocabulary vocab) : vocab_(std::move(vocab)) {}

  const Vocabulary& vocab() const override { return vocab_; }
  std::vector<double> next_distribution(std::span<const int> context) const override;
  std::vector<std::vector<double>> represent(std::span<const int> context) const override;

 private:
  Vocabulary vocab_;
};

// Mean negative log-probability (nats/token) of the target tokens given
// [BOS] source [SEP] and the preceding target prefix. A zero-probability
// token makes the result infinite.
double cross_entropy(const LanguageModel& lm, std::span<const int> source,
                     std::span<const int> target);

}  // namespace einfach
