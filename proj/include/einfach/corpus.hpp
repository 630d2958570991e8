#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace einfach {

enum class Split { Train = 0, Test = 1 };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);  // "train" or "test"

/// One parallel-corpus entry: an everyday-language text and its reference
/// simplification. source may be empty until synthesized; target never is.
struct CorpusRecord {
  std::string id;
  std::string source;
  std::string target;
  std::string provenance;
  Split split = Split::Train;
  std::map<std::string, std::string> meta;

  bool operator==(const CorpusRecord&) const = default;
};

struct CorpusDiagnostic {
  std::size_t line = 0;  // 1-based; 0 for file-level notes
  std::string field;
  std::string message;
};

class CorpusFormatError : public std::runtime_error {
 public:
  CorpusFormatError(const std::string& name, std::vector<CorpusDiagnostic> diagnostics);
  const std::vector<CorpusDiagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<CorpusDiagnostic> diagnostics_;
};

// Corpus files are JSONL: one object per line with string fields
// id/source/target/provenance/split and an optional meta object of
// strings. Every malformed line is collected into one CorpusFormatError.
// An empty file yields an empty corpus plus a warning.
// allow_empty_target relaxes the non-empty-target invariant; prediction
// files may carry empty model outputs.
std::vector<CorpusRecord> load_corpus(const std::string& path,
                                      std::vector<CorpusDiagnostic>* warnings = nullptr,
                                      bool allow_empty_target = false);
std::vector<CorpusRecord> parse_corpus(std::istream& in, const std::string& name,
                                       std::vector<CorpusDiagnostic>* warnings = nullptr,
                                       bool allow_empty_target = false);

// Canonical serialization: keys in alphabetical order, empty meta omitted,
// one line per record. load ∘ save round-trips bit-exactly.
std::string to_jsonl(const CorpusRecord& record);
std::string to_jsonl(std::span<const CorpusRecord> corpus);
void save_corpus(const std::string& path, std::span<const CorpusRecord> corpus);

// Rule-based typography cleanup: \n line endings, ASCII quotes and
// apostrophes, dashes as "-", line-leading bullets (•, –, *) as "- ",
// horizontal whitespace collapsed, trailing spaces stripped. Idempotent.
std::string standardize_typography(std::string_view text);

struct SplitCell {
  std::size_t documents = 0;
  std::size_t words = 0;
};

/// Document and word frequencies per provenance and split, plus a totals
/// row; word counts are Word/Number tokens of the target text.
struct SplitStats {
  std::map<std::string, std::array<SplitCell, 2>> rows;  // indexed by Split
  std::array<SplitCell, 2> totals;
};

SplitStats split_stats(std::span<const CorpusRecord> corpus);
std::string render_table(const SplitStats& stats);

/// Prompt template with a {simplification} slot, filled when asking a
/// provider to reconstruct an everyday-language source text.
struct PromptTemplate {
  int id = 0;  // position in the template file, 1-based
  std::string text;

  std::string render(std::string_view simplification) const;
};

// One template per line; '#' comments and blank lines skipped. Each
// template must contain the slot exactly once and be distinct.
std::vector<PromptTemplate> load_templates(const std::string& path);

class SynthesisProvider {
 public:
  virtual ~SynthesisProvider() = default;
  virtual std::string name() const = 0;
  // Returns the generated text, or throws with the failure reason.
  virtual std::string generate(const std::string& prompt) = 0;
};

/// Deterministic offline stand-in: echoes the prompt behind a fixed prefix.
class EchoProvider final : public SynthesisProvider {
 public:
  explicit EchoProvider(std::string prefix = "Alltagstext: ") : prefix_(std::move(prefix)) {}
  std::string name() const override { return "echo"; }
  std::string generate(const std::string& prompt) override { return prefix_ + prompt; }

 private:
  std::string prefix_;
};

struct SynthesisFailure {
  std::size_t index = 0;  // position in the input batch
  std::string reason;
};

struct SynthesisBatch {
  std::vector<CorpusRecord> records;  // input order, failures skipped
  std::vector<SynthesisFailure> failures;
};

// Templates rotate round-robin over the inputs; each record carries its
// template id in meta. Provider failures are collected, not fatal, unless
// every call fails.
SynthesisBatch synthesize_sources(std::span<const std::string> simplifications,
                                  SynthesisProvider& provider,
                                  std::span<const PromptTemplate> templates);

struct HumanRating {
  std::string record_id;
  int rating = 0;  // 0 (no agreement) .. 3 (complete agreement)
};

// JSONL with fields id and rating; out-of-range ratings are rejected.
std::vector<HumanRating> load_ratings(const std::string& path);

struct RatingSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

RatingSummary aggregate_ratings(std::span<const HumanRating> ratings);

}  // namespace einfach
