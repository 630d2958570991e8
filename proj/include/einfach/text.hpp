#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace einfach {

enum class TokenKind {
  Word,
  Number,
  Punctuation,
  Comma,
  SentenceTerminal,
  LineBreak,
  Bullet,
};

std::string_view to_string(TokenKind kind);

struct Token {
  std::string surface;
  TokenKind kind = TokenKind::Word;
  std::size_t offset = 0;  // byte offset into the source text
};

/// Dotted abbreviations that must not be split at their periods ("z.B.",
/// "Dr."). Matching is case-insensitive. Extendable from a plain-text file
/// with one abbreviation per line ('#' starts a comment).
class AbbreviationTable {
 public:
  static const AbbreviationTable& builtin();
  static AbbreviationTable load(const std::string& path);

  void add(std::string abbreviation);
  // Longest abbreviation matching text at pos, 0 if none.
  std::size_t match(std::string_view text, std::size_t pos) const;

 private:
  std::vector<std::string> entries_;  // lowercased, longest first
};

// Tokenization rules, in scan order over codepoints:
//   - \n, \r\n and \r each yield one LineBreak token
//   - other whitespace separates tokens and is not represented
//   - a dotted abbreviation from the table forms one Word token
//   - letter runs form Word tokens; '-' and apostrophes are word-internal
//     when flanked by letters or digits ("E-Mail", "geht's")
//   - digit runs form Number tokens; '.', ',' and ':' are number-internal
//     between digits ("1.000", "3,5", "10:30"); a trailing '.' is kept as an
//     ordinal marker ("3. Mai") unless it ends the line or the text
//   - ',' is a Comma; single '.', '!', '?', ':' are SentenceTerminals;
//     runs of two or more '.' form one Punctuation token (ellipsis)
//   - '•' is a Bullet anywhere; '-', '*' and dashes are Bullets when
//     they open a line and are followed by whitespace
//   - anything else is a single-codepoint Punctuation token
std::vector<Token> tokenize(std::string_view text);
std::vector<Token> tokenize(std::string_view text, const AbbreviationTable& abbreviations);

struct TokenRange {
  std::size_t begin = 0;  // first token index
  std::size_t end = 0;    // one past the last token index

  std::size_t size() const { return end - begin; }
  bool operator==(const TokenRange&) const = default;
};

/// Tokenized text with sentence and line structure. Sentence ranges
/// partition the non-LineBreak tokens (a range may span LineBreak tokens,
/// which it ignores); line ranges partition all tokens, each line owning
/// its terminating LineBreak.
struct Document {
  std::string raw;
  std::vector<Token> tokens;
  std::vector<TokenRange> sentences;
  std::vector<TokenRange> lines;
};

// Sentence boundaries fall after each maximal run of SentenceTerminal
// tokens; trailing material without a terminal forms a final sentence.
Document segment(std::string raw, std::vector<Token> tokens);

Document make_document(std::string_view text);
Document make_document(std::string_view text, const AbbreviationTable& abbreviations);

enum class NGramFilter {
  WordsOnly,  // drops LineBreak tokens only; punctuation participates
  AllTokens,  // keeps LineBreak tokens (normalized to "\n")
};

/// Counted n-grams over lowercased token surfaces. Keys are the n surfaces
/// joined with '\x1f'.
struct NGramMultiset {
  int n = 1;
  std::unordered_map<std::string, int> counts;

  std::size_t total() const;
};

NGramMultiset ngrams(std::span<const Token> tokens, int n, NGramFilter filter);

// Lowercased surfaces used by the metrics: all tokens, LineBreak as "\n".
std::vector<std::string> metric_tokens(const Document& doc);

// Count map over joined lowercased surfaces; shared by metrics and ngrams().
std::unordered_map<std::string, int> ngram_counts(std::span<const std::string> surfaces, int n);

std::string lowercase(std::string_view text);

// True for Word and Number tokens; the unit counted by the complexity
// metrics and the corpus statistics.
inline bool is_word_token(const Token& t) {
  return t.kind == TokenKind::Word || t.kind == TokenKind::Number;
}

}  // namespace einfach
