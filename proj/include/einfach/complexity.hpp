#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "einfach/text.hpp"

namespace einfach {

/// Separable-verb lexicon: (particle, verb) pairs like (an, kommen).
/// Verbs are stored as roots (infinitive minus -en/-n); finite forms are
/// recognized by root + conjugation suffix ("kommt", "kommen", "komme").
class SeparableVerbLexicon {
 public:
  static const SeparableVerbLexicon& builtin();
  // One "particle verb" pair per line; '#' starts a comment.
  static SeparableVerbLexicon load(const std::string& path);

  void add(std::string particle, std::string verb);
  bool is_particle(std::string_view word) const;
  // True when word is a recognized finite form of a verb that combines
  // with the given particle.
  bool matches(std::string_view particle, std::string_view word) const;
  bool empty() const { return roots_.empty(); }
  std::size_t size() const;

 private:
  std::set<std::string> particles_;
  std::map<std::string, std::set<std::string>> roots_;  // particle -> verb roots
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

/// Document-set profile in the "mean ± std" shape of the complexity
/// tables; one sample per document.
struct ComplexityProfile {
  std::size_t documents = 0;
  MeanStd sentence_length;        // words per sentence
  MeanStd commas_per_sentence;    // commas per sentence
  MeanStd verb_compound_distance; // normalized verb-particle distance
  MeanStd words_per_line;         // words per line
};

// Mean word-token count (Word/Number kinds) per sentence.
double sentence_length(const Document& doc);

// Mean Comma-token count per sentence.
double commas_per_sentence(const Document& doc);

// Per sentence: first (finite verb, later particle) pair found in the
// lexicon; distance = word tokens strictly between them, divided by the
// sentence word count. Pair-free sentences contribute 0; the document
// value is the mean over sentences.
double verb_compound_distance(const Document& doc, const SeparableVerbLexicon& lexicon);

// Mean word-token count per line; lines holding nothing but their line
// break are ignored.
double words_per_line(const Document& doc);

ComplexityProfile profile(std::span<const Document> docs);
ComplexityProfile profile(std::span<const Document> docs, const SeparableVerbLexicon& lexicon);

}  // namespace einfach
