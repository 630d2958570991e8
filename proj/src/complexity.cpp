#include "einfach/complexity.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace einfach {

const SeparableVerbLexicon& SeparableVerbLexicon::builtin() {
  static const SeparableVerbLexicon lexicon = [] {
    SeparableVerbLexicon l;
    const std::pair<const char*, const char*> pairs[] = {
        {"ab", "fahren"},   {"ab", "holen"},    {"ab", "sagen"},     {"an", "fangen"},
        {"an", "kommen"},   {"an", "rufen"},    {"an", "sehen"},     {"auf", "hören"},
        {"auf", "machen"},  {"auf", "stehen"},  {"aus", "gehen"},    {"aus", "sehen"},
        {"aus", "steigen"}, {"ein", "kaufen"},  {"ein", "laden"},    {"ein", "steigen"},
        {"fest", "halten"}, {"mit", "bringen"}, {"mit", "kommen"},   {"mit", "machen"},
        {"nach", "denken"}, {"statt", "finden"},{"teil", "nehmen"},  {"vor", "lesen"},
        {"vor", "schlagen"},{"vor", "stellen"}, {"weg", "gehen"},    {"weiter", "machen"},
        {"zu", "hören"},    {"zu", "machen"},   {"zurück", "geben"}, {"zurück", "kommen"},
    };
    for (const auto& [particle, verb] : pairs) l.add(particle, verb);
    return l;
  }();
  return lexicon;
}

SeparableVerbLexicon SeparableVerbLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
  SeparableVerbLexicon lexicon;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string particle, verb, extra;
    if (!(fields >> particle)) continue;
    if (!(fields >> verb) || fields >> extra) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected \"particle verb\"");
    }
    lexicon.add(particle, verb);
  }
  if (lexicon.empty()) throw std::runtime_error(path + ": empty lexicon");
  return lexicon;
}

void SeparableVerbLexicon::add(std::string particle, std::string verb) {
  particle = lowercase(particle);
  std::string root = lowercase(verb);
  if (root.size() > 2 && root.ends_with("en")) {
    root.resize(root.size() - 2);
  } else if (root.size() > 1 && root.ends_with('n')) {
    root.resize(root.size() - 1);
  }
  particles_.insert(particle);
  roots_[std::move(particle)].insert(std::move(root));
}

bool SeparableVerbLexicon::is_particle(std::string_view word) const {
  return particles_.count(lowercase(word)) > 0;
}

bool SeparableVerbLexicon::matches(std::string_view particle, std::string_view word) const {
  const auto it = roots_.find(lowercase(particle));
  if (it == roots_.end()) return false;
  const std::string w = lowercase(word);
  static const char* const suffixes[] = {"", "e", "st", "t", "en", "et", "est"};
  for (const std::string& root : it->second) {
    if (w.size() < root.size() || w.compare(0, root.size(), root) != 0) continue;
    const std::string_view tail = std::string_view(w).substr(root.size());
    for (const char* s : suffixes) {
      if (tail == s) return true;
    }
  }
  return false;
}

std::size_t SeparableVerbLexicon::size() const {
  std::size_t n = 0;
  for (const auto& [particle, roots] : roots_) n += roots.size();
  return n;
}

namespace {

std::size_t count_words(const Document& doc, TokenRange range) {
  std::size_t n = 0;
  for (std::size_t i = range.begin; i < range.end; ++i) {
    if (is_word_token(doc.tokens[i])) ++n;
  }
  return n;
}

void require_sentences(const Document& doc) {
  if (doc.sentences.empty()) throw std::invalid_argument("document has no sentences");
}

}  // namespace

double sentence_length(const Document& doc) {
  require_sentences(doc);
  double total = 0.0;
  for (const TokenRange sentence : doc.sentences) {
    total += static_cast<double>(count_words(doc, sentence));
  }
  return total / static_cast<double>(doc.sentences.size());
}

double commas_per_sentence(const Document& doc) {
  require_sentences(doc);
  double total = 0.0;
  for (const TokenRange sentence : doc.sentences) {
    for (std::size_t i = sentence.begin; i < sentence.end; ++i) {
      if (doc.tokens[i].kind == TokenKind::Comma) total += 1.0;
    }
  }
  return total / static_cast<double>(doc.sentences.size());
}

double verb_compound_distance(const Document& doc, const SeparableVerbLexicon& lexicon) {
  require_sentences(doc);
  if (lexicon.empty()) throw std::invalid_argument("empty separable-verb lexicon");

  double total = 0.0;
  for (const TokenRange sentence : doc.sentences) {
    std::vector<const Token*> words;
    for (std::size_t i = sentence.begin; i < sentence.end; ++i) {
      if (is_word_token(doc.tokens[i])) words.push_back(&doc.tokens[i]);
    }
    if (words.size() < 2) continue;

    double distance = 0.0;
    bool found = false;
    for (std::size_t v = 0; v + 1 < words.size() && !found; ++v) {
      // Prefer the latest qualifying particle: separable particles sit in
      // the sentence-final field.
      for (std::size_t p = words.size(); p-- > v + 1;) {
        if (!lexicon.is_particle(words[p]->surface)) continue;
        if (!lexicon.matches(words[p]->surface, words[v]->surface)) continue;
        distance = static_cast<double>(p - v - 1) / static_cast<double>(words.size());
        found = true;
        break;
      }
    }
    total += distance;
  }
  return total / static_cast<double>(doc.sentences.size());
}

double words_per_line(const Document& doc) {
  double total = 0.0;
  std::size_t lines = 0;
  for (const TokenRange line : doc.lines) {
    bool blank = true;
    for (std::size_t i = line.begin; i < line.end && blank; ++i) {
      blank = doc.tokens[i].kind == TokenKind::LineBreak;
    }
    if (blank) continue;
    total += static_cast<double>(count_words(doc, line));
    ++lines;
  }
  if (lines == 0) throw std::invalid_argument("document has no non-empty lines");
  return total / static_cast<double>(lines);
}

namespace {

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  for (const double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (const double v : values) var += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

}  // namespace

ComplexityProfile profile(std::span<const Document> docs) {
  return profile(docs, SeparableVerbLexicon::builtin());
}

ComplexityProfile profile(std::span<const Document> docs, const SeparableVerbLexicon& lexicon) {
  if (docs.empty()) throw std::invalid_argument("profile: empty document set");
  std::vector<double> lengths, commas, distances, line_words;
  for (const Document& doc : docs) {
    lengths.push_back(sentence_length(doc));
    commas.push_back(commas_per_sentence(doc));
    distances.push_back(verb_compound_distance(doc, lexicon));
    line_words.push_back(words_per_line(doc));
  }
  ComplexityProfile p;
  p.documents = docs.size();
  p.sentence_length = mean_std(lengths);
  p.commas_per_sentence = mean_std(commas);
  p.verb_compound_distance = mean_std(distances);
  p.words_per_line = mean_std(line_words);
  return p;
}

}  // namespace einfach
