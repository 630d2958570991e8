#include "einfach/text.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "einfach/utf8.hpp"

namespace einfach {

char32_t decode_utf8(std::string_view s, std::size_t& i) {
  const unsigned char b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 1;
  char32_t cp = b0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return b0;
  }
  if (i + len > s.size()) {
    ++i;
    return b0;
  }
  for (int k = 1; k < len; ++k) {
    const unsigned char bk = static_cast<unsigned char>(s[i + k]);
    if ((bk & 0xC0) != 0x80) {
      ++i;
      return b0;
    }
    cp = (cp << 6) | (bk & 0x3F);
  }
  i += len;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

namespace {

bool is_space_cp(char32_t cp) {
  switch (cp) {
    case U' ':
    case U'\t':
    case U'\v':
    case U'\f':
    case 0x00A0:  // no-break space
    case 0x200B:  // zero width space
    case 0x202F:
    case 0x205F:
    case 0x3000:
    case 0xFEFF:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_digit_cp(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

// Known punctuation and symbol codepoints above ASCII. Everything else
// above ASCII counts as a letter, which keeps umlauts, eszett and other
// alphabets intact without a Unicode table dependency.
bool is_high_punct(char32_t cp) {
  switch (cp) {
    case 0x00A1:  // inverted exclamation
    case 0x00A7:  // section sign
    case 0x00AB:  // left guillemet
    case 0x00B6:
    case 0x00B7:
    case 0x00BB:  // right guillemet
    case 0x00BF:
    case 0x00D7:
    case 0x00F7:
    case 0x20AC:  // euro sign
    case 0x2212:  // minus sign
    case 0x2030:
    case 0x2044:
      return true;
    default:
      return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2032 && cp <= 0x203B);
  }
}

bool is_letter_cp(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z');
  }
  return !is_space_cp(cp) && !is_high_punct(cp);
}

bool is_dash_cp(char32_t cp) {
  return cp == U'-' || cp == 0x2010 || cp == 0x2011 || cp == 0x2012 || cp == 0x2013 ||
         cp == 0x2014 || cp == 0x2015 || cp == 0x2212;
}

bool is_apostrophe_cp(char32_t cp) { return cp == U'\'' || cp == 0x2019 || cp == 0x02BC; }

constexpr char32_t kBullet = 0x2022;

struct Scanner {
  std::string_view text;
  std::size_t pos = 0;

  bool done() const { return pos >= text.size(); }
  char32_t peek(std::size_t* next = nullptr) const {
    std::size_t i = pos;
    const char32_t cp = decode_utf8(text, i);
    if (next) *next = i;
    return cp;
  }
};

// Peeks the codepoint after byte position i.
char32_t peek_at(std::string_view text, std::size_t i) {
  if (i >= text.size()) return 0;
  std::size_t j = i;
  return decode_utf8(text, j);
}

}  // namespace

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Word: return "word";
    case TokenKind::Number: return "number";
    case TokenKind::Punctuation: return "punctuation";
    case TokenKind::Comma: return "comma";
    case TokenKind::SentenceTerminal: return "sentence_terminal";
    case TokenKind::LineBreak: return "line_break";
    case TokenKind::Bullet: return "bullet";
  }
  return "word";
}

const AbbreviationTable& AbbreviationTable::builtin() {
  static const AbbreviationTable table = [] {
    AbbreviationTable t;
    for (const char* a : {"z.B.", "bzw.", "Dr.", "Nr.", "ca.", "usw."}) t.add(a);
    return t;
  }();
  return table;
}

AbbreviationTable AbbreviationTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open abbreviation file: " + path);
  AbbreviationTable table = builtin();
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    table.add(line);
  }
  return table;
}

void AbbreviationTable::add(std::string abbreviation) {
  entries_.push_back(lowercase(abbreviation));
  std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });
  entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());
}

std::size_t AbbreviationTable::match(std::string_view text, std::size_t pos) const {
  for (const auto& entry : entries_) {
    if (pos + entry.size() > text.size()) continue;
    if (lowercase(text.substr(pos, entry.size())) != entry) continue;
    // The character after the abbreviation must not continue a word.
    const char32_t after = peek_at(text, pos + entry.size());
    if (after != 0 && is_letter_cp(after)) continue;
    return entry.size();
  }
  return 0;
}

std::vector<Token> tokenize(std::string_view text) { return tokenize(text, AbbreviationTable::builtin()); }

std::vector<Token> tokenize(std::string_view text, const AbbreviationTable& abbreviations) {
  std::vector<Token> tokens;
  Scanner sc{text};
  bool at_line_start = true;

  auto emit = [&](std::size_t start, std::size_t end, TokenKind kind) {
    tokens.push_back(Token{std::string(text.substr(start, end - start)), kind, start});
    at_line_start = kind == TokenKind::LineBreak;
  };

  while (!sc.done()) {
    const std::size_t start = sc.pos;
    std::size_t next = 0;
    const char32_t cp = sc.peek(&next);

    if (cp == U'\n' || cp == U'\r') {
      sc.pos = next;
      if (cp == U'\r' && !sc.done() && sc.peek(&next) == U'\n') sc.pos = next;
      emit(start, sc.pos, TokenKind::LineBreak);
      continue;
    }
    if (is_space_cp(cp)) {
      sc.pos = next;
      continue;
    }

    if (is_digit_cp(cp)) {
      sc.pos = next;
      while (!sc.done()) {
        const char32_t c = sc.peek(&next);
        if (is_digit_cp(c)) {
          sc.pos = next;
        } else if ((c == U'.' || c == U',' || c == U':') && is_digit_cp(peek_at(text, next))) {
          sc.pos = next;  // group or decimal separator between digits
        } else {
          break;
        }
      }
      // Ordinal period: keep "3." together unless the period closes the
      // line or the text, where it reads as a sentence end.
      if (!sc.done() && sc.peek(&next) == U'.') {
        std::size_t look = next;
        while (look < text.size()) {
          std::size_t ln = look;
          const char32_t c = decode_utf8(text, ln);
          if (c == U'\n' || c == U'\r') {
            look = text.size();
            break;
          }
          if (!is_space_cp(c)) break;
          look = ln;
        }
        if (look < text.size()) sc.pos = next;
      }
      emit(start, sc.pos, TokenKind::Number);
      continue;
    }

    if (is_letter_cp(cp)) {
      if (const std::size_t len = abbreviations.match(text, start); len > 0) {
        sc.pos = start + len;
        emit(start, sc.pos, TokenKind::Word);
        continue;
      }
      sc.pos = next;
      while (!sc.done()) {
        const char32_t c = sc.peek(&next);
        if (is_letter_cp(c) || is_digit_cp(c)) {
          sc.pos = next;
        } else if ((is_dash_cp(c) || is_apostrophe_cp(c)) && is_letter_cp(peek_at(text, next))) {
          sc.pos = next;  // word-internal hyphen or apostrophe
        } else {
          break;
        }
      }
      emit(start, sc.pos, TokenKind::Word);
      continue;
    }

    if (cp == U',') {
      sc.pos = next;
      emit(start, sc.pos, TokenKind::Comma);
      continue;
    }

    if (cp == U'.') {
      sc.pos = next;
      if (!sc.done() && sc.peek(&next) == U'.') {
        while (!sc.done() && sc.peek(&next) == U'.') sc.pos = next;  // ellipsis
        emit(start, sc.pos, TokenKind::Punctuation);
      } else {
        emit(start, sc.pos, TokenKind::SentenceTerminal);
      }
      continue;
    }
    if (cp == U'!' || cp == U'?' || cp == U':') {
      sc.pos = next;
      emit(start, sc.pos, TokenKind::SentenceTerminal);
      continue;
    }

    if (cp == kBullet) {
      sc.pos = next;
      emit(start, sc.pos, TokenKind::Bullet);
      continue;
    }
    if (at_line_start && (is_dash_cp(cp) || cp == U'*')) {
      const char32_t after = peek_at(text, next);
      if (after == 0 || is_space_cp(after) || after == U'\n' || after == U'\r') {
        sc.pos = next;
        emit(start, sc.pos, TokenKind::Bullet);
        continue;
      }
    }

    sc.pos = next;
    emit(start, sc.pos, TokenKind::Punctuation);
  }
  return tokens;
}

Document segment(std::string raw, std::vector<Token> tokens) {
  Document doc;
  doc.raw = std::move(raw);
  doc.tokens = std::move(tokens);
  const std::size_t n = doc.tokens.size();

  bool open = false;
  std::size_t sent_begin = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const TokenKind kind = doc.tokens[i].kind;
    if (kind == TokenKind::LineBreak) continue;
    if (!open) {
      open = true;
      sent_begin = i;
    }
    if (kind == TokenKind::SentenceTerminal) {
      const bool run_continues = i + 1 < n && doc.tokens[i + 1].kind == TokenKind::SentenceTerminal;
      if (!run_continues) {
        doc.sentences.push_back({sent_begin, i + 1});
        open = false;
      }
    }
  }
  if (open) doc.sentences.push_back({sent_begin, n});

  std::size_t line_begin = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (doc.tokens[i].kind == TokenKind::LineBreak) {
      doc.lines.push_back({line_begin, i + 1});
      line_begin = i + 1;
    }
  }
  if (line_begin < n) doc.lines.push_back({line_begin, n});
  return doc;
}

Document make_document(std::string_view text) {
  return segment(std::string(text), tokenize(text));
}

Document make_document(std::string_view text, const AbbreviationTable& abbreviations) {
  return segment(std::string(text), tokenize(text, abbreviations));
}

std::size_t NGramMultiset::total() const {
  std::size_t sum = 0;
  for (const auto& [key, count] : counts) sum += static_cast<std::size_t>(count);
  return sum;
}

std::unordered_map<std::string, int> ngram_counts(std::span<const std::string> surfaces, int n) {
  std::unordered_map<std::string, int> counts;
  if (n <= 0 || surfaces.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + n <= surfaces.size(); ++i) {
    std::string key;
    for (int k = 0; k < n; ++k) {
      if (k > 0) key.push_back('\x1f');
      key += surfaces[i + k];
    }
    ++counts[key];
  }
  return counts;
}

namespace {

std::vector<std::string> filtered_surfaces(std::span<const Token> tokens, NGramFilter filter) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) {
    if (t.kind == TokenKind::LineBreak) {
      if (filter == NGramFilter::AllTokens) out.emplace_back("\n");
      continue;
    }
    out.push_back(lowercase(t.surface));
  }
  return out;
}

}  // namespace

NGramMultiset ngrams(std::span<const Token> tokens, int n, NGramFilter filter) {
  if (n < 1 || n > 4) throw std::invalid_argument("ngrams: n must be in 1..4");
  const std::vector<std::string> surfaces = filtered_surfaces(tokens, filter);
  return NGramMultiset{n, ngram_counts(surfaces, n)};
}

std::vector<std::string> metric_tokens(const Document& doc) {
  return filtered_surfaces(doc.tokens, NGramFilter::AllTokens);
}

std::string lowercase(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    char32_t cp = decode_utf8(text, i);
    if (cp >= U'A' && cp <= U'Z') {
      out.push_back(static_cast<char>(cp - U'A' + U'a'));
      continue;
    }
    // Latin-1 uppercase letters (covers umlauts) and Y with diaeresis.
    if ((cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) || cp == 0x0178) {
      cp = cp == 0x0178 ? 0x00FF : cp + 0x20;
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      continue;
    }
    out.append(text.substr(start, i - start));
  }
  return out;
}

}  // namespace einfach
