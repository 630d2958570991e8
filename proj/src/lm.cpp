#include "einfach/lm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "einfach/hash.hpp"
#include "einfach/text.hpp"

namespace einfach {
namespace {

const char* const kReservedSurfaces[] = {"<bos>", "<eos>", "<sep>", "<unk>"};

std::string context_key(std::span<const int> context) {
  std::string key;
  for (std::size_t i = 0; i < context.size(); ++i) {
    if (i > 0) key.push_back(',');
    key += std::to_string(context[i]);
  }
  return key;
}

std::string escape_surface(std::string_view surface) {
  std::string out;
  for (const char c : surface) {
    if (c == '\\') {
      out += "\\\\";
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string unescape_surface(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size()) {
      out.push_back(text[i + 1] == 'n' ? '\n' : text[i + 1]);
      ++i;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

[[noreturn]] void bad_model(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": invalid model file (" + what + ")");
}

}  // namespace

Vocabulary::Vocabulary() {
  for (const char* s : kReservedSurfaces) add(s);
}

int Vocabulary::add(std::string surface) {
  const int id = static_cast<int>(surfaces_.size());
  ids_.emplace(surface, id);
  surfaces_.push_back(std::move(surface));
  return id;
}

Vocabulary Vocabulary::build(std::span<const CorpusRecord> corpus, int min_count) {
  if (min_count < 1) throw std::invalid_argument("vocabulary min_count must be >= 1");
  std::unordered_map<std::string, std::int64_t> counts;
  for (const CorpusRecord& record : corpus) {
    for (const std::string& t : metric_tokens(make_document(record.source))) ++counts[t];
    for (const std::string& t : metric_tokens(make_document(record.target))) ++counts[t];
  }
  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (auto& [surface, count] : counts) {
    if (count >= min_count) kept.emplace_back(surface, count);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Vocabulary vocab;
  for (auto& [surface, count] : kept) vocab.add(surface);
  return vocab;
}

int Vocabulary::id(std::string_view surface) const {
  const auto it = ids_.find(std::string(surface));
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::surface(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("token id " + std::to_string(id));
  return surfaces_[static_cast<std::size_t>(id)];
}

bool Vocabulary::contains(std::string_view surface) const {
  return ids_.count(std::string(surface)) > 0;
}

std::vector<int> encode_text(const Vocabulary& vocab, std::string_view text) {
  std::vector<int> ids;
  for (const std::string& t : metric_tokens(make_document(text))) ids.push_back(vocab.id(t));
  return ids;
}

std::string decode_text(const Vocabulary& vocab, std::span<const int> ids) {
  std::string out;
  for (const int id : ids) {
    if (Vocabulary::is_reserved(id)) continue;
    const std::string& surface = vocab.surface(id);
    if (surface == "\n") {
      out += '\n';
      continue;
    }
    if (!out.empty() && out.back() != '\n') out += ' ';
    out += surface;
  }
  return out;
}

std::vector<int> make_prompt(const Vocabulary& vocab, std::string_view source) {
  std::vector<int> ids{Vocabulary::kBos};
  for (const int id : encode_text(vocab, source)) ids.push_back(id);
  ids.push_back(Vocabulary::kSep);
  return ids;
}

std::vector<int> training_sequence(const Vocabulary& vocab, std::string_view source,
                                   std::string_view target) {
  std::vector<int> ids = make_prompt(vocab, source);
  for (const int id : encode_text(vocab, target)) ids.push_back(id);
  ids.push_back(Vocabulary::kEos);
  return ids;
}

NGramLM::NGramLM(Vocabulary vocab, int order, double discount)
    : vocab_(std::move(vocab)), order_(order), discount_(discount) {
  if (order_ < 1 || order_ > 5) throw std::invalid_argument("ngram order must be in 1..5");
  if (discount_ < 0.0 || discount_ >= 1.0) {
    throw std::invalid_argument("ngram discount must be in [0,1)");
  }
  counts_.resize(static_cast<std::size_t>(order_));
}

NGramLM NGramLM::train(std::span<const CorpusRecord> corpus, int order, double discount,
                       int min_count) {
  if (corpus.empty()) throw std::invalid_argument("train: empty corpus");
  NGramLM lm(Vocabulary::build(corpus, min_count), order, discount);
  lm.min_count_ = min_count;

  std::vector<std::vector<int>> sequences;
  sequences.reserve(corpus.size());
  for (const CorpusRecord& record : corpus) {
    sequences.push_back(training_sequence(lm.vocab_, record.source, record.target));
  }
  for (const auto& ids : sequences) lm.count_sequence(ids);
  lm.build_embeddings(sequences);
  return lm;
}

void NGramLM::count_sequence(std::span<const int> ids) {
  for (std::size_t t = 1; t < ids.size(); ++t) {
    for (int r = 0; r < order_; ++r) {
      if (static_cast<std::size_t>(r) > t) break;
      auto& cell = counts_[static_cast<std::size_t>(r)][context_key(
          ids.subspan(t - static_cast<std::size_t>(r), static_cast<std::size_t>(r)))];
      ++cell.total;
      ++cell.tokens[ids[t]];
    }
  }
}

void NGramLM::build_embeddings(std::span<const std::vector<int>> sequences) {
  const int dim = std::min(vocab_.size(), 128);
  embedding_dim_ = dim;
  embeddings_.assign(static_cast<std::size_t>(vocab_.size()),
                     std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  for (const auto& ids : sequences) {
    const auto n = static_cast<std::ptrdiff_t>(ids.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      for (std::ptrdiff_t off = -2; off <= 2; ++off) {
        if (off == 0 || i + off < 0 || i + off >= n) continue;
        const auto neighbor = static_cast<std::uint64_t>(ids[i + off]);
        const auto slot = static_cast<std::size_t>(mix64(neighbor) % static_cast<std::uint64_t>(dim));
        embeddings_[static_cast<std::size_t>(ids[i])][slot] += 1.0;
      }
    }
  }
  for (auto& row : embeddings_) {
    double norm = 0.0;
    for (const double v : row) norm += v * v;
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (double& v : row) v /= norm;
    }
  }
}

std::vector<double> NGramLM::next_distribution(std::span<const int> context) const {
  const auto V = static_cast<std::size_t>(vocab_.size());
  // Seen context levels, longest first; evaluation folds from the unigram
  // level back up, so the longest seen level dominates.
  std::vector<const ContextCounts*> chain;
  const int max_len = static_cast<int>(std::min<std::size_t>(context.size(),
                                                             static_cast<std::size_t>(order_ - 1)));
  for (int len = max_len; len >= 0; --len) {
    const auto& table = counts_[static_cast<std::size_t>(len)];
    const auto it = table.find(context_key(context.last(static_cast<std::size_t>(len))));
    if (it != table.end()) chain.push_back(&it->second);
  }

  std::vector<double> dist(V, 1.0 / static_cast<double>(V));
  for (auto level = chain.rbegin(); level != chain.rend(); ++level) {
    const ContextCounts& cc = **level;
    const double total = static_cast<double>(cc.total);
    const double lambda =
        discount_ > 0.0 ? discount_ * static_cast<double>(cc.tokens.size()) / total : 0.0;
    std::vector<double> next(V, 0.0);
    if (lambda > 0.0) {
      for (std::size_t v = 0; v < V; ++v) next[v] = lambda * dist[v];
    }
    for (const auto& [token, count] : cc.tokens) {
      next[static_cast<std::size_t>(token)] += (static_cast<double>(count) - discount_) / total;
    }
    dist = std::move(next);
  }
  return dist;
}

std::vector<std::vector<double>> NGramLM::represent(std::span<const int> context) const {
  std::vector<std::vector<double>> out;
  out.reserve(context.size());
  const std::vector<double> zeros(static_cast<std::size_t>(std::max(embedding_dim_, 1)), 0.0);
  for (const int id : context) {
    if (id >= 0 && static_cast<std::size_t>(id) < embeddings_.size()) {
      out.push_back(embeddings_[static_cast<std::size_t>(id)]);
    } else {
      out.push_back(zeros);
    }
  }
  return out;
}

void NGramLM::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << std::setprecision(17);
  out << "einfach-ngram-lm 1\n";
  out << "order " << order_ << "\n";
  out << "discount " << discount_ << "\n";
  out << "min_count " << min_count_ << "\n";
  out << "vocab " << vocab_.size() << "\n";
  for (int id = 0; id < vocab_.size(); ++id) out << escape_surface(vocab_.surface(id)) << "\n";
  for (int r = 0; r < order_; ++r) {
    const auto& table = counts_[static_cast<std::size_t>(r)];
    // sort context keys for reproducible files
    std::vector<const std::pair<const std::string, ContextCounts>*> entries;
    entries.reserve(table.size());
    for (const auto& entry : table) entries.push_back(&entry);
    std::sort(entries.begin(), entries.end(),
              [](const auto* a, const auto* b) { return a->first < b->first; });
    out << "counts " << r << " " << entries.size() << "\n";
    for (const auto* entry : entries) {
      out << entry->first << " |";
      for (const auto& [token, count] : entry->second.tokens) {
        out << " " << token << " " << count;
      }
      out << "\n";
    }
  }
  out << "embeddings " << embeddings_.size() << " " << embedding_dim_ << "\n";
  for (const auto& row : embeddings_) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i > 0 ? " " : "") << row[i];
    out << "\n";
  }
  out << "end\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

NGramLM NGramLM::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);

  std::string line;
  const auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) bad_model(path, "unexpected end of file");
    return line;
  };
  const auto expect_kv = [&](const std::string& key) -> std::string {
    next_line();
    if (line.rfind(key + " ", 0) != 0) bad_model(path, "expected \"" + key + "\"");
    return line.substr(key.size() + 1);
  };

  if (next_line() != "einfach-ngram-lm 1") bad_model(path, "unknown format or version");
  const int order = std::stoi(expect_kv("order"));
  const double discount = std::stod(expect_kv("discount"));
  const int min_count = std::stoi(expect_kv("min_count"));
  const int vocab_size = std::stoi(expect_kv("vocab"));
  if (vocab_size < 4) bad_model(path, "vocabulary too small");

  Vocabulary vocab;
  for (int id = 0; id < vocab_size; ++id) {
    const std::string surface = unescape_surface(next_line());
    if (id <= Vocabulary::kUnk) {
      if (surface != kReservedSurfaces[id]) bad_model(path, "reserved token mismatch");
    } else {
      vocab.add(surface);
    }
  }

  NGramLM lm(std::move(vocab), order, discount);
  lm.min_count_ = min_count;
  for (int r = 0; r < order; ++r) {
    std::istringstream header(expect_kv("counts"));
    int level = -1;
    std::size_t entries = 0;
    if (!(header >> level >> entries) || level != r) bad_model(path, "counts header");
    auto& table = lm.counts_[static_cast<std::size_t>(r)];
    for (std::size_t e = 0; e < entries; ++e) {
      next_line();
      const auto bar = line.find('|');
      if (bar == std::string::npos) bad_model(path, "counts line without '|'");
      std::string key = line.substr(0, bar);
      while (!key.empty() && key.back() == ' ') key.pop_back();
      ContextCounts cell;
      std::istringstream pairs(line.substr(bar + 1));
      int token = 0;
      std::int64_t count = 0;
      while (pairs >> token >> count) {
        if (token < 0 || token >= vocab_size || count <= 0) bad_model(path, "counts entry");
        cell.tokens[token] = count;
        cell.total += count;
      }
      table.emplace(std::move(key), std::move(cell));
    }
  }

  std::istringstream emb_header(expect_kv("embeddings"));
  std::size_t rows = 0;
  int dim = 0;
  if (!(emb_header >> rows >> dim) || rows != static_cast<std::size_t>(vocab_size) || dim < 0) {
    bad_model(path, "embeddings header");
  }
  lm.embedding_dim_ = dim;
  lm.embeddings_.assign(rows, std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  for (auto& row : lm.embeddings_) {
    std::istringstream values(next_line());
    for (double& v : row) {
      if (!(values >> v)) bad_model(path, "embedding row");
    }
  }
  if (next_line() != "end") bad_model(path, "missing end marker");
  return lm;
}

std::vector<double> UniformLM::next_distribution(std::span<const int>) const {
  const auto V = static_cast<std::size_t>(vocab_.size());
  return std::vector<double>(V, 1.0 / static_cast<double>(V));
}

std::vector<std::vector<double>> UniformLM::represent(std::span<const int> context) const {
  const std::size_t dim = std::min<std::size_t>(static_cast<std::size_t>(vocab_.size()), 128);
  return {context.size(), std::vector<double>(dim, 0.0)};
}

double cross_entropy(const LanguageModel& lm, std::span<const int> source,
                     std::span<const int> target) {
  if (target.empty()) throw std::invalid_argument("cross_entropy: empty target");
  std::vector<int> context{Vocabulary::kBos};
  context.insert(context.end(), source.begin(), source.end());
  context.push_back(Vocabulary::kSep);

  double total = 0.0;
  for (const int token : target) {
    const std::vector<double> dist = lm.next_distribution(context);
    const double p =
        token >= 0 && static_cast<std::size_t>(token) < dist.size() ? dist[static_cast<std::size_t>(token)] : 0.0;
    if (p <= 0.0) return std::numeric_limits<double>::infinity();
    total -= std::log(p);
    context.push_back(token);
  }
  return total / static_cast<double>(target.size());
}

}  // namespace einfach
